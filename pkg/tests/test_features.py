import math

import numpy as np
import pytest

from conftest import signal_map
from oracles import o_combination, o_decay_literal, o_raw, o_single
from noreflow.errors import DegenerateLength, MissingSignal, ZeroMean, ZeroPeak, ZeroVariance
from noreflow.features import (
    COMBINATION_NAMES,
    FeatureConfig,
    decay_time,
    extract_all,
    feature_names,
    flow_features,
    peak_features,
    raw_vector,
    read_feature_csv,
    single_flow_features,
    sips_features,
    write_feature_csv,
)
from noreflow.ingest import SEQUENCE_KEYS

PRE = [0, 0.2, 0.5, 0.3]
POST = [0, 0.3, 0.8, 0.4]


def test_peak_example():
    f = peak_features(PRE, POST)
    assert f["peakHeight"] == pytest.approx(0.3, abs=1e-12)
    assert f["peakWidth"] == -1
    assert f["peakRatio"] == pytest.approx(1.6, abs=1e-12)
    assert f["peakSlope"] == pytest.approx(0.2, abs=1e-12)


def test_peak_identity():
    f = peak_features(PRE, PRE)
    assert (f["peakHeight"], f["peakWidth"], f["peakRatio"], f["peakSlope"]) == (0, 0, 1, 0)


def test_peak_zero_pre():
    with pytest.raises(ZeroPeak):
        peak_features([0, 0, 0, 0], POST)


def test_sips_example():
    f = sips_features(PRE, POST)
    assert f["meanIntensity"] == pytest.approx(0.125, abs=1e-12)
    # oracle value: population sd difference
    assert f["stdDevIntensity"] == pytest.approx(0.10586051478329045, abs=1e-12)
    assert round(f["stdDevIntensity"], 4) == 0.1059
    assert f["minIntensity"] == 0
    assert f["meanIntensityRatio"] == pytest.approx(1.5, abs=1e-12)


def test_sips_symmetric_signals_have_equal_skew():
    f = sips_features([0.1, 0.5, 0.9], [0.2, 0.3, 0.4, 0.5])
    assert f["skewness"] == pytest.approx(0.0, abs=1e-12)


def test_sips_constant_pre():
    with pytest.raises(ZeroVariance):
        sips_features([0.3, 0.3, 0.3], POST)
    with pytest.raises(ZeroMean):
        sips_features([0.0, 0.0, 0.0], POST)


def test_kurtosis_is_non_excess():
    # two-point symmetric distribution: raw fourth standardized moment = 1
    f = sips_features([0.1, 0.5, 0.9], [0.2, 0.8, 0.2, 0.8])
    assert f["kurtosis"] == pytest.approx(1.0 - 1.5, abs=1e-12)


def test_flow_example():
    f = flow_features(PRE, POST)
    assert (f["timeTo50Max"], f["timeToPeak"], f["decayTime"], f["plateauDuration"]) == (0, 0, 0, 0)
    assert f["signalCorrelation"] == pytest.approx(0.9935198139289457, abs=1e-12)


def test_flow_identity():
    f = flow_features(PRE, PRE)
    assert f["signalCorrelation"] == pytest.approx(1.0, abs=1e-12)
    assert all(f[k] == 0 for k in ("timeTo50Max", "timeToPeak", "decayTime", "plateauDuration"))


def test_flow_anticorrelated():
    pre = [0.0, 0.5, 1.0]
    post = [0.8, 0.5, 0.2]
    assert flow_features(pre, post)["signalCorrelation"] == pytest.approx(-1.0, abs=1e-12)


def test_flow_time_to_peak_is_pre_minus_post():
    f = flow_features([0.1, 0.9, 0.2, 0.1], [0.1, 0.2, 0.3, 0.9])
    assert f["timeToPeak"] == 2 - 4


def test_correlation_uses_common_prefix():
    f = flow_features([0.1, 0.5, 0.3], [0.2, 0.6, 0.4, 0.9, 0.9])
    assert f["signalCorrelation"] == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ZeroVariance):
        flow_features([0.2, 0.2, 0.2], [0.1, 0.5, 0.3])


def test_decay_time_default_and_literal():
    x = [0.1, 1.0, 0.95, 0.5, 0.05, 0.0]
    assert decay_time(np.array(x)) == 5
    assert decay_time(np.array(x), literal=True) == 3 == o_decay_literal(x)
    # never reached -> length
    assert decay_time(np.array([0.1, 1.0, 0.8, 0.7])) == 4
    cfg = FeatureConfig(decay_literal_mode=True)
    assert single_flow_features(x, cfg)["decayTime"] == 3


def test_raw_example():
    x = [0.1] * 11 + [0.6]
    out = raw_vector(x, FeatureConfig(raw_length=15, beta=0.5))
    assert out.size == 15
    np.testing.assert_array_equal(out[:12], x)
    np.testing.assert_allclose(out[12:], [0.1118, 0.0, 0.0], atol=5e-5)
    np.testing.assert_allclose(out, o_raw(x, 15, 0.5), atol=1e-12, rtol=0)


def test_raw_truncation_and_zero_tail():
    x = np.linspace(0.0, 1.0, 20)
    np.testing.assert_array_equal(raw_vector(x), x[:15])
    out = raw_vector([0.3, 0.1, 0.0])
    np.testing.assert_array_equal(out[3:], 0.0)


def test_raw_continuity_fill_starts_at_last_sample():
    out = raw_vector([0.2, 0.5], FeatureConfig(raw_fill="continuity", raw_length=6))
    assert out[2] == pytest.approx(0.5, abs=1e-12)
    assert np.all(np.diff(out[2:]) < 0) and out[-1] > 0


def test_raw_length_contract():
    with pytest.raises(DegenerateLength):
        FeatureConfig(raw_length=1)
    for n in range(1, 20):
        assert raw_vector(np.full(n, 0.4)).size == 15


def _full_signals(seed=0, n=15):
    rng = np.random.default_rng(seed)
    return signal_map({k: rng.uniform(0.05, 0.95, n) for k in SEQUENCE_KEYS})


def test_combination_count_is_thirty():
    cfg = FeatureConfig(groups=("PEAK", "SIPS", "FLOW"), mode="combination")
    vec = extract_all(_full_signals(), cfg)
    assert len(vec) == 30 and len(set(vec.names)) == 30


def test_post_only_lateral_sips_flow_count():
    cfg = FeatureConfig(groups=("SIPS", "FLOW"), mode="post_only", views=("lateral",))
    assert len(extract_all(_full_signals(), cfg)) == 9


def test_single_mode_counts_and_raw():
    cfg = FeatureConfig(groups=("PEAK", "SIPS", "FLOW", "RAW"), mode="pre_only")
    vec = extract_all(_full_signals(), cfg)
    assert len(vec) == 2 * (12 + 15)
    assert sum(".raw." in n for n in vec.names) == 30


def test_missing_signal_named():
    signals = _full_signals()
    del signals[("pre", "AP")]
    with pytest.raises(MissingSignal, match="pre/AP"):
        extract_all(signals, FeatureConfig(groups=("PEAK",), mode="combination"))


def test_values_match_oracle():
    signals = _full_signals(seed=4)
    cfg = FeatureConfig(groups=("PEAK", "SIPS", "FLOW"), mode="combination")
    vec = extract_all(signals, cfg).as_dict()
    for view in ("AP", "lateral"):
        pre = signals[("pre", view)].values.tolist()
        post = signals[("post", view)].values.tolist()
        expected = o_combination(pre, post)
        for group, names in COMBINATION_NAMES.items():
            for n in names:
                assert vec[f"{view}.comb.{group.lower()}.{n}"] == pytest.approx(expected[n], abs=1e-12)
    post_cfg = FeatureConfig(groups=("PEAK", "SIPS", "FLOW"), mode="post_only", views=("AP",))
    single = extract_all(signals, post_cfg).as_dict()
    exp = o_single(signals[("post", "AP")].values.tolist())
    for name, value in single.items():
        assert value == pytest.approx(exp[name.split(".")[-1]], abs=1e-12)


def test_names_deterministic():
    cfg = FeatureConfig(groups=("FLOW", "RAW", "PEAK"), mode="combination")
    assert feature_names(cfg) == feature_names(FeatureConfig(groups=("PEAK", "FLOW", "RAW"), mode="combination"))
    assert feature_names(cfg)[0] == "AP.comb.peak.peakHeight"
    assert feature_names(cfg)[-1] == "lateral.post.raw.f15"


def test_feature_csv_bit_exact_roundtrip(tmp_path):
    cfg = FeatureConfig(groups=("SIPS", "FLOW", "RAW"), mode="combination")
    vecs = [extract_all(_full_signals(seed=s), cfg, f"p{s}") for s in range(5)]
    path = write_feature_csv(vecs, tmp_path / "f.csv")
    back = read_feature_csv(path)
    assert [v.patient_id for v in back] == [f"p{s}" for s in range(5)]
    for a, b in zip(vecs, back):
        assert tuple(a.names) == tuple(b.names)
        assert [x.hex() for x in map(float, a.values)] == [x.hex() for x in map(float, b.values)]


def test_config_validation():
    with pytest.raises(ValueError):
        FeatureConfig(groups=())
    with pytest.raises(ValueError):
        FeatureConfig(beta=0.0)
    with pytest.raises(ValueError):
        FeatureConfig(mode="both")
    assert math.isclose(FeatureConfig().beta, 0.5)
