import math

import pytest

import xrel


def test_sizing():
    r = xrel.size_voter(16, 0.048)
    assert r["k"] == 4
    assert r["v_ub"] == pytest.approx(240.0)
    assert xrel.size_voter(8, mted=31.75)["k"] == 4
    assert xrel.compute_k(xrel.compute_mted(8, 10.0), 8) == 4
    with pytest.raises(ValueError):
        xrel.size_voter(1, 10.0)


def test_voters():
    assert xrel.voters() == ["tmr", "bit_tmr", "xrel", "idmr", "itdmr"]
    assert xrel.vote("tmr", 7, 7, 9, width=8, k=2) == 7
    assert xrel.vote("tmr", 1, 2, 3, width=8, k=2) is None
    out = xrel.vote("xrel", 0b10110011, 0b10110000, 0b01010000, width=8, k=2)
    assert out >> 2 == 0b101100


def test_benchmark_and_design():
    dfg = xrel.build_benchmark("fir8", 16)
    assert xrel.validate_dfg(dfg) == []
    assert sum(n["kind"] in ("add", "mul") for n in dfg["nodes"]) == 15
    exact = xrel.design(dfg, k=0, trials=1000)
    assert set(exact["plan"]["assignments"].values()) == {0}
    r = xrel.design(dfg, k=4, trials=5000)
    assert r["optimal"]
    assert r["predicted_v"] <= 240.0 * (1 + 1e-9)
    assert r["objective"] < exact["objective"]
    v = xrel.measure_output_variance(dfg, r["plan"], trials=20000)
    assert v <= 1.5 * 240.0


def test_metrics():
    m = xrel.metrics([10, 20, 30, 40], [10, 21, 30, 38], width=8)
    assert m["er"] == pytest.approx(0.5)
    assert m["mean_ed"] == pytest.approx(0.75)
    assert m["mse"] == pytest.approx(1.25)
    assert math.isinf(xrel.metrics([1, 2], [1, 2])["psnr"])


def test_campaign_is_deterministic():
    words = xrel.random_words(2000, 8, seed=3)
    a = xrel.run_voter_campaign(words, 8, p_f=0.05, k=4, seed=9)
    b = xrel.run_voter_campaign(words, 8, p_f=0.05, k=4, seed=9)
    assert repr(a) == repr(b)
    assert 0.0 < a["mse_ratio"] < 1.0
    assert set(a["voters"]) == set(xrel.voters())
    clean = xrel.run_voter_campaign(words, 8, p_f=0.0, k=4, seed=9, voters=["tmr"])
    assert clean["voters"]["tmr"]["er"] == 0.0
    assert xrel.inject_noise(0xAB, 8, 0.0, seed=1) == 0xAB
