import math

import pytest

import pcslink


def test_distribution_entropy():
    d = pcslink.mb_for_entropy(5.0)
    assert d.entropy_bits == pytest.approx(5.0, abs=1e-9)
    assert len(d.probabilities) == 64
    assert sum(abs(c) ** 2 * p for c, p in zip(d.constellation, d.probabilities)) == pytest.approx(1.0)
    assert pcslink.mb_distribution(0.0).entropy_bits == pytest.approx(6.0)


def test_ccdm_round_trip():
    counts = [2, 1, 1]
    k = pcslink.ccdm_input_length(counts)
    assert k == 3
    for v in range(2**k):
        bits = [(v >> (k - 1 - i)) & 1 for i in range(k)]
        seq = pcslink.ccdm_encode(bits, counts)
        assert sorted(seq) == [0, 0, 1, 2]
        assert pcslink.ccdm_decode(seq, counts) == bits
    with pytest.raises(pcslink.CcdmError):
        pcslink.ccdm_decode([2, 1, 0, 0], counts)


def test_composition_sums_to_block():
    counts = pcslink.quantize_composition(pcslink.mb_for_entropy(4.5), 960)
    assert sum(counts) == 960


def test_metrics():
    assert pcslink.snr_from_evm(100.0) == 0.0
    assert pcslink.snr_from_evm(10.0) == pytest.approx(20.0)
    assert pcslink.ngmi(5.4, 6.0) == pytest.approx(0.9)
    r = pcslink.simulate_awgn(pcslink.mb_for_entropy(5.0), 15.0, n=20000, seed=2)
    assert r["snr_db"] == pytest.approx(15.0, abs=0.3)
    assert 0.9 < r["ngmi"] <= 1.0


def test_rate_law():
    assert pcslink.net_bit_rate(12) == 600e9
    assert pcslink.net_bit_rate(8) == 400e9
    assert pcslink.air_for_rate(500e9) == 10.0


def test_predictor():
    assert pcslink.predict_snr([20.0, 18.0, 16.0]) == 16.0
    assert pcslink.predict_snr([11.0], n=1, margin_db=0.5) == 10.5


def test_table_and_campaign(tmp_path):
    table = pcslink.build_air_table(grid="0:30:2", mc_symbols=5000, seed=3)
    assert table.air_values == sorted(table.air_values)
    assert table.lookup(30.0) == 12.0
    path = str(tmp_path / "lut.json")
    table.save(path)
    assert pcslink.AirTable.load(path).air_values == table.air_values
    assert pcslink.select_rate(table, 30.0) == (6.0, 12.0, 600e9)

    trace = pcslink.gen_trace(600.0)
    assert len(trace) == 24
    records, summary = pcslink.run_campaign(trace, table, mc_symbols=5000, seed=4)
    assert len(records) == 3 * len(trace)
    assert {r["scheme"] for r in records} == {"fixed400", "fixed500", "adaptive"}
    assert all(r["in_service"] == (r["ngmi"] >= 0.9) for r in records)
    assert "schemes" in summary


def test_waveform_block():
    d = pcslink.mb_for_entropy(5.0)
    r = pcslink.realize_link(d, 20.0, mode="waveform", symbols=20000, seed=5,
                             impairments={"freq_offset_hz": 300e6, "pol_rotation_rad": 0.3})
    assert math.isfinite(r["snr_db"])
    assert r["snr_db"] > 17.0
    with pytest.raises(KeyError):
        pcslink.realize_link(d, 20.0, mode="waveform", symbols=20000, impairments={"bogus": 1.0})
