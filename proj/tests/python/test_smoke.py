import os
from pathlib import Path

import pytest

import ptcoord

DATA = Path(os.environ.get("PTCOORD_TEST_DATA", Path(__file__).resolve().parents[1] / "data"))


@pytest.fixture(scope="module")
def small():
    return ptcoord.Case.load(str(DATA / "small.json"))


def test_counts(small):
    c = small.counts
    assert (c["roads"], c["evcs"], c["od_pairs"]) == (5, 2, 1)
    assert (c["buses"], c["lines"], c["generators"]) == (4, 3, 1)
    assert c["paths"] > 0


def test_alpha_grid():
    g = ptcoord.alpha_grid()
    assert len(g) == 21
    assert g[0] == 0.0 and g[-1] == 1.0


def test_pre_schedule(small):
    pre = small.pre_schedule()
    assert pre["wardrop_ok"] and pre["big_m_clean"] and pre["fill_order_ok"]
    assert pre["gamma0"] > 0 and pre["eta0"] > 0
    assert len(pre["loads"]) == 2
    assert sum(pre["traffic"]["station_flow"]) == pytest.approx(3.0)


def test_sweep_accounting(small):
    res = small.sweep([0.0, 0.75])
    pre = res["pre"]
    for p in res["points"]:
        assert p["accepted"], p["note"]
        assert p["psi"] + p["h"] == pytest.approx(p["gamma"] + p["eta"])
        assert p["delta_eta"] == pytest.approx(pre["eta0"] - p["eta"])
        assert p["psi"] <= pre["eta0"] * (1 + 1e-9)
        assert p["eta_oracle"] == pytest.approx(p["eta"], rel=1e-5)
    assert ptcoord.best_ratio(res)[0] == res["alpha_star"]


def test_errors_carry_kind():
    with pytest.raises(ptcoord.PtcoordError, match="validation: evcs 2"):
        ptcoord.Case.load(str(DATA / "missing_coupling.json"))
    with pytest.raises(ptcoord.PtcoordError, match="infeasible: .*od_pair 7"):
        ptcoord.Case.load(str(DATA / "overloaded.json")).pre_schedule()


def test_export_mps(small, tmp_path):
    out = tmp_path / "model.mps"
    small.export_mps(0.2, str(out))
    text = out.read_text()
    assert text.startswith("NAME RESCHED")
    assert " BV BND " in text
    assert text.rstrip().endswith("ENDATA")
