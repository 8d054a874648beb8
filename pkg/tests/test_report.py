import json
import math

import pytest

from oscbound import bounds as B
from oscbound.errors import StageError
from oscbound.report import (DocumentError, MissingSectionError, dumps_report, emit_plot_data,
                             parse_document, run_verify, sample_document, sample_document_data)


@pytest.fixture(scope="module")
def sample_report():
    return run_verify(sample_document())


@pytest.fixture(scope="module")
def sample_text(sample_report):
    return dumps_report(sample_report)


def doc_with(**changes):
    data = sample_document_data()
    data.update(changes)
    return parse_document(data)


def test_sample_theorem4_case_2a_holds(sample_report):
    v = [x for x in sample_report["verdicts"] if x["check"] == "theorem4_k_lt_r_a"]
    assert len(v) == 1 and v[0]["holds"] and v[0]["margin"] > 0
    assert v[0]["measured"] == sample_report["oracle"]["abs_I"]


def test_every_verdict_cites_values(sample_report):
    for v in sample_report["verdicts"]:
        if v["status"] != "vacuous":
            assert v["margin"] == v["bound"] - v["measured"]


def test_report_contents(sample_report):
    c = sample_report["computed"]
    assert c["G_levels"][:2] == [pytest.approx(math.sqrt(2)), pytest.approx(1.0)]
    assert c["L"] == pytest.approx(2 * math.sqrt(2))
    assert c["K0"] >= 1 and c["vol_omega"] == 1.0
    assert sample_report["flags"]["corrected_recursion"] is True
    assert "workers" not in sample_report["inputs"]["sampling"]


def test_byte_identical_reruns(sample_text):
    assert dumps_report(run_verify(sample_document())) == sample_text
    assert dumps_report(run_verify(sample_document(), workers=4)) == sample_text


def test_bounds_recompute_bit_for_bit(sample_text):
    rep = json.loads(sample_text)
    cfg = B.ConstantsConfig.from_dict(rep["inputs"]["constants"])
    fns = {"theorem1_surface": B.theorem1_bound, "theorem2_surface": B.theorem2_bound,
           "theorem3_surface": B.theorem3_bound}
    checked = 0
    for v in rep["verdicts"]:
        if v["check"] in fns:
            assert fns[v["check"]](B.BoundInputs.from_dict(v["inputs"]), cfg) == v["bound"]
            checked += 1
        elif v["check"].startswith("theorem4_") and v["status"] != "vacuous":
            got = B.theorem4_bound(v["case"], B.BoundInputs.from_dict(v["inputs"]),
                                   B.ConstantsConfig.from_dict(v["constants"]))
            assert got == v["bound"]
            checked += 1
    assert checked >= 49


def test_serializer_format():
    text = dumps_report({"a": 0.1, "b": 3.0, "c": float("nan"), "d": complex(1, -2), "e": [1, True, None]})
    assert '"a": 0.10000000000000001' in text
    assert '"b": 3.0' in text and '"c": NaN' in text
    back = json.loads(text)
    assert back["d"] == {"re": 1.0, "im": -2.0} and back["e"] == [1, True, None]


def test_plot_data(sample_report):
    decay = emit_plot_data(sample_report, "decay").splitlines()
    assert decay[0] == "t,abs_I,bound"
    assert len(decay) - 1 == len(sample_report["decay"]["t"])
    prof = emit_plot_data(sample_report, "profile").splitlines()
    assert prof[0] == "u,V,phi,piece"
    pieces = [int(r.split(",")[3]) for r in prof[1:]]
    assert pieces == sorted(pieces) and len(pieces) == 512
    meas = emit_plot_data(sample_report, "measure").splitlines()
    assert meas[0] == "H,mu_est,thm1,thm2,thm3" and len(meas) == 17
    with pytest.raises(MissingSectionError):
        emit_plot_data({"schema": "oscbound/1-report"}, "decay")
    with pytest.raises(ValueError):
        emit_plot_data(sample_report, "histogram")


def test_k1_theorem4_request_is_stage_error():
    doc = doc_with(k=1, theorem4_cases=["k_lt_r_a"], sampling={"samples": 20000, "grid_points": 64,
                                                               "resolution": 64})
    with pytest.raises(StageError, match="k-1 division undefined") as err:
        run_verify(doc)
    assert err.value.stage == "bounds"
    assert "bounds" in err.value.partial["missing"]


@pytest.mark.parametrize("change", [
    {"schema": "oscbound/0"},
    {"phase": "x0*x2"},
    {"n": 3},
    {"domain": {"lower": [0, 0], "upper": [0, 1]}},
    {"sampling": {"bogus": 1}},
    {"theorem4_cases": ["k_huge"]},
    {"constants": {"K": -1}},
])
def test_document_errors(change):
    with pytest.raises(DocumentError):
        doc_with(**change)


def test_phase_records_accepted():
    doc = doc_with(phase=[{"coeff": "1", "exps": [1, 1]}])
    assert doc.phase == sample_document().phase
