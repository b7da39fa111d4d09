import dataclasses
import json
import random
from fractions import Fraction

import pytest

from qcluster.models import (
    ModelError,
    bilinear_to_painleve,
    catalog,
    make_model,
    random_positive_rationals,
)
from qcluster.seed import run_schedule
from qcluster.verify import (
    VerificationReport,
    bilinear_terms,
    check_bilinear,
    check_bilinear_with_coefficients,
    check_conservation,
    check_laurent,
    check_painleve,
    check_pedigree,
    check_reduction_correspondence,
    conserved_summary,
    periodic_initial_data,
)
from qcluster.verify import _canon
from oracles import dkdv_grid, somos4, somos5

F = Fraction
CHILDREN = [m for m in catalog() if m.pedigree is not None]


def parent_of(child, window):
    ped = child.pedigree
    return make_model(ped.parent, *ped.parent_params, window=window)


def test_seven_recorded_pedigrees():
    assert len(CHILDREN) == 7


def test_empty_trajectory_is_flagged():
    m = make_model("qPI")
    rep = check_bilinear(m, run_schedule(m.seed(), m.schedule, 0))
    assert rep.passed and rep.checked == 0 and not rep.ok
    assert rep.warnings == ["no identities were checked"]
    assert "EMPTY" in rep.to_text()


def test_all_ones_qpi_bilinear():
    m = make_model("qPI")
    rep = check_bilinear(m, run_schedule(m.seed(), m.schedule, 10))
    assert rep.ok and rep.checked == 10


def test_bilinear_terms_for_qpi():
    # x_{n+4} x_n = x_{n+2}^2 + x_{n+3} x_{n+1}
    idx, partner, out, in_ = bilinear_terms("qPI", ("x", (5,)))
    assert partner == ("x", (1,))
    assert sorted([sorted(out), sorted(in_)]) == sorted([[("x", (3,)), ("x", (3,))], [("x", (2,)), ("x", (4,))]])


def test_corrupted_trajectory_fails_with_exact_sides():
    m = make_model("qPI")
    tr = run_schedule(m.seed(), m.schedule, 6)
    x = dict(tr.x)
    x[("x", (7,))] += 1
    bad = dataclasses.replace(tr, x=x)
    rep = check_bilinear(m, bad)
    assert not rep.passed and rep.failures
    obj = rep.to_json_obj()
    assert obj["pass"] is False and obj["failures"][0]["lhs"] != obj["failures"][0]["rhs"]


def test_dkdv_window_against_grid_oracle(rng):
    m = make_model("dKdV", 1, 1, window="6x4")
    x0 = random_positive_rationals(rng, m.n)
    tr = run_schedule(m.seed(x=x0), m.schedule, 3)
    rep = check_bilinear(m, tr)
    assert rep.ok and rep.checked >= 8
    grid = dkdv_grid({L[1]: v for L, v in zip(m.labels, x0)}, 10)
    produced = [s.new_label for s in tr.steps]
    assert produced and all(tr.x[L] == grid[L[1]] for L in produced)


def test_coefficient_bilinear_all_ones():
    m = make_model("dmKdV", 1, 1)
    with pytest.raises(ModelError):
        m.seed(plain=(1,) * m.n)
    tr = run_schedule(m.seed(y=(1,) * m.n), m.schedule, 3)
    assert tr.ab and all(ab == (F(1, 2), F(1, 2)) for ab in tr.ab.values())
    assert check_bilinear_with_coefficients(m, tr).ok


def test_painleve_checks_all_parts():
    m = make_model("qPII")
    tr = run_schedule(m.seed(plain=(1,) * 5), m.schedule, 14)
    rep = check_painleve(m, tr)
    assert rep.ok
    assert {e.what for e in rep.entries} >= {"recurrence", "equation", "monitor", "split"}


def test_painleve_detects_bad_coefficients():
    m = make_model("qPI")
    tr = run_schedule(m.seed(plain=(1, 2, 3, 4)), m.schedule, 10)
    seqs = {"y": [tr.y[("y", (k,))] for k in range(10)]}
    assert check_painleve(m, seqs).ok
    seqs["y"][6] += 1
    assert not check_painleve(m, seqs).passed


def test_transformed_somos_sequences_are_painleve_solutions():
    for name, seq in (("qPI", somos4(12)), ("qPII", somos5(12))):
        y = bilinear_to_painleve(make_model(name), seq)
        rep = check_painleve(name, y, parts=("equation",))
        assert rep.ok, rep.to_text()


def test_conservation_and_summary(rng):
    m = make_model("qPIII")
    tr = run_schedule(m.seed(plain=random_positive_rationals(rng, 6)), m.schedule, 20)
    assert check_conservation(m, tr).ok
    assert set(conserved_summary(m, tr)) == {"c1^2", "c2^2", "c3^2", "c4^2"}
    m = make_model("qPI")
    tr = run_schedule(m.seed(plain=(1,) * 4), m.schedule, 30)
    assert conserved_summary(m, tr) == {"c1": "1", "c2": "1/2"}


def test_laurent_term_counts():
    m = make_model("qPI")
    rep = check_laurent(m, 4)
    assert rep.ok
    assert rep.details["x_5"] == 2 and rep.details["x_6"] == 3
    assert check_laurent(make_model("qPII"), 5).ok


@pytest.mark.parametrize("child", CHILDREN, ids=lambda m: m.name)
def test_pedigrees_reproduce_child_quivers(child):
    rep = check_pedigree(child)
    assert rep.ok, rep.to_text(verbose=True)


def test_qpvi_pedigree_permutation():
    rep = check_pedigree(make_model("qPVI"))
    assert rep.details["permutation"] == [1, 2, 5, 6, 3, 4, 7, 8]


def test_pedigree_needs_a_record():
    with pytest.raises(ModelError):
        check_pedigree(make_model("HM", 2))


@pytest.mark.parametrize("child", CHILDREN, ids=lambda m: m.name)
def test_reduction_correspondence(child):
    c = child
    window = (6, 6) if c.pedigree.parent == "HM" else (48,)
    p = parent_of(c, window)
    rep = check_reduction_correspondence(p, c, c.pedigree.vector, sweeps=2, rng=random.Random(3))
    assert rep.ok, rep.to_text(verbose=True)


def test_dkdv_reduction_matches_somos4():
    c = make_model("qPI")
    p = parent_of(c, (48,))
    xp, xc = periodic_initial_data(p, c, (2, -1))
    assert set(xp) == set(xc) == {1}
    tr = run_schedule(p.seed(x=xp), p.schedule, 8)
    rep = check_reduction_correspondence(p, c, (2, -1), sweeps=8, rng=None)
    assert rep.ok and rep.checked >= 8
    produced = {tr.x[L] for L in tr.x}
    assert set(somos4(12)) <= produced


def test_non_periodic_child_data_is_caught():
    c = make_model("dKdV", 1, 1)
    p = parent_of(c, (6, 6))
    v = (1, 0, 1)
    xp, xc = periodic_initial_data(p, c, v, random.Random(9))
    assert check_reduction_correspondence(p, c, v, rng=random.Random(9)).ok
    tp = run_schedule(p.seed(x=xp), p.schedule, 2)
    interior = next(i for i in range(c.n) if i not in c.quiver.frozen)
    bumped = tuple(val + 1 if i == interior else val for i, val in enumerate(xc))
    tc = run_schedule(c.seed(x=bumped), c.schedule, 2)
    by_class = {_canon(L, v): val for L, val in tp.x.items()}
    diffs = [s.new_label for s in tc.steps
             if tc.x[s.new_label] != by_class.get(_canon(c.pedigree.to_parent(s.new_label), v), tc.x[s.new_label])]
    assert diffs


def test_reduction_requires_matching_record():
    with pytest.raises(ModelError):
        check_reduction_correspondence(make_model("HM", 2), make_model("qPI"), (1, 0, 1))


def test_report_json_shape():
    m = make_model("qPI")
    rep = check_bilinear(m, run_schedule(m.seed(), m.schedule, 3))
    obj = json.loads(rep.to_json())
    assert {"identity", "pass", "checked", "skipped", "failures"} <= set(obj)
    assert obj["pass"] is True and obj["checked"] == 3


def test_report_entries_are_sorted():
    rep = VerificationReport("demo", "m")
    rep.add(3, 1, 1)
    rep.add(1, 1, 1)
    rep.finish()
    assert [e.index for e in rep.entries] == [1, 3]
