import random
from fractions import Fraction

import pytest

from qcluster.arith import QSurd
from qcluster.models import (
    PAINLEVE,
    MissingLabel,
    ModelError,
    bilinear_to_painleve,
    catalog,
    coefficient_sequences,
    conserved_quantities,
    even_odd_split,
    make_model,
    painleve_constants,
    painleve_rhs,
    plain_to_initial_coefficients,
    proof_monitors,
    random_positive_rationals,
)
from qcluster.quiver import is_mutation_periodic
from qcluster.seed import mutate_seed, run_schedule
from oracles import qpi_coefficients, somos4, somos5

F = Fraction


def coeff_run(name, plain, sweeps, x=None):
    m = make_model(name)
    return m, run_schedule(m.seed(x=x, plain=plain), m.schedule, sweeps)


def test_catalog_lines():
    lines = [m.catalog_line() for m in catalog()]
    assert len(lines) >= 9
    assert "qPVI (8 vertices, batch (1,2,3,4), pedigree: dmKdV(1,1) / (2,-2))" in lines
    names = {m.family for m in catalog()}
    assert names == {"qPI", "qPII", "qPIII", "qPVI", "dKdV", "HM", "dmKdV", "dToda"}


def test_painleve_models_shapes():
    qpi = make_model("qPI")
    assert qpi.n == 4 and qpi.schedule.batches == ((0,), (1,), (2,), (3,))
    qpvi = make_model("qPVI")
    assert qpvi.schedule.batches == ((0, 1, 2, 3), (4, 5, 6, 7))
    assert qpvi.period == ((0, 1, 2, 3), (4, 5, 6, 7, 3, 2, 1, 0))


@pytest.mark.parametrize("name", list(PAINLEVE))
def test_painleve_quivers_are_mutation_periodic(name):
    m = make_model(name)
    batch, nu = m.period
    assert is_mutation_periodic(m.quiver, batch, nu)


def test_make_model_errors():
    with pytest.raises(ModelError):
        make_model("nope")
    with pytest.raises(ModelError):
        make_model("dKdV", 1, 2)
    with pytest.raises(ModelError):
        make_model("HM", 0)
    with pytest.raises(ModelError):
        make_model("dKdV", 1, 1, window="axb")
    with pytest.raises(ModelError):
        make_model("HM", 2, window=(4,))
    with pytest.raises(ModelError):
        make_model("dToda", window=0)


def test_window_string_is_multiplied_out_for_chains():
    m = make_model("dKdV", 1, 1, window="6x4")
    assert m.n == 24 and m.window == (6, 4)


def test_single_site_window_has_empty_schedule():
    m = make_model("dToda", window=1)
    assert m.quiver.frozen == {0}
    assert m.schedule.batches == ()
    assert run_schedule(m.seed(), m.schedule, 3).steps == []


def test_model_json_export():
    obj = make_model("qPIII").to_json_obj()
    assert obj["pedigree"] == {"parent": "dmKdV(2,1)", "vector": [2, -1]}
    assert obj["period"]["i"] == [1, 2]


def test_somos4_ledger_against_oracle():
    m = make_model("qPI")
    tr = run_schedule(m.seed(), m.schedule, 26)
    seq = tr.x_sequence()
    got = [seq[k] for k in sorted(seq)]
    assert got == somos4(30)
    assert got[4:12] == [2, 3, 7, 23, 59, 314, 1529, 8209]
    assert all(v.denominator == 1 for v in got)


def test_somos5_ledger_against_oracle():
    m = make_model("qPII")
    tr = run_schedule(m.seed(), m.schedule, 25)
    seq = tr.x_sequence()
    got = [seq[k] for k in sorted(seq)]
    assert got == somos5(30)
    assert got[5:13] == [2, 3, 5, 11, 37, 83, 274, 1217]


def test_qpi_first_exchange_with_unit_coefficients():
    m = make_model("qPI")
    s = mutate_seed(m.seed(y=(1, 1, 1, 1)), 0)
    assert s.x[0] == 1 and s.y[0] == 1


def test_qpi_all_ones_is_a_fixed_point():
    m, tr = coeff_run("qPI", (1, 1, 1, 1), 8)
    assert all(tr.x[("x", (k,))] == 1 for k in range(5, 13))
    assert all(tr.y[("y", (k,))] == 1 for k in range(4, 8))


def test_plain_coefficients_are_values_at_first_mutation():
    m = make_model("qPI")
    tr = run_schedule(m.seed(plain=(1, 2, 3, 4)), m.schedule, 4)
    assert [s.coef_value for s in tr.steps] == [1, 2, 3, 4]
    assert plain_to_initial_coefficients(m, (1, 2, 3, 4)) == m.seed(plain=(1, 2, 3, 4)).y


def test_qpi_coefficients_follow_the_recurrence_oracle(rng):
    y0 = random_positive_rationals(rng, 4)
    _, tr = coeff_run("qPI", y0, 16)
    seq = coefficient_sequences(tr)["y"]
    assert [seq[k] for k in range(16)] == qpi_coefficients(y0, 16)


def test_qpi_conserved_quantities_example():
    m, tr = coeff_run("qPI", (1, 2, 3, 4), 6)
    assert tr.y[("y", (4,))] == F(135, 16)
    for n in (0, 1):
        cq = conserved_quantities(m, tr, n)
        assert cq["c1"] == F(9, 2) and cq["c2"] == F(8, 9)
        assert proof_monitors(m, tr, n)["u"] == F(9, 2)
    with pytest.raises(MissingLabel):
        conserved_quantities(m, tr, 5)


def test_all_ones_conserved_values():
    m, tr = coeff_run("qPI", (1,) * 4, 10)
    assert conserved_quantities(m, tr, 0).values == {"c1": 1, "c2": F(1, 2)}
    m, tr = coeff_run("qPIII", (1,) * 6, 12)
    assert conserved_quantities(m, tr, 0).values == {"c1^2": 1, "c2^2": 1, "c3^2": 1, "c4^2": 1}
    for n in range(3):
        assert proof_monitors(m, tr, n)["t"] == 1
    m, tr = coeff_run("qPII", (1,) * 5, 14)
    cq = conserved_quantities(m, tr, 0).values
    assert cq["c1^2"] == 1 and cq["c3^2"] == 1 and cq["c2^2"] == F(1, 4)


def test_painleve_rhs_examples():
    m, tr = coeff_run("qPI", (1, 2, 3, 4), 6)
    k = painleve_constants(m, conserved_quantities(m, tr, 0))
    _, rhs, squared = painleve_rhs(m, 1, tr, k)["y"]
    assert not squared and rhs == 3 == tr.y[("y", (2,))] * tr.y[("y", (0,))]
    m, tr = coeff_run("qPVI", (1,) * 8, 10)
    k = painleve_constants(m, conserved_quantities(m, tr, 0))
    for _, rhs, squared in painleve_rhs(m, 1, tr, k).values():
        assert squared and rhs == 1


def test_odd_powers_of_c1_live_in_a_quadratic_field(rng):
    _, tr = coeff_run("qPII", random_positive_rationals(rng, 5), 14)
    cq = conserved_quantities("qPII", tr, 0)
    c1 = painleve_constants("qPII", cq)["c1"]
    assert isinstance(c1, QSurd) and c1 * c1 == cq["c1^2"] and c1.sign() > 0


def test_bilinear_to_painleve_examples():
    qpi = make_model("qPI")
    y = bilinear_to_painleve(qpi, somos4(8))
    # y_n = x_n x_{n+2} / x_{n+1}^2 on 1,1,1,1,2,3,7,...
    assert y[:5] == [1, 1, 2, F(3, 4), F(14, 9)]
    assert bilinear_to_painleve(qpi, [1] * 6) == [1] * 4
    y = bilinear_to_painleve(make_model("qPII"), somos5(9))
    assert y[:3] == [1, 1, 2]
    with pytest.raises(ZeroDivisionError):
        bilinear_to_painleve(qpi, [1, 0, 1, 1])
    with pytest.raises(ModelError):
        bilinear_to_painleve(make_model("qPIII"), [1] * 6)


def test_even_odd_split():
    assert even_odd_split("abcd") == (["a", "c"], ["b", "d"])
    assert even_odd_split([1] * 6) == ([1] * 3, [1] * 3)


def test_positivity_is_preserved():
    rng = random.Random(11)
    for name in PAINLEVE:
        m = make_model(name)
        seed = m.seed(x=random_positive_rationals(rng, m.n), plain=random_positive_rationals(rng, m.n))
        tr = run_schedule(seed, m.schedule, 12)
        assert all(v > 0 for v in tr.x.values()) and all(v > 0 for v in tr.y.values())
