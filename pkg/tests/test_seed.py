import json
import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from qcluster.arith import LaurentPoly
from qcluster.models import custom_model, make_model
from qcluster.quiver import FrozenVertexError, Quiver, random_quiver
from qcluster.seed import (
    BatchAdjacencyError,
    CoefficientError,
    DepthLimitExceeded,
    Seed,
    exchange_monomials,
    extract_bilinear_coefficients,
    mutate_seed,
    mutate_seed_free,
    run_schedule,
)

F = Fraction
pos = st.fractions(min_value=F(1, 20), max_value=20)


def arrow_seed(x=(2, 3), y=(5, 7)):
    # single arrow 1 -> 2
    return Seed(Quiver.from_arrows(2, [(0, 1, 1)]), x, y)


def test_hand_computed_mutation_with_coefficients():
    s = mutate_seed(arrow_seed(), 0)
    # x1' = (x2 + y1) / ((1 + y1) x1) = (3 + 5) / (6 * 2)
    assert s.x == (F(2, 3), F(3))
    # y1' = 1/y1; the head of an outgoing arrow gets y2 (1 + 1/y1)^-1
    assert s.y == (F(1, 5), 7 / (1 + F(1, 5)))
    assert s.quiver.lam == ((0, -1), (1, 0))


def test_hand_computed_mutation_at_the_head():
    s = mutate_seed(arrow_seed(), 1)
    # x2' = (1 + y2 x1) / ((1 + y2) x2) and y1 gains (1 + y2)
    assert s.x == (F(2), F(1 + 7 * 2, 8 * 3))
    assert s.y == (F(5) * 8, F(1, 7))


def test_coefficient_free_mutation():
    s = mutate_seed_free(arrow_seed(y=None), 0)
    assert s.x == (F(3 + 1, 2), F(3))
    with pytest.raises(CoefficientError):
        mutate_seed_free(arrow_seed(), 0)
    with pytest.raises(CoefficientError):
        mutate_seed(arrow_seed(y=None), 0)


def test_bilinear_weights():
    seed = arrow_seed()
    a, b = extract_bilinear_coefficients(seed, 0)
    assert a + b == 1
    new = mutate_seed(seed, 0)
    out, in_ = exchange_monomials(seed, 0)
    assert new.x[0] * seed.x[0] == a * in_ + b * out


def test_mutation_errors():
    with pytest.raises(CoefficientError):
        mutate_seed(arrow_seed(y=(-1, 2)), 0)
    with pytest.raises(CoefficientError):
        mutate_seed(arrow_seed(y=(-1, 2)), 0, allow_nonpositive=True)
    with pytest.raises(CoefficientError):
        mutate_seed(arrow_seed(y=(-2, 2)), 0)
    assert mutate_seed(arrow_seed(y=(-2, 2)), 0, allow_nonpositive=True).y[0] == F(-1, 2)
    with pytest.raises(ZeroDivisionError):
        mutate_seed(arrow_seed(x=(0, 1)), 0)
    with pytest.raises(FrozenVertexError):
        mutate_seed(Seed(Quiver.from_arrows(2, [(0, 1, 1)], frozen=[0]), (1, 1), (1, 1)), 0)
    with pytest.raises(IndexError):
        mutate_seed(arrow_seed(), 3)
    with pytest.raises(CoefficientError):
        Seed(Quiver.empty(1), (1,), (0,))
    with pytest.raises(ValueError):
        Seed(Quiver.empty(2), (1,))


def test_symbolic_mode():
    Q = Quiver.from_arrows(2, [(0, 1, 1)])
    s = Seed.symbolic_initial(Q, ["a", "b"])
    t = mutate_seed_free(s, 0)
    a, b = (LaurentPoly.var(("a", "b"), n) for n in "ab")
    assert t.x[0] == (b + 1) * a ** -1
    with pytest.raises(TypeError):
        mutate_seed(Seed(Q, s.x, (1, 1)), 0)


@given(st.integers(0, 2 ** 31), st.data())
def test_full_seed_involution(qseed, data):
    rng = random.Random(qseed)
    n = rng.randint(2, 7)
    Q = random_quiver(rng, n)
    x = data.draw(st.tuples(*[pos] * n))
    y = data.draw(st.tuples(*[pos] * n))
    k = data.draw(st.integers(0, n - 1))
    s = Seed(Q, x, y)
    assert mutate_seed(mutate_seed(s, k), k) == s
    assert mutate_seed_free(mutate_seed_free(Seed(Q, x), k), k) == Seed(Q, x)


@given(st.integers(0, 2 ** 31), st.data())
def test_disconnected_seed_mutations_commute(qseed, data):
    rng = random.Random(qseed)
    n = rng.randint(2, 7)
    Q = random_quiver(rng, n, density=0.4)
    i, j = data.draw(st.integers(0, n - 1)), data.draw(st.integers(0, n - 1))
    if i == j or Q.lam[i][j]:
        return
    s = Seed(Q, data.draw(st.tuples(*[pos] * n)), data.draw(st.tuples(*[pos] * n)))
    assert mutate_seed(mutate_seed(s, i), j) == mutate_seed(mutate_seed(s, j), i)


def test_seed_json_roundtrip():
    s = arrow_seed()
    assert Seed.from_json_obj(json.loads(json.dumps(s.to_json_obj()))) == s
    sym = Seed.symbolic_initial(Quiver.empty(2), ["p", "q"])
    assert Seed.from_json_obj(sym.to_json_obj()) == sym


def test_arrowless_quiver_inverts_with_factor_two():
    m = custom_model(Quiver.empty(3), [[0, 1, 2]])
    tr = run_schedule(m.seed(x=(2, 3, 5)), m.schedule, 1)
    assert [s.value for s in tr.steps] == [F(2, 2), F(2, 3), F(2, 5)]


def test_batch_with_adjacent_vertices_is_rejected():
    m = custom_model(Quiver.from_arrows(2, [(0, 1, 1)]), [[0, 1]])
    with pytest.raises(BatchAdjacencyError):
        run_schedule(m.seed(), m.schedule, 1)


def test_depth_limit_applies_to_symbolic_runs_only():
    m = make_model("qPI")
    with pytest.raises(DepthLimitExceeded):
        run_schedule(m.seed(symbolic=True), m.schedule, 9)
    assert len(run_schedule(m.seed(), m.schedule, 40).steps) == 40
    with pytest.raises(ValueError):
        run_schedule(m.seed(), m.schedule, -1)


def test_qpi_seed_ledger_pattern():
    """After sweep k the vertices 1..k (mod 4) hold the renamed variables and
    the mutated vertex's coefficient is recorded under the plain label."""
    m = make_model("qPI")
    tr = run_schedule(m.seed(plain=(1, 2, 3, 4)), m.schedule, 6)
    for k, step in enumerate(tr.steps):
        assert step.vertex == k % 4
        assert step.new_label == ("x", (k + 5,))
        assert step.coef_label == ("y", (k,))
    assert [tr.y[("y", (k,))] for k in range(5)] == [1, 2, 3, 4, F(135, 16)]


def test_window_boundary_skips_are_reported():
    m = make_model("dKdV", 1, 1, window="6x4")
    tr = run_schedule(m.seed(), m.schedule, 3)
    assert tr.steps
    reasons = {why for *_, why in tr.skipped}
    assert reasons <= {"exchange partner outside window", "frozen"}
    assert "quiver row differs from exchange relation" not in reasons


def test_trajectory_exports_are_deterministic():
    m = make_model("qPIII")
    rng = random.Random(5)
    x = tuple(F(rng.randint(1, 9), rng.randint(1, 9)) for _ in range(6))
    a = run_schedule(m.seed(x=x, plain=(1, 2, 3, 4, 5, 6)), m.schedule, 4)
    b = run_schedule(m.seed(x=x, plain=(1, 2, 3, 4, 5, 6)), m.schedule, 4)
    assert a.fingerprint() == b.fingerprint()
    assert a.to_csv() == b.to_csv()
    assert a.to_csv().splitlines()[0] == "label,kind,value"
    obj = a.to_json_obj()
    assert obj["batches_run"] == 4 and "w_4" in obj["x"]
