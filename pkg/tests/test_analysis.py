import dataclasses
from fractions import Fraction

import pytest

import oracle
from conftest import cycle4, k3, path3, random_graph, random_subset
from pollgame.analysis import (
    CONQUEST_ORDER,
    EvolutionTable,
    bundled_table,
    check_bounds,
    check_table_conformance,
    compare_with_table,
    corollary2_violations,
    growth_factor,
    hat_seed,
    lemma3_violations,
    load_table,
    min_dynamo_search,
    no_tie_certificate,
    observation1_violations,
    potential_trace,
    table_self_check,
)
from pollgame.dynamics import ALL_MAJORITY, AllWhite, Majority, Rho, RhoTieError, is_dynamo, run
from pollgame.graph import J_INVENTORY, Graph, GraphError, hat

RETAIN = Majority()


# --- evolution table ------------------------------------------------------

def test_bundled_table_shape():
    t = bundled_table()
    assert len(t.rows) == 22
    assert len(t.columns) == 44
    assert set(t.columns) == set(J_INVENTORY) - {"x0", "x1", "x2"}


def test_bundled_table_spot_values():
    t = bundled_table()
    # rows as printed: round 3 w0..w9 = 1100000000, round 10 g01 = 11
    assert [t.value(3, f"w{i}") for i in range(10)] == [1, 1] + [0] * 8
    assert t.value(10, "g0") == t.value(10, "g1") == 1
    assert t.value(19, "b0") == 0 and t.value(20, "b0") == 1


def test_table_self_check_passes():
    rep = table_self_check(bundled_table())
    assert rep.passed, rep.format()


def test_table_conquest_rounds():
    t = bundled_table()
    assert t.conquest_round("q") == 2
    assert t.conquest_round("c0") == 3
    assert t.conquest_round("a0") == 19
    assert t.conquest_round("b1") == 20


def test_table_tamper_detected():
    t = bundled_table()
    rows = [list(r) for r in t.rows]
    rows[2][t.columns.index("w5")] = 0
    bad = EvolutionTable(t.columns, tuple(map(tuple, rows)))
    failed = {c.name for c in table_self_check(bad).failures()}
    assert "row 2 dominates row 0" in failed


def test_table_order_inversion_detected():
    t = bundled_table()
    rows = [list(r) for r in t.rows]
    j = t.columns.index("q")
    rows[2][j] = rows[3][j] = 0  # q now conquered at 4, after c0 at 3
    failed = {c.name for c in table_self_check(EvolutionTable(t.columns, tuple(map(tuple, rows)))).failures()}
    assert "conquest order respected" in failed


def test_table_validation():
    t = bundled_table()
    with pytest.raises(ValueError):
        EvolutionTable(t.columns, t.rows[:-1])
    with pytest.raises(ValueError):
        EvolutionTable(t.columns, t.rows[:-1] + ((2,) * 44,))
    with pytest.raises(ValueError):
        load_table("r,a\n0,1\n")


def test_conquest_order_covers_inventory():
    assert sorted(CONQUEST_ORDER) == sorted(J_INVENTORY)


def test_replay_self_test():
    t = bundled_table()
    rows = [t.white(r) for r in range(22)]
    assert compare_with_table(rows, t, 1) == []
    rows[5] = rows[5] - {"c3"}
    [m] = compare_with_table(rows, t, 1)
    assert (m.column, m.round, m.expected, m.got) == ("c3", 5, 1, "0")


def _chain_candidate():
    names = list(J_INVENTORY)
    return Graph(names, list(zip(names, names[1:])))


def test_conformance_reports_first_disagreement():
    rep = check_table_conformance(_chain_candidate())
    assert not rep.passed
    m = rep.first_mismatch
    assert m is not None and m.n == 1
    # earliest mismatch in (n, round, column order)
    assert all((x.n, x.round) >= (m.n, m.round) for x in rep.mismatches)
    text = rep.format()
    assert f"column {m.column} round {m.round} n=1" in text
    assert "19+27n" in text
    assert rep.vertex_counts[2] == {"actual": 19 + 28 * 2, "formula": 19 + 28 * 2, "printed": 19 + 27 * 2}
    assert rep.seed_size == 18


def test_conformance_missing_inventory():
    with pytest.raises(GraphError, match="inventory"):
        check_table_conformance(Graph([], [("a0", "b0")]))


# --- trajectory properties ------------------------------------------------

def test_observation1_and_corollary2(rng):
    for _ in range(100):
        g = random_graph(rng, n_max=12)
        t = run(g, random_subset(rng, g.vertices), RETAIN)
        assert observation1_violations(t) == []
        assert corollary2_violations(t) == []


def test_lemma3_on_blinking_trajectories(rng):
    checked = 0
    for _ in range(400):
        g = random_graph(rng, n_max=10)
        t = run(g, random_subset(rng, g.vertices, 0.6), RETAIN)
        hyp, bad = lemma3_violations(t, g)
        if hyp:
            checked += 1
            assert bad == []
    assert checked > 20


def test_lemma3_hypothesis_fails_on_swap():
    t = run(cycle4(), {"v0", "v2"}, RETAIN)
    # v0 blinks at 0 and therefore at 2: the hypothesis holds, yet nothing is conquered
    hyp, bad = lemma3_violations(t, cycle4())
    assert hyp and bad == []
    t = run(k3(), {"a"}, RETAIN)
    assert lemma3_violations(t, k3()) == (False, [])


# --- potentials and bounds ------------------------------------------------

def test_potential_all_white():
    g = k3()
    tr = potential_trace(run(g, g.vertices, RETAIN), g)
    assert tr.T[0] == tr.S[0] == g.vertices
    assert tr.s[0] == 3 and tr.boundary[0] == 0
    assert tr.d[0] == 6


def test_potential_path():
    g = path3()
    tr = potential_trace(run(g, {"a", "b"}, RETAIN), g)
    assert tr.T[0] == tr.S[0] == {"a", "b"}
    assert tr.boundary[0] == 1
    assert tr.s[0] == 3
    assert tr.S[1] == g.vertices  # extrapolated round m+1


def test_potential_sets_monotone(rng):
    for _ in range(100):
        g = random_graph(rng, n_max=10)
        tr = potential_trace(run(g, random_subset(rng, g.vertices), RETAIN), g)
        assert all(a <= b for a, b in zip(tr.S, tr.S[1:]))
        assert all(x >= 0 for x in tr.s + tr.d)


def test_potential_needs_two_rounds():
    t = run(cycle4(), {"v0", "v2"}, RETAIN, cap=1)
    assert len(potential_trace(t, cycle4()).rounds) == 1


def test_check_bounds_star():
    g = Graph([], [("c", f"l{i}") for i in range(4)])
    rule = Rho(Fraction(7, 2))
    t = run(g, {f"l{i}" for i in range(4)}, rule)
    # oracle: leaves flip to black, center to white, then they swap forever
    order, pos, nbrs = oracle.index(g.vertices, [tuple(e) for e in g.edges])
    assert oracle.reaches_all_white(nbrs, sum(1 << pos[f"l{i}"] for i in range(4)), rho=rule.rho)[0] is False
    rep = check_bounds(potential_trace(t, g), rule, t.terminal)
    assert rep.passed, rep.format()
    assert "n < k^2" not in {c.name for c in rep.checks}


def test_check_bounds_dynamo_includes_size_bound():
    g = Graph([], [("c", f"l{i}") for i in range(4)])
    rule = Rho(Fraction(7, 2))
    t = run(g, g.vertices, rule)
    rep = check_bounds(potential_trace(t, g), rule, t.terminal)
    names = {c.name for c in rep.checks}
    assert {"n < k^2", "e < k^2 (2rho/(rho-1))^m"} <= names
    assert rep.passed


def test_check_bounds_rejects_majority():
    g = path3()
    t = run(g, {"a"}, RETAIN)
    with pytest.raises(ValueError):
        check_bounds(potential_trace(t, g), RETAIN, t.terminal)


def test_growth_factor_exact():
    assert growth_factor(Fraction(3, 2)) == 6
    assert growth_factor(Fraction(7, 2)) == Fraction(14, 5)


def test_check_bounds_detects_violation():
    g = Graph([], [("a", "b"), ("b", "c")])
    tr = potential_trace(run(g, g.vertices, Rho(Fraction(7, 2))), g)
    fake = dataclasses.replace(tr, rounds=(1, 2), s=(10, 11), d=(1, 5))
    rep = check_bounds(fake, Rho(Fraction(7, 2)), AllWhite(0), k=3)
    failed = {c.name for c in rep.failures()}
    assert {"s_1 < k^2", "s_{r+1} <= s_r", "d_{r+1} < (2rho/(rho-1)) d_r"} <= failed


def test_bounds_random_rho_small(rng):
    checked = 0
    for rho in (Fraction(7, 2), Fraction(3, 2)):
        rule = Rho(rho)
        for _ in range(80):
            g = random_graph(rng, n_max=10, min_degree=1)
            w0 = random_subset(rng, g.vertices, 0.6) or {sorted(g.vertices)[0]}
            try:
                t = run(g, w0, rule)
            except RhoTieError:
                continue
            rep = check_bounds(potential_trace(t, g), rule, t.terminal)
            assert rep.passed, rep.format()
            checked += 1
    assert checked > 60


# --- tie-free certificate -------------------------------------------------

def test_no_tie_hat(rng):
    for _ in range(20):
        g = random_graph(rng, n_max=8)
        h = hat(g)
        rep = no_tie_certificate(h, [hat_seed(random_subset(rng, g.vertices)) for _ in range(3)])
        assert rep.passed and rep.status == "PASS", rep.format()


def test_no_tie_path_fails():
    rep = no_tie_certificate(path3(), [{"a"}])
    assert rep.even_degree == ["b"]
    assert rep.ties[0][2:] == (0, "b")
    assert rep.status == "FAIL"
    assert "vertex b ties at round 0" in rep.format()


def test_hat_transfer_small():
    for g in (path3(), k3(), cycle4()):
        res = min_dynamo_search(g, RETAIN)
        h = hat(g)
        for rule in ALL_MAJORITY:
            assert is_dynamo(h, hat_seed(res.seed), rule)[0]


# --- exhaustive search ----------------------------------------------------

@pytest.mark.parametrize(
    "g, k, seed",
    [(k3(), 2, ("a", "b")), (cycle4(), 3, ("v0", "v1", "v2")), (path3(), 2, ("a", "b"))],
)
def test_search_fixtures(g, k, seed):
    res = min_dynamo_search(g, RETAIN)
    assert (res.k, res.seed) == (k, seed)
    assert oracle.min_dynamo(g.vertices, [tuple(e) for e in g.edges]) == (k, list(seed))


def test_search_kmax_none():
    assert min_dynamo_search(cycle4(), RETAIN, k_max=2) is None


def test_search_limit():
    g = Graph([f"v{i}" for i in range(25)])
    with pytest.raises(ValueError, match="limit"):
        min_dynamo_search(g, RETAIN)
    with pytest.raises(ValueError):
        min_dynamo_search(path3(), RETAIN, k_max=4)


def test_search_matches_oracle(rng):
    for _ in range(40):
        g = random_graph(rng, n_max=8)
        res = min_dynamo_search(g, RETAIN)
        expected = min(
            (sorted(s) for s in oracle.enumerate_all_dynamos(g.vertices, [tuple(e) for e in g.edges])),
            key=lambda s: (len(s), s),
        )
        assert list(res.seed) == expected


def test_search_parallel_is_deterministic(rng):
    for _ in range(3):
        g = random_graph(rng, n_min=8, n_max=10)
        assert min_dynamo_search(g, RETAIN, workers=2, chunk_size=7) == min_dynamo_search(g, RETAIN)
