"""Dynamo search, evolution-table checks, potential monitors and bound checks."""

from __future__ import annotations

import csv
import io
from collections.abc import Iterable, Mapping, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from itertools import combinations, islice

from .dynamics import (
    ALL_MAJORITY,
    DEFAULT_CAP,
    AllWhite,
    Majority,
    Rho,
    Rule,
    Terminal,
    Trajectory,
    Uniform,
    blinks_at,
    conquered_at,
    dominates,
    is_dynamo,
    run,
    tied_vertices,
    uniform_over_n,
)
from .graph import (
    J_ANCHOR_SEED,
    J_INVENTORY,
    Graph,
    GraphError,
    copy_name,
    duplicate,
    j_duplicated,
    prime,
    quotient,
)

SEARCH_LIMIT = 24

# Order in which the vertices of J_n become permanently white.
CONQUEST_ORDER = (
    "x0 x1 x2 q w0 w1 y0 c0 e0 d0 y1 c1 c2 e1 w2 w3 y2 c3 e2 e3 d1 y3 y4 "
    "c4 c5 g0 g1 f w4 w5 c6 d2 c7 c8 w6 w7 c9 d3 c10 c11 w8 w9 "
    "a0 a1 a2 b0 b1"
).split()


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}" + (f": {self.detail}" if self.detail else "")


@dataclass
class Report:
    title: str
    checks: list[Check] = field(default_factory=list)

    def add(self, name: str, passed: bool, detail: str = "") -> Check:
        c = Check(name, bool(passed), detail)
        self.checks.append(c)
        return c

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def status(self) -> str:
        return "PASS" if self.passed else "FAIL"

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def format(self) -> str:
        lines = [f"# {self.title}"] + [c.line() for c in self.checks] + [self.status]
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["check", "status", "detail"])
        for c in self.checks:
            w.writerow([c.name, "PASS" if c.passed else "FAIL", c.detail])
        return buf.getvalue()


# ---------------------------------------------------------------------------
# Evolution table

@dataclass(frozen=True)
class EvolutionTable:
    columns: tuple[str, ...]
    rows: tuple[tuple[int, ...], ...]

    N_ROWS = 22

    def __post_init__(self):
        if len(self.rows) != self.N_ROWS:
            raise ValueError(f"evolution table needs {self.N_ROWS} rows, got {len(self.rows)}")
        for r, row in enumerate(self.rows):
            if len(row) != len(self.columns):
                raise ValueError(f"row {r}: width {len(row)} != {len(self.columns)}")
            if any(x not in (0, 1) for x in row):
                raise ValueError(f"row {r}: values must be 0 or 1")

    def white(self, r: int) -> frozenset[str]:
        return frozenset(c for c, x in zip(self.columns, self.rows[r]) if x)

    def value(self, r: int, column: str) -> int:
        return self.rows[r][self.columns.index(column)]

    def conquest_round(self, column: str) -> int | None:
        """Least r from which the column stays 1 through the last row."""
        j = self.columns.index(column)
        if self.rows[-1][j] != 1:
            return None
        r = len(self.rows) - 1
        while r > 0 and self.rows[r - 1][j] == 1:
            r -= 1
        return r


def load_table(text: str) -> EvolutionTable:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if header[0] != "round":
        raise ValueError("table header must start with 'round'")
    rows = []
    for row in reader:
        if not row:
            continue
        if int(row[0]) != len(rows):
            raise ValueError("table rounds must be consecutive from 0")
        rows.append(tuple(int(x) for x in row[1:]))
    return EvolutionTable(tuple(header[1:]), tuple(rows))


def bundled_table() -> EvolutionTable:
    text = resources.files("pollgame").joinpath("data/evolution_table.csv").read_text(encoding="utf-8")
    return load_table(text)


def table_self_check(table: EvolutionTable) -> Report:
    """Row-level facts of the J_n evolution table, independent of any graph."""
    rep = Report("evolution table self-check")
    w = table.white
    last = len(table.rows) - 1
    everything = frozenset(table.columns)
    rep.add("row 2 dominates row 0", w(0) <= w(2))
    rep.add(
        "rows 20-21 all white and equal",
        w(20) == w(21) == everything,
        f"row20 black={sorted(everything - w(20))} row21 black={sorted(everything - w(21))}",
    )
    bad = [k for k in range(last - 1) if not w(k) <= w(k + 2)]
    rep.add("round k+2 dominates round k", not bad, f"violations at k={bad}" if bad else "")

    conquest = {c: table.conquest_round(c) for c in table.columns}
    listed = [c for c in CONQUEST_ORDER if c in conquest]
    unlisted = sorted(set(table.columns) - set(listed))
    inversions = [
        (a, conquest[a], b, conquest[b])
        for a, b in zip(listed, listed[1:])
        if conquest[a] is None or conquest[b] is None or conquest[a] > conquest[b]
    ]
    rep.add(
        "conquest order respected",
        not inversions and not unlisted,
        f"inversions={inversions} unlisted={unlisted}" if inversions or unlisted else
        " ".join(f"{c}@{conquest[c]}" for c in listed),
    )
    early = {c: conquest[c] for c in ("q", "w0", "w1", "y0")}
    rep.add("q, w0, w1, y0 conquered at round 2", all(v == 2 for v in early.values()), str(early))
    tail = {c: conquest[c] for c in ("a0", "a1", "a2", "b0", "b1")}
    rep.add(
        "a0-a2, b0-b1 conquered last, at rounds 19-20",
        all(v in (19, 20) for v in tail.values()) and max(tail.values()) == max(conquest.values()),
        str(tail),
    )
    non_blinking = [
        c for c in table.columns
        if not any(all(table.value(r, c) for r in range(start, last + 1, 2)) for start in (1, 2))
    ]
    rep.add("every column blinks at round 1 or 2", not non_blinking, str(non_blinking) if non_blinking else "")
    return rep


# ---------------------------------------------------------------------------
# Conformance of a candidate J against the table

@dataclass(frozen=True)
class Mismatch:
    column: str
    round: int
    n: int
    expected: int
    got: str

    def __str__(self) -> str:
        return f"column {self.column} round {self.round} n={self.n}: expected {self.expected}, got {self.got}"


@dataclass
class ConformanceReport:
    mismatches: list[Mismatch]
    x_violations: list[tuple[str, int, int]]
    uniform: object
    dynamo_rounds: dict[int, int | None]
    vertex_counts: dict[int, dict[str, int]]
    seed_size: int

    @property
    def first_mismatch(self) -> Mismatch | None:
        return self.mismatches[0] if self.mismatches else None

    @property
    def passed(self) -> bool:
        return (
            not self.mismatches
            and not self.x_violations
            and isinstance(self.uniform, Uniform)
            and self.seed_size == 18
            and all(r == 20 for r in self.dynamo_rounds.values())
        )

    @property
    def status(self) -> str:
        return "PASS" if self.passed else "FAIL"

    def format(self) -> str:
        lines = ["# J candidate conformance"]
        if self.first_mismatch:
            lines.append(f"FAIL table agreement: first disagreement {self.first_mismatch}")
            lines.append(f"  ({len(self.mismatches)} disagreeing cells in total)")
        else:
            lines.append("PASS table agreement on rounds 0..21")
        lines.append(
            ("FAIL" if self.x_violations else "PASS") + " x0-x2 white at every round"
            + (f": first black at {self.x_violations[0]}" if self.x_violations else "")
        )
        if isinstance(self.uniform, Uniform):
            lines.append("PASS evolution independent of n")
        else:
            u = self.uniform
            lines.append(f"FAIL evolution depends on n: vertex {u.vertex} round {u.round} n={u.witnesses}")
        for n, r in sorted(self.dynamo_rounds.items()):
            ok = r == 20 and self.seed_size == 18
            lines.append(f"{'PASS' if ok else 'FAIL'} dynamo of size {self.seed_size} at n={n}: all white at round {r}")
        for n, counts in sorted(self.vertex_counts.items()):
            lines.append(
                f"INFO |V(J_{n})| = {counts['actual']} (|U|+|D|n = {counts['formula']}, 19+27n = {counts['printed']})"
            )
        lines.append(self.status)
        return "\n".join(lines) + "\n"


def compare_with_table(
    class_rounds: Sequence[Mapping[str, str] | frozenset[str]],
    table: EvolutionTable,
    n: int,
) -> list[Mismatch]:
    """Compare per-round column values against the table.

    Each entry of ``class_rounds`` is either a white set over column names or a
    mapping column -> "0" | "1" | "mixed".
    """
    out = []
    for r, row in enumerate(table.rows):
        observed = class_rounds[r]
        for c, expected in zip(table.columns, row):
            if isinstance(observed, Mapping):
                got = observed.get(c, "absent")
            else:
                got = "1" if c in observed else "0"
            if got != str(expected):
                out.append(Mismatch(c, r, n, expected, got))
    return out


def _column_values(white: frozenset[str], columns: Iterable[str], bulk: frozenset[str], n: int) -> dict[str, str]:
    vals = {}
    for c in columns:
        if c in bulk:
            hits = sum(copy_name(c, i) in white for i in range(1, n + 1))
            vals[c] = "1" if hits == n else "0" if hits == 0 else "mixed"
        else:
            vals[c] = "1" if c in white else "0"
    return vals


def check_table_conformance(
    candidate: Graph,
    table: EvolutionTable | None = None,
    ns: Sequence[int] = (1, 2, 3),
    cap: int = DEFAULT_CAP,
) -> ConformanceReport:
    """Run J_n from the 18-vertex seed and compare every round with the table."""
    table = table or bundled_table()
    missing = [v for v in J_INVENTORY if v not in candidate.vertices]
    if missing:
        raise GraphError(f"candidate lacks inventory vertices: {missing}")
    seed = frozenset(J_ANCHOR_SEED)
    dup = j_duplicated(candidate)
    anchors = candidate.vertices - dup
    rule = Majority()
    mismatches: list[Mismatch] = []
    x_bad: list[tuple[str, int, int]] = []
    dynamo_rounds: dict[int, int | None] = {}
    counts: dict[int, dict[str, int]] = {}
    for n in ns:
        jn = duplicate(candidate, dup, n)
        t = run(jn, seed, rule, cap)
        rows = [_column_values(t.white_at(r), table.columns, dup, n) for r in range(len(table.rows))]
        mismatches.extend(compare_with_table(rows, table, n))
        for r in range(len(table.rows)):
            w = t.white_at(r)
            x_bad.extend((x, r, n) for x in ("x0", "x1", "x2") if x not in w)
        dynamo_rounds[n] = t.terminal.round if isinstance(t.terminal, AllWhite) else None
        counts[n] = {
            "actual": len(jn),
            "formula": len(anchors) + n * len(dup),
            "printed": 19 + 27 * n,
        }
    mismatches.sort(key=lambda m: (m.n, m.round, table.columns.index(m.column)))
    uniform = uniform_over_n(quotient(candidate, dup), seed, rule, len(table.rows) - 1)
    return ConformanceReport(mismatches, x_bad, uniform, dynamo_rounds, counts, len(seed))


# ---------------------------------------------------------------------------
# Trajectory-level properties

def observation1_violations(t: Trajectory) -> list[tuple[int, int]]:
    """Pairs (i, j) where round j dominates round i but j+1 fails to dominate i+1."""
    last = len(t.rounds) - 1
    bad = []
    for i in range(last):
        for j in range(last):
            if dominates(t, i, j) and not dominates(t, i + 1, j + 1):
                bad.append((i, j))
    return bad


def corollary2_violations(t: Trajectory) -> list[int]:
    """Rounds k with W_k not inside W_{k+2}, given W_0 inside W_2 (else empty)."""
    if not dominates(t, 0, 2):
        return []
    return [k for k in range(len(t.rounds)) if not dominates(t, k, k + 2)]


def lemma3_violations(t: Trajectory, g: Graph) -> tuple[bool, list[tuple[str, int]]]:
    """Check the half-conquered-neighborhood rule.

    Returns (hypothesis holds, violations). The hypothesis is that every
    vertex blinks at round 1 or 2; a violation is (v, r) where at least half
    of N(v) is conquered by round r yet v is not conquered by round r + 2.
    """
    blink = {v: blinks_at(t, v) for v in g.vertices}
    if any(b is None or b > 2 for b in blink.values()):
        return False, []
    conq = {v: conquered_at(t, v) for v in g.vertices}
    start, period = t.tail()
    bad = []
    for r in range(start + period + 1):
        for v in sorted(g.vertices):
            done = sum(1 for u in g.neighbors(v) if conq[u] is not None and conq[u] <= r)
            if 2 * done >= g.degree(v) and (conq[v] is None or conq[v] > r + 2):
                bad.append((v, r))
    return True, bad


# ---------------------------------------------------------------------------
# Potential functions of the rho-model

@dataclass(frozen=True)
class PotentialTrace:
    """Per-round stably-white sets and potentials, for rounds 1..R."""

    rounds: tuple[int, ...]
    T: tuple[frozenset[str], ...]
    S: tuple[frozenset[str], ...]
    boundary: tuple[int, ...]
    s: tuple[int, ...]
    d: tuple[int, ...]
    num_vertices: int
    num_edges: int
    seed_size: int

    def at(self, r: int) -> dict:
        i = r - 1
        return {"T": self.T[i], "S": self.S[i], "boundary": self.boundary[i], "s": self.s[i], "d": self.d[i]}


def potential_trace(t: Trajectory, g: Graph) -> PotentialTrace:
    last = len(t.rounds) - 1
    if isinstance(t.terminal, AllWhite):
        last = max(last, t.terminal.round + 1)
    if last < 1:
        raise ValueError("trajectory needs at least two rounds")
    Ts, Ss, bs, ss, ds = [], [], [], [], []
    stable: frozenset[str] = frozenset()
    for r in range(1, last + 1):
        T = t.white_at(r) & t.white_at(r - 1)
        stable = stable | T
        cut = sum(1 for e in g.edges if len(e & stable) == 1)
        Ts.append(T)
        Ss.append(stable)
        bs.append(cut)
        ss.append(len(stable) + cut)
        ds.append(sum(g.degree(v) for v in stable))
    return PotentialTrace(
        tuple(range(1, last + 1)), tuple(Ts), tuple(Ss), tuple(bs), tuple(ss), tuple(ds),
        len(g), len(g.edges), len(t.rounds[0]),
    )


def growth_factor(rho: Fraction) -> Fraction:
    return 2 * rho / (rho - 1)


def check_bounds(trace: PotentialTrace, rule: Rule, outcome: Terminal, k: int | None = None) -> Report:
    """Exact-arithmetic checks of the rho-model size, edge and potential bounds."""
    if not isinstance(rule, Rho):
        raise ValueError("bound checks need a rho rule")
    k = trace.seed_size if k is None else k
    if k < 1:
        raise ValueError("bound checks need a non-empty seed")
    rho = rule.rho
    factor = growth_factor(rho)
    rep = Report(f"rho-model bounds (rho={rho}, k={k})")
    k2 = k * k

    rep.add("s_1 < k^2", trace.s[0] < k2, f"s_1={trace.s[0]} k^2={k2}")
    if rho > 3:
        drops = [(r, trace.s[i], trace.s[i + 1]) for i, r in enumerate(trace.rounds[:-1]) if trace.s[i + 1] > trace.s[i]]
        rep.add("s_{r+1} <= s_r", not drops, f"increases {drops}" if drops else f"s={list(trace.s)}")
    rep.add("d_1 < 2k^2", trace.d[0] < 2 * k2, f"d_1={trace.d[0]} 2k^2={2 * k2}")
    growth = []
    for i, r in enumerate(trace.rounds[:-1]):
        cur, nxt = trace.d[i], trace.d[i + 1]
        ok = nxt < factor * cur if cur else nxt == 0
        if not ok:
            growth.append((r, cur, nxt))
    rep.add(
        "d_{r+1} < (2rho/(rho-1)) d_r",
        not growth,
        f"violations {growth}" if growth else f"factor={factor} d={list(trace.d)}",
    )
    if isinstance(outcome, AllWhite):
        m = outcome.round
        if rho > 3:
            rep.add("n < k^2", trace.num_vertices < k2, f"n={trace.num_vertices} k^2={k2}")
        limit = k2 * factor**m
        rep.add("e < k^2 (2rho/(rho-1))^m", trace.num_edges < limit, f"e={trace.num_edges} m={m} bound={limit}")
    return rep


# ---------------------------------------------------------------------------
# Tie-free certificate

def hat_seed(seed: Iterable[str]) -> frozenset[str]:
    seed = frozenset(seed)
    return seed | {prime(v) for v in seed}


@dataclass
class NoTieReport:
    even_degree: list[str]
    ties: list[tuple[int, str, int, str]]          # (seed index, policy, round, vertex)
    policy_mismatch: list[int]
    undecided: list[int]

    @property
    def passed(self) -> bool:
        return not (self.even_degree or self.ties or self.policy_mismatch)

    @property
    def status(self) -> str:
        if not self.passed:
            return "FAIL"
        return "UNDECIDED" if self.undecided else "PASS"

    def format(self) -> str:
        lines = ["# tie-free certificate"]
        lines.append(
            ("FAIL" if self.even_degree else "PASS") + " all degrees odd"
            + (f": even at {self.even_degree}" if self.even_degree else "")
        )
        if self.ties:
            i, pol, r, v = self.ties[0]
            lines.append(f"FAIL no ties: seed {i} policy {pol}: vertex {v} ties at round {r}")
        else:
            lines.append("PASS no ties")
        lines.append(
            ("FAIL" if self.policy_mismatch else "PASS") + " trajectories identical across tie policies"
            + (f": seeds {self.policy_mismatch}" if self.policy_mismatch else "")
        )
        if self.undecided:
            lines.append(f"INFO seeds reaching the cap: {self.undecided}")
        lines.append(self.status)
        return "\n".join(lines) + "\n"


def no_tie_certificate(g: Graph, seeds: Sequence[Iterable[str]], cap: int = DEFAULT_CAP) -> NoTieReport:
    even = [v for v in g.sorted_vertices() if g.degree(v) % 2 == 0]
    ties, mismatch, undecided = [], [], []
    for i, seed in enumerate(seeds):
        trajectories = []
        for rule in ALL_MAJORITY:
            t = run(g, seed, rule, cap)
            trajectories.append(t)
            if not t.decided:
                undecided.append(i)
            for r, w in enumerate(t.rounds):
                tv = tied_vertices(g, w)
                if tv:
                    ties.append((i, rule.policy.value, r, tv[0]))
                    break
        if any(t.rounds != trajectories[0].rounds or t.terminal != trajectories[0].terminal for t in trajectories):
            mismatch.append(i)
    return NoTieReport(even, ties, mismatch, sorted(set(undecided)))


# ---------------------------------------------------------------------------
# Exhaustive minimum-dynamo search

@dataclass(frozen=True)
class SearchResult:
    k: int
    seed: tuple[str, ...]
    round: int


def _scan(g: Graph, rule: Rule, cap: int, subsets: list[tuple[str, ...]]):
    for s in subsets:
        ok, r = is_dynamo(g, s, rule, cap)
        if ok:
            return s, r
    return None


def _chunks(it, size):
    it = iter(it)
    while chunk := list(islice(it, size)):
        yield chunk


def min_dynamo_search(
    g: Graph,
    rule: Rule,
    k_max: int | None = None,
    cap: int = DEFAULT_CAP,
    limit: int = SEARCH_LIMIT,
    workers: int = 1,
    chunk_size: int = 2048,
) -> SearchResult | None:
    """Smallest dynamo, scanning subsets by size and then lexicographically.

    With ``workers > 1`` each size is split into chunks scanned in parallel;
    the earliest chunk with a hit wins, so the answer matches the serial scan.
    """
    if len(g) > limit:
        raise ValueError(f"graph has {len(g)} vertices; exhaustive search limit is {limit}")
    k_max = len(g) if k_max is None else k_max
    if not 0 <= k_max <= len(g):
        raise ValueError(f"k_max must be within 0..{len(g)}")
    order = g.sorted_vertices()
    pool = ProcessPoolExecutor(workers) if workers > 1 else None
    try:
        for k in range(k_max + 1):
            subsets = combinations(order, k)
            if pool is None:
                hit = _scan(g, rule, cap, list(subsets))
            else:
                hit = None
                chunks = _chunks(subsets, chunk_size)
                while hit is None:
                    batch = list(islice(chunks, workers))
                    if not batch:
                        break
                    for res in pool.map(_scan, *zip(*[(g, rule, cap, c) for c in batch])):
                        if res is not None:
                            hit = res
                            break
            if hit is not None:
                return SearchResult(k, hit[0], hit[1])
    finally:
        if pool is not None:
            pool.shutdown()
    return None
