"""Synchronous local-majority and rho-threshold dynamics on finite graphs."""

from __future__ import annotations

import csv
import enum
import io
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .graph import Graph, QuotientGraph

DEFAULT_CAP = 10_000


class DynamicsError(ValueError):
    """A rule could not be applied. ``round`` is set when raised from a run."""

    round: int | None = None


class RhoTieError(DynamicsError):
    def __init__(self, vertex: str, white: int, black: int, rho: Fraction):
        super().__init__(f"rho tie at {vertex!r}: w={white}, b={black}, rho={rho}")
        self.vertex, self.white, self.black = vertex, white, black


class IsolatedVertexError(DynamicsError):
    pass


class UndecidedError(RuntimeError):
    """The trajectory hit its round cap before reaching all-white or a cycle."""


class TiePolicy(enum.Enum):
    RETAIN = "retain"
    WHITE = "white"
    BLACK = "black"


@dataclass(frozen=True)
class Majority:
    policy: TiePolicy = TiePolicy.RETAIN

    def __str__(self) -> str:
        return f"majority:{self.policy.value}"


@dataclass(frozen=True)
class Rho:
    rho: Fraction

    def __post_init__(self):
        object.__setattr__(self, "rho", Fraction(self.rho))
        if self.rho <= 1:
            raise ValueError(f"rho must exceed 1, got {self.rho}")

    def __str__(self) -> str:
        return f"rho:{self.rho.numerator}/{self.rho.denominator}"


Rule = Union[Majority, Rho]

ALL_MAJORITY = tuple(Majority(p) for p in TiePolicy)


def parse_rule(spec: str) -> Rule:
    """``majority:retain|white|black`` or ``rho:<p>/<q>``."""
    kind, _, arg = spec.strip().partition(":")
    kind = kind.lower()
    if kind == "majority":
        try:
            return Majority(TiePolicy((arg or "retain").lower()))
        except ValueError:
            raise ValueError(f"unknown tie policy {arg!r}") from None
    if kind == "rho":
        try:
            value = Fraction(arg)
        except (ValueError, ZeroDivisionError):
            raise ValueError(f"bad rho value {arg!r}") from None
        return Rho(value)
    raise ValueError(f"unknown rule {spec!r}")


def decide(rule: Rule, vertex: str, white: int, black: int, was_white: bool) -> bool:
    """Next color of one vertex (True = white) from its neighbor counts."""
    if isinstance(rule, Rho):
        if white == 0 and black == 0:
            raise IsolatedVertexError(f"isolated vertex {vertex!r} under the rho rule")
        p, q = rule.rho.numerator, rule.rho.denominator
        lhs, rhs = white * q, p * black
        if lhs == rhs:
            raise RhoTieError(vertex, white, black, rule.rho)
        return lhs > rhs
    if white != black:
        return white > black
    if rule.policy is TiePolicy.RETAIN:
        return was_white
    return rule.policy is TiePolicy.WHITE


def neighbor_counts(g: Graph, white: frozenset[str], v: str) -> tuple[int, int]:
    nbrs = g.neighbors(v)
    w = len(nbrs & white)
    return w, len(nbrs) - w


def step(g: Graph, white: Iterable[str], rule: Rule) -> frozenset[str]:
    white = frozenset(white)
    if not white <= g.vertices:
        raise DynamicsError("coloring names vertices outside the graph")
    nxt = []
    for v in g.vertices:
        w, b = neighbor_counts(g, white, v)
        if decide(rule, v, w, b, v in white):
            nxt.append(v)
    return frozenset(nxt)


def tied_vertices(g: Graph, white: Iterable[str]) -> list[str]:
    """Vertices seeing equally many white and black neighbors."""
    white = frozenset(white)
    out = []
    for v in g.vertices:
        w, b = neighbor_counts(g, white, v)
        if w == b:
            out.append(v)
    return sorted(out)


# ---------------------------------------------------------------------------
# Trajectories

@dataclass(frozen=True)
class AllWhite:
    round: int

    def __str__(self) -> str:
        return f"ALLWHITE {self.round}"


@dataclass(frozen=True)
class Cycle:
    start: int
    period: int

    def __str__(self) -> str:
        return f"CYCLE {self.start} {self.period}"


@dataclass(frozen=True)
class CapReached:
    cap: int

    def __str__(self) -> str:
        return "CAP"


Terminal = Union[AllWhite, Cycle, CapReached]


@dataclass(frozen=True)
class Trajectory:
    """Recorded rounds plus how the run ended.

    For ``AllWhite(m)`` the rounds are ``0..m``. For ``Cycle(s, p)`` they are
    ``0..s+p`` with ``rounds[s] == rounds[s+p]``.
    """

    vertices: frozenset[str]
    rounds: tuple[frozenset[str], ...]
    terminal: Terminal
    # set only when the all-white round is not a fixed point
    cycle: tuple[int, int] | None = None

    def __len__(self) -> int:
        return len(self.rounds)

    @property
    def decided(self) -> bool:
        return not isinstance(self.terminal, CapReached)

    def tail(self) -> tuple[int, int]:
        """(start, period) of the eventual periodic regime."""
        if self.cycle is not None:
            return self.cycle
        t = self.terminal
        if isinstance(t, AllWhite):
            return t.round, 1
        if isinstance(t, Cycle):
            return t.start, t.period
        raise UndecidedError("trajectory reached its cap; the tail is unknown")

    def white_at(self, r: int) -> frozenset[str]:
        """White set at any round, extrapolated through the terminal regime."""
        if r < 0:
            raise IndexError(r)
        if r < len(self.rounds):
            return self.rounds[r]
        start, period = self.tail()
        return self.rounds[start + (r - start) % period]


def run(g: Graph, w0: Iterable[str], rule: Rule, cap: int = DEFAULT_CAP) -> Trajectory:
    """Iterate ``step`` until all-white, a repeated state, or ``cap`` rounds.

    Reaching all-white ends the run when all-white is a fixed point, which is
    always the case unless a tie policy can flip an isolated vertex; then the
    run continues until the state repeats so the tail stays known.
    """
    if cap < 1:
        raise ValueError(f"cap must be >= 1, got {cap}")
    current = frozenset(w0)
    if not current <= g.vertices:
        raise DynamicsError("seed names vertices outside the graph")
    everything = g.vertices
    rounds = [current]
    seen = {current: 0}
    first_white = 0 if current == everything else None

    def advance(r: int) -> frozenset[str]:
        try:
            return step(g, rounds[-1], rule)
        except DynamicsError as exc:
            exc.round = r
            raise

    r = 0
    while True:
        if first_white is None and r >= cap:
            return Trajectory(everything, tuple(rounds), CapReached(cap))
        nxt = advance(r)
        if r == first_white and nxt == everything:
            return Trajectory(everything, tuple(rounds), AllWhite(first_white))
        r += 1
        rounds.append(nxt)
        if nxt in seen:
            s = seen[nxt]
            if first_white is not None:
                return Trajectory(everything, tuple(rounds), AllWhite(first_white), (s, r - s))
            return Trajectory(everything, tuple(rounds), Cycle(s, r - s))
        seen[nxt] = r
        if nxt == everything:
            first_white = r


def is_dynamo(g: Graph, w0: Iterable[str], rule: Rule, cap: int = DEFAULT_CAP) -> tuple[bool, int | None]:
    """(True, r) if the seed whitens the graph at round r, (False, None) on a cycle."""
    t = run(g, w0, rule, cap)
    if isinstance(t.terminal, AllWhite):
        return True, t.terminal.round
    if isinstance(t.terminal, CapReached):
        raise UndecidedError(f"undecided at cap {cap}")
    return False, None


def dominates(t: Trajectory, i: int, j: int) -> bool:
    """Round j dominates round i when W_i is a subset of W_j."""
    return t.white_at(i) <= t.white_at(j)


def _white_along(t: Trajectory, v: str, r: int, stride: int) -> bool:
    """Is v white at r, r+stride, r+2*stride, ... forever?"""
    start, period = t.tail()
    while r < start:
        if v not in t.rounds[r]:
            return False
        r += stride
    # the progression wraps the cycle after at most `period` terms
    return all(v in t.white_at(r + stride * i) for i in range(period))


def _first_tail_round(t: Trajectory, v: str, stride: int) -> int | None:
    start, period = t.tail()
    for r in range(start + period):
        if _white_along(t, v, r, stride):
            return r
    return None


def conquered_at(t: Trajectory, v: str) -> int | None:
    """Least r with v white at every round from r on."""
    return _first_tail_round(t, v, 1)


def blinks_at(t: Trajectory, v: str) -> int | None:
    """Least r with v white at rounds r, r+2, r+4, ..."""
    return _first_tail_round(t, v, 2)


# ---------------------------------------------------------------------------
# Class-level dynamics on a quotient graph

def _class_counts(qg: QuotientGraph, white: frozenset[str], v: str) -> tuple[tuple[int, int], tuple[int, int]]:
    """((white_const, white_per_n), (black_const, black_per_n)) for class v."""
    wa = wb = ba = bb = 0
    scale_bulk = v in qg.anchors
    for u in qg.neighbors(v):
        per_n = scale_bulk and u in qg.bulk
        if u in white:
            if per_n:
                wb += 1
            else:
                wa += 1
        elif per_n:
            bb += 1
        else:
            ba += 1
    return (wa, wb), (ba, bb)


def quotient_step(qg: QuotientGraph, white: Iterable[str], rule: Rule, n: int) -> frozenset[str]:
    """One round on the expansion at ``n``, computed on classes.

    Anchors weight bulk-class neighbors by ``n``; a bulk copy sees each
    neighboring class once.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    white = frozenset(white)
    if not white <= qg.classes:
        raise DynamicsError("coloring names unknown classes")
    nxt = []
    for v in qg.classes:
        (wa, wb), (ba, bb) = _class_counts(qg, white, v)
        if decide(rule, v, wa + n * wb, ba + n * bb, v in white):
            nxt.append(v)
    return frozenset(nxt)


@dataclass(frozen=True)
class Uniform:
    rounds: tuple[frozenset[str], ...]


@dataclass(frozen=True)
class DependsOnN:
    vertex: str
    round: int
    witnesses: tuple[int, int]


def _outcome(rule: Majority, diff: int, was_white: bool) -> bool:
    if diff:
        return diff > 0
    if rule.policy is TiePolicy.RETAIN:
        return was_white
    return rule.policy is TiePolicy.WHITE


def uniform_over_n(qg: QuotientGraph, c0: Iterable[str], rule: Majority, rounds: int) -> Uniform | DependsOnN:
    """Decide whether ``rounds`` rounds from ``c0`` evolve identically for every n >= 1.

    Each anchor's white-minus-black count is affine in n, so its outcome is
    monotone in n and comparing n = 1 against the large-n limit suffices.
    """
    if not isinstance(rule, Majority):
        raise ValueError("uniform_over_n needs a majority rule")
    if rounds < 1:
        raise ValueError(f"rounds must be >= 1, got {rounds}")
    current = frozenset(c0)
    history = [current]
    for r in range(rounds):
        nxt = []
        for v in sorted(qg.classes):
            (wa, wb), (ba, bb) = _class_counts(qg, current, v)
            alpha, beta = wa - ba, wb - bb
            was = v in current
            at_one = _outcome(rule, alpha + beta, was)
            limit = _outcome(rule, beta if beta else alpha, was)
            if at_one != limit:
                m = 2
                while _outcome(rule, alpha + beta * m, was) == at_one:
                    m += 1
                return DependsOnN(v, r, (1, m))
            if at_one:
                nxt.append(v)
        current = frozenset(nxt)
        history.append(current)
    return Uniform(tuple(history))


# ---------------------------------------------------------------------------
# CSV trajectory format

def trajectory_rows(t: Trajectory, columns: Sequence[str] | None = None, upto: int | None = None):
    cols = list(columns) if columns is not None else sorted(t.vertices)
    last = len(t.rounds) - 1 if upto is None else upto
    for r in range(last + 1):
        w = t.white_at(r)
        yield r, [1 if c in w else 0 for c in cols]


def dump_trajectory_csv(t: Trajectory, columns: Sequence[str] | None = None, upto: int | None = None) -> str:
    cols = list(columns) if columns is not None else sorted(t.vertices)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["round", *cols])
    for r, bits in trajectory_rows(t, cols, upto):
        writer.writerow([r, *bits])
    return buf.getvalue()


def load_trajectory_csv(text: str) -> tuple[list[str], list[frozenset[str]]]:
    """Parse a trajectory CSV into (columns, white set per round)."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ValueError("empty trajectory file") from None
    if not header or header[0] != "round":
        raise ValueError("trajectory header must start with 'round'")
    cols = header[1:]
    out = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise ValueError(f"line {lineno}: expected {len(header)} cells, got {len(row)}")
        if int(row[0]) != len(out):
            raise ValueError(f"line {lineno}: rounds must be consecutive from 0")
        bits = row[1:]
        if any(b not in ("0", "1") for b in bits):
            raise ValueError(f"line {lineno}: cells must be 0 or 1")
        out.append(frozenset(c for c, b in zip(cols, bits) if b == "1"))
    return cols, out
