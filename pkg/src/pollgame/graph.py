"""Finite simple graphs, edge-list I/O and the duplication / hat / chain constructions."""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from pathlib import Path


class GraphError(ValueError):
    """Raised for malformed graph input or an invalid construction request."""


def _edge(u: str, v: str) -> frozenset[str]:
    return frozenset((u, v))


class Graph:
    """Immutable simple undirected graph on string-named vertices."""

    __slots__ = ("_vertices", "_edges", "_adj")

    def __init__(self, vertices: Iterable[str] = (), edges: Iterable[tuple[str, str]] = ()):
        verts = set(vertices)
        adj: dict[str, set[str]] = {}
        edge_set: set[frozenset[str]] = set()
        for u, v in edges:
            if u == v:
                raise GraphError(f"self-loop at {u!r}")
            verts.add(u)
            verts.add(v)
            edge_set.add(_edge(u, v))
        for v in verts:
            _check_name(v)
            adj[v] = set()
        for e in edge_set:
            u, v = tuple(e)
            adj[u].add(v)
            adj[v].add(u)
        self._vertices = frozenset(verts)
        self._edges = frozenset(edge_set)
        self._adj = {v: frozenset(ns) for v, ns in adj.items()}

    @property
    def vertices(self) -> frozenset[str]:
        return self._vertices

    @property
    def edges(self) -> frozenset[frozenset[str]]:
        return self._edges

    def neighbors(self, v: str) -> frozenset[str]:
        return self._adj[v]

    def degree(self, v: str) -> int:
        return len(self._adj[v])

    def has_edge(self, u: str, v: str) -> bool:
        return v in self._adj.get(u, ())

    def __len__(self) -> int:
        return len(self._vertices)

    def __contains__(self, v: object) -> bool:
        return v in self._vertices

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self._vertices == other._vertices and self._edges == other._edges

    def __hash__(self) -> int:
        return hash((self._vertices, self._edges))

    def __repr__(self) -> str:
        return f"Graph(|V|={len(self._vertices)}, |E|={len(self._edges)})"

    def sorted_vertices(self) -> list[str]:
        return sorted(self._vertices)

    def sorted_edges(self) -> list[tuple[str, str]]:
        return sorted(tuple(sorted(e)) for e in self._edges)

    def relabel(self, mapping: Mapping[str, str]) -> Graph:
        f = lambda v: mapping.get(v, v)  # noqa: E731
        image = {f(v) for v in self._vertices}
        if len(image) != len(self._vertices):
            raise GraphError("relabeling is not injective")
        return Graph(image, ((f(u), f(v)) for u, v in self.sorted_edges()))

    def subgraph_without(self, removed: Iterable[str]) -> Graph:
        gone = set(removed)
        return Graph(
            self._vertices - gone,
            ((u, v) for u, v in self.sorted_edges() if u not in gone and v not in gone),
        )


def _check_name(v: str) -> None:
    if not isinstance(v, str) or not v or any(ch.isspace() for ch in v):
        raise GraphError(f"invalid vertex name {v!r}")


# ---------------------------------------------------------------------------
# Text formats

_ISOLATED_PRAGMA = "#! vertex"


def _content_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            yield lineno, line, True
        else:
            yield lineno, line, False


def load_graph(text: str) -> Graph:
    """Parse an edge-list document.

    One edge ``u v`` per line; ``#`` starts a comment line. A comment of the
    form ``#! vertex NAME`` declares an isolated vertex, which lets
    :func:`dump_graph` round-trip graphs with degree-0 vertices.
    """
    vertices: set[str] = set()
    edges: list[tuple[str, str]] = []
    for lineno, line, is_comment in _content_lines(text):
        if is_comment:
            if line.startswith(_ISOLATED_PRAGMA):
                toks = line[len(_ISOLATED_PRAGMA):].split()
                if len(toks) != 1:
                    raise GraphError(f"line {lineno}: malformed vertex pragma")
                vertices.add(toks[0])
            continue
        toks = line.split()
        if len(toks) != 2:
            raise GraphError(f"line {lineno}: expected two tokens, got {len(toks)}")
        u, v = toks
        if u == v:
            raise GraphError(f"line {lineno}: self-loop at {u!r}")
        edges.append((u, v))
    return Graph(vertices, edges)


def dump_graph(g: Graph) -> str:
    touched = {v for e in g.edges for v in e}
    out = [f"{_ISOLATED_PRAGMA} {v}" for v in g.sorted_vertices() if v not in touched]
    out.extend(f"{u} {v}" for u, v in g.sorted_edges())
    return "\n".join(out) + ("\n" if out else "")


def read_graph(path: str | Path) -> Graph:
    return load_graph(Path(path).read_text(encoding="utf-8"))


def load_vertex_set(text: str) -> list[str]:
    """Parse a vertex-set document: one token per line, ``#`` comments.

    Order of first appearance is kept; duplicates are dropped.
    """
    seen: dict[str, None] = {}
    for lineno, line, is_comment in _content_lines(text):
        if is_comment:
            continue
        toks = line.split()
        if len(toks) != 1:
            raise GraphError(f"line {lineno}: expected one token, got {len(toks)}")
        seen.setdefault(toks[0], None)
    return list(seen)


def dump_vertex_set(vertices: Iterable[str]) -> str:
    vs = sorted(vertices)
    return "\n".join(vs) + ("\n" if vs else "")


def read_vertex_set(path: str | Path) -> list[str]:
    return load_vertex_set(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# Duplication and its quotient

def copy_name(v: str, i: int) -> str:
    return f"{v}@{i}"


def _split_classes(g: Graph, d_set: Iterable[str]) -> tuple[frozenset[str], frozenset[str]]:
    dup = frozenset(d_set)
    missing = dup - g.vertices
    if missing:
        raise GraphError(f"duplication set has vertices not in the graph: {sorted(missing)}")
    return g.vertices - dup, dup


def duplicate(g: Graph, d_set: Iterable[str], n: int) -> Graph:
    """Blow up every vertex of ``d_set`` into ``n`` copies ``v@1 .. v@n``.

    U-U edges are kept, a U-D edge reaches all copies, and a D-D edge joins
    copies with the same index only.
    """
    if n < 1:
        raise GraphError(f"n must be >= 1, got {n}")
    anchors, bulk = _split_classes(g, d_set)
    vertices = set(anchors)
    for v in bulk:
        for i in range(1, n + 1):
            vertices.add(copy_name(v, i))
    if len(vertices) != len(anchors) + n * len(bulk):
        raise GraphError("copy names collide with existing vertex names")
    edges: list[tuple[str, str]] = []
    for u, v in g.sorted_edges():
        if u in anchors and v in anchors:
            edges.append((u, v))
        elif u in bulk and v in bulk:
            edges.extend((copy_name(u, i), copy_name(v, i)) for i in range(1, n + 1))
        else:
            a, b = (u, v) if u in anchors else (v, u)
            edges.extend((a, copy_name(b, i)) for i in range(1, n + 1))
    return Graph(vertices, edges)


@dataclass(frozen=True)
class QuotientGraph:
    """Class-level view of a duplicated graph.

    Anchor classes have multiplicity 1, bulk classes multiplicity ``n``.
    """

    anchors: frozenset[str]
    bulk: frozenset[str]
    edges: frozenset[frozenset[str]]
    _adj: dict[str, frozenset[str]] = field(repr=False, compare=False, hash=False, default=None)

    def __post_init__(self):
        if self.anchors & self.bulk:
            raise GraphError("anchor and bulk classes overlap")
        adj: dict[str, set[str]] = {v: set() for v in self.anchors | self.bulk}
        for e in self.edges:
            u, v = tuple(e)
            adj[u].add(v)
            adj[v].add(u)
        object.__setattr__(self, "_adj", {v: frozenset(s) for v, s in adj.items()})

    @property
    def classes(self) -> frozenset[str]:
        return self.anchors | self.bulk

    def neighbors(self, v: str) -> frozenset[str]:
        return self._adj[v]

    def expand(self, n: int) -> Graph:
        if n < 1:
            raise GraphError(f"n must be >= 1, got {n}")
        vertices = set(self.anchors)
        edges = []
        for v in self.bulk:
            vertices.update(copy_name(v, i) for i in range(1, n + 1))
        for e in self.edges:
            u, v = sorted(e)
            ub, vb = u in self.bulk, v in self.bulk
            for i in range(1, n + 1):
                if ub and vb:
                    edges.append((copy_name(u, i), copy_name(v, i)))
                elif ub:
                    edges.append((copy_name(u, i), v))
                elif vb:
                    edges.append((u, copy_name(v, i)))
                else:
                    edges.append((u, v))
        return Graph(vertices, edges)

    def lift(self, white_classes: Iterable[str], n: int) -> frozenset[str]:
        """Class coloring -> coloring of the expansion at ``n``."""
        out = set()
        for c in white_classes:
            if c in self.bulk:
                out.update(copy_name(c, i) for i in range(1, n + 1))
            elif c in self.anchors:
                out.add(c)
            else:
                raise GraphError(f"unknown class {c!r}")
        return frozenset(out)

    def collapse(self, white: Iterable[str], n: int) -> frozenset[str]:
        """Expanded coloring -> class coloring; every class must be uniform."""
        white = set(white)
        out = set()
        for c in self.anchors:
            if c in white:
                out.add(c)
        for c in self.bulk:
            hits = sum(copy_name(c, i) in white for i in range(1, n + 1))
            if hits == n:
                out.add(c)
            elif hits:
                raise GraphError(f"copies of {c!r} are not uniformly colored")
        return frozenset(out)


def quotient(g: Graph, d_set: Iterable[str]) -> QuotientGraph:
    anchors, bulk = _split_classes(g, d_set)
    return QuotientGraph(anchors, bulk, g.edges)


# ---------------------------------------------------------------------------
# Hat construction

def prime(v: str) -> str:
    return v + "'"


def hat(g: Graph) -> Graph:
    """Two mirrored copies of ``g`` plus a rung ``v - v'`` at every even-degree vertex.

    Every vertex of the result has odd degree.
    """
    primes = {prime(v) for v in g.vertices}
    clash = primes & g.vertices
    if clash:
        raise GraphError(f"primed names already present: {sorted(clash)}")
    edges = g.sorted_edges()
    edges += [(prime(u), prime(v)) for u, v in g.sorted_edges()]
    edges += [(v, prime(v)) for v in g.sorted_vertices() if g.degree(v) % 2 == 0]
    return Graph(g.vertices | primes, edges)


# ---------------------------------------------------------------------------
# The graph J: vertex inventory and the edits used by the chained construction

J_ANCHOR_SEED = tuple(
    [f"w{i}" for i in range(10)] + [f"x{i}" for i in range(3)] + [f"y{i}" for i in range(5)]
)
J_INVENTORY = tuple(
    [f"a{i}" for i in range(3)]
    + [f"b{i}" for i in range(2)]
    + [f"c{i}" for i in range(12)]
    + [f"d{i}" for i in range(4)]
    + [f"e{i}" for i in range(4)]
    + ["f", "g0", "g1", "q"]
    + list(J_ANCHOR_SEED)
)


def j_duplicated(g: Graph) -> frozenset[str]:
    """Duplication set of a J candidate: everything outside the seed and ``q``."""
    return g.vertices - set(J_ANCHOR_SEED) - {"q"}


def tilde_edit(jhat: Graph) -> Graph:
    """Drop ``f`` from a hat-graph of J and join ``f'`` to ``y0`` and ``g1``."""
    needed = {"f", "f'", "y0", "g1"}
    missing = needed - jhat.vertices
    if missing:
        raise GraphError(f"hat graph lacks {sorted(missing)}")
    trimmed = jhat.subgraph_without(["f"])
    return Graph(trimmed.vertices, trimmed.sorted_edges() + [("f'", "y0"), ("f'", "g1")])


@dataclass(frozen=True)
class ChainRoles:
    spreader: str
    q: str
    q_prime: str
    receivers: tuple[str, ...]
    removable: tuple[str, ...]
    duplicated: frozenset[str]

    N_RECEIVERS = 30
    N_REMOVABLE = 6

    def validate(self, base: Graph) -> None:
        named = [self.spreader, self.q, self.q_prime, *self.receivers, *self.removable]
        missing = set(named) - base.vertices
        if missing:
            raise GraphError(f"roles name unknown vertices: {sorted(missing)}")
        if len(self.receivers) != self.N_RECEIVERS:
            raise GraphError(f"need {self.N_RECEIVERS} receivers, got {len(self.receivers)}")
        if len(self.removable) != self.N_REMOVABLE:
            raise GraphError(f"need {self.N_REMOVABLE} removable vertices, got {len(self.removable)}")
        ports = named[1:]
        if len(set(ports)) != len(ports) or self.spreader in ports:
            raise GraphError("role vertices must be distinct")
        if self.spreader not in self.duplicated:
            raise GraphError("spreader must be duplicated")
        if set(ports) & self.duplicated:
            raise GraphError("q, q', receivers and removable vertices must not be duplicated")
        if not self.duplicated <= base.vertices:
            raise GraphError("duplication set has vertices not in the graph")

    @property
    def seed(self) -> frozenset[str]:
        return frozenset(self.receivers) | frozenset(self.removable)


_ROLE_KEYS = {"spreader", "q", "qprime", "receivers", "removable", "duplicated"}


def load_roles(text: str, base: Graph) -> ChainRoles:
    """Parse a roles document: lines ``key token...``.

    Keys: ``spreader``, ``q``, ``qprime``, ``receivers``, ``removable`` and the
    optional ``duplicated`` (default: every vertex not named by another role).
    Keys may repeat; their tokens accumulate in order.
    """
    found: dict[str, list[str]] = {}
    for lineno, line, is_comment in _content_lines(text):
        if is_comment:
            continue
        key, *toks = line.split()
        if key not in _ROLE_KEYS:
            raise GraphError(f"line {lineno}: unknown role {key!r}")
        found.setdefault(key, []).extend(toks)
    for key in ("spreader", "q", "qprime", "receivers", "removable"):
        if not found.get(key):
            raise GraphError(f"role map incomplete: missing {key!r}")
    for key in ("spreader", "q", "qprime"):
        if len(found[key]) != 1:
            raise GraphError(f"role {key!r} takes exactly one vertex")
    ports = {found["q"][0], found["qprime"][0], *found["receivers"], *found["removable"]}
    dup = frozenset(found["duplicated"]) if "duplicated" in found else base.vertices - ports
    return ChainRoles(
        spreader=found["spreader"][0],
        q=found["q"][0],
        q_prime=found["qprime"][0],
        receivers=tuple(found["receivers"]),
        removable=tuple(found["removable"]),
        duplicated=dup,
    )


def dump_roles(roles: ChainRoles) -> str:
    return "\n".join([
        f"spreader {roles.spreader}",
        f"q {roles.q}",
        f"qprime {roles.q_prime}",
        "receivers " + " ".join(roles.receivers),
        "removable " + " ".join(roles.removable),
        "duplicated " + " ".join(sorted(roles.duplicated)),
    ]) + "\n"


def tilde_roles(jtilde: Graph) -> ChainRoles:
    """Role map of an edited J hat-graph: ports are the seed, ``q`` and their primes."""
    receivers = [v for s in J_ANCHOR_SEED if not s.startswith("x") for v in (s, prime(s))]
    removable = [v for s in J_ANCHOR_SEED if s.startswith("x") for v in (s, prime(s))]
    ports = set(receivers) | set(removable) | {"q", "q'"}
    return ChainRoles("g0", "q", "q'", tuple(receivers), tuple(removable), jtilde.vertices - ports)


def level_name(level: int, v: str) -> str:
    return f"L{level}:{v}"


@dataclass(frozen=True)
class ChainResult:
    graph: Graph
    seed: frozenset[str]
    # level i -> 32 blocks of spreader copies wired into level i+1
    blocks: dict[int, tuple[tuple[str, ...], ...]]
    levels: tuple[int, ...]


def chain_construct(base: Graph, roles: ChainRoles, levels: int) -> ChainResult:
    """Chain duplicated copies of ``base`` at multiplicities 2^5 .. 2^levels.

    Copies of the removable vertices survive only at the first level. At each
    level i < levels the 2^i spreader copies are split into 32 consecutive
    blocks: block 0 feeds the next level's q, block 1 its q', and blocks
    2..31 its receivers in order.
    """
    if levels <= 5:
        raise GraphError(f"levels must be > 5, got {levels}")
    roles.validate(base)
    level_ids = tuple(range(5, levels + 1))
    vertices: set[str] = set()
    edges: list[tuple[str, str]] = []
    seed: set[str] = set()
    for i in level_ids:
        part = duplicate(base, roles.duplicated, 2**i)
        if i != level_ids[0]:
            part = part.subgraph_without(roles.removable)
            seed.update(level_name(i, v) for v in roles.receivers)
        else:
            seed.update(level_name(i, v) for v in roles.seed)
        vertices.update(level_name(i, v) for v in part.vertices)
        edges.extend((level_name(i, u), level_name(i, v)) for u, v in part.sorted_edges())

    targets = (roles.q, roles.q_prime, *roles.receivers)
    blocks: dict[int, tuple[tuple[str, ...], ...]] = {}
    for i in level_ids[:-1]:
        size = 2 ** (i - 5)
        copies = [level_name(i, copy_name(roles.spreader, c)) for c in range(1, 2**i + 1)]
        level_blocks = tuple(tuple(copies[j * size:(j + 1) * size]) for j in range(32))
        blocks[i] = level_blocks
        for block, target in zip(level_blocks, targets):
            t = level_name(i + 1, target)
            edges.extend((s, t) for s in block)
    return ChainResult(Graph(vertices, edges), frozenset(seed), blocks, level_ids)
