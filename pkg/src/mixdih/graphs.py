"""Desk-scale graphs over the layered two-letter groups.

Two constructions share the letter-block subgroups of a built group: the
Cayley graph on the inverse-closed union of the two blocks, and the
coset incidence graph whose vertices are the right cosets of the two
blocks and whose edges are indexed by group elements.  Everything here
materializes vertex sets, so entry points are capped at desk scale; the
full-size incidence graph is never built and all claims about it are
handled group-theoretically by the search module.

Vertices carry canonical string labels (sift residues in fixed-width
hex) so exported graph files are byte-stable.  Graphs are immutable once
built: construction is a flat sweep over vertices or group elements
followed by a validation pass, and every accessor works on frozen
tuples.
"""

from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

from .calculus import LayeredMeta
from .pcgroup import PcPresentation, Subgroup, subgroup_igs

MAX_VERTICES = 1 << 20
MAX_EDGES = 1 << 20


class TooLarge(ValueError):
    """The requested construction exceeds the desk-scale caps."""


class SNotInverseClosed(ValueError):
    """Connection set is not closed under inversion."""


# ── graphs ───────────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class SimpleGraph:
    """Immutable simple graph with canonical string labels.

    neighbors[i] is the strictly sorted tuple of vertices adjacent to i;
    the optional bipartition assigns 0/1 to every vertex and every edge
    must cross it.
    """

    labels: Tuple[str, ...]
    neighbors: Tuple[Tuple[int, ...], ...]
    bipartition: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        v = len(self.labels)
        if len(self.neighbors) != v:
            raise ValueError("neighbor table length differs from label count")
        if len(set(self.labels)) != v:
            raise ValueError("labels repeat")
        sets = [set(row) for row in self.neighbors]
        for i, row in enumerate(self.neighbors):
            if list(row) != sorted(set(row)):
                raise ValueError("neighbor rows must be sorted and duplicate-free")
            if i in sets[i]:
                raise ValueError("loop")
            for w in row:
                if not 0 <= w < v:
                    raise ValueError("neighbor index out of range")
                if i not in sets[w]:
                    raise ValueError("adjacency not symmetric")
        if self.bipartition is not None:
            if len(self.bipartition) != v or any(s not in (0, 1) for s in self.bipartition):
                raise ValueError("bipartition must assign 0/1 to every vertex")
            for i, row in enumerate(self.neighbors):
                for w in row:
                    if self.bipartition[i] == self.bipartition[w]:
                        raise ValueError("edge inside one part")

    @property
    def vertex_count(self) -> int:
        return len(self.labels)

    @property
    def edge_count(self) -> int:
        return sum(len(row) for row in self.neighbors) // 2

    @cached_property
    def label_index(self) -> Dict[str, int]:
        return {s: i for i, s in enumerate(self.labels)}

    def degree(self, i: int) -> int:
        return len(self.neighbors[i])

    def regular_valency(self) -> Optional[int]:
        """The common degree, or None if degrees differ (or no vertices)."""
        degs = {len(row) for row in self.neighbors}
        return degs.pop() if len(degs) == 1 else None

    def edges(self) -> List[Tuple[int, int]]:
        return [(u, w) for u, row in enumerate(self.neighbors) for w in row if u < w]

    def has_edge(self, u: int, w: int) -> bool:
        row = self.neighbors[u]
        lo, hi = 0, len(row)
        while lo < hi:
            mid = (lo + hi) // 2
            if row[mid] < w:
                lo = mid + 1
            else:
                hi = mid
        return lo < len(row) and row[lo] == w

    def is_connected(self) -> bool:
        if not self.labels:
            return True
        seen = {0}
        frontier = [0]
        while frontier:
            u = frontier.pop()
            for w in self.neighbors[u]:
                if w not in seen:
                    seen.add(w)
                    frontier.append(w)
        return len(seen) == len(self.labels)

    def girth(self) -> Optional[int]:
        """Shortest cycle length, None for forests.

        One BFS per start vertex; a non-tree edge seen from start s closes
        a walk of length dist[u]+dist[w]+1 that contains a cycle no longer
        than itself, and every shortest cycle is found exactly from any of
        its own vertices, so the minimum over all starts is the girth.
        """
        best: Optional[int] = None
        for s in range(len(self.labels)):
            dist = {s: 0}
            parent = {s: -1}
            queue = [s]
            head = 0
            while head < len(queue):
                u = queue[head]
                head += 1
                for w in self.neighbors[u]:
                    if w not in dist:
                        dist[w] = dist[u] + 1
                        parent[w] = u
                        queue.append(w)
                    elif parent[u] != w:
                        cand = dist[u] + dist[w] + 1
                        if best is None or cand < best:
                            best = cand
        return best


def make_graph(
    labels: Sequence[str],
    edges: Iterable[Tuple[int, int]],
    bipartition: Optional[Sequence[int]] = None,
) -> SimpleGraph:
    adj: List[Set[int]] = [set() for _ in labels]
    for u, w in edges:
        if u == w:
            raise ValueError("loop")
        adj[u].add(w)
        adj[w].add(u)
    return SimpleGraph(
        tuple(labels),
        tuple(tuple(sorted(s)) for s in adj),
        tuple(bipartition) if bipartition is not None else None,
    )


# ── vertex actions ───────────────────────────────────────────────────────────


@dataclass(frozen=True)
class ActionGens:
    """Adjacency-preserving vertex permutations, as image tuples."""

    maps: Tuple[Tuple[int, ...], ...]


def action_gens(graph: SimpleGraph, perms: Iterable[Sequence[int]]) -> ActionGens:
    v = graph.vertex_count
    checked = []
    for p in perms:
        p = tuple(p)
        if sorted(p) != list(range(v)):
            raise ValueError("not a permutation of the vertex set")
        for u, row in enumerate(graph.neighbors):
            if {p[w] for w in row} != set(graph.neighbors[p[u]]):
                raise ValueError("permutation does not preserve adjacency")
        checked.append(p)
    return ActionGens(tuple(checked))


# ── constructions ────────────────────────────────────────────────────────────


def _hex_width(group: PcPresentation) -> int:
    return (group.n + 3) // 4


def _element_label(group: PcPresentation, g: int) -> str:
    return format(g, "0%dx" % _hex_width(group))


def cayley_graph(group: PcPresentation, connection: Iterable[int]) -> SimpleGraph:
    """Vertices the group elements, one edge {g, s*g} per element and s."""
    conn = sorted(set(connection))
    if group.n > 20:
        raise TooLarge("group order above 2**20")
    if 0 in conn:
        raise ValueError("identity in connection set")
    cset = set(conn)
    for s in conn:
        if group.inverse(s) not in cset:
            raise SNotInverseClosed(f"inverse of {_element_label(group, s)} missing")
    mul = group.multiply
    labels = [_element_label(group, g) for g in range(1 << group.n)]
    edges = []
    for g in range(1 << group.n):
        for s in conn:
            edges.append((g, mul(s, g)))
    return make_graph(labels, edges)


def letter_subgroups(group: PcPresentation) -> Tuple[Subgroup, Subgroup]:
    """The two letter-block subgroups of a layered group."""
    if not isinstance(group.meta, LayeredMeta):
        raise ValueError("letter blocks only exist on layered groups")
    n = group.meta.n
    xsub = subgroup_igs(group, [1 << i for i in range(n)])
    ysub = subgroup_igs(group, [1 << (n + i) for i in range(n)])
    return xsub, ysub


def letter_connection_set(group: PcPresentation) -> Tuple[int, ...]:
    """Union of the two letter blocks minus the identity.

    Letter products inside one block collect without correction terms, so
    the block elements are exactly the pure bitmasks of that block.
    """
    if not isinstance(group.meta, LayeredMeta):
        raise ValueError("letter blocks only exist on layered groups")
    n = group.meta.n
    xs = list(range(1, 1 << n))
    ys = [b << n for b in range(1, 1 << n)]
    return tuple(xs + ys)


def _coset_reps(group: PcPresentation, sub: Subgroup) -> List[int]:
    """Canonical representatives: all masks over the non-lead bit positions."""
    free = [i for i in range(group.n) if i not in set(sub.leads)]
    reps = []
    for mask in range(1 << len(free)):
        rep = 0
        for t, pos in enumerate(free):
            if (mask >> t) & 1:
                rep |= 1 << pos
        reps.append(rep)
    return sorted(reps)


def bicoset_graph(group: PcPresentation, xsub: Subgroup, ysub: Subgroup) -> SimpleGraph:
    """Coset incidence graph: one edge {xsub*z, ysub*z} per group element z.

    Cosets intersect exactly when they arise from a common z, and when the
    two subgroups meet trivially the element-to-edge map is a bijection.
    """
    if group.n > 20:
        raise TooLarge("group order above 2**20")
    if group.n - min(xsub.order_log, ysub.order_log) > 19:
        raise TooLarge("coset side above 2**19 vertices")
    width = _hex_width(group)
    x_reps = _coset_reps(group, xsub)
    y_reps = _coset_reps(group, ysub)
    x_index = {rep: i for i, rep in enumerate(x_reps)}
    y_index = {rep: len(x_reps) + i for i, rep in enumerate(y_reps)}
    labels = ["x:" + format(r, "0%dx" % width) for r in x_reps]
    labels += ["y:" + format(r, "0%dx" % width) for r in y_reps]
    edges = set()
    for z in range(1 << group.n):
        edges.add((x_index[xsub.sift(z)], y_index[ysub.sift(z)]))
    part = [0] * len(x_reps) + [1] * len(y_reps)
    return make_graph(labels, edges, part)


def cosets_adjacent(group: PcPresentation, xsub: Subgroup, ysub: Subgroup, h: int, g: int) -> bool:
    """Whether the cosets xsub*h and ysub*g intersect, via two sifts.

    Uses the residue criterion: the cosets meet iff h*g^-1 factors across
    the two subgroups, and for the letter blocks (whose left action only
    toggles their own lead bits) that holds iff the xsub-residue of
    h*g^-1 lies in ysub.
    """
    z = group.multiply(h, group.inverse(g))
    return ysub.contains(xsub.sift(z))


def line_graph(g: SimpleGraph) -> SimpleGraph:
    """Vertices the edges of g, adjacent when they share an endpoint."""
    edge_list = g.edges()
    if len(edge_list) > MAX_EDGES:
        raise TooLarge("edge count above 2**20")
    labels = [f"{g.labels[u]}|{g.labels[w]}" for u, w in edge_list]
    incident: List[List[int]] = [[] for _ in g.labels]
    for e, (u, w) in enumerate(edge_list):
        incident[u].append(e)
        incident[w].append(e)
    edges = set()
    for bundle in incident:
        for a in range(len(bundle)):
            for b in range(a + 1, len(bundle)):
                edges.add((bundle[a], bundle[b]))
    return make_graph(labels, edges)


def verify_line_graph_correspondence(
    group: PcPresentation,
    xsub: Subgroup,
    ysub: Subgroup,
    swap: Optional[Tuple[int, int]] = None,
    drop_edge: Optional[Tuple[int, int]] = None,
) -> bool:
    """Check that z -> {xsub*z, ysub*z} identifies the Cayley graph on the
    letter connection set with the line graph of the coset incidence graph.

    The check is exact: the map must be a bijection from Cayley vertices
    onto incidence edges and must carry neighborhoods onto neighborhoods.
    `swap` transposes the images of two elements and `drop_edge` removes
    one incidence edge (given as a vertex pair) first; both perturbations
    are for mutation tests and make the verdict False.
    """
    gamma = cayley_graph(group, letter_connection_set(group))
    sigma = bicoset_graph(group, xsub, ysub)
    if drop_edge is not None:
        u, w = min(drop_edge), max(drop_edge)
        if not sigma.has_edge(u, w):
            raise ValueError("drop_edge is not an edge")
        rows = [list(row) for row in sigma.neighbors]
        rows[u].remove(w)
        rows[w].remove(u)
        sigma = SimpleGraph(sigma.labels, tuple(tuple(r) for r in rows), sigma.bipartition)
    lg = line_graph(sigma)
    lg_index = lg.label_index
    width = _hex_width(group)
    images = []
    for z in range(1 << group.n):
        key = "x:%s|y:%s" % (format(xsub.sift(z), "0%dx" % width), format(ysub.sift(z), "0%dx" % width))
        if key not in lg_index:
            return False
        images.append(lg_index[key])
    if swap is not None:
        z1, z2 = swap
        images[z1], images[z2] = images[z2], images[z1]
    if len(set(images)) != lg.vertex_count:
        return False
    for g in range(gamma.vertex_count):
        if {images[h] for h in gamma.neighbors[g]} != set(lg.neighbors[images[g]]):
            return False
    return True


# ── quotients ────────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class NormalQuotient:
    graph: SimpleGraph
    cover: bool


def normal_quotient(g: SimpleGraph, orbits: Sequence[Sequence[int]]) -> NormalQuotient:
    """Collapse each orbit to a vertex; cover iff the common valency survives."""
    seen: Set[int] = set()
    blocks = []
    for orbit in orbits:
        block = sorted(set(orbit))
        if not block or seen.intersection(block):
            raise ValueError("orbits must form a partition")
        seen.update(block)
        blocks.append(block)
    if len(seen) != g.vertex_count:
        raise ValueError("orbits must cover every vertex")
    blocks.sort(key=lambda b: b[0])
    block_of = {}
    for t, block in enumerate(blocks):
        for u in block:
            block_of[u] = t
    labels = [g.labels[block[0]] for block in blocks]
    edges = set()
    for u, w in g.edges():
        bu, bw = block_of[u], block_of[w]
        if bu != bw:
            edges.add((min(bu, bw), max(bu, bw)))
    part = None
    if g.bipartition is not None:
        sides = [sorted({g.bipartition[u] for u in block}) for block in blocks]
        if all(len(s) == 1 for s in sides):
            part = [s[0] for s in sides]
    quotient = make_graph(labels, edges, part)
    kq = quotient.regular_valency()
    cover = kq is not None and kq == g.regular_valency()
    return NormalQuotient(quotient, cover)


def _parse_side_label(label: str) -> Tuple[str, int]:
    side, _, hexpart = label.partition(":")
    if side not in ("x", "y") or not hexpart:
        raise ValueError(f"not a coset label: {label!r}")
    return side, int(hexpart, 16)


def translation_orbit_partition(
    group: PcPresentation,
    xsub: Subgroup,
    ysub: Subgroup,
    graph: SimpleGraph,
    elements: Iterable[int],
) -> List[List[int]]:
    """Orbits of right translation by the given elements on coset vertices."""
    elems = list(elements)
    index = graph.label_index
    mul = group.multiply
    out: List[List[int]] = []
    seen: Set[int] = set()
    for start in range(graph.vertex_count):
        if start in seen:
            continue
        side, rep = _parse_side_label(graph.labels[start])
        sub = xsub if side == "x" else ysub
        orbit = {start}
        frontier = [rep]
        while frontier:
            cur = frontier.pop()
            for w in elems:
                nxt = sub.sift(mul(cur, w))
                idx = index[f"{side}:" + format(nxt, "0%dx" % _hex_width(group))]
                if idx not in orbit:
                    orbit.add(idx)
                    frontier.append(nxt)
        seen.update(orbit)
        out.append(sorted(orbit))
    return out


# ── orbit counting ───────────────────────────────────────────────────────────


def two_arc_orbit_count(g: SimpleGraph, a: ActionGens) -> int:
    """Orbits of the generated group on ordered paths (u, v, w), u != w."""
    arcs = [
        (u, v, w)
        for v in range(g.vertex_count)
        for u in g.neighbors[v]
        for w in g.neighbors[v]
        if w != u
    ]
    index = {arc: i for i, arc in enumerate(arcs)}
    unvisited = set(range(len(arcs)))
    count = 0
    while unvisited:
        seed = unvisited.pop()
        count += 1
        frontier = [arcs[seed]]
        while frontier:
            u, v, w = frontier.pop()
            for p in a.maps:
                img = (p[u], p[v], p[w])
                t = index[img]
                if t in unvisited:
                    unvisited.discard(t)
                    frontier.append(img)
    return count


def edge_regular_check(g: SimpleGraph, a: ActionGens, expected_order: int) -> bool:
    """True iff the action is transitive on edges and |E| matches the order.

    Transitivity with |E| equal to the acting group's order pins the edge
    stabilizers to be trivial, which is the regularity being certified.
    """
    edge_list = g.edges()
    if not edge_list:
        return expected_order == 0
    if len(edge_list) != expected_order:
        return False
    seen = {edge_list[0]}
    frontier = [edge_list[0]]
    while frontier:
        u, w = frontier.pop()
        for p in a.maps:
            img = (min(p[u], p[w]), max(p[u], p[w]))
            if img not in seen:
                seen.add(img)
                frontier.append(img)
    return len(seen) == len(edge_list)


# ── group actions as vertex permutations ─────────────────────────────────────


def cayley_translations(
    group: PcPresentation, graph: SimpleGraph, elements: Iterable[int]
) -> ActionGens:
    """Right translations g -> g*w on a Cayley graph built by cayley_graph."""
    mul = group.multiply
    perms = []
    for w in elements:
        perms.append(tuple(mul(gv, w) for gv in range(graph.vertex_count)))
    return action_gens(graph, perms)


def bicoset_translations(
    group: PcPresentation,
    xsub: Subgroup,
    ysub: Subgroup,
    graph: SimpleGraph,
    elements: Iterable[int],
) -> ActionGens:
    """Right translations on coset vertices of a bicoset graph."""
    mul = group.multiply
    index = graph.label_index
    width = _hex_width(group)
    sides = [_parse_side_label(s) for s in graph.labels]
    perms = []
    for w in elements:
        p = []
        for side, rep in sides:
            sub = xsub if side == "x" else ysub
            p.append(index[f"{side}:" + format(sub.sift(mul(rep, w)), "0%dx" % width)])
        perms.append(tuple(p))
    return action_gens(graph, perms)


def bicoset_automorphism_action(
    group: PcPresentation,
    xsub: Subgroup,
    ysub: Subgroup,
    graph: SimpleGraph,
    auts: Iterable,
) -> ActionGens:
    """Coset action of verified automorphisms that permute the two blocks."""
    index = graph.label_index
    width = _hex_width(group)
    sides = [_parse_side_label(s) for s in graph.labels]
    subs = {"x": xsub, "y": ysub}
    perms = []
    for aut in auts:
        image_side = {}
        for side, sub in subs.items():
            imgs = [aut.apply(m) for m in sub.members]
            if all(xsub.contains(v) for v in imgs):
                image_side[side] = "x"
            elif all(ysub.contains(v) for v in imgs):
                image_side[side] = "y"
            else:
                raise ValueError("automorphism does not permute the letter blocks")
        p = []
        for side, rep in sides:
            tside = image_side[side]
            nxt = subs[tside].sift(aut.apply(rep))
            p.append(index[f"{tside}:" + format(nxt, "0%dx" % width)])
        perms.append(tuple(p))
    return action_gens(graph, perms)


# ── cliques ──────────────────────────────────────────────────────────────────


def maximal_cliques(g: SimpleGraph) -> List[frozenset]:
    """All maximal cliques (pivoting Bron-Kerbosch), for desk-scale graphs."""
    nb = [set(row) for row in g.neighbors]
    out: List[frozenset] = []

    def expand(r: Set[int], p: Set[int], x: Set[int]) -> None:
        if not p and not x:
            out.append(frozenset(r))
            return
        pivot = max(p | x, key=lambda u: len(p & nb[u]))
        for v in list(p - nb[pivot]):
            expand(r | {v}, p & nb[v], x & nb[v])
            p.discard(v)
            x.add(v)

    expand(set(), set(range(g.vertex_count)), set())
    return out


def cliques_are_letter_cosets(
    group: PcPresentation, xsub: Subgroup, ysub: Subgroup, gamma: SimpleGraph
) -> bool:
    """Exhaustive check that the maximal cliques of the Cayley graph are
    exactly the right cosets of the two letter blocks."""
    mul = group.multiply
    expected = set()
    for z in range(1 << group.n):
        expected.add(frozenset(mul(x, z) for x in xsub.elements()))
        expected.add(frozenset(mul(y, z) for y in ysub.elements()))
    return set(maximal_cliques(gamma)) == expected


# ── export ───────────────────────────────────────────────────────────────────


def format_graph(g: SimpleGraph) -> str:
    """Adjacency text: "v_count e_count" header then one "u v" line per edge."""
    lines = [f"{g.vertex_count} {g.edge_count}"]
    for u, w in g.edges():
        lines.append(f"{g.labels[u]} {g.labels[w]}")
    return "\n".join(lines) + "\n"


def write_graph(g: SimpleGraph, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(format_graph(g))
