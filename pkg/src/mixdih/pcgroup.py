"""Polycyclic presentation engine for finite 2-groups.

Every group here is given by generators g_0..g_{n-1}, each of relative
order 2, with a power word for each square g_i**2 and a conjugate word for
each g_j**g_i (i < j).  Words are exponent bit-vectors: bit k of an int is
the exponent of g_k, and the normal form of an element is the product of
its generators in increasing index order.  Power words are supported on
indices > i; conjugate words may touch any index > i (the conjugating
generator), which is what a permutation-style action needs.

Multiplication is collection from the left with an explicit work stack.
Builders may install a structure-backed fast multiply; the collector stays
available as the reference implementation and is what the consistency
sweep uses.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from .gf2linalg import BitVec, lowbit_index

__all__ = [
    "PcPresentation",
    "GroupElement",
    "Subgroup",
    "OwnerMismatch",
    "NotInSubgroup",
    "SmallTooLarge",
    "subgroup_igs",
    "derived_subgroup",
    "frattini",
    "maximal_subgroups",
    "quotient_coords",
    "small_intersection_order",
    "coset_rep",
    "consistency_check",
    "save_presentation",
    "load_presentation",
]

MAX_GENS = 128


class OwnerMismatch(ValueError):
    """Elements or subgroups belong to different groups."""


class NotInSubgroup(ValueError):
    """An element fell outside the subgroup it was claimed to lie in."""


class SmallTooLarge(ValueError):
    """The 'small' side of an intersection is too big to enumerate."""


def _word_bits(mask: int) -> List[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


class PcPresentation:
    """A consistent-by-construction pc presentation plus its arithmetic."""

    def __init__(
        self,
        n: int,
        power_tails: Sequence[int],
        conj: Dict[Tuple[int, int], int],
        names: Optional[Sequence[str]] = None,
        fast_mul: Optional[Callable[[int, int], int]] = None,
        meta=None,
        label: str = "",
    ):
        if not 1 <= n <= MAX_GENS:
            raise ValueError(f"n {n} outside 1..{MAX_GENS}")
        if len(power_tails) != n:
            raise ValueError("power_tails length != n")
        full = (1 << n) - 1
        for i, t in enumerate(power_tails):
            if t & ~full or t & ((1 << (i + 1)) - 1):
                raise ValueError(f"power word of g{i} not supported above {i}")
        self.n = n
        self.power_tails = list(power_tails)
        self.conj: Dict[Tuple[int, int], int] = {}
        self.noncomm = [0] * n
        for (j, i), word in conj.items():
            if not 0 <= i < j < n:
                raise ValueError(f"bad conjugation key ({j},{i})")
            if word & ~full or word & ((1 << (i + 1)) - 1):
                raise ValueError(f"conjugate of g{j} by g{i} not supported above {i}")
            if word == 1 << j:
                continue  # trivial action, keep the table sparse
            self.conj[(j, i)] = word
            self.noncomm[i] |= 1 << j
        self.names = list(names) if names else [f"g{i}" for i in range(n)]
        if len(self.names) != n:
            raise ValueError("names length != n")
        self.meta = meta
        self.label = label
        self.identity = 0
        self.order_log = n
        self.multiply = fast_mul if fast_mul is not None else self.collect_multiply
        self._has_fast = fast_mul is not None

    # ── collection ──────────────────────────────────────────────────────

    def collect_multiply(self, u: int, v: int) -> int:
        """Normal form of u*v by collection from the left."""
        if (u | v) >> self.n or u < 0 or v < 0:
            raise ValueError("exponent vector outside group width")
        stack = _word_bits(v)
        stack.reverse()  # pop() yields v's generators left to right
        append = self._append
        while stack:
            u = append(u, stack.pop(), stack)
        return u

    def _append(self, w: int, i: int, stack: List[int]) -> int:
        """Normal form progress for w*g_i; pushes pending generators."""
        bit = 1 << i
        above = w >> (i + 1) << (i + 1)
        ei = w & bit
        if above and ((above & self.noncomm[i]) or ei):
            # g_i passes everything above position i, conjugating it
            words = []
            if ei:
                pt = self.power_tails[i]
                if pt:
                    words.append(pt)
            mm = above
            conj = self.conj
            while mm:
                low = mm & -mm
                j = low.bit_length() - 1
                words.append(conj.get((j, i), low))
                mm ^= low
            for word in reversed(words):
                bits = _word_bits(word)
                bits.reverse()
                stack.extend(bits)
            return (w & (bit - 1)) | (0 if ei else bit)
        if not ei:
            return w | bit
        pt = self.power_tails[i]
        if pt:
            bits = _word_bits(pt)
            bits.reverse()
            stack.extend(bits)
        return w ^ bit

    # ── derived element operations ──────────────────────────────────────

    def inverse(self, u: int) -> int:
        if u == 0:
            return 0
        mul = self.multiply
        squares = []
        t = u
        while t:
            squares.append(t)
            t = mul(t, t)
            if len(squares) > self.n + 2:
                raise RuntimeError("runaway order; presentation inconsistent?")
        # u**(2**k) = 1, so u**-1 = u * u**2 * u**4 * ... * u**(2**(k-1))
        inv = 0
        for s in squares:
            inv = mul(inv, s)
        return inv

    def element_order(self, u: int) -> int:
        mul = self.multiply
        order = 1
        while u:
            u = mul(u, u)
            order <<= 1
            if order > 1 << (self.n + 2):
                raise RuntimeError("runaway order; presentation inconsistent?")
        return order

    def power(self, u: int, e: int) -> int:
        if e < 0:
            u = self.inverse(u)
            e = -e
        mul = self.multiply
        acc = 0
        while e:
            if e & 1:
                acc = mul(acc, u)
            u = mul(u, u)
            e >>= 1
        return acc

    def conjugate(self, u: int, g: int) -> int:
        """u**g = g^-1 * u * g."""
        mul = self.multiply
        return mul(mul(self.inverse(g), u), g)

    def commutator(self, u: int, v: int) -> int:
        """[u,v] = u^-1 v^-1 u v."""
        mul = self.multiply
        return mul(self.inverse(mul(v, u)), mul(u, v))

    def gen(self, i: int) -> int:
        return 1 << i

    def element(self, exp: int) -> "GroupElement":
        if exp < 0 or exp >> self.n:
            raise ValueError("exponent vector outside group width")
        return GroupElement(exp, self)

    def generators(self) -> List["GroupElement"]:
        return [self.element(1 << i) for i in range(self.n)]

    def __repr__(self) -> str:
        return f"PcPresentation({self.label or 'anon'}, n={self.n})"


@dataclass(frozen=True)
class GroupElement:
    """An element in normal form: bit k is the exponent of generator k."""

    exp: int
    group: PcPresentation

    def _check(self, other: "GroupElement") -> None:
        if self.group is not other.group:
            raise OwnerMismatch("elements from different groups")

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        self._check(other)
        return GroupElement(self.group.multiply(self.exp, other.exp), self.group)

    def inverse(self) -> "GroupElement":
        return GroupElement(self.group.inverse(self.exp), self.group)

    def __pow__(self, e: int) -> "GroupElement":
        return GroupElement(self.group.power(self.exp, e), self.group)

    def conjugate_by(self, g: "GroupElement") -> "GroupElement":
        self._check(g)
        return GroupElement(self.group.conjugate(self.exp, g.exp), self.group)

    def commutator_with(self, other: "GroupElement") -> "GroupElement":
        self._check(other)
        return GroupElement(self.group.commutator(self.exp, other.exp), self.group)

    def order(self) -> int:
        return self.group.element_order(self.exp)

    def is_identity(self) -> bool:
        return self.exp == 0

    def __str__(self) -> str:
        if self.exp == 0:
            return "1"
        return "*".join(self.group.names[i] for i in _word_bits(self.exp))


class Subgroup:
    """A subgroup held as an echelonized induced generating sequence.

    Members have strictly increasing leading (lowest set bit) indices; the
    subgroup is exactly the set of straight products of members in index
    order.  Canonical form additionally clears, in every member, the bits
    sitting at the other members' leading indices; two equal subgroups then
    hold identical member tuples.
    """

    __slots__ = ("group", "members", "leads", "_by_lead", "_inv_by_lead", "_sift_seq", "_canonical")

    def __init__(self, group: PcPresentation, members: Sequence[int], canonical: bool = False):
        self.group = group
        self.members = tuple(sorted(members, key=lowbit_index))
        self.leads = tuple(lowbit_index(m) for m in self.members)
        if len(set(self.leads)) != len(self.members) or any(m == 0 for m in self.members):
            raise ValueError("IGS members need distinct leading indices")
        self._by_lead = dict(zip(self.leads, self.members))
        self._inv_by_lead = {d: group.inverse(m) for d, m in self._by_lead.items()}
        self._sift_seq = tuple((d, self._inv_by_lead[d]) for d in self.leads)
        self._canonical = canonical

    @property
    def order_log(self) -> int:
        return len(self.members)

    @property
    def order(self) -> int:
        return 1 << len(self.members)

    def sift(self, u: int) -> int:
        """Residue of u after left-division at each leading index, ascending.

        Zero iff u is a member, in any presentation.  When conjugate words
        never go below the index of the conjugated generator (true for the
        layered quotients, where corrections move up the layers), the
        residue has zero exponent at every leading index and is the
        canonical representative of the right coset (self)*u.
        """
        mul = self.group.multiply
        for d, inv in self._sift_seq:
            if (u >> d) & 1:
                u = mul(inv, u)
        return u

    def contains(self, u: int) -> bool:
        return self.sift(u) == 0

    def contains_subgroup(self, other: "Subgroup") -> bool:
        return all(self.contains(m) for m in other.members)

    def canonicalize(self) -> "Subgroup":
        if self._canonical:
            return self
        mul = self.group.multiply
        members = list(self.members)
        for idx in range(len(members) - 2, -1, -1):
            m = members[idx]
            for later in range(idx + 1, len(members)):
                d = lowbit_index(members[later])
                if (m >> d) & 1:
                    m = mul(m, members[later])
            members[idx] = m
        return Subgroup(self.group, members, canonical=True)

    def digest(self) -> Tuple[int, ...]:
        """Hashable identity: the canonical member tuple."""
        return self.canonicalize().members

    def elements(self) -> List[int]:
        """All elements, as straight products.  Capped at 2**16."""
        if len(self.members) > 16:
            raise SmallTooLarge("refusing to enumerate beyond 2**16 elements")
        mul = self.group.multiply
        elems = [0]
        for m in reversed(self.members):
            elems = elems + [mul(m, e) for e in elems]
        return elems

    def __eq__(self, other) -> bool:
        if not isinstance(other, Subgroup):
            return NotImplemented
        return self.group is other.group and self.digest() == other.digest()

    def __hash__(self) -> int:
        return hash((id(self.group), self.digest()))

    def __repr__(self) -> str:
        return f"Subgroup(order=2^{len(self.members)} of {self.group.label or 'anon'})"


# ── subgroup construction ───────────────────────────────────────────────────


def _close_igs(group: PcPresentation, gens: Iterable[int]) -> Dict[int, int]:
    """Echelon closure of <gens> under sifting, squaring and commutation."""
    mul = group.multiply
    by_lead: Dict[int, int] = {}
    inv: Dict[int, int] = {}
    queue = list(gens)
    at = 0
    while at < len(queue):
        g = queue[at]
        at += 1
        while g:
            d = lowbit_index(g)
            m = by_lead.get(d)
            if m is None:
                break
            g = mul(inv[d], g)
        if not g:
            continue
        d = lowbit_index(g)
        by_lead[d] = g
        inv[d] = group.inverse(g)
        queue.append(mul(g, g))
        for m in list(by_lead.values()):
            if m != g:
                queue.append(group.commutator(g, m))
                queue.append(group.commutator(m, g))
    return by_lead


def subgroup_igs(group: PcPresentation, gens: Iterable[int]) -> Subgroup:
    """Canonical echelonized IGS of the subgroup generated by gens."""
    by_lead = _close_igs(group, gens)
    return Subgroup(group, list(by_lead.values())).canonicalize()


def _normal_closure(group: PcPresentation, seed: Dict[int, int], normalizers: Sequence[int]) -> Dict[int, int]:
    """Grow an igs closure until stable under conjugation by normalizers."""
    by_lead = dict(seed)
    changed = True
    while changed:
        changed = False
        new: List[int] = []
        sub = Subgroup(group, list(by_lead.values()))
        for z in normalizers:
            for m in by_lead.values():
                c = group.conjugate(m, z)
                if sub.sift(c):
                    new.append(c)
        if new:
            by_lead = _close_igs(group, list(by_lead.values()) + new)
            changed = True
    return by_lead


def derived_subgroup(group: PcPresentation, s: Subgroup) -> Subgroup:
    """[s,s]: commutators of IGS members, then normal closure inside s."""
    comms = []
    ms = s.members
    for i in range(len(ms)):
        for j in range(i + 1, len(ms)):
            c = group.commutator(ms[i], ms[j])
            if c:
                comms.append(c)
    by_lead = _close_igs(group, comms)
    by_lead = _normal_closure(group, by_lead, ms)
    return Subgroup(group, list(by_lead.values())).canonicalize()


def frattini(group: PcPresentation, s: Subgroup) -> Subgroup:
    """Phi(s) = s' * s^2 for a 2-group: squares and commutators, closed."""
    gens = []
    ms = s.members
    mul = group.multiply
    for i in range(len(ms)):
        sq = mul(ms[i], ms[i])
        if sq:
            gens.append(sq)
        for j in range(i + 1, len(ms)):
            c = group.commutator(ms[i], ms[j])
            if c:
                gens.append(c)
    by_lead = _close_igs(group, gens)
    by_lead = _normal_closure(group, by_lead, ms)
    return Subgroup(group, list(by_lead.values())).canonicalize()


def maximal_subgroups(group: PcPresentation, s: Subgroup, phi: Optional[Subgroup] = None) -> List[Subgroup]:
    """All index-2 subgroups of s, as canonical Subgroups.

    They are the preimages of the hyperplanes of s/Phi(s); there are
    2**rank - 1 of them, in the deterministic functional order of
    hyperplane_enum.
    """
    if phi is None:
        phi = frattini(group, s)
    mul = group.multiply
    mixed = {d: (phi._by_lead[d] if d in phi._by_lead else s._by_lead[d]) for d in s.leads}
    free = [d for d in s.leads if d not in phi._by_lead]
    rho = len(free)
    if rho == 0:
        return []
    phi_members = [mixed[d] for d in s.leads if d in phi._by_lead]
    out = []
    for f in range(1, 1 << rho):
        ones = [free[t] for t in range(rho) if (f >> t) & 1]
        members = list(phi_members)
        members.extend(mixed[free[t]] for t in range(rho) if not (f >> t) & 1)
        for t in range(len(ones) - 1):
            members.append(mul(mixed[ones[t]], mixed[ones[t + 1]]))
        out.append(Subgroup(group, members).canonicalize())
    return out


def quotient_coords(group: PcPresentation, u: int, s: Subgroup, t: Subgroup) -> BitVec:
    """Coordinates of u*t in the elementary abelian quotient s/t.

    Basis: the images of s's IGS members at leading indices not used by t.
    Requires t <= s normal with elementary abelian quotient and u in s.
    """
    free = [d for d in s.leads if d not in t._by_lead]
    if not free:
        raise ValueError("quotient is trivial; no coordinates to take")
    mixed = {d: (t._by_lead[d] if d in t._by_lead else s._by_lead[d]) for d in s.leads}
    mul = group.multiply
    w = u
    coords = 0
    free_pos = {d: k for k, d in enumerate(free)}
    for d in s.leads:
        if w == 0:
            break
        if lowbit_index(w) == d:
            if d in free_pos:
                coords |= 1 << free_pos[d]
            w = mul(group.inverse(mixed[d]), w)
    if w:
        raise NotInSubgroup("element does not lie in the given subgroup")
    return BitVec(coords, len(free))


def small_intersection_order(group: PcPresentation, t: Subgroup, small: Subgroup) -> int:
    """|t meet small| by enumerating the small side (capped at 2**10)."""
    if small.order_log > 10:
        raise SmallTooLarge("small side exceeds 2**10 elements")
    return sum(1 for w in small.elements() if t.contains(w))


def coset_rep(group: PcPresentation, u: int, s: Subgroup) -> int:
    """Canonical representative of the right coset s*u (the sift residue)."""
    return s.sift(u)


# ── consistency ─────────────────────────────────────────────────────────────


def consistency_check(pres: PcPresentation, max_violations: int = 16) -> List[Tuple]:
    """Overlap tests certifying that normal forms are unique.

    Runs, with the reference collector, the standard associativity overlaps
    (g_k g_j) g_i = g_k (g_j g_i) for k > j > i together with the power
    overlaps for each square.  An empty result certifies that the presented
    group has order exactly 2**n.
    """
    n = pres.n
    mul = pres.collect_multiply
    pair = {}
    for j in range(n):
        for i in range(j):
            pair[(j, i)] = mul(1 << j, 1 << i)
    bad: List[Tuple] = []

    def record(kind, idx, lhs, rhs):
        if lhs != rhs:
            bad.append((kind, idx, lhs, rhs))

    for k in range(n):
        gk = 1 << k
        for j in range(k):
            pkj = pair[(k, j)]
            for i in range(j):
                record("assoc", (k, j, i), mul(pkj, 1 << i), mul(gk, pair[(j, i)]))
                if len(bad) >= max_violations:
                    return bad
    for j in range(n):
        gj = 1 << j
        sq_j = pres.power_tails[j]
        for i in range(j):
            gi = 1 << i
            record("power_left", (j, i), mul(sq_j, gi), mul(gj, pair[(j, i)]))
            record("power_right", (j, i), mul(gj, pres.power_tails[i]), mul(pair[(j, i)], gi))
            if len(bad) >= max_violations:
                return bad
    for i in range(n):
        gi = 1 << i
        record("power_cube", (i,), mul(pres.power_tails[i], gi), mul(gi, pres.power_tails[i]))
    return bad


# ── file format ─────────────────────────────────────────────────────────────
#
# pc2 v1 n=<count>
# pow <i> <hex>            one line per generator, including zero words
# conj <j> <i> <hex>       only nontrivial conjugates; hex is the full
#                          normal form of g_j ** g_i, little-end bits
#


def save_presentation(pres: PcPresentation, path) -> None:
    lines = [f"pc2 v1 n={pres.n}"]
    for i in range(pres.n):
        lines.append(f"pow {i} {format(pres.power_tails[i], 'x')}")
    for j in range(pres.n):
        for i in range(j):
            word = pres.conj.get((j, i))
            if word is not None:
                lines.append(f"conj {j} {i} {format(word, 'x')}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_presentation(path) -> PcPresentation:
    text = Path(path).read_text().splitlines()
    if not text or not text[0].startswith("pc2 v1 n="):
        raise ValueError("not a pc2 v1 file")
    n = int(text[0].split("n=")[1])
    ptails = [0] * n
    conj: Dict[Tuple[int, int], int] = {}
    for line in text[1:]:
        line = line.strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "pow" and len(parts) == 3:
            ptails[int(parts[1])] = int(parts[2], 16)
        elif parts[0] == "conj" and len(parts) == 4:
            conj[(int(parts[1]), int(parts[2]))] = int(parts[3], 16)
        else:
            raise ValueError(f"bad line in pc2 file: {line!r}")
    return PcPresentation(n, ptails, conj, label=str(path))
