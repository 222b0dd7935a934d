"""Class-3 commutator calculus over GF(2) and the groups built from it.

The free object F(n) here has involutive generators x_1..x_n, y_1..y_n,
is nilpotent of class 3, and has exponent-2 layers:

  layer 1   x-bits (n) and y-bits (n)
  layer 2   c_{ij} = [x_i, y_j]                       (n*n bits)
  layer 3   [[x_i,y_j], x_k] with i < k, and
            [[x_i,y_j], y_l] with j < l               (2n * C(n,2) bits)

Layer-3 identities used throughout: [[x_i,y_j],x_i] = [[x_i,y_j],y_j] = 1,
[[x_i,y_j],x_k] = [[x_k,y_j],x_i] and [[x_i,y_j],y_l] = [[x_i,y_l],y_j].
Elements are packed ints: a-bits, then b-bits (the y exponents), then the
c layer row-major, then whatever survives of layer 3 after reduction.

Multiplication is closed form.  Writing u = (a1,b1,g1,d1), v = (a2,b2,g2,d2):

  a = a1+a2,  b = b1+b2,  g = g1+g2+(a2 outer b1),
  d = d1+d2 + T_A + T_B + T_C

where the layer-3 corrections come from commuting v's x-part leftwards past
u's c-layer and y-part, and v's y-part past the c-layer it lands under:

  T_A = sum_{(i,j) in g1, k in a2}        [[x_i,y_j],x_k]
  T_B = sum_{k in a2, {j<l} in b1}        [[x_k,y_j],y_l]
      + sum_{{k<k'} in a2, j in b1}       [[x_k,y_j],x_k']
  T_C = sum_{(i,j) in g1+(a2 outer b1), l in b2}  [[x_i,y_j],y_l]

Quotients are taken by reducing the layer-3 coordinates modulo a relation
subspace; the complement coordinates become central generators of the
resulting pc presentation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .gf2linalg import BitMatrix, BitVec, echelon_ints, reduce_by_echelon
from .pcgroup import PcPresentation

__all__ = [
    "LayeredWord",
    "NonCentralRelation",
    "free_multiply",
    "free_inverse",
    "commutator_expand",
    "parse_word",
    "expand_relations",
    "RAction",
    "r_action",
    "RelationSpace",
    "relation_space",
    "build_h56",
    "build_p59",
    "build_toy",
    "make_rho",
]

# the order-8 cycle acting on generator subscripts, 0-based images
SIG = (1, 3, 0, 2)


class NonCentralRelation(ValueError):
    """A relation expected to be central had support below layer 3."""


# ── index bookkeeping ───────────────────────────────────────────────────────


@dataclass(frozen=True)
class _Layout:
    """Bit layout of the layered structure on n+n generators."""

    n: int
    npairs: int
    c_dim: int
    d_dim: int
    pairs: Tuple[Tuple[int, int], ...]
    pair_idx: Dict[Tuple[int, int], int]

    @property
    def c_off(self) -> int:
        return 2 * self.n

    @property
    def d_off(self) -> int:
        return 2 * self.n + self.c_dim

    def c_index(self, i: int, j: int) -> int:
        return self.n * i + j

    def dx_index(self, i: int, j: int, k: int) -> Optional[int]:
        """Coordinate of [[x_i,y_j],x_k]; None when it collapses (i == k)."""
        if i == k:
            return None
        p = self.pair_idx[(i, k) if i < k else (k, i)]
        return j * self.npairs + p

    def dy_index(self, i: int, j: int, l: int) -> Optional[int]:
        if j == l:
            return None
        p = self.pair_idx[(j, l) if j < l else (l, j)]
        return self.n * self.npairs + i * self.npairs + p

    def d_describe(self, col: int) -> Tuple[str, int, int, int]:
        """Inverse of dx/dy_index: ('x', i, j, k) or ('y', i, j, l), 0-based."""
        half = self.n * self.npairs
        if col < half:
            j, p = divmod(col, self.npairs)
            i, k = self.pairs[p]
            return ("x", i, j, k)
        i, p = divmod(col - half, self.npairs)
        j, l = self.pairs[p]
        return ("y", i, j, l)


@lru_cache(maxsize=None)
def _layout(n: int) -> _Layout:
    pairs = tuple((p, q) for p in range(n) for q in range(p + 1, n))
    return _Layout(
        n=n,
        npairs=len(pairs),
        c_dim=n * n,
        d_dim=2 * n * len(pairs),
        pairs=pairs,
        pair_idx={pq: t for t, pq in enumerate(pairs)},
    )


def _bits(mask: int) -> List[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


# ── multiplication tables ───────────────────────────────────────────────────


class _Tables:
    """Precomputed correction tables for the closed-form multiply.

    reduce maps a full layer-3 vector (d_dim bits) to its packed image in
    the quotient's complement coordinates; identity for the free object.
    """

    def __init__(self, n: int, reduce: Callable[[int], int], d_width: int):
        lay = _layout(n)
        self.layout = lay
        self.d_width = d_width
        self.n = n
        size = 1 << n
        self.amask = size - 1
        self.cmask = (1 << lay.c_dim) - 1
        self.c_chunks = (lay.c_dim + 7) // 8

        def dx(i, j, k):
            t = lay.dx_index(i, j, k)
            return 0 if t is None else 1 << t

        def dy(i, j, l):
            t = lay.dy_index(i, j, l)
            return 0 if t is None else 1 << t

        # OUTER[a2][b1]: c-mask of {(i,j) : i in a2, j in b1}
        outer = []
        for a2 in range(size):
            row = []
            ai = _bits(a2)
            for b1 in range(size):
                m = 0
                for i in ai:
                    for j in _bits(b1):
                        m |= 1 << lay.c_index(i, j)
                row.append(m)
            outer.append(row)
        self.OUTER = outer

        # TB[a2][b1]: reduced correction from a2 crossing b1
        tb = []
        for a2 in range(size):
            row = []
            ai = _bits(a2)
            for b1 in range(size):
                bj = _bits(b1)
                m = 0
                for k in ai:
                    for s in range(len(bj)):
                        for t in range(s + 1, len(bj)):
                            m ^= dy(k, bj[s], bj[t])
                for s in range(len(ai)):
                    for t in range(s + 1, len(ai)):
                        for j in bj:
                            m ^= dx(ai[s], j, ai[t])
                row.append(reduce(m))
            tb.append(row)
        self.TB = tb

        # TA[k][chunk][byte]: reduced sum of [[x_i,y_j],x_k] over c-bits set
        # in the byte; linear in the c layer, so byte-sliced
        def slice_tables(percell):
            per_gen = []
            for g in range(n):
                chunks = []
                for ch in range(self.c_chunks):
                    table = [0] * 256
                    for byte in range(256):
                        m = 0
                        for bit in _bits(byte):
                            col = ch * 8 + bit
                            if col < lay.c_dim:
                                i, j = divmod(col, n)
                                m ^= percell(i, j, g)
                        table[byte] = reduce(m)
                    chunks.append(table)
                per_gen.append(chunks)
            return per_gen

        self.TA = slice_tables(dx)
        self.TC = slice_tables(dy)


def _make_mul(tb: _Tables) -> Callable[[int, int], int]:
    n = tb.n
    amask = tb.amask
    cmask = tb.cmask
    c_off = 2 * n
    d_off = c_off + tb.layout.c_dim
    OUTER, TB, TA, TC = tb.OUTER, tb.TB, tb.TA, tb.TC

    def mul(u: int, v: int) -> int:
        a2 = v & amask
        b1 = (u >> n) & amask
        g1 = (u >> c_off) & cmask
        d = (u >> d_off) ^ (v >> d_off)
        if a2:
            q = OUTER[a2][b1]
            corr = TB[a2][b1]
            if g1:
                kk = a2
                while kk:
                    kb = kk & -kk
                    tak = TA[kb.bit_length() - 1]
                    gg = g1
                    ci = 0
                    while gg:
                        corr ^= tak[ci][gg & 255]
                        gg >>= 8
                        ci += 1
                    kk ^= kb
        else:
            q = 0
            corr = 0
        gm = g1 ^ q
        b2 = (v >> n) & amask
        if b2 and gm:
            ll = b2
            while ll:
                lb = ll & -ll
                tcl = TC[lb.bit_length() - 1]
                gg = gm
                ci = 0
                while gg:
                    corr ^= tcl[ci][gg & 255]
                    gg >>= 8
                    ci += 1
                ll ^= lb
        return (
            ((u & amask) ^ a2)
            | ((b1 ^ b2) << n)
            | ((gm ^ ((v >> c_off) & cmask)) << c_off)
            | ((d ^ corr) << d_off)
        )

    return mul


@lru_cache(maxsize=None)
def _free_tables(n: int) -> _Tables:
    lay = _layout(n)
    return _Tables(n, lambda m: m, lay.d_dim)


@lru_cache(maxsize=None)
def _free_mul(n: int) -> Callable[[int, int], int]:
    return _make_mul(_free_tables(n))


# ── the free object on 4+4 generators ───────────────────────────────────────


@dataclass(frozen=True)
class LayeredWord:
    """Element of F(4) in layer coordinates (a, b, c, d as packed ints)."""

    a: int = 0
    b: int = 0
    c: int = 0
    d: int = 0

    def __post_init__(self):
        lay = _layout(4)
        if self.a >> 4 or self.b >> 4 or self.c >> lay.c_dim or self.d >> lay.d_dim:
            raise ValueError("layer coordinates out of range")

    def pack(self) -> int:
        return self.a | (self.b << 4) | (self.c << 8) | (self.d << 24)

    @staticmethod
    def unpack(w: int) -> "LayeredWord":
        return LayeredWord(w & 15, (w >> 4) & 15, (w >> 8) & 0xFFFF, w >> 24)

    def is_identity(self) -> bool:
        return not (self.a | self.b | self.c | self.d)


def free_multiply(u: LayeredWord, v: LayeredWord) -> LayeredWord:
    return LayeredWord.unpack(_free_mul(4)(u.pack(), v.pack()))


def free_inverse(u: LayeredWord) -> LayeredWord:
    # every element has order dividing 4, so u**-1 = u**3
    mul = _free_mul(4)
    w = u.pack()
    return LayeredWord.unpack(mul(mul(w, w), w))


def commutator_expand(u: LayeredWord, v: LayeredWord) -> LayeredWord:
    """[u,v] = u^-1 v^-1 u v, exact in the class-3 quotient."""
    mul = _free_mul(4)
    uu, vv = u.pack(), v.pack()
    lhs = mul(free_inverse(u).pack(), free_inverse(v).pack())
    return LayeredWord.unpack(mul(mul(lhs, uu), vv))


def parse_word(text: str) -> LayeredWord:
    """Product of letters like 'x1x2y3' (1-based subscripts) in F(4)."""
    mul = _free_mul(4)
    acc = 0
    at = 0
    while at < len(text):
        sym = text[at]
        if sym not in "xy" or at + 1 >= len(text) or not text[at + 1].isdigit():
            raise ValueError(f"bad word {text!r} at offset {at}")
        sub = int(text[at + 1]) - 1
        if not 0 <= sub < 4:
            raise ValueError(f"subscript out of range in {text!r}")
        acc = mul(acc, 1 << (sub if sym == "x" else 4 + sub))
        at += 2
    return LayeredWord.unpack(acc)


# ── the defining relations ──────────────────────────────────────────────────

_X = "x1x2x3x4"
_Y = "y1y2y3y4"

# each relation is (left factors, right factors), every factor a triple
# commutator [[u, v], w] given by its three words
_RELATION_TRIPLES = (
    (
        [(_X, "y1", "x1"), ("y1", "x1", "y2"), ("x1", "y2", "x3"),
         ("y2", "x3", "y4"), ("x3", "y4", "x2"), ("y4", "x2", "y3")],
        [("x2", "y3", _X), ("y3", _X, "y1")],
    ),
    (
        [("x4", "y2", _X), ("y2", _X, "y3"), (_X, "y3", "x2"),
         ("y3", "x2", _Y), ("x2", _Y, "x1")],
        [(_Y, "x1", "y4"), ("x1", "y4", "x4"), ("y4", "x4", "y2")],
    ),
)


def expand_relations() -> BitMatrix:
    """The two defining relation vectors, as rows in layer-3 coordinates."""
    lay = _layout(4)
    mul = _free_mul(4)
    rows = []
    for left, right in _RELATION_TRIPLES:
        def side(factors):
            acc = LayeredWord()
            for u, v, w in factors:
                t = commutator_expand(commutator_expand(parse_word(u), parse_word(v)), parse_word(w))
                acc = free_multiply(acc, t)
            return acc

        l, r = side(left), side(right)
        diff = free_multiply(l, free_inverse(r))
        if diff.a or diff.b or diff.c:
            raise NonCentralRelation("relation difference not in layer 3")
        rows.append(diff.d)
    return BitMatrix.from_ints(rows, lay.d_dim)


# ── the order-8 twist ───────────────────────────────────────────────────────


@dataclass(frozen=True)
class RAction:
    """The outer twist r: x_i -> y_i, y_i -> x_{sigma(i)}, on each layer.

    perm1 permutes the 2n letter indices; mat2 and mat3 are the induced
    permutation matrices on the c and d layers (row t = image of basis
    vector t under the action).
    """

    perm1: Tuple[int, ...]
    mat2: BitMatrix
    mat3: BitMatrix
    perm2: Tuple[int, ...] = field(repr=False, default=())
    perm3: Tuple[int, ...] = field(repr=False, default=())


@lru_cache(maxsize=None)
def r_action() -> RAction:
    lay = _layout(4)
    n = 4
    perm1 = tuple(list(range(n, 2 * n)) + [SIG[i] for i in range(n)])
    # c_{ij} = [x_i, y_j] -> [y_i, x_{sigma(j)}] = c_{sigma(j), i}^-1 = c_{sigma(j), i}
    perm2 = [0] * lay.c_dim
    for i in range(n):
        for j in range(n):
            perm2[lay.c_index(i, j)] = lay.c_index(SIG[j], i)
    perm3 = [0] * lay.d_dim
    for col in range(lay.d_dim):
        kind, i, j, k = lay.d_describe(col)
        if kind == "x":
            # [[x_i,y_j],x_k] -> [[y_i,x_sj],y_k] = [[x_sj,y_i],y_k]^-1 ...
            # which rewrites to the dy coordinate of (sigma j; i, k)
            img = lay.dy_index(SIG[j], i, k)
        else:
            # [[x_i,y_j],y_l] -> [[y_i,x_sj],x_sl] = [[x_sj,y_i],x_sl]
            img = lay.dx_index(SIG[j], i, SIG[k])
        assert img is not None
        perm3[col] = img
    mat2 = BitMatrix.from_ints([1 << perm2[t] for t in range(lay.c_dim)], lay.c_dim)
    mat3 = BitMatrix.from_ints([1 << perm3[t] for t in range(lay.d_dim)], lay.d_dim)
    return RAction(perm1, mat2, mat3, tuple(perm2), tuple(perm3))


def _apply_perm(mask: int, perm: Sequence[int]) -> int:
    out = 0
    while mask:
        low = mask & -mask
        out |= 1 << perm[low.bit_length() - 1]
        mask ^= low
    return out


# ── relation subspace ───────────────────────────────────────────────────────


@dataclass(frozen=True)
class RelationSpace:
    """Echelonized span of the twist-orbit of the defining relations."""

    basis: BitMatrix
    pivots: Tuple[int, ...]

    @property
    def rank(self) -> int:
        return len(self.basis.rows)


@lru_cache(maxsize=None)
def relation_space() -> RelationSpace:
    act = r_action()
    rows = []
    for row in expand_relations().row_ints():
        v = row
        for _ in range(8):
            rows.append(v)
            v = _apply_perm(v, act.perm3)
        if v != row:
            raise AssertionError("twist on layer 3 does not have order dividing 8")
    basis, pivots = echelon_ints(rows)
    lay = _layout(4)
    return RelationSpace(BitMatrix.from_ints(basis, lay.d_dim), tuple(pivots))


# ── pc presentation builders ────────────────────────────────────────────────


@dataclass
class LayeredMeta:
    """Attached to layered pc presentations; geometry of the coordinates."""

    n: int
    d_cols: Tuple[int, ...]
    d_desc: Tuple[Tuple[str, int, int, int], ...]
    reduce_full: Callable[[int], int]
    tables: _Tables
    relation_basis: Tuple[int, ...] = ()
    relation_pivots: Tuple[int, ...] = ()

    @property
    def c_off(self) -> int:
        return 2 * self.n

    @property
    def d_off(self) -> int:
        return 2 * self.n + self.n * self.n


def _layered_presentation(n: int, relation_rows: Sequence[int], label: str) -> PcPresentation:
    """Quotient of F(n) by the central subspace spanned by relation_rows."""
    lay = _layout(n)
    basis, pivots = echelon_ints(list(relation_rows))
    piv_set = set(pivots)
    d_cols = tuple(c for c in range(lay.d_dim) if c not in piv_set)
    col_pos = {c: t for t, c in enumerate(d_cols)}

    def reduce_full(mask: int) -> int:
        res = reduce_by_echelon(mask, basis, pivots)
        out = 0
        while res:
            low = res & -res
            out |= 1 << col_pos[low.bit_length() - 1]
            res ^= low
        return out

    tables = _Tables(n, reduce_full, len(d_cols))
    ngen = 2 * n + lay.c_dim + len(d_cols)
    c_off = 2 * n
    d_off = c_off + lay.c_dim
    conj: Dict[Tuple[int, int], int] = {}
    for i in range(n):
        for j in range(n):
            cbit = 1 << (c_off + lay.c_index(i, j))
            # y_j ** x_i = y_j * c_ij
            conj[(n + j, i)] = (1 << (n + j)) | cbit
    for i in range(n):
        for j in range(n):
            cg = c_off + lay.c_index(i, j)
            for k in range(n):
                if k != i:
                    t = lay.dx_index(i, j, k)
                    word = reduce_full(1 << t)
                    if word:
                        conj[(cg, k)] = (1 << cg) | (word << d_off)
                if k != j:
                    t = lay.dy_index(i, j, k)
                    word = reduce_full(1 << t)
                    if word:
                        conj[(cg, n + k)] = (1 << cg) | (word << d_off)
    names = [f"x{i+1}" for i in range(n)] + [f"y{j+1}" for j in range(n)]
    names += [f"c{i+1}{j+1}" for i in range(n) for j in range(n)]
    d_desc = tuple(lay.d_describe(c) for c in d_cols)
    for kind, i, j, k in d_desc:
        if kind == "x":
            names.append(f"d_x{i+1}y{j+1}x{k+1}")
        else:
            names.append(f"d_x{i+1}y{j+1}y{k+1}")
    meta = LayeredMeta(
        n=n,
        d_cols=d_cols,
        d_desc=d_desc,
        reduce_full=reduce_full,
        tables=tables,
        relation_basis=tuple(basis),
        relation_pivots=tuple(pivots),
    )
    return PcPresentation(
        ngen,
        [0] * ngen,
        conj,
        names=names,
        fast_mul=_make_mul(tables),
        meta=meta,
        label=label,
    )


def build_f72() -> PcPresentation:
    """The free class-3 object on 4+4 involutive generators, order 2**72."""
    return _layered_presentation(4, [], "f72")


def build_h56() -> PcPresentation:
    """The mixed-dihedral quotient of F(4): order 2**56."""
    rel = relation_space()
    return _layered_presentation(4, rel.basis.row_ints(), "h56")


def build_toy() -> PcPresentation:
    """The 2+2 analogue with all of layer 3 killed: order 2**8, class 2."""
    lay = _layout(2)
    rows = [1 << t for t in range(lay.d_dim)]
    return _layered_presentation(2, rows, "toy2")


# ── conjugation by the twist on quotient coordinates ────────────────────────


def make_rho(h: PcPresentation) -> Callable[[int], int]:
    """h -> h**r on packed coordinates of a layered quotient group.

    Built from the same correction tables as the multiply: if h = a b g d
    (normal form, x-part a, y-part b), then conjugating letterwise gives
    the word (sigma b) a g' d' which the closed form straightens.
    """
    meta: LayeredMeta = h.meta
    if not isinstance(meta, LayeredMeta) or meta.n != 4:
        raise ValueError("twist conjugation needs the 4+4 layered group")
    act = r_action()
    lay = _layout(4)
    tb = meta.tables
    reduce_full = meta.reduce_full

    sig_a = [0] * 16
    for m in range(16):
        t = 0
        for i in _bits(m):
            t |= 1 << SIG[i]
        sig_a[m] = t

    # c-layer permutation, byte-sliced over 16 bits
    perm_c = []
    for ch in range(2):
        table = [0] * 256
        for byte in range(256):
            m = 0
            for bit in _bits(byte):
                m |= 1 << act.perm2[ch * 8 + bit]
            table[byte] = m
        perm_c.append(table)

    # reduced-d image of the layer-3 permutation: lift col, permute, reduce
    d_width = len(meta.d_cols)
    d_chunks = (d_width + 7) // 8 if d_width else 0
    m3r = []
    for ch in range(d_chunks):
        table = [0] * 256
        for byte in range(256):
            m = 0
            for bit in _bits(byte):
                pos = ch * 8 + bit
                if pos < d_width:
                    m ^= reduce_full(1 << act.perm3[meta.d_cols[pos]])
            table[byte] = m
        m3r.append(table)

    OUTER, TB = tb.OUTER, tb.TB
    c_off, d_off = meta.c_off, meta.d_off

    def rho(w: int) -> int:
        a = w & 15
        b = (w >> 4) & 15
        g = (w >> c_off) & 0xFFFF
        d = w >> d_off
        a2 = sig_a[b]
        gi = perm_c[0][g & 255] | perm_c[1][g >> 8]
        di = 0
        ci = 0
        while d:
            di ^= m3r[ci][d & 255]
            d >>= 8
            ci += 1
        # letterwise image is y-word(a) * x-word(sigma b) * rest; straighten
        # the first two: moving x-part = sigma b, passed y-part = a
        gi ^= OUTER[a2][a]
        di ^= TB[a2][a]
        return a2 | (a << 4) | (gi << c_off) | (di << d_off)

    return rho


@dataclass
class ChainMeta:
    """Attached to the extension group: base quotient plus the twist."""

    base: PcPresentation
    shift: int
    rho: Callable[[int], int]


def build_p59(h: Optional[PcPresentation] = None) -> PcPresentation:
    """Extension of the 2**56 group by the order-8 twist: order 2**59.

    Elements are r**e * h with e in 0..7; the cyclic part is carried by
    chain generators r, r**2, r**4 at indices 0,1,2 (so e is the low three
    bits, little-end) and the quotient group's generators follow, shifted
    by 3.
    """
    if h is None:
        h = build_h56()
    rho = make_rho(h)

    def rho_pow(w: int, e: int) -> int:
        for _ in range(e & 7):
            w = rho(w)
        return w

    n = 59
    ptails = [0] * n
    ptails[0] = 1 << 1
    ptails[1] = 1 << 2
    conj: Dict[Tuple[int, int], int] = {(j + 3, i + 3): w << 3 for (j, i), w in h.conj.items()}
    for chain_idx, e in ((0, 1), (1, 2), (2, 4)):
        for t in range(h.n):
            img = rho_pow(1 << t, e)
            if img != 1 << t:
                conj[(3 + t, chain_idx)] = img << 3
    h_mul = h.multiply

    def mul(u: int, v: int) -> int:
        f = v & 7
        return (((u & 7) + f) & 7) | (h_mul(rho_pow(u >> 3, f), v >> 3) << 3)

    names = ["r", "r2", "r4"] + list(h.names)
    meta = ChainMeta(base=h, shift=3, rho=rho)
    return PcPresentation(n, ptails, conj, names=names, fast_mul=mul, meta=meta, label="p59")
