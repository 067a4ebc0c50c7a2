"""The graded algebra of bundle-valued forms on a chart.

A chart of dimension ``n`` with a holomorphic frame ``e_1..e_n`` of ``V`` and
dual frame ``e*_1..e*_n`` gives the algebra generated over smooth functions
by the odd symbols ``dz_i``, ``dzbar_i``, ``e_i`` and ``e*_i``.  Every
generator has odd degree (``+1`` for the first three, ``-1`` for ``e*``), so
the algebra is a Grassmann algebra on ``4n`` anticommuting generators and the
degree of a blade ``dz_I dzbar_J e_K e*_L`` is ``|I|+|J|+|K|-|L|``.

Blades are stored as integer bitmasks.  Bit ``i`` is ``dz_i``, bit ``n+i`` is
``dzbar_i``, bit ``2n+i`` is ``e_i`` and bit ``3n+i`` is ``e*_i`` (0-based),
so the canonical order of factors is increasing bit position.

The dual pairing ``kappa`` sends ``F e_K e*_L`` to ``F`` when ``K = L`` (in
canonical order) and to zero otherwise.  The three contractions are obtained
by solving their defining pairing relations over the basis, with the signed
index maps cached per blade pair.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np

from . import expr as E
from .expr import Expr

__all__ = [
    "BladeShape",
    "TensorForm",
    "HermitianMetric",
    "blade_mask",
    "blade_shape",
    "degree",
    "wedge",
    "kappa",
    "pairing",
    "dbar",
    "contract_weight",
    "iota_section",
    "iota_covector",
    "norm_sq",
    "inner",
    "evaluate_form",
    "AlgebraError",
]


class AlgebraError(ValueError):
    """Dimension or type mismatch in an algebra operation."""


# ---------------------------------------------------------------------------
# blades


def _bits(mask: int):
    i = 0
    while mask:
        if mask & 1:
            yield i
        mask >>= 1
        i += 1


@lru_cache(maxsize=None)
def merge_sign(a: int, b: int) -> int:
    """Sign of ``a * b`` rewritten in canonical order, or 0 on a collision."""
    if a & b:
        return 0
    swaps = 0
    for y in _bits(b):
        swaps += (a >> (y + 1)).bit_count()
    return -1 if swaps & 1 else 1


@dataclass(frozen=True)
class BladeShape:
    """Index sets of a blade (0-based, ascending)."""

    I: tuple
    J: tuple
    K: tuple
    L: tuple

    @property
    def form_degree(self) -> tuple:
        return len(self.I), len(self.J)

    @property
    def degree(self) -> int:
        return len(self.I) + len(self.J) + len(self.K) - len(self.L)


@lru_cache(maxsize=None)
def blade_shape(n: int, mask: int) -> BladeShape:
    full = (1 << n) - 1
    groups = [tuple(_bits((mask >> (g * n)) & full)) for g in range(4)]
    return BladeShape(*groups)


def blade_mask(n: int, dz=(), dzb=(), e=(), es=()) -> int:
    mask = 0
    for g, idx in enumerate((dz, dzb, e, es)):
        for i in idx:
            if not 0 <= i < n:
                raise AlgebraError(f"index {i} outside 0..{n - 1}")
            bit = 1 << (g * n + i)
            if mask & bit:
                return 0
            mask |= bit
    return mask


def degree(n: int, mask: int) -> int:
    return blade_shape(n, mask).degree


def _parity(mask: int) -> int:
    return mask.bit_count() & 1


_NAMES = ("dz", "dzb", "e", "es")


def _blade_str(n: int, mask: int) -> str:
    if mask == 0:
        return "1"
    sh = blade_shape(n, mask)
    parts = []
    for name, idx in zip(_NAMES, (sh.I, sh.J, sh.K, sh.L)):
        parts.extend(f"{name}{i + 1}" for i in idx)
    return "^".join(parts)


# ---------------------------------------------------------------------------
# tensor forms


class TensorForm:
    """Finite sum of blades with :class:`Expr` coefficients.

    Parameters
    ----------
    n : int
        Chart dimension (and rank of ``V``).
    terms : dict, optional
        Map from blade mask to coefficient.  Zero coefficients are dropped.
    """

    __slots__ = ("n", "terms", "_hash")

    def __init__(self, n: int, terms=None):
        if n < 1:
            raise AlgebraError("dimension must be at least 1")
        self.n = n
        clean = {}
        if terms:
            for m, c in terms.items():
                c = E._as_expr(c)
                if not c.is_zero():
                    clean[int(m)] = c
        self.terms = clean
        self._hash = None

    # constructors ---------------------------------------------------------
    @classmethod
    def scalar(cls, n: int, c) -> "TensorForm":
        return cls(n, {0: c})

    @classmethod
    def zero(cls, n: int) -> "TensorForm":
        return cls(n)

    @classmethod
    def generator(cls, n: int, kind: str, i: int) -> "TensorForm":
        """Single generator ``kind`` in ``{'dz','dzb','e','es'}``, 0-based ``i``."""
        g = _NAMES.index(kind)
        if not 0 <= i < n:
            raise AlgebraError(f"index {i} outside 0..{n - 1}")
        return cls(n, {1 << (g * n + i): E.ONE})

    @classmethod
    def blade(cls, n: int, coeff=1, dz=(), dzb=(), e=(), es=()) -> "TensorForm":
        """``coeff * dz_I dzbar_J e_K e*_L`` with factors taken in the given order."""
        out = cls.scalar(n, coeff)
        for kind, idx in zip(_NAMES, (dz, dzb, e, es)):
            for i in idx:
                out = out.wedge(cls.generator(n, kind, i))
        return out

    # structure ------------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, o) -> bool:
        if not isinstance(o, TensorForm):
            return NotImplemented
        return self.n == o.n and self.terms == o.terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.n, frozenset(self.terms.items())))
        return self._hash

    def degrees(self) -> set:
        return {degree(self.n, m) for m in self.terms}

    def shapes(self) -> dict:
        """Group blades by ``(i, j, k, l)``."""
        out: dict = {}
        for m in self.terms:
            sh = blade_shape(self.n, m)
            key = (len(sh.I), len(sh.J), len(sh.K), len(sh.L))
            out.setdefault(key, []).append(m)
        return out

    def component(self, i=None, j=None, k=None, l=None) -> "TensorForm":
        """Part with the given form bidegree and exterior degrees (None = any)."""
        want = (i, j, k, l)
        out = {}
        for m, c in self.terms.items():
            sh = blade_shape(self.n, m)
            got = (len(sh.I), len(sh.J), len(sh.K), len(sh.L))
            if all(w is None or w == g for w, g in zip(want, got)):
                out[m] = c
        return TensorForm(self.n, out)

    def coefficient(self, mask: int) -> Expr:
        return self.terms.get(mask, E.ZERO)

    def map_coeffs(self, f) -> "TensorForm":
        return TensorForm(self.n, {m: f(c) for m, c in self.terms.items()})

    # arithmetic -----------------------------------------------------------
    def _check(self, o: "TensorForm"):
        if not isinstance(o, TensorForm):
            raise AlgebraError(f"expected TensorForm, got {type(o).__name__}")
        if o.n != self.n:
            raise AlgebraError(f"dimension mismatch {self.n} vs {o.n}")

    def __add__(self, o: "TensorForm") -> "TensorForm":
        self._check(o)
        acc = dict(self.terms)
        for m, c in o.terms.items():
            acc[m] = acc[m] + c if m in acc else c
        return TensorForm(self.n, acc)

    def __neg__(self) -> "TensorForm":
        return TensorForm(self.n, {m: -c for m, c in self.terms.items()})

    def __sub__(self, o: "TensorForm") -> "TensorForm":
        return self + (-o)

    def scale(self, f) -> "TensorForm":
        """Multiply every coefficient by a function (Expr or number)."""
        f = E._as_expr(f)
        return TensorForm(self.n, {m: c * f for m, c in self.terms.items()})

    def __mul__(self, o):
        if isinstance(o, TensorForm):
            return wedge(self, o)
        return self.scale(o)

    def __rmul__(self, o):
        return self.scale(o)

    def wedge(self, o: "TensorForm") -> "TensorForm":
        return wedge(self, o)

    def __repr__(self) -> str:
        if not self.terms:
            return f"TensorForm(n={self.n}, 0)"
        body = " + ".join(f"({c})*{_blade_str(self.n, m)}" for m, c in sorted(self.terms.items()))
        return f"TensorForm(n={self.n}, {body})"


def wedge(a: TensorForm, b: TensorForm) -> TensorForm:
    """Product in the graded algebra."""
    a._check(b)
    acc: dict = {}
    for ma, ca in a.terms.items():
        for mb, cb in b.terms.items():
            s = merge_sign(ma, mb)
            if s == 0:
                continue
            c = ca * cb
            if s < 0:
                c = -c
            m = ma | mb
            acc[m] = acc[m] + c if m in acc else c
    return TensorForm(a.n, acc)


# ---------------------------------------------------------------------------
# pairing


@lru_cache(maxsize=None)
def _kappa_mask(n: int, mask: int):
    """``kappa`` of a canonical blade: (form mask, sign) or None."""
    full = (1 << n) - 1
    K = (mask >> (2 * n)) & full
    L = (mask >> (3 * n)) & full
    if K != L:
        return None
    return mask & ((1 << (2 * n)) - 1), 1


def kappa(a: TensorForm) -> TensorForm:
    """Contract ``e_K`` against ``e*_K``; mismatched exterior parts vanish."""
    acc: dict = {}
    for m, c in a.terms.items():
        r = _kappa_mask(a.n, m)
        if r is None:
            continue
        fm, s = r
        c = c if s > 0 else -c
        acc[fm] = acc[fm] + c if fm in acc else c
    return TensorForm(a.n, acc)


def pairing(a: TensorForm, b: TensorForm) -> TensorForm:
    """``<a, b> = kappa(a b)``, a pure scalar form."""
    return kappa(wedge(a, b))


@lru_cache(maxsize=None)
def _triple_kappa(n: int, a: int, b: int, c: int):
    """``kappa(a b c)`` for blades: (form mask, sign) or None."""
    s1 = merge_sign(a, b)
    if s1 == 0:
        return None
    ab = a | b
    s2 = merge_sign(ab, c)
    if s2 == 0:
        return None
    r = _kappa_mask(n, ab | c)
    if r is None:
        return None
    return r[0], s1 * s2 * r[1]


# ---------------------------------------------------------------------------
# dbar


def dbar(a: TensorForm) -> TensorForm:
    """Dolbeault operator acting on coefficients (holomorphic frame).

    ``dbar(f B) = sum_j (df/dzbar_j) dzbar_j B``, a derivation of degree one.
    """
    n = a.n
    acc: dict = {}
    for m, c in a.terms.items():
        for j in range(n):
            g = 1 << (n + j)
            s = merge_sign(g, m)
            if s == 0:
                continue
            d = E.d_zbar(c, j)
            if d.is_zero():
                continue
            if s < 0:
                d = -d
            mm = g | m
            acc[mm] = acc[mm] + d if mm in acc else d
    return TensorForm(n, acc)


# ---------------------------------------------------------------------------
# contractions


def _frame_subsets(n: int, size: int, group: int):
    """Masks of frame (group 2) or coframe (group 3) blades of a given size."""
    if size < 0 or size > n:
        return []
    return [sum(1 << (group * n + i) for i in c) for c in combinations(range(n), size)]


@lru_cache(maxsize=None)
def _contract_weight_map(n: int, mu: int, mt: int):
    sh_u = blade_shape(n, mu)
    sh_t = blade_shape(n, mt)
    if sh_u.L or sh_t.K:
        raise AlgebraError("contract_weight needs u in forms(wedge V) and theta in forms(wedge V*)")
    i, j = sh_u.form_degree
    p, q = sh_t.form_degree
    k, l = len(sh_u.K), len(sh_t.L)
    if k < l:
        raise AlgebraError(f"contract_weight needs k >= l, got k={k}, l={l}")
    expo = (i + j) * l + (p + q) * sh_u.degree + l * (l - 1) // 2
    sgn = -1 if expo & 1 else 1
    out = []
    for nu in _frame_subsets(n, k - l, 3):
        r = _triple_kappa(n, mu, mt, nu)
        if r is None:
            continue
        fm, s = r
        # <f e_M, e*_M> = f, so the coefficient of f e_M is read off directly
        e_m = nu >> n
        res = _pairing_sign_left(n, fm, e_m)
        out.append((fm | e_m, sgn * s * res[1], res[0]))
    return tuple(out)


@lru_cache(maxsize=None)
def _pairing_sign_left(n: int, fm: int, e_m: int):
    """Canonical mask of ``f e_M`` and the sign of ``<f e_M, e*_M>``."""
    # form bits sit below frame bits, so f e_M is already canonical
    mask = fm | e_m
    r = _triple_kappa(n, mask, e_m << n, 0)
    return mask, r[1]


def _apply_map(n: int, coeff_pairs) -> TensorForm:
    acc: dict = {}
    for mmap, c in coeff_pairs:
        for entry in mmap:
            m, s = entry[0], entry[1]
            cc = c if s > 0 else -c
            acc[m] = acc[m] + cc if m in acc else cc
    return TensorForm(n, acc)


def contract_weight(u: TensorForm, theta: TensorForm) -> TensorForm:
    """``u ⌟ theta`` for ``u`` valued in ``wedge^k V`` and ``theta`` in ``wedge^l V*``.

    The result is characterised by
    ``<u⌟theta, nu*> = (-1)^((i+j)l + (p+q)#u + l(l-1)/2) <u, theta nu*>``
    for every ``nu*`` in ``wedge^(k-l) V*``.
    """
    u._check(theta)
    n = u.n
    pairs = []
    for mu, cu in u.terms.items():
        for mt, ct in theta.terms.items():
            pairs.append((_contract_weight_map(n, mu, mt), cu * ct))
    return _apply_map(n, pairs)


@lru_cache(maxsize=None)
def _iota_section_map(n: int, ma: int, mw: int):
    sh_a = blade_shape(n, ma)
    sh_w = blade_shape(n, mw)
    if sh_a.I or sh_a.J or sh_a.L or len(sh_a.K) != 1:
        raise AlgebraError("iota_section needs alpha in A^0(V)")
    if sh_w.K:
        raise AlgebraError("iota_section needs w valued in wedge^k V*")
    k = len(sh_w.L)
    out = []
    for nu in _frame_subsets(n, k - 1, 2):
        # <nu, R> = <alpha nu, w>
        r = _triple_kappa(n, ma, nu, mw)
        if r is None:
            continue
        fm, s = r
        # R component f e*_M contributes <e_M, f e*_M> = sign * f
        target = fm | (nu << n)
        r2 = _triple_kappa(n, nu, target, 0)
        out.append((target, s * r2[1]))
    return tuple(out)


def iota_section(alpha: TensorForm, w: TensorForm) -> TensorForm:
    """``iota_alpha w`` for ``alpha`` in ``A^0(V)``: ``<nu, iota_alpha w> = <alpha nu, w>``."""
    alpha._check(w)
    n = alpha.n
    pairs = []
    for ma, ca in alpha.terms.items():
        for mw, cw in w.terms.items():
            pairs.append((_iota_section_map(n, ma, mw), ca * cw))
    return _apply_map(n, pairs)


@lru_cache(maxsize=None)
def _iota_covector_map(n: int, mg: int, mv: int):
    sh_g = blade_shape(n, mg)
    sh_v = blade_shape(n, mv)
    if sh_g.I or sh_g.J or sh_g.K or len(sh_g.L) != 1:
        raise AlgebraError("iota_covector needs gamma in A^0(V*)")
    if sh_v.L:
        raise AlgebraError("iota_covector needs v valued in wedge^k V")
    i, j = sh_v.form_degree
    k = len(sh_v.K)
    pre = -1 if (i + j) & 1 else 1
    out = []
    for w in _frame_subsets(n, k - 1, 3):
        # <R, w> = (-1)^(i+j) <v, gamma w>
        r = _triple_kappa(n, mv, mg, w)
        if r is None:
            continue
        fm, s = r
        e_m = w >> n
        target, sp = _pairing_sign_left(n, fm, e_m)
        out.append((target, pre * s * sp))
    return tuple(out)


def iota_covector(gamma: TensorForm, v: TensorForm) -> TensorForm:
    """``iota_gamma v`` for ``gamma`` in ``A^0(V*)``: ``<iota_gamma v, w> = (-1)^(i+j) <v, gamma w>``."""
    gamma._check(v)
    n = gamma.n
    pairs = []
    for mg, cg in gamma.terms.items():
        for mv, cv in v.terms.items():
            pairs.append((_iota_covector_map(n, mg, mv), cg * cv))
    return _apply_map(n, pairs)


# ---------------------------------------------------------------------------
# metrics


class HermitianMetric:
    """Hermitian matrix ``h[i][j] = h_{i jbar}`` of Expr entries.

    Parameters
    ----------
    entries : list of list of Expr or numbers
    """

    def __init__(self, entries):
        rows = [[E._as_expr(x) for x in row] for row in entries]
        n = len(rows)
        if n == 0 or any(len(r) != n for r in rows):
            raise AlgebraError("metric must be a square matrix")
        for a in range(n):
            for b in range(a, n):
                if rows[a][b] != E.conj_expr(rows[b][a]):
                    raise AlgebraError(f"metric is not Hermitian at ({a}, {b})")
        self.entries = tuple(tuple(r) for r in rows)
        self.n = n

    @classmethod
    def identity(cls, n: int) -> "HermitianMetric":
        return cls([[1 if a == b else 0 for b in range(n)] for a in range(n)])

    @classmethod
    def diagonal(cls, values) -> "HermitianMetric":
        n = len(values)
        return cls([[values[a] if a == b else 0 for b in range(n)] for a in range(n)])

    def __getitem__(self, ij) -> Expr:
        return self.entries[ij[0]][ij[1]]

    def is_constant(self) -> bool:
        return all(x.is_constant() for row in self.entries for x in row)

    def is_identity(self) -> bool:
        return all(
            self.entries[a][b] == (E.ONE if a == b else E.ZERO)
            for a in range(self.n)
            for b in range(self.n)
        )

    def matrix(self, z) -> np.ndarray:
        """Numeric matrix at points ``z`` of shape ``(..., n)``; returns ``(..., n, n)``."""
        z = np.asarray(z, dtype=complex)
        flat = [x for row in self.entries for x in row]
        vals = E.evaluate(flat, z)
        return np.stack(vals, axis=-1).reshape(z.shape[:-1] + (self.n, self.n))

    def check_positive(self, z) -> None:
        H = self.matrix(z)
        try:
            np.linalg.cholesky(H)
        except np.linalg.LinAlgError as exc:
            raise AlgebraError("metric is not positive definite at an evaluated point") from exc

    def __eq__(self, o) -> bool:
        return isinstance(o, HermitianMetric) and self.entries == o.entries

    def __hash__(self) -> int:
        return hash(self.entries)


def evaluate_form(a: TensorForm, z) -> dict:
    """Numeric coefficients ``{mask: array}`` at points ``z`` of shape ``(..., n)``."""
    masks = list(a.terms)
    vals = E.evaluate([a.terms[m] for m in masks], z)
    return dict(zip(masks, vals))


def _minor_dets(G: np.ndarray, subsets):
    """Gram matrix over ``subsets`` of determinants of minors of ``G``."""
    m = len(subsets)
    out = np.empty((m, m), dtype=complex)
    for x, A in enumerate(subsets):
        for y, B in enumerate(subsets):
            if len(A) == 0:
                out[x, y] = 1.0
            else:
                out[x, y] = np.linalg.det(G[np.ix_(A, B)])
    return out


def inner(a: TensorForm, b: TensorForm, p, h: HermitianMetric | None = None, g=None) -> complex:
    """Hermitian inner product ``(a, b)`` at the single point ``p``.

    ``h`` is the bundle metric (``h(e_i, e_j) = h_{i jbar}``); ``g`` is the
    Gram matrix of ``dz_1..dz_n`` (identity by default, i.e. a unitary
    coframe).  ``e*`` uses the inverse metric and ``dzbar`` the conjugate of
    ``g``; blades get the determinant metrics.
    """
    a._check(b)
    n = a.n
    p = np.asarray(p, dtype=complex).reshape(n)
    H = np.eye(n, dtype=complex) if h is None else h.matrix(p)
    if h is not None:
        try:
            np.linalg.cholesky(H)
        except np.linalg.LinAlgError as exc:
            raise AlgebraError("metric is not positive definite at the point") from exc
    G = np.eye(n, dtype=complex) if g is None else np.asarray(g, dtype=complex)
    Hs = np.linalg.inv(H).T  # h^{i jbar} pairs e*_i with e*_j
    mats = (G, G.conj(), H, Hs)
    va = evaluate_form(a, p)
    vb = evaluate_form(b, p)
    total = 0j
    for ma, ca in va.items():
        sa = blade_shape(n, ma)
        for mb, cb in vb.items():
            sb = blade_shape(n, mb)
            w = complex(ca) * np.conj(complex(cb))
            if w == 0:
                continue
            for M, A, B in zip(mats, (sa.I, sa.J, sa.K, sa.L), (sb.I, sb.J, sb.K, sb.L)):
                if len(A) != len(B):
                    w = 0
                    break
                if A:
                    w *= np.linalg.det(M[np.ix_(A, B)])
            total += w
    return total


def norm_sq(a: TensorForm, h: HermitianMetric | None = None, g=None, p=None) -> float:
    """``(a, a)`` at ``p`` under the induced metric on mixed tensors."""
    if p is None:
        raise AlgebraError("norm_sq needs an evaluation point")
    v = inner(a, a, p, h, g)
    return max(float(v.real), 0.0)
