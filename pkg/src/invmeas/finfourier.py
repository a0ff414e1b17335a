"""Harmonic analysis on finite groups.

A group is a multiplication table over element indices ``0..N-1``.  The
Haar measure is the uniform probability ``1/N``, so

* convolution: ``(f1 * f2)(g) = (1/N) sum_h f1(g h^{-1}) f2(h)``;
* Fourier transform: ``F f(alpha) = (1/N) sum_g f(g) rho_alpha(g)``;
* inversion: ``f(g) = sum_alpha d_alpha tr(B_alpha rho_alpha(g)^{-1})``;
* Plancherel: ``(1/N) sum_g |f(g)|^2 = sum_alpha d_alpha tr(B_alpha B_alpha^*)``.

Character tables are computed by Burnside's method: simultaneous
eigenvectors of the class-multiplication matrices.  Irreducible
representations are cut out of the regular representation with the
isotypic projector and a random element of the commutant.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidTable, NumericalDegeneracy, SplitFailure
from .rng import as_generator

__all__ = [
    "FiniteGroup",
    "CharacterTable",
    "Irrep",
    "FourierImage",
    "cyclic",
    "symmetric",
    "alternating",
    "dihedral",
    "quaternion",
    "from_permutations",
    "conj_classes",
    "character_table",
    "class_function",
    "isotypic_projector",
    "regular_matrix",
    "extract_irrep",
    "all_irreps",
    "convolve",
    "fourier",
    "inverse_fourier",
    "plancherel_residual",
    "MAX_ORDER",
]

MAX_ORDER = 2000
_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class FiniteGroup:
    """Finite group given by its multiplication table ``table[g, h] = gh``."""

    table: np.ndarray
    name: str = ""
    labels: tuple = ()
    identity: int = field(init=False)
    inverse: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        t = np.asarray(self.table)
        if t.ndim != 2 or t.shape[0] != t.shape[1] or t.shape[0] == 0:
            raise InvalidTable("multiplication table must be a non-empty square array")
        if not np.issubdtype(t.dtype, np.integer):
            if not np.all(t == np.round(t)):
                raise InvalidTable("table entries must be integers")
            t = t.astype(np.int64)
        n = t.shape[0]
        if t.min() < 0 or t.max() >= n:
            raise InvalidTable("table entries must be element indices")
        full = np.arange(n)
        if not all(np.array_equal(np.sort(row), full) for row in t) or not all(
            np.array_equal(np.sort(col), full) for col in t.T
        ):
            raise InvalidTable("table is not a Latin square")
        ids = [e for e in range(n) if np.array_equal(t[e], full) and np.array_equal(t[:, e], full)]
        if not ids:
            raise InvalidTable("no identity element")
        e = ids[0]
        inv = np.argmax(t == e, axis=1)
        if not np.all(t[full, inv] == e) or not np.all(t[inv, full] == e):
            raise InvalidTable("missing two-sided inverses")
        _check_associative(t)
        t = t.astype(np.int64)
        t.setflags(write=False)
        inv.setflags(write=False)
        object.__setattr__(self, "table", t)
        object.__setattr__(self, "identity", int(e))
        object.__setattr__(self, "inverse", inv)

    @property
    def order(self):
        return self.table.shape[0]

    def mul(self, g, h):
        return int(self.table[g, h])


def _check_associative(t, exhaustive_limit=64, samples=20000):
    n = t.shape[0]
    if n <= exhaustive_limit:
        left = t[t]  # left[a, b, c] = (ab)c
        right = t[:, t]  # right[a, b, c] = a(bc)
        if not np.array_equal(left, right):
            raise InvalidTable("table is not associative")
        return
    gen = np.random.default_rng(0)
    a, b, c = gen.integers(0, n, size=(3, samples))
    if not np.array_equal(t[t[a, b], c], t[a, t[b, c]]):
        raise InvalidTable("table is not associative")


# ---------------------------------------------------------------- examples


def from_permutations(generators, cap=MAX_ORDER, name=""):
    """Group generated by permutations in one-line notation.

    A generator list containing 0 is read as 0-based, otherwise as 1-based.
    The identity is element 0; the closure stops with :class:`InvalidTable`
    beyond ``cap`` elements.
    """
    gens = [tuple(int(v) for v in g) for g in generators]
    if not gens:
        raise InvalidTable("at least one generator is required")
    deg = len(gens[0])
    if any(len(g) != deg for g in gens):
        raise InvalidTable("generators act on different sets")
    if all(0 not in g for g in gens):
        gens = [tuple(v - 1 for v in g) for g in gens]
    for g in gens:
        if sorted(g) != list(range(deg)):
            raise InvalidTable(f"{g} is not a permutation")
    ident = tuple(range(deg))
    elems = [ident]
    index = {ident: 0}
    frontier = [ident]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = tuple(g[i] for i in x)  # g after x
                if y not in index:
                    if len(elems) >= cap:
                        raise InvalidTable(f"group order exceeds cap {cap}")
                    index[y] = len(elems)
                    elems.append(y)
                    nxt.append(y)
        frontier = nxt
    arr = np.array(elems)
    # (gh)(i) = g(h(i))
    prod = arr[np.arange(len(elems))[:, None, None], arr[None, :, :]]
    table = np.array([[index[tuple(row)] for row in block] for block in prod])
    return FiniteGroup(table, name=name, labels=tuple(elems))


def cyclic(n):
    k = np.arange(n)
    return FiniteGroup((k[:, None] + k[None, :]) % n, name=f"Z{n}", labels=tuple(range(n)))


def symmetric(n):
    if n == 1:
        return cyclic(1)
    gens = [tuple([1, 0] + list(range(2, n))), tuple(list(range(1, n)) + [0])]
    return from_permutations(gens, name=f"S{n}")


def alternating(n):
    if n < 3:
        return cyclic(1)
    # the 3-cycles (1 2 k) generate A_n
    gens = []
    for k in range(2, n):
        p = list(range(n))
        p[0], p[1], p[k] = 1, k, 0
        gens.append(tuple(p))
    return from_permutations(gens, name=f"A{n}")


def dihedral(n):
    """Symmetry group of the regular ``n``-gon (order ``2 n``)."""
    rot = tuple((i + 1) % n for i in range(n))
    ref = tuple((-i) % n for i in range(n))
    return from_permutations([rot, ref], name=f"D{n}")


def quaternion():
    """``Q_8 = {+-1, +-i, +-j, +-k}`` from quaternion multiplication."""
    units = np.eye(4, dtype=np.int64)
    elems = np.concatenate([units, -units])

    def hamilton(p, q):
        a1, b1, c1, d1 = p
        a2, b2, c2, d2 = q
        return (
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        )

    index = {tuple(e): i for i, e in enumerate(elems)}
    table = np.array([[index[hamilton(p, q)] for q in elems] for p in elems])
    names = ("1", "i", "j", "k", "-1", "-i", "-j", "-k")
    return FiniteGroup(table, name="Q8", labels=names)


# ---------------------------------------------------------------- classes and characters


def conj_classes(group):
    """Conjugacy classes as sorted tuples; the identity class comes first."""
    t, inv = group.table, group.inverse
    n = group.order
    seen = np.full(n, -1)
    classes = []
    for x in [group.identity] + [g for g in range(n) if g != group.identity]:
        if seen[x] >= 0:
            continue
        orbit = np.unique(t[t[:, x], inv])  # g x g^{-1}
        seen[orbit] = len(classes)
        classes.append(tuple(int(v) for v in orbit))
    return classes


def _class_index(group, classes):
    idx = np.empty(group.order, dtype=np.int64)
    for c, members in enumerate(classes):
        idx[list(members)] = c
    return idx


def _class_constants(group, classes):
    """``A[j][i, k] = #{x in C_j : x^{-1} z_k in C_i}`` for representatives ``z_k``."""
    idx = _class_index(group, classes)
    k = len(classes)
    t, inv = group.table, group.inverse
    reps = np.array([c[0] for c in classes])
    consts = np.zeros((k, k, k))
    for j, members in enumerate(classes):
        xs = inv[list(members)]
        targets = idx[t[xs[:, None], reps[None, :]]]  # class of x^{-1} z_k
        for kk in range(k):
            np.add.at(consts[j, :, kk], targets[:, kk], 1)
    return consts


@dataclass(frozen=True, eq=False)
class CharacterTable:
    """Irreducible characters on conjugacy classes.

    ``chi[a, c]`` is the value of irrep ``a`` on class ``c``; rows are
    ordered by dimension with the trivial character first.
    """

    classes: tuple
    sizes: np.ndarray
    chi: np.ndarray
    dims: tuple
    order: int

    @property
    def count(self):
        return len(self.dims)

    def row_orthogonality_residual(self):
        gram = (self.chi * self.sizes) @ self.chi.conj().T / self.order
        return float(np.max(np.abs(gram - np.eye(self.count))))

    def column_orthogonality_residual(self):
        gram = self.chi.conj().T @ self.chi
        expect = np.diag(self.order / self.sizes)
        return float(np.max(np.abs(gram - expect)))

    def to_json(self):
        return {
            "order": self.order,
            "classes": [{"representative": int(c[0]), "size": len(c)} for c in self.classes],
            "dims": list(self.dims),
            "chi": [[[float(v.real), float(v.imag)] for v in row] for row in self.chi],
        }


def character_table(group, rng=0, max_order=MAX_ORDER, retries=10):
    """Character table by simultaneous diagonalisation of class-sum matrices.

    A random real combination ``sum_j r_j A_j`` of the class matrices is
    diagonalised; each eigenvector ``w`` (scaled so ``w[e] = 1``) gives the
    central character ``omega_j = |C_j| chi(C_j) / d`` with
    ``d^2 = N / sum_j |omega_j|^2 / |C_j|``.
    """
    n = group.order
    if n > max_order:
        raise InvalidTable(f"group order {n} exceeds bound {max_order}")
    classes = conj_classes(group)
    sizes = np.array([len(c) for c in classes], dtype=float)
    k = len(classes)
    consts = _class_constants(group, classes)
    gen = as_generator(rng)
    for _ in range(retries):
        coef = gen.standard_normal(k)
        m = np.tensordot(coef, consts, axes=1)
        vals, vecs = np.linalg.eig(m)  # A_j omega = omega_j omega
        gaps = np.abs(vals[:, None] - vals[None, :])
        np.fill_diagonal(gaps, np.inf)
        if k > 1 and gaps.min() < 1e-6 * max(1.0, np.abs(vals).max()):
            continue
        w = vecs / vecs[0]
        # common eigenvectors of every A_j
        ok = all(np.allclose(consts[j] @ w, w * w[j], atol=1e-7 * sizes.max()) for j in range(k))
        if not ok:
            continue
        d2 = n / np.sum(np.abs(w) ** 2 / sizes[:, None], axis=0)
        dims = np.rint(np.sqrt(d2.real)).astype(int)
        chi = (w * dims[None, :] / sizes[:, None]).T
        order = sorted(range(k), key=lambda a: (dims[a], not np.allclose(chi[a], 1), _sort_key(chi[a])))
        table = CharacterTable(tuple(classes), sizes, chi[order], tuple(int(dims[a]) for a in order), n)
        if int(np.sum(np.array(table.dims) ** 2)) != n or table.row_orthogonality_residual() > _TOL:
            continue
        return table
    raise NumericalDegeneracy("class-sum diagonalisation failed to separate the characters")


def _sort_key(row):
    return tuple(np.round(np.concatenate([row.real, row.imag]), 6))


def class_function(group, table, values):
    """Expand per-class values into a function on group elements."""
    idx = _class_index(group, table.classes)
    return np.asarray(values)[idx]


def regular_matrix(group, g):
    """Left regular representation ``L(g) e_h = e_{gh}`` as a permutation matrix."""
    n = group.order
    m = np.zeros((n, n))
    m[group.table[g], np.arange(n)] = 1
    return m


def isotypic_projector(group, table, alpha):
    """``P_alpha = (d_alpha / N) sum_g conj(chi_alpha(g)) L(g)`` on the regular representation.

    Entrywise ``P[x, y] = (d / N) conj(chi(x y^{-1}))``; an orthogonal
    projector of rank ``d^2`` onto the ``alpha``-isotypic component.
    """
    chi = class_function(group, table, table.chi[alpha])
    d = table.dims[alpha]
    xy = group.table[:, group.inverse]  # x y^{-1}
    return d / group.order * np.conj(chi[xy])


@dataclass(frozen=True, eq=False)
class Irrep:
    """Unitary irreducible representation; ``matrices[g]`` is ``rho(g)``."""

    dim: int
    matrices: np.ndarray

    def character(self):
        return np.trace(self.matrices, axis1=1, axis2=2)

    def homomorphism_residual(self, group):
        m = self.matrices
        prod = m[:, None] @ m[None, :]
        return float(np.max(np.abs(prod - m[group.table])))

    def unitarity_residual(self):
        m = self.matrices
        eye = np.eye(self.dim)
        return float(np.max(np.abs(np.swapaxes(m.conj(), 1, 2) @ m - eye)))


def extract_irrep(group, table, alpha, rng=0, tries=10):
    """Irreducible representation for row ``alpha`` of ``table``.

    The isotypic block (dimension ``d^2``) of the regular representation
    is orthonormalised; the average of ``L(g) X L(g)^{-1}`` over the group
    for a random Hermitian ``X`` commutes with the block, and any of its
    eigenspaces of dimension ``d`` carries the irrep.
    """
    d = table.dims[alpha]
    p = isotypic_projector(group, table, alpha)
    vals, vecs = np.linalg.eigh(p)
    q = vecs[:, vals > 0.5]
    if q.shape[1] != d * d:
        raise SplitFailure(f"isotypic block has dimension {q.shape[1]}, expected {d * d}")
    # L(g) q has rows q[g^{-1} x]
    lq = q[group.table[group.inverse]]  # lq[g] = L(g) q, rows q[g^{-1} x]
    blocks = np.einsum("ij,gjk->gik", q.conj().T, lq)  # restricted rep on the block
    gen = as_generator(rng)
    for _ in range(tries):
        if d == 1:
            w = np.ones((1, 1))
        else:
            x = gen.standard_normal((d * d, d * d)) + 1j * gen.standard_normal((d * d, d * d))
            x = x + x.conj().T
            avg = np.mean(blocks @ x @ np.swapaxes(blocks.conj(), 1, 2), axis=0)
            avg = (avg + avg.conj().T) / 2
            ev, evec = np.linalg.eigh(avg)
            spread = ev[d - 1] - ev[0]
            gap = ev[d] - ev[d - 1]
            if spread > 1e-8 * max(1.0, abs(ev).max()) or gap < 1e-6 * max(1.0, abs(ev).max()):
                continue
            w = evec[:, :d]
        rho = np.einsum("ji,gjk,kl->gil", w.conj(), blocks, w)
        irrep = Irrep(d, rho)
        chi = class_function(group, table, table.chi[alpha])
        if np.max(np.abs(irrep.character() - chi)) < 1e-7 and irrep.homomorphism_residual(group) < 1e-7:
            return irrep
    raise SplitFailure(f"could not split the isotypic block of irrep {alpha}")


def all_irreps(group, table=None, rng=0):
    table = table if table is not None else character_table(group, rng)
    gen = as_generator(rng)
    return table, [extract_irrep(group, table, a, gen) for a in range(table.count)]


# ---------------------------------------------------------------- convolution and Fourier


def convolve(group, f1, f2):
    """``(f1 * f2)(g) = (1/N) sum_h f1(g h^{-1}) f2(h)``."""
    f1 = np.asarray(f1)
    f2 = np.asarray(f2)
    ghinv = group.table[:, group.inverse]
    return (f1[ghinv] * f2[None, :]).sum(axis=1) / group.order


@dataclass(frozen=True, eq=False)
class FourierImage:
    blocks: tuple

    def __matmul__(self, other):
        return FourierImage(tuple(a @ b for a, b in zip(self.blocks, other.blocks)))

    def max_difference(self, other):
        return max(float(np.max(np.abs(a - b))) for a, b in zip(self.blocks, other.blocks))


def fourier(group, f, irreps):
    """``B_alpha = (1/N) sum_g f(g) rho_alpha(g)`` for every irrep."""
    f = np.asarray(f)
    return FourierImage(tuple(np.tensordot(f, r.matrices, axes=1) / group.order for r in irreps))


def inverse_fourier(group, image, irreps):
    """``f(g) = sum_alpha d_alpha tr(B_alpha rho_alpha(g)^{-1})``."""
    out = np.zeros(group.order, dtype=complex)
    for b, r in zip(image.blocks, irreps):
        inv = np.swapaxes(r.matrices.conj(), 1, 2)  # unitary: rho^{-1} = rho^*
        out += r.dim * np.einsum("ij,gji->g", b, inv)
    return out


def plancherel_residual(group, f, image, irreps):
    lhs = np.mean(np.abs(np.asarray(f)) ** 2)
    rhs = sum(r.dim * np.real(np.trace(b @ b.conj().T)) for b, r in zip(image.blocks, irreps))
    return float(abs(lhs - rhs))

