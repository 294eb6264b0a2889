"""Cech machinery on abstract simplicial nerves, in degrees 0..3.

A `Nerve` is the combinatorial nerve of a cover: a face-closed simplicial
complex truncated at degree 3 (the toolkit never needs cohomology above H^3).
Cochains take values in Z or in Z_k written additively; all cohomology is
computed exactly via integer Smith normal form, so torsion is exact, not a
floating-point byproduct.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from . import smith

MAX_DEGREE = 3


def _check_ring(ring):
    if ring == "Z":
        return ring
    if isinstance(ring, int) and ring >= 2:
        return ring
    raise ValueError(f"ring must be 'Z' or an integer modulus >= 2, got {ring!r}")


@dataclass(frozen=True)
class Nerve:
    """Face-closed simplicial complex with simplices listed per degree 0..3."""

    vertex_count: int
    simplices: tuple  # simplices[q] = sorted tuple of sorted vertex tuples

    @classmethod
    def from_simplices(cls, simplices, vertex_count=None):
        """Build a nerve from any iterable of simplices, closing under faces.

        Input simplices may be given in any order and with any vertex order;
        anything above degree 3 is truncated to its 3-skeleton.
        """
        by_degree = [set() for _ in range(MAX_DEGREE + 1)]
        max_vertex = -1
        for s in simplices:
            vs = tuple(sorted(set(int(v) for v in s)))
            if len(vs) != len(s):
                raise ValueError(f"simplex {s} has repeated vertices")
            if not vs:
                raise ValueError("empty simplex")
            if min(vs) < 0:
                raise ValueError(f"negative vertex in simplex {s}")
            max_vertex = max(max_vertex, vs[-1])
            top = min(len(vs), MAX_DEGREE + 1)
            for r in range(1, top + 1):
                for face in itertools.combinations(vs, r):
                    by_degree[r - 1].add(face)
        if vertex_count is None:
            vertex_count = max_vertex + 1
        elif max_vertex >= vertex_count:
            raise ValueError("simplex vertex exceeds vertex_count")
        for v in range(vertex_count):
            by_degree[0].add((v,))
        return cls(
            vertex_count=vertex_count,
            simplices=tuple(tuple(sorted(level)) for level in by_degree),
        )

    def __post_init__(self):
        if len(self.simplices) != MAX_DEGREE + 1:
            raise ValueError("simplices must list degrees 0..3")
        seen_all = set()
        for q, level in enumerate(self.simplices):
            for s in level:
                if len(s) != q + 1 or any(a >= b for a, b in zip(s, s[1:])):
                    raise ValueError(f"degree-{q} simplex {s} not strictly increasing")
                if s[0] < 0 or s[-1] >= self.vertex_count:
                    raise ValueError(f"simplex {s} out of vertex range")
                seen_all.add(s)
        # face closure
        for q in range(1, MAX_DEGREE + 1):
            for s in self.simplices[q]:
                for face in itertools.combinations(s, q):
                    if face not in seen_all:
                        raise ValueError(f"missing face {face} of {s}")

    def n_simplices(self, q):
        return len(self.simplices[q]) if 0 <= q <= MAX_DEGREE else 0

    def index(self, simplex):
        key = tuple(sorted(simplex))
        table = self._index_tables()[len(key) - 1]
        if key not in table:
            raise KeyError(f"simplex {simplex} not in nerve")
        return table[key]

    def _index_tables(self):
        tables = getattr(self, "_tables", None)
        if tables is None:
            tables = tuple({s: i for i, s in enumerate(level)} for level in self.simplices)
            object.__setattr__(self, "_tables", tables)
        return tables


@dataclass(frozen=True)
class Cochain:
    """Integer-valued q-cochain; `ring` is "Z" or a modulus k (values in [0,k))."""

    degree: int
    ring: object
    values: tuple

    def __post_init__(self):
        _check_ring(self.ring)
        if not (0 <= self.degree <= MAX_DEGREE):
            raise ValueError("cochain degree out of range 0..3")
        vals = tuple(int(v) for v in self.values)
        if self.ring != "Z":
            vals = tuple(v % self.ring for v in vals)
        object.__setattr__(self, "values", vals)

    def value_on(self, nerve, simplex):
        return self.values[nerve.index(simplex)]


def zero_cochain(nerve, degree, ring="Z"):
    return Cochain(degree, ring, (0,) * nerve.n_simplices(degree))


def _check_match(c, nerve):
    if len(c.values) != nerve.n_simplices(c.degree):
        raise ValueError(
            f"cochain/nerve mismatch: degree-{c.degree} cochain has {len(c.values)} "
            f"values for {nerve.n_simplices(c.degree)} simplices"
        )


def delta_matrix(nerve, q):
    """Integer matrix of the coboundary C^q -> C^{q+1}, rows = (q+1)-simplices."""
    if not 0 <= q < MAX_DEGREE:
        raise ValueError("coboundary defined for degrees 0..2")
    rows = nerve.n_simplices(q + 1)
    cols = nerve.n_simplices(q)
    mat = [[0] * cols for _ in range(rows)]
    for r, s in enumerate(nerve.simplices[q + 1]):
        for i in range(len(s)):
            face = s[:i] + s[i + 1 :]
            mat[r][nerve.index(face)] += (-1) ** i
    return mat


def coboundary(c, nerve):
    """(delta c)(sigma) = sum_i (-1)^i c(d_i sigma)."""
    _check_match(c, nerve)
    if c.degree >= MAX_DEGREE:
        raise ValueError("coboundary of a degree-3 cochain is not represented")
    mat = delta_matrix(nerve, c.degree)
    out = smith.matvec(mat, list(c.values))
    return Cochain(c.degree + 1, c.ring, tuple(out))


def is_cocycle(c, nerve):
    if c.degree == MAX_DEGREE:
        return True  # no degree-4 simplices are represented
    d = coboundary(c, nerve)
    if c.ring == "Z":
        return all(v == 0 for v in d.values)
    return all(v % c.ring == 0 for v in d.values)


def solve_coboundary(c, nerve):
    """A cochain b with delta b = c, or None when [c] != 0.

    Exact in both rings: over Z this is an integer linear solve, over Z_k a
    congruence solve, both through the Smith normal form of the coboundary
    matrix.
    """
    _check_match(c, nerve)
    if c.degree == 0:
        raise ValueError("degree-0 cochains are never coboundaries here")
    if not is_cocycle(c, nerve):
        raise ValueError("input is not a cocycle; it cannot be a coboundary")
    mat = delta_matrix(nerve, c.degree - 1)
    b = list(c.values)
    sol = smith.solve_integer(mat, b) if c.ring == "Z" else smith.solve_mod(mat, b, c.ring)
    if sol is None:
        return None
    return Cochain(c.degree - 1, c.ring, tuple(sol))


@dataclass(frozen=True)
class CohomologyResult:
    degree: int
    ring: object
    orders: tuple  # cyclic factor orders, 0 meaning an infinite factor
    generators: tuple = field(default=())  # one representative Cochain per order

    @property
    def trivial(self):
        return not self.orders


def cohomology(nerve, degree, ring="Z"):
    """H^degree(nerve; ring) as a list of cyclic factors with representatives."""
    _check_ring(ring)
    if not 0 <= degree <= MAX_DEGREE:
        raise ValueError("degree out of range 0..3")
    n = nerve.n_simplices(degree)
    up = delta_matrix(nerve, degree) if degree < MAX_DEGREE else []
    if not up:
        up = [[0] * n]  # no higher simplices: everything is a cocycle
    down = delta_matrix(nerve, degree - 1) if degree > 0 else [[0] * 0 for _ in range(n)]
    if ring == "Z":
        orders, gens = _cohomology_z(n, up, down)
    else:
        orders, gens = _cohomology_mod(n, up, down, ring)
    return CohomologyResult(
        degree=degree,
        ring=ring,
        orders=tuple(orders),
        generators=tuple(Cochain(degree, ring, tuple(g)) for g in gens),
    )


def _cohomology_z(n, up, down):
    kernel = smith.kernel_basis(up)  # n x z
    if not kernel or not kernel[0]:
        return [], []
    # the columns of the lower coboundary matrix are exactly the image lattice
    return smith.quotient_invariants(kernel, down)


def _cohomology_mod(n, up, down, k):
    # Work in the finite group (Z/k)^n: H = ker(up mod k) / im(down mod k).
    # Both subgroups contain k*Z^n, so lift to lattices in Z^n and quotient.
    if n == 0:
        return [], []
    snf = smith.smith_normal_form(up)
    gens = []  # columns generating ker(up mod k), from D y = 0 (mod k)
    ncols = n
    diag = snf.diagonal()
    for i in range(ncols):
        di = diag[i] if i < len(diag) else 0
        step = k // smith._gcd(di, k) if di else 1
        if step == k:
            continue  # only the k*Z^n part, added below
        gens.append([snf.v[r][i] * step for r in range(ncols)])
    for i in range(n):
        gens.append([k if r == i else 0 for r in range(n)])
    gen_mat = [[col[r] for col in gens] for r in range(n)]
    num_basis = smith.column_lattice_basis(gen_mat)
    # image generators: columns of the lower coboundary matrix, plus k*Z^n
    den_mat = [list(down[r]) + [k if c == r else 0 for c in range(n)] for r in range(n)]
    orders, reps = smith.quotient_invariants(num_basis, den_mat)
    reps = [[v % k for v in g] for g in reps]
    # orders divide k by construction; drop factors that became trivial mod k
    keep = [(o, g) for o, g in zip(orders, reps) if o != 1]
    return [o for o, _ in keep], [g for _, g in keep]


@dataclass(frozen=True)
class BocksteinResult:
    beta: Cochain  # integral degree-3 cocycle delta(lift)/k
    trivial: bool  # True when [beta] = 0 in H^3(nerve; Z)
    witness: Cochain | None  # integral 2-cochain b with delta b = beta, when trivial


def bockstein(c, nerve):
    """Integral Bockstein of a degree-2 mod-k cocycle.

    Lift the values to integers, apply the integer coboundary, divide by k.
    The triviality flag answers whether the class lifts: it is the spin-c
    style obstruction statement for the cocycle's class.
    """
    if c.degree != 2 or c.ring == "Z":
        raise ValueError("bockstein expects a degree-2 cochain over Z_k")
    _check_match(c, nerve)
    if not is_cocycle(c, nerve):
        raise ValueError("bockstein input must be a cocycle mod k")
    k = c.ring
    lift = Cochain(2, "Z", c.values)
    delta = coboundary(lift, nerve)
    assert all(v % k == 0 for v in delta.values)
    beta = Cochain(3, "Z", tuple(v // k for v in delta.values))
    witness = solve_coboundary(beta, nerve) if any(beta.values) else zero_cochain(nerve, 2)
    return BocksteinResult(beta=beta, trivial=witness is not None, witness=witness)


# ---------------------------------------------------------------------------
# shipped benchmark complexes


def tetrahedron_sphere():
    """Boundary of the 3-simplex: the minimal triangulated 2-sphere."""
    return Nerve.from_simplices(itertools.combinations(range(4), 3))


def projective_plane():
    """Minimal 6-vertex triangulation of the real projective plane."""
    faces = [
        (0, 1, 4), (0, 1, 5), (0, 2, 3), (0, 2, 4), (0, 3, 5),
        (1, 2, 3), (1, 2, 5), (1, 3, 4), (2, 4, 5), (3, 4, 5),
    ]
    return Nerve.from_simplices(faces)


def lens_complex(k):
    """Synthetic lens-type 3-complex with H^2(.;Z_k) = Z_k and H^3(.;Z) = Z_k.

    Suspension of a k-fold dunce cap (a disk whose boundary wraps a 3-vertex
    circle k times).  This carries the low-degree cohomology pattern of the
    cyclic classifying space, so the integral Bockstein maps the standard
    mod-k 2-cocycle to a generator of H^3 - the nontrivial-obstruction
    benchmark.  Closed 3-manifold models would not do this: their H^3 is Z.
    """
    if k < 2:
        raise ValueError("lens complex needs k >= 2")
    base = 3 * k  # a-circle vertices 0..3k-1, b-circle 3k..3k+2, apex 3k+3
    b0, apex = base, base + 3
    north, south = base + 4, base + 5
    tris = []
    for i in range(3 * k):
        j = (i + 1) % (3 * k)
        tris.append((i, j, b0 + j % 3))
        tris.append((i, b0 + i % 3, b0 + j % 3))
        tris.append((apex, i, j))
    simplices = []
    for t in tris:
        simplices.append(t)
        simplices.append(t + (north,))
        simplices.append(t + (south,))
    return Nerve.from_simplices(simplices)


def standard_lens_cocycle(k):
    """(nerve, cochain): the generating mod-k 2-cocycle on lens_complex(k)."""
    nerve = lens_complex(k)
    result = cohomology(nerve, 2, ring=k)
    if len(result.orders) != 1 or result.orders[0] != k:
        raise AssertionError("lens complex lost its expected H^2 mod k")
    return nerve, result.generators[0]
