"""The graded S^1-equivariant complex and its operators as sparse matrices.

Degree-k equivariant forms are sums of t^i (x) omega with omega an
invariant j-form and 2i + j = k; since 0 <= j <= n each total degree is a
finite direct sum of blocks (i, j) and no truncation in the polynomial
variable t is needed.  The equivariant derivative acts blockwise,

    d_eq (t^i (x) omega) = t^i (x) d(omega) + t^{i+1} (x) i_v(omega),

its adjoint is taken exactly with respect to the block-diagonal inner
product <t^i (x) omega, t^j (x) eta> = delta_ij <omega, eta>, and the
Laplacians (plain and Witten-deformed) are assembled by composition so
that symmetry and positive semi-definiteness are exact.  The adjoint's
blocks then coincide with t^i (x) d* and, for i >= 1 only, the lowering
block t^{i-1} (x) v* wedge --- the i = 0 lowering block must be absent,
which the tests assert.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .backend import BackendMatrices

__all__ = [
    "EqDegreeSpace",
    "EqForm",
    "EqOperator",
    "AssemblyError",
    "ConfigurationError",
    "degree_space",
    "mass_vector",
    "build_deq",
    "build_deq_star",
    "build_delta_eq",
    "build_deformed",
    "deformation_blocks",
    "expansion_residual",
    "t_shift_dims_match",
    "build_equivariant_de_rham",
    "EquivariantDeRham",
]


class AssemblyError(RuntimeError):
    """A block dimension mismatch while assembling an operator."""


class ConfigurationError(ValueError):
    """An operator was requested from a backend lacking the needed data."""


@dataclass(frozen=True)
class EqDegreeSpace:
    """Basis bookkeeping for the degree-k equivariant forms.

    blocks are the pairs (t_power i, form_degree j) with 2i + j = k and
    0 <= j <= n, ordered by increasing i; block_dims are the discretized
    invariant j-form dimensions, offsets their cumulative starts.
    """

    k: int
    n: int
    blocks: tuple[tuple[int, int], ...]
    block_dims: tuple[int, ...]
    offsets: tuple[int, ...]

    @property
    def dim(self) -> int:
        return self.offsets[-1] if self.offsets else 0

    def block_slice(self, idx: int) -> slice:
        return slice(self.offsets[idx], self.offsets[idx] + self.block_dims[idx])

    def block_index(self, i: int, j: int) -> int | None:
        for b, pair in enumerate(self.blocks):
            if pair == (i, j):
                return b
        return None


@dataclass
class EqForm:
    """A coefficient vector in one EqDegreeSpace."""

    space: EqDegreeSpace
    coeffs: np.ndarray

    def __post_init__(self):
        if self.coeffs.shape != (self.space.dim,):
            raise AssemblyError(
                f"coefficient length {self.coeffs.shape} does not match "
                f"space dimension {self.space.dim}")

    def block(self, i: int, j: int) -> np.ndarray:
        idx = self.space.block_index(i, j)
        if idx is None:
            raise KeyError(f"no block (i={i}, j={j}) in degree {self.space.k}")
        return self.coeffs[self.space.block_slice(idx)]


@dataclass
class EqOperator:
    """A sparse linear map between two equivariant degree spaces."""

    domain: EqDegreeSpace
    codomain: EqDegreeSpace
    matrix: sp.csr_matrix

    def __post_init__(self):
        if self.matrix.shape != (self.codomain.dim, self.domain.dim):
            raise AssemblyError(
                f"matrix shape {self.matrix.shape} does not match "
                f"({self.codomain.dim}, {self.domain.dim})")

    def __matmul__(self, other):
        if isinstance(other, EqOperator):
            if other.codomain != self.domain:
                raise AssemblyError("operator domains do not compose")
            return EqOperator(other.domain, self.codomain,
                              sp.csr_matrix(self.matrix @ other.matrix))
        return self.matrix @ other


def degree_space(backend: BackendMatrices, k: int) -> EqDegreeSpace:
    """Block list {(i, k-2i) : 0 <= k-2i <= n} with backend dimensions."""
    if k < 0:
        return EqDegreeSpace(k, backend.n, (), (), (0,))
    blocks = []
    dims = []
    for i in range(k // 2 + 1):
        j = k - 2 * i
        if 0 <= j <= backend.n:
            blocks.append((i, j))
            dims.append(backend.dims[j])
    offsets = [0]
    for d in dims:
        offsets.append(offsets[-1] + d)
    return EqDegreeSpace(k, backend.n, tuple(blocks), tuple(dims), tuple(offsets))


def mass_vector(backend: BackendMatrices, space: EqDegreeSpace) -> np.ndarray:
    """Diagonal of the inner product on a degree space (blockwise masses)."""
    if space.dim == 0:
        return np.zeros(0)
    return np.concatenate([backend.mass[j] for (_, j) in space.blocks])


def _assemble_blocks(backend: BackendMatrices, dom: EqDegreeSpace,
                     cod: EqDegreeSpace, entries) -> EqOperator:
    """Place per-(i,j) block matrices into the (codomain x domain) grid.

    entries: iterable of (target (i,j), source (i,j), matrix).
    """
    grid = [[None] * len(dom.blocks) for _ in range(len(cod.blocks))]
    for tgt, src, mat in entries:
        bi = cod.block_index(*tgt)
        bj = dom.block_index(*src)
        if bi is None or bj is None:
            continue
        expected = (cod.block_dims[bi], dom.block_dims[bj])
        if mat.shape != expected:
            raise AssemblyError(
                f"block {src}->{tgt}: matrix shape {mat.shape}, expected {expected}")
        grid[bi][bj] = mat if grid[bi][bj] is None else grid[bi][bj] + mat
    if not cod.blocks or not dom.blocks:
        return EqOperator(dom, cod, sp.csr_matrix((cod.dim, dom.dim)))
    # bmat requires at least one block per row/column to infer sizes.
    for bi in range(len(cod.blocks)):
        if all(grid[bi][bj] is None for bj in range(len(dom.blocks))):
            grid[bi][0] = sp.csr_matrix((cod.block_dims[bi], dom.block_dims[0]))
    for bj in range(len(dom.blocks)):
        if all(grid[bi][bj] is None for bi in range(len(cod.blocks))):
            grid[0][bj] = grid[0][bj] if grid[0][bj] is not None else \
                sp.csr_matrix((cod.block_dims[0], dom.block_dims[bj]))
    return EqOperator(dom, cod, sp.csr_matrix(sp.bmat(grid, format="csr")))


def build_deq(backend: BackendMatrices, k: int) -> EqOperator:
    """The equivariant derivative from degree k to degree k+1.

    Block (i, j) -> (i, j+1) is d_j and block (i, j) -> (i+1, j-1) is the
    contraction i_v; all other blocks vanish.
    """
    dom = degree_space(backend, k)
    cod = degree_space(backend, k + 1)
    entries = []
    for (i, j) in dom.blocks:
        if j + 1 <= backend.n:
            entries.append(((i, j + 1), (i, j), backend.d[j]))
        if j - 1 >= 0:
            entries.append(((i + 1, j - 1), (i, j), backend.iv[j]))
    return _assemble_blocks(backend, dom, cod, entries)


def adjoint(backend: BackendMatrices, op: EqOperator) -> EqOperator:
    """Exact adjoint with respect to the blockwise mass inner products."""
    m_dom = mass_vector(backend, op.domain)
    m_cod = mass_vector(backend, op.codomain)
    if (m_dom.size and m_dom.min() <= 0.0) or (m_cod.size and m_cod.min() <= 0.0):
        raise ConfigurationError("mass inner product is not positive")
    if op.domain.dim == 0 or op.codomain.dim == 0:
        return EqOperator(op.codomain, op.domain,
                          sp.csr_matrix((op.domain.dim, op.codomain.dim)))
    mat = sp.diags(1.0 / m_dom) @ op.matrix.T @ sp.diags(m_cod)
    return EqOperator(op.codomain, op.domain, sp.csr_matrix(mat))


def build_deq_star(backend: BackendMatrices, k: int) -> EqOperator:
    """The grade -1 adjoint of the equivariant derivative (degree k -> k-1).

    Defined as the exact matrix adjoint of build_deq(backend, k-1); its
    blocks coincide with t^i (x) d* and, when i >= 1, t^{i-1} (x) v* wedge.
    """
    return adjoint(backend, build_deq(backend, k - 1))


def build_delta_eq(backend: BackendMatrices, k: int) -> EqOperator:
    """The equivariant Laplacian d_eq* d_eq + d_eq d_eq* on degree k."""
    up = build_deq(backend, k)
    mat = adjoint(backend, up).matrix @ up.matrix
    if k >= 1:
        down = build_deq(backend, k - 1)
        if down.domain.dim:
            mat = mat + down.matrix @ adjoint(backend, down).matrix
    space = degree_space(backend, k)
    return EqOperator(space, space, sp.csr_matrix(mat))


def deformation_blocks(backend: BackendMatrices, k: int) -> EqOperator:
    """The wedge-by-df operator in degree k (t-diagonal, degree +1)."""
    if backend.dfwedge is None:
        raise ConfigurationError(
            "backend has no invariant function sampled on its grid; "
            "deformed operators are unavailable")
    dom = degree_space(backend, k)
    cod = degree_space(backend, k + 1)
    entries = []
    for (i, j) in dom.blocks:
        if j + 1 <= backend.n and j < len(backend.dfwedge):
            entries.append(((i, j + 1), (i, j), backend.dfwedge[j]))
    return _assemble_blocks(backend, dom, cod, entries)


def build_deformed(backend: BackendMatrices, s: float, k: int):
    """(d_eq,s, d_eq,s*, Delta_eq,s) at deformation parameter s >= 0.

    d_eq,s = d_eq + s (df wedge); the adjoint is exact; the Laplacian is
    assembled by composition.  At s = 0 the undeformed operators are
    returned unchanged, so equality is bitwise.
    """
    if s < 0:
        raise ConfigurationError(f"deformation parameter s = {s} < 0")
    if s == 0.0:
        d = build_deq(backend, k)
        return d, build_deq_star(backend, k + 1), build_delta_eq(backend, k)
    d_lo = build_deq(backend, k - 1) if k >= 1 else None
    d_up = build_deq(backend, k)
    p_up = deformation_blocks(backend, k)
    ds_up = EqOperator(d_up.domain, d_up.codomain,
                       sp.csr_matrix(d_up.matrix + s * p_up.matrix))
    mat = adjoint(backend, ds_up).matrix @ ds_up.matrix
    ds_lo = None
    if d_lo is not None and d_lo.domain.dim:
        p_lo = deformation_blocks(backend, k - 1)
        ds_lo = EqOperator(d_lo.domain, d_lo.codomain,
                           sp.csr_matrix(d_lo.matrix + s * p_lo.matrix))
        mat = mat + ds_lo.matrix @ adjoint(backend, ds_lo).matrix
    space = degree_space(backend, k)
    delta = EqOperator(space, space, sp.csr_matrix(mat))
    return ds_up, adjoint(backend, ds_up), delta


def _block_diagonal_term(backend: BackendMatrices, space: EqDegreeSpace,
                         per_degree) -> sp.csr_matrix:
    if space.dim == 0:
        return sp.csr_matrix((0, 0))
    return sp.csr_matrix(sp.block_diag([per_degree[j] for (_, j) in space.blocks]))


def expansion_residual(backend: BackendMatrices, s: float, k: int,
                       n_probes: int = 20, seed: int = 1234) -> float:
    """Relative defect of Delta_eq,s = Delta_eq + s^2 |df|^2 + s H_f.

    Both sides are assembled independently: the left by composing the
    deformed derivative with its exact adjoint, the right from the
    undeformed Laplacian plus the backend's multiplication and Clifford
    Hessian matrices.  The operator norms are estimated on n_probes
    mass-normalized pseudo-random vectors (fixed seed).
    """
    if backend.mult_df2 is None:
        raise ConfigurationError("backend carries no |df|^2 data")
    _, _, delta_s = build_deformed(backend, s, k)
    delta0 = build_delta_eq(backend, k)
    space = delta0.domain
    if space.dim == 0:
        return 0.0
    rhs = delta0.matrix \
        + s * s * _block_diagonal_term(backend, space, backend.mult_df2) \
        + s * _block_diagonal_term(backend, space, backend.cliff_hess)
    diff = sp.csr_matrix(delta_s.matrix - rhs)
    mvec = mass_vector(backend, space)
    rng = np.random.default_rng(seed)
    num = 0.0
    den = 0.0
    for _ in range(max(n_probes, 1)):
        x = rng.standard_normal(space.dim)
        x /= np.sqrt(x @ (mvec * x))
        rx = diff @ x
        lx = delta_s.matrix @ x
        num = max(num, float(np.sqrt(rx @ (mvec * rx))))
        den = max(den, float(np.sqrt(lx @ (mvec * lx))))
    return num / den if den > 0 else 0.0


def t_shift_dims_match(backend: BackendMatrices, k: int) -> bool:
    """True when t-multiplication maps degree k bijectively onto k+2."""
    lo = degree_space(backend, k)
    hi = degree_space(backend, k + 2)
    return [(i + 1, j) for (i, j) in lo.blocks] == list(hi.blocks)


@dataclass
class EquivariantDeRham:
    """The grading-reversing operator d_eq + d_eq* on Omega^n + Omega^{n+1}.

    The derivative leaving the top degree is folded back through the
    t-shift isomorphism Omega^{n+2} ~ t (x) Omega^n, which on coefficients
    is the identity because the block lists align.  Its square equals the
    pair of Laplacians, and the kernel-dimension difference
    dim ker Delta^n - dim ker Delta^{n+1} is the discrete Fredholm index,
    equal to the Euler characteristic.
    """

    operator: sp.csr_matrix
    delta_n: EqOperator
    delta_n1: EqOperator
    n: int

    def square_defect(self) -> float:
        """Blockwise relative error of operator^2 against the Laplacians."""
        sq = sp.csr_matrix(self.operator @ self.operator)
        dim_n = self.delta_n.domain.dim
        target = sp.block_diag([self.delta_n.matrix, self.delta_n1.matrix])
        diff = sq - sp.csr_matrix(target)
        scale = max(np.abs(self.delta_n.matrix.data).max(),
                    np.abs(self.delta_n1.matrix.data).max())
        if diff.nnz == 0:
            return 0.0
        return float(np.abs(diff.data).max() / scale)


def build_equivariant_de_rham(backend: BackendMatrices) -> EquivariantDeRham:
    n = backend.n
    if not t_shift_dims_match(backend, n) or not t_shift_dims_match(backend, n - 1):
        raise AssemblyError("t-shift does not align the top degrees")
    up = build_deq(backend, n)                 # Omega^n -> Omega^{n+1}
    down_raw = build_deq(backend, n + 1)       # Omega^{n+1} -> Omega^{n+2} ~ Omega^n
    space_n = degree_space(backend, n)
    down = EqOperator(down_raw.domain, space_n, down_raw.matrix)
    up_star = adjoint(backend, up)
    down_star = adjoint(backend, down)
    top_right = sp.csr_matrix(up_star.matrix + down.matrix)
    bottom_left = sp.csr_matrix(up.matrix + down_star.matrix)
    op = sp.bmat([[None, top_right], [bottom_left, None]], format="csr")
    return EquivariantDeRham(
        operator=sp.csr_matrix(op),
        delta_n=build_delta_eq(backend, n),
        delta_n1=build_delta_eq(backend, n + 1),
        n=n,
    )
