"""Discretized invariant-form calculus on S^1-symmetric model manifolds.

A surface of revolution carries coordinates (theta, psi) with metric
g = dtheta^2 + a(theta)^2 dpsi^2 and a circle action psi -> psi + m*t
generated by v = m * d/dpsi.  Invariant forms have theta-dependent
components only,

    omega = u(theta) + g(theta) dtheta + h(theta) dpsi + w(theta) dtheta^dpsi,

so the whole calculus (d, i_v, v* wedge, df wedge, masses, the squared
gradient |df|^2 and the Clifford Hessian of an invariant f) reduces to
banded matrices on a 1-D grid.  Scalar-like components (u, h) live on
integer nodes, derivative-like components (g, w) on half-integer nodes;
a single narrow difference matrix serves every occurrence of d/dtheta,
which makes d.d = 0, i_v.i_v = 0 and the Cartan identity d i_v + i_v d = 0
exact in floating point, not merely small.

Besides surfaces the catalog exposes the circle acting on itself, whose
invariant complex collapses to the two-dimensional basis {1, dpsi}.
Planes and cylinders with Gaussian-confined spectra (used as flat local
models around critical points and orbits) are obtained from the same
builder through 'cut' (Dirichlet) ends.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp

__all__ = [
    "RevolutionProfile",
    "InvariantMorseFunction",
    "BackendMatrices",
    "BackendError",
    "ProfileValidationError",
    "DegenerateCriticalLevelError",
    "build_backend",
    "catalog",
    "validate_backend",
    "flat_point_profile",
    "flat_orbit_profile",
    "CATALOG_CASES",
]

END_KINDS = ("pole", "periodic", "cut", "free")

POLE_SLOPE_TOL = 1e-6
POLE_GRAD_TOL = 1e-8
DEGENERACY_TOL = 1e-8


class BackendError(Exception):
    """Raised when assembled matrices violate a structural identity."""


class ProfileValidationError(ValueError):
    """Raised for geometric inputs that cannot define a smooth model."""


class DegenerateCriticalLevelError(ValueError):
    """Raised when an invariant function has a flat critical level."""


@dataclass(frozen=True)
class RevolutionProfile:
    """Geometry of one S^1-model: orbit radius profile and action speed.

    theta_max : extent of the profile coordinate (arc length).
    ends      : pair of end kinds, or ("periodic", "periodic").
    a         : orbit radius a(theta) > 0 in the interior.
    a_prime   : derivative of a (used for validation only).
    weight    : action speed m >= 0, v = m * d/dpsi (m = 0 is allowed for
                flat local models with trivial rotation).
    n_grid    : number of integer theta nodes, at least 16.
    kind      : "surface" for the 2-D models, "circle" for M = S^1 itself.
    """

    name: str
    theta_max: float
    ends: tuple[str, str]
    a: Callable[[np.ndarray], np.ndarray]
    a_prime: Callable[[np.ndarray], np.ndarray]
    weight: int
    n_grid: int
    kind: str = "surface"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("surface", "circle"):
            raise ProfileValidationError(f"unknown profile kind {self.kind!r}")
        for e in self.ends:
            if e not in END_KINDS:
                raise ProfileValidationError(f"unknown end kind {e!r}")
        if ("periodic" in self.ends) and self.ends != ("periodic", "periodic"):
            raise ProfileValidationError("periodic profiles must be periodic at both ends")
        if self.n_grid < 16:
            raise ProfileValidationError(f"n_grid = {self.n_grid} < 16")
        if self.theta_max <= 0:
            raise ProfileValidationError("theta_max must be positive")
        if self.weight < 0 or int(self.weight) != self.weight:
            raise ProfileValidationError("weight must be a nonnegative integer")

    @property
    def periodic(self) -> bool:
        return self.ends[0] == "periodic"


@dataclass(frozen=True)
class InvariantMorseFunction:
    """An invariant function f(theta) with its first two derivatives.

    Invariance (v.f = 0) is automatic: there is no psi dependence.
    At a pole end smoothness forces f'(pole) = 0, which build_backend
    validates.
    """

    name: str
    f: Callable[[np.ndarray], np.ndarray]
    fp: Callable[[np.ndarray], np.ndarray]
    fpp: Callable[[np.ndarray], np.ndarray]


@dataclass
class BackendMatrices:
    """The assembled calculus of one model, as sparse matrices per degree.

    Degree-j objects act on coefficient vectors of the invariant j-form
    space; 1-forms are stored as the concatenation (g | h) of the dtheta
    and dpsi components.  All adjoint-like matrices elsewhere in the
    package are derived from these together with the diagonal masses.

    d[j]        : Omega^j -> Omega^{j+1}, exterior derivative.
    iv[j]       : Omega^j -> Omega^{j-1}, contraction with v (None at j=0).
    vstar[j]    : Omega^j -> Omega^{j+1}, exterior product with v*; the
                  exact mass-adjoint of iv[j+1].
    dfwedge[j]  : Omega^j -> Omega^{j+1}, exterior product with df (None
                  when no invariant function was supplied).
    mult_df2[j] : Omega^j -> Omega^j, the scheme's multiplication by |df|^2.
    cliff_hess[j]: Omega^j -> Omega^j, the scheme's Clifford Hessian; its
                  blocks are consistent with fpp*Z1 + (a'/a)*fp*Z2 in the
                  orthonormal frame, with Z-signs (-1,-1) on functions,
                  (+1,-1)/(-1,+1) on dtheta/dpsi components and (+1,+1)
                  on dtheta^dpsi components.
    mass[j]     : positive diagonal of the L^2 inner product.
    """

    n: int
    dims: list[int]
    mass: list[np.ndarray]
    d: list[sp.csr_matrix]
    iv: list
    vstar: list
    dfwedge: list
    mult_df2: list
    cliff_hess: list
    profile: RevolutionProfile
    f: InvariantMorseFunction | None
    poles: list[float]
    weight: int
    theta_int: np.ndarray | None = None
    theta_half: np.ndarray | None = None
    u_keep: np.ndarray | None = None
    h_keep: np.ndarray | None = None

    @property
    def has_deformation(self) -> bool:
        return self.f is not None

    def clifford_signs(self, j: int) -> list[tuple[int, int]]:
        """(Z1, Z2) eigenvalue pairs of the components of degree j."""
        return {0: [(-1, -1)], 1: [(+1, -1), (-1, +1)], 2: [(+1, +1)]}[j]


def _adjoint(mat: sp.spmatrix, mass_dom: np.ndarray, mass_cod: np.ndarray) -> sp.csr_matrix:
    """Exact adjoint of mat w.r.t. diagonal masses on domain and codomain."""
    return sp.csr_matrix(
        sp.diags(1.0 / mass_dom) @ mat.T @ sp.diags(mass_cod)
    )


def _difference_average(n_int: int, dx: float, periodic: bool):
    """Narrow difference and average matrices from integer to half nodes."""
    if periodic:
        rows = np.repeat(np.arange(n_int), 2)
        cols = np.empty(2 * n_int, dtype=int)
        cols[0::2] = np.arange(n_int)
        cols[1::2] = (np.arange(n_int) + 1) % n_int
        dvals = np.tile([-1.0 / dx, 1.0 / dx], n_int)
        avals = np.tile([0.5, 0.5], n_int)
        shape = (n_int, n_int)
    else:
        m = n_int - 1
        rows = np.repeat(np.arange(m), 2)
        cols = np.empty(2 * m, dtype=int)
        cols[0::2] = np.arange(m)
        cols[1::2] = np.arange(m) + 1
        dvals = np.tile([-1.0 / dx, 1.0 / dx], m)
        avals = np.tile([0.5, 0.5], m)
        shape = (m, n_int)
    D = sp.csr_matrix((dvals, (rows, cols)), shape=shape)
    A = sp.csr_matrix((avals, (rows, cols)), shape=shape)
    return D, A


def _circle_backend(profile: RevolutionProfile) -> BackendMatrices:
    # M = S^1 acting on itself with speed m: the invariant complex is the
    # two-dimensional span of {1, dpsi}; every theta dependence collapses
    # because the manifold is a single orbit.
    m = float(profile.weight)
    vol = 2.0 * math.pi
    z11 = sp.csr_matrix((1, 1))
    return BackendMatrices(
        n=1,
        dims=[1, 1],
        mass=[np.array([vol]), np.array([vol])],
        d=[z11.copy()],
        iv=[None, sp.csr_matrix(np.array([[m]]))],
        vstar=[sp.csr_matrix(np.array([[m]]))],
        dfwedge=None,
        mult_df2=None,
        cliff_hess=None,
        profile=profile,
        f=None,
        poles=[],
        weight=profile.weight,
    )


def build_backend(profile: RevolutionProfile,
                  f: InvariantMorseFunction | None) -> BackendMatrices:
    """Assemble the invariant calculus of one model.

    Validates the geometry (a > 0 in the interior, |a'| = 1 at poles) and
    the compatibility of f with the ends (f'(pole) = 0).  The returned
    matrices satisfy d.d = 0, i_v.i_v = 0 and d i_v + i_v d = 0 exactly;
    validate_backend re-checks these and the mass positivity.
    """
    if profile.kind == "circle":
        return _circle_backend(profile)

    N = profile.n_grid
    L = profile.theta_max
    periodic = profile.periodic
    if periodic:
        dx = L / N
        th_i = dx * np.arange(N)
    else:
        dx = L / (N - 1)
        th_i = dx * np.arange(N)
    th_h = th_i + dx / 2.0
    if not periodic:
        th_h = th_h[:-1]

    a_i = np.asarray(profile.a(th_i), dtype=float)
    a_h = np.asarray(profile.a(th_h), dtype=float)

    # Geometric validation on half nodes (always interior) and the
    # interior integer nodes.
    if np.any(a_h <= 0.0):
        raise ProfileValidationError(
            f"profile {profile.name!r}: a(theta) <= 0 at an interior node")
    interior = np.ones(N, dtype=bool)
    poles: list[float] = []
    for side, node in ((0, 0), (1, N - 1)):
        kind = profile.ends[side] if not periodic else "periodic"
        if kind == "pole":
            interior[node] = False
            poles.append(th_i[node])
            slope = abs(float(profile.a_prime(np.array([th_i[node]]))[0]))
            if abs(a_i[node]) > 1e-9 * max(1.0, a_h.max()):
                raise ProfileValidationError(
                    f"profile {profile.name!r}: a does not vanish at the pole end {side}")
            if abs(slope - 1.0) > POLE_SLOPE_TOL:
                raise ProfileValidationError(
                    f"profile {profile.name!r}: |a'| = {slope:.3e} != 1 at pole end {side} "
                    "(metric would have a cone singularity)")
        elif kind == "cut":
            interior[node] = False
    if np.any(a_i[interior] <= 0.0):
        raise ProfileValidationError(
            f"profile {profile.name!r}: a(theta) <= 0 at an interior node")

    if f is not None and not periodic:
        for side, node in ((0, 0), (1, N - 1)):
            if profile.ends[side] == "pole":
                grad = float(f.fp(np.array([th_i[node]]))[0])
                if abs(grad) > POLE_GRAD_TOL:
                    raise ProfileValidationError(
                        f"{f.name!r} is not smooth at the pole end {side}: "
                        f"f'({th_i[node]:.6f}) = {grad:.3e} != 0")
    if f is not None and periodic:
        ends = np.array([0.0, L])
        if (abs(np.diff(f.f(ends))[0]) > 1e-9
                or abs(np.diff(f.fp(ends))[0]) > 1e-9):
            raise ProfileValidationError(
                f"{f.name!r} does not close up on the periodic profile")

    # Degree-of-freedom masks.  u and h are dropped at Dirichlet ('cut')
    # ends and stay at natural ('free') ends; at poles u stays (an even,
    # smooth extension) while h is pinned to zero (dpsi components of
    # smooth forms vanish there).  The two choices realize the relative
    # and absolute complexes of a manifold with boundary.  g and w live
    # on half nodes and always stay.
    u_keep = np.ones(N, dtype=bool)
    h_keep = np.ones(N, dtype=bool)
    if not periodic:
        for side, node in ((0, 0), (1, N - 1)):
            kind = profile.ends[side]
            if kind in ("pole", "cut"):
                h_keep[node] = False
            if kind == "cut":
                u_keep[node] = False

    D_full, A_full = _difference_average(N, dx, periodic)
    n_half = D_full.shape[0]

    # Dual-cell masses.  Functions integrate against a(theta) d(theta),
    # dpsi components against 1/a; half-node components use the plain cell
    # value.  Pole end cells use the midpoint of the half cell so that the
    # quadrature stays second order where a vanishes linearly.
    if periodic:
        a_h_prev = np.roll(a_h, 1)
        mu_u_full = 0.5 * dx * (a_h_prev + a_h)
        mu_h_full = 0.5 * dx * (1.0 / a_h_prev + 1.0 / a_h)
    else:
        mu_u_full = np.empty(N)
        mu_u_full[1:-1] = 0.5 * dx * (a_h[:-1] + a_h[1:])
        mu_h_full = np.empty(N)
        mu_h_full[1:-1] = 0.5 * dx * (1.0 / a_h[:-1] + 1.0 / a_h[1:])
        for side, node, sample in ((0, 0, dx / 4.0), (1, N - 1, L - dx / 4.0)):
            a_adj = a_h[0 if side == 0 else -1]
            if profile.ends[side] == "pole":
                # half-cell midpoint rule keeps the quadrature second
                # order where a vanishes linearly
                mu_u_full[node] = 0.5 * dx * float(profile.a(np.array([sample]))[0])
            else:
                mu_u_full[node] = 0.5 * dx * a_adj
            mu_h_full[node] = 0.5 * dx / a_adj
    mu_u = mu_u_full[u_keep]
    mu_h = mu_h_full[h_keep]
    nu_g = dx * a_h
    nu_w = dx / a_h

    dims = [int(u_keep.sum()), int(n_half + h_keep.sum()), int(n_half)]
    mass = [mu_u, np.concatenate([nu_g, mu_h]), nu_w]

    D_u = sp.csr_matrix(D_full[:, u_keep])
    D_h = sp.csr_matrix(D_full[:, h_keep])
    A_u = sp.csr_matrix(A_full[:, u_keep])
    A_h = sp.csr_matrix(A_full[:, h_keep])

    zero_g = sp.csr_matrix((n_half, dims[0]))

    # d: d(u) = u' dtheta ; d(g dtheta + h dpsi) = h' dtheta^dpsi.
    d0 = sp.csr_matrix(sp.vstack([D_u, sp.csr_matrix((int(h_keep.sum()), dims[0]))]))
    d1 = sp.csr_matrix(sp.hstack([sp.csr_matrix((n_half, n_half)), D_h]))

    # i_v: i_v(h dpsi) = m h ; i_v(w dtheta^dpsi) = -m w dtheta.
    m = float(profile.weight)
    # h nodes are a subset of u nodes, so the injection row of an h dof is
    # its position among the kept u nodes.
    inj_rows = np.where(h_keep[u_keep])[0]
    inj_hu = sp.csr_matrix(
        (np.ones(int(h_keep.sum())), (inj_rows, np.arange(int(h_keep.sum())))),
        shape=(dims[0], int(h_keep.sum())))
    iv1 = sp.csr_matrix(sp.hstack([sp.csr_matrix((dims[0], n_half)), m * inj_hu]))
    iv2 = sp.csr_matrix(sp.vstack([-m * sp.identity(n_half, format="csr"),
                                   sp.csr_matrix((int(h_keep.sum()), n_half))]))

    # v* wedge as the exact mass-adjoint of i_v; entrywise this is
    # multiplication by m a^2 up to the quadrature's own a^2 average.
    vstar0 = _adjoint(iv1, mass[1], mass[0])
    vstar1 = _adjoint(iv2, mass[2], mass[1])

    dfwedge = None
    mult_df2 = None
    cliff_hess = None
    if f is not None:
        sigma = np.asarray(f.fp(th_h), dtype=float)
        S = sp.diags(sigma)
        P0c = sp.csr_matrix(S @ A_u)          # u -> g channel
        P1c = sp.csr_matrix(S @ A_h)          # h -> w channel
        P0 = sp.csr_matrix(sp.vstack([P0c, sp.csr_matrix((int(h_keep.sum()), dims[0]))]))
        P1 = sp.csr_matrix(sp.hstack([sp.csr_matrix((n_half, n_half)), P1c]))
        dfwedge = [P0, P1]

        P0c_adj = _adjoint(P0c, mu_u, nu_g)
        P1c_adj = _adjoint(P1c, mu_h, nu_w)
        D_u_adj = _adjoint(D_u, mu_u, nu_g)
        D_h_adj = _adjoint(D_h, mu_h, nu_w)

        mult_df2 = [
            sp.csr_matrix(P0c_adj @ P0c),
            sp.csr_matrix(sp.block_diag([P0c @ P0c_adj, P1c_adj @ P1c])),
            sp.csr_matrix(P1c @ P1c_adj),
        ]
        cliff_hess = [
            sp.csr_matrix(D_u_adj @ P0c + P0c_adj @ D_u),
            sp.csr_matrix(sp.block_diag([
                D_u @ P0c_adj + P0c @ D_u_adj,
                D_h_adj @ P1c + P1c_adj @ D_h,
            ])),
            sp.csr_matrix(D_h @ P1c_adj + P1c @ D_h_adj),
        ]

    backend = BackendMatrices(
        n=2,
        dims=dims,
        mass=mass,
        d=[d0, d1],
        iv=[None, iv1, iv2],
        vstar=[vstar0, vstar1],
        dfwedge=dfwedge,
        mult_df2=mult_df2,
        cliff_hess=cliff_hess,
        profile=profile,
        f=f,
        poles=poles,
        weight=profile.weight,
        theta_int=th_i,
        theta_half=th_h,
        u_keep=u_keep,
        h_keep=h_keep,
    )
    return backend


def validate_backend(backend: BackendMatrices) -> dict:
    """Check the structural identities and return the maximal residuals.

    d.d = 0 and i_v.i_v = 0 and the Cartan identity d i_v + i_v d = 0 must
    hold exactly (they are wired structurally); masses must be positive.
    Any residual beyond 1e-12 times the matrix scale raises BackendError
    naming the identity.
    """
    report = {}
    for j, mvec in enumerate(backend.mass):
        if mvec.size and mvec.min() <= 0.0:
            raise BackendError(f"mass matrix of degree {j} is not positive")

    def _scaled_max(mat, scale):
        if mat.shape[0] == 0 or mat.shape[1] == 0 or mat.nnz == 0:
            return 0.0
        return float(np.abs(mat.data).max() / max(scale, 1e-300))

    if backend.n >= 2:
        d0, d1 = backend.d[0], backend.d[1]
        iv1, iv2 = backend.iv[1], backend.iv[2]
        scale_d = max(np.abs(d0.data).max() if d0.nnz else 1.0, 1.0)
        scale_iv = max(np.abs(iv1.data).max() if iv1.nnz else 1.0, 1.0)

        report["d_squared"] = _scaled_max(sp.csr_matrix(d1 @ d0), scale_d ** 2)
        report["iv_squared"] = _scaled_max(sp.csr_matrix(iv1 @ iv2), scale_iv ** 2)
        cartan = sp.csr_matrix(d0 @ iv1 + iv2 @ d1)
        report["cartan"] = _scaled_max(cartan, scale_d * max(scale_iv, 1.0))
        if backend.dfwedge is not None:
            P0, P1 = backend.dfwedge
            report["df_squared"] = _scaled_max(sp.csr_matrix(P1 @ P0), 1.0)
            anti = sp.csr_matrix(P0 @ iv1 + iv2 @ P1)
            report["cartan_df"] = _scaled_max(anti, max(scale_iv, 1.0))
    else:
        cartan = sp.csr_matrix(backend.d[0] @ backend.iv[1])
        report["d_squared"] = 0.0
        report["iv_squared"] = 0.0
        report["cartan"] = float(np.abs(cartan.data).max()) if cartan.nnz else 0.0

    for name, value in report.items():
        if value > 1e-12:
            raise BackendError(f"identity {name!r} violated: residual {value:.3e}")
    return report


# ---------------------------------------------------------------------------
# Catalog
# ---------------------------------------------------------------------------

CATALOG_CASES = ("sphere_height", "sphere_bumpy", "torus_height", "circle_trivial")


def _sphere_profile(R: float, weight: int, n_grid: int) -> RevolutionProfile:
    return RevolutionProfile(
        name=f"sphere(R={R:g})",
        theta_max=math.pi * R,
        ends=("pole", "pole"),
        a=lambda th: R * np.sin(th / R),
        a_prime=lambda th: np.cos(th / R),
        weight=weight,
        n_grid=n_grid,
        params={"R": R},
    )


def _torus_profile(r: float, R: float, weight: int, n_grid: int) -> RevolutionProfile:
    if R <= r:
        raise ProfileValidationError(f"torus needs R > r, got R={R}, r={r}")
    return RevolutionProfile(
        name=f"torus(r={r:g},R={R:g})",
        theta_max=2.0 * math.pi * r,
        ends=("periodic", "periodic"),
        a=lambda th: R + r * np.cos(th / r),
        a_prime=lambda th: -np.sin(th / r),
        weight=weight,
        n_grid=n_grid,
        params={"r": r, "R": R},
    )


def _check_morse(profile: RevolutionProfile, f: InvariantMorseFunction) -> None:
    # Reject parameter choices with a flat critical level: scan f' for
    # roots and inspect f'' there.
    th = np.linspace(0.0, profile.theta_max, 4097)
    fp = np.asarray(f.fp(th))
    fpp = np.asarray(f.fpp(th))
    sign = np.sign(fp)
    flips = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
    for idx in flips:
        if abs(fpp[idx]) < DEGENERACY_TOL and abs(fpp[idx + 1]) < DEGENERACY_TOL:
            raise DegenerateCriticalLevelError(
                f"{f.name!r} has a degenerate critical level near theta={th[idx]:.4f}")
    if not profile.periodic:
        for node in (0.0, profile.theta_max):
            if abs(float(f.fpp(np.array([node]))[0])) < DEGENERACY_TOL:
                raise DegenerateCriticalLevelError(
                    f"{f.name!r} is degenerate at the end theta={node:.4f}")


def catalog(name: str, params: dict | None = None, n_grid: int = 256,
            weight: int = 1):
    """Return (RevolutionProfile, InvariantMorseFunction | None) for a case.

    sphere_height : unit sphere, f = cos(theta/R); fixed points of index 2
                    (north) and 0 (south).
    sphere_bumpy  : f = cos(theta/R) + c*cos(2 theta/R), default c = 0.6,
                    which adds an interior critical latitude.
    torus_height  : torus of revolution (r=1, R=3), f = sin(theta/r); two
                    critical orbits of transversal index 1 and 0.
    circle_trivial: the circle acting on itself.  A constant function is
                    not Morse, so no function is returned; the backend
                    serves algebraic and spectral identities only.
    """
    params = dict(params or {})
    if name == "sphere_height":
        R = float(params.pop("R", 1.0))
        profile = _sphere_profile(R, weight, n_grid)
        f = InvariantMorseFunction(
            name="cos(theta)",
            f=lambda th: np.cos(th / R),
            fp=lambda th: -np.sin(th / R) / R,
            fpp=lambda th: -np.cos(th / R) / R ** 2,
        )
    elif name == "sphere_bumpy":
        R = float(params.pop("R", 1.0))
        c = float(params.pop("c", 0.6))
        profile = _sphere_profile(R, weight, n_grid)
        f = InvariantMorseFunction(
            name=f"cos(theta)+{c:g}*cos(2 theta)",
            f=lambda th: np.cos(th / R) + c * np.cos(2 * th / R),
            fp=lambda th: (-np.sin(th / R) - 2 * c * np.sin(2 * th / R)) / R,
            fpp=lambda th: (-np.cos(th / R) - 4 * c * np.cos(2 * th / R)) / R ** 2,
        )
    elif name == "torus_height":
        r = float(params.pop("r", 1.0))
        R = float(params.pop("R", 3.0))
        profile = _torus_profile(r, R, weight, n_grid)
        f = InvariantMorseFunction(
            name="sin(theta)",
            f=lambda th: np.sin(th / r),
            fp=lambda th: np.cos(th / r) / r,
            fpp=lambda th: -np.sin(th / r) / r ** 2,
        )
    elif name == "circle_trivial":
        profile = RevolutionProfile(
            name="circle",
            theta_max=2.0 * math.pi,
            ends=("periodic", "periodic"),
            a=lambda th: np.ones_like(th),
            a_prime=lambda th: np.zeros_like(th),
            weight=weight,
            n_grid=n_grid,
            kind="circle",
        )
        return profile, None
    else:
        raise ProfileValidationError(
            f"unknown catalog case {name!r}; choose from {CATALOG_CASES}")
    if params:
        raise ProfileValidationError(f"unused parameters for {name!r}: {sorted(params)}")
    _check_morse(profile, f)
    return profile, f


# ---------------------------------------------------------------------------
# Flat local models (plane around a fixed point, cylinder around an orbit)
# ---------------------------------------------------------------------------

def flat_point_profile(weight: int, eps: int, radius: float, n_grid: int):
    """Plane R^2 with rotation speed `weight` and f = eps*r^2/2, truncated
    at `radius`.  The origin is a fixed point of Morse index 0 (eps=+1) or
    2 (eps=-1).  The truncation uses the boundary condition that carries
    no boundary contribution in the deformed complex: natural ('free')
    where the gradient of f exits the domain (eps=+1), Dirichlet ('cut')
    where it enters (eps=-1)."""
    if eps not in (+1, -1):
        raise ProfileValidationError("eps must be +1 or -1")
    profile = RevolutionProfile(
        name=f"plane(m={weight},eps={eps:+d})",
        theta_max=radius,
        ends=("pole", "free" if eps > 0 else "cut"),
        a=lambda th: np.asarray(th, dtype=float),
        a_prime=lambda th: np.ones_like(th),
        weight=weight,
        n_grid=n_grid,
        params={"eps": eps, "radius": radius},
    )
    f = InvariantMorseFunction(
        name=f"{eps:+d}*r^2/2",
        f=lambda th: 0.5 * eps * th ** 2,
        fp=lambda th: eps * np.asarray(th, dtype=float),
        fpp=lambda th: eps * np.ones_like(th),
    )
    return profile, f


def flat_orbit_profile(weight: int, lam: int, half_width: float, n_grid: int,
                       orbit_radius: float = 1.0):
    """Cylinder S^1 x R with orbit speed `weight`, constant orbit radius,
    and transverse f = lam*x^2/2 on x in [-half_width, half_width].  The
    central orbit has transversal index 0 (lam=+1) or 1 (lam=-1).  Ends
    are natural for lam=+1 (gradient exits) and Dirichlet for lam=-1
    (gradient enters), so the truncation adds no boundary modes."""
    if lam not in (+1, -1):
        raise ProfileValidationError("lam must be +1 or -1")
    X = half_width
    bc = "free" if lam > 0 else "cut"
    profile = RevolutionProfile(
        name=f"cylinder(m={weight},lam={lam:+d})",
        theta_max=2.0 * X,
        ends=(bc, bc),
        a=lambda th: orbit_radius * np.ones_like(np.asarray(th, dtype=float)),
        a_prime=lambda th: np.zeros_like(np.asarray(th, dtype=float)),
        weight=weight,
        n_grid=n_grid,
        params={"lam": lam, "half_width": X, "orbit_radius": orbit_radius},
    )
    f = InvariantMorseFunction(
        name=f"{lam:+d}*x^2/2",
        f=lambda th: 0.5 * lam * (np.asarray(th, dtype=float) - X) ** 2,
        fp=lambda th: lam * (np.asarray(th, dtype=float) - X),
        fpp=lambda th: lam * np.ones_like(np.asarray(th, dtype=float)),
    )
    return profile, f
