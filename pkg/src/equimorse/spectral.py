"""Symmetric eigenproblems, kernel detection and trace functionals.

Every assembled operator A is symmetric with respect to a diagonal mass
M, so M^{1/2} A M^{-1/2} is plainly symmetric and a dense (or, above a
size threshold, shift-inverted iterative) solver applies.  Kernel
dimensions are decided by an absolute-plus-relative threshold with a
required separation factor, and equal the equivariant Betti numbers by
the Hodge isomorphism; traces of a rapidly decreasing phi over the
spectrum realize the heat-trace-like functionals whose alternating sums
obey the analytic Morse inequalities at every deformation parameter.

All solves are deterministic: dense LAPACK below DENSE_LIMIT dimensions,
otherwise shift-invert Lanczos with a fixed starting vector.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import cartan
from .backend import BackendMatrices

__all__ = [
    "SpectrumReport",
    "TraceSpec",
    "SolverError",
    "AmbiguousKernelError",
    "TailBoundError",
    "eigensolve",
    "delta_spectrum",
    "betti_numbers",
    "trace_phi",
    "SweepPoint",
    "SweepResult",
    "sweep_s",
    "de_rham_index",
    "periodicity_defect",
    "reports_to_json",
    "reports_to_csv",
]

DENSE_LIMIT = 2000
KERNEL_TAU_ABS = 1e-9
KERNEL_TAU_REL = 1e-3
SEPARATION_FACTOR = 100.0
RESIDUAL_BOUND = 1e-8
TRACE_TAIL_BOUND = 1e-6


def parallel_map(fn, items, threads: int = 1) -> list:
    """Map fn over items, optionally on a thread pool; order preserved.

    Each (degree, s) job is independent and the dense solver releases the
    interpreter lock, so disjoint jobs parallelize safely.
    """
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


class SolverError(RuntimeError):
    """Eigenvalue iteration failed to converge."""


class AmbiguousKernelError(RuntimeError):
    """No clear separation between near-kernel and the spectral gap."""


class TailBoundError(ValueError):
    """Too few eigenvalues for the requested trace accuracy."""


@dataclass
class SpectrumReport:
    """Eigenvalues of one operator with kernel bookkeeping.

    eigenvalues are ascending; kernel_dim counts those below the
    absolute-plus-relative threshold; gap is the smallest eigenvalue
    above it; residual_norms hold ||A v - lambda v|| per retained pair
    in the mass-orthonormal frame.
    """

    k: int
    s: float
    eigenvalues: list[float]
    kernel_dim: int
    gap: float
    residual_norms: list[float]
    dim: int = 0
    count: int = 0
    operator_norm: float = 0.0
    separation: float = math.inf

    def to_record(self) -> dict:
        return {
            "k": self.k,
            "s": self.s,
            "eigenvalues": list(self.eigenvalues),
            "kernel_dim": self.kernel_dim,
            "gap": self.gap,
            "residual_norms": list(self.residual_norms),
        }


@dataclass(frozen=True)
class TraceSpec:
    """A positive rapidly decreasing weight phi with phi(0) = 1."""

    phi_kind: str = "exp_decay"
    scale: float = 1.0

    def __post_init__(self):
        if self.phi_kind not in ("exp_decay", "gaussian"):
            raise ValueError(f"unknown phi kind {self.phi_kind!r}")
        if self.scale <= 0:
            raise ValueError("scale must be positive")

    def phi(self, x):
        x = np.asarray(x, dtype=float)
        if self.phi_kind == "exp_decay":
            return np.exp(-x / self.scale)
        return np.exp(-((x / self.scale) ** 2))


def _kernel_split(w: np.ndarray, opnorm: float):
    """Count near-zero eigenvalues by the iterated threshold rule."""
    tau_abs = KERNEL_TAU_ABS * opnorm
    kd = int(np.count_nonzero(w <= tau_abs))
    for _ in range(4):
        gap = float(w[kd]) if kd < len(w) else math.inf
        thr = tau_abs + (KERNEL_TAU_REL * gap if math.isfinite(gap) else 0.0)
        kd_next = int(np.count_nonzero(w <= thr))
        if kd_next == kd:
            break
        kd = kd_next
    gap = float(w[kd]) if kd < len(w) else math.inf
    if kd > 0:
        top_kernel = max(abs(float(w[kd - 1])), 1e-300)
        separation = gap / top_kernel if math.isfinite(gap) else math.inf
    else:
        separation = math.inf
    return kd, gap, separation


def eigensolve(operator, mass: np.ndarray, count: int | None = None,
               method: str = "auto", k: int = 0, s: float = 0.0) -> SpectrumReport:
    """Smallest eigenvalues of a mass-symmetric operator.

    operator may be an EqOperator or a sparse/dense matrix; mass is the
    diagonal of the inner product.  Dense full decomposition is used below
    DENSE_LIMIT dimensions, otherwise a shift-inverted Lanczos iteration
    with a fixed starting vector, so repeated runs are bit-identical.
    """
    mat = operator.matrix if isinstance(operator, cartan.EqOperator) else operator
    dim = mat.shape[0]
    if dim == 0:
        return SpectrumReport(k, s, [], 0, math.inf, [], dim=0, count=0)
    if count is None:
        count = dim
    if count > dim:
        raise ValueError(f"count = {count} exceeds dimension {dim}")
    sqrt_m = np.sqrt(mass)
    if sp.issparse(mat):
        S = sp.diags(sqrt_m) @ mat @ sp.diags(1.0 / sqrt_m)
        S = 0.5 * (S + S.T)
    else:
        S = np.diag(sqrt_m) @ np.asarray(mat) @ np.diag(1.0 / sqrt_m)
        S = 0.5 * (S + S.T)

    use_dense = method == "dense" or (method == "auto" and dim < DENSE_LIMIT)
    if method not in ("auto", "dense", "iterative"):
        raise ValueError(f"unknown solver method {method!r}")

    if use_dense:
        Sd = S.toarray() if sp.issparse(S) else S
        w, v = sla.eigh(Sd)
        order = np.argsort(w)
        w = w[order]
        v = v[:, order]
        opnorm = float(np.abs(w).max()) if dim else 0.0
        w_ret = w[:count]
        v_ret = v[:, :count]
        resid = np.linalg.norm(Sd @ v_ret - v_ret * w_ret[None, :], axis=0)
    else:
        Ss = sp.csr_matrix(S)
        opnorm = float(spla.norm(Ss, np.inf))
        shift = -1e-6 * max(opnorm, 1.0)
        v0 = np.cos(np.arange(dim) + 0.25)
        try:
            w, v = spla.eigsh(Ss, k=min(count, dim - 1), sigma=shift,
                              which="LM", v0=v0, maxiter=5000, tol=0)
        except spla.ArpackNoConvergence as exc:
            raise SolverError(
                f"eigenvalue iteration did not converge: {exc}") from exc
        order = np.argsort(w)
        w_ret = w[order]
        v_ret = v[:, order]
        resid = np.linalg.norm(Ss @ v_ret - v_ret * w_ret[None, :], axis=0)
        w = w_ret
        count = len(w_ret)  # the iteration returns at most dim - 1 pairs

    w_all_sorted = np.sort(w) if not use_dense else w
    kd, gap, separation = _kernel_split(w_all_sorted, max(opnorm, 1e-300))
    report = SpectrumReport(
        k=k, s=s,
        eigenvalues=[float(x) for x in w_ret],
        kernel_dim=min(kd, count),
        gap=gap,
        residual_norms=[float(r) for r in resid],
        dim=dim,
        count=count,
        operator_norm=opnorm,
        separation=separation,
    )
    bad = [r for r in report.residual_norms if r > RESIDUAL_BOUND * max(opnorm, 1.0)]
    if bad:
        raise SolverError(
            f"{len(bad)} eigenpairs exceed the residual bound "
            f"{RESIDUAL_BOUND:.0e} x |A| = {RESIDUAL_BOUND * opnorm:.3e}")
    return report


def delta_spectrum(backend: BackendMatrices, k: int, s: float = 0.0,
                   count: int | None = None, method: str = "auto") -> SpectrumReport:
    """Spectrum report of the (deformed) equivariant Laplacian in degree k."""
    if s == 0.0:
        delta = cartan.build_delta_eq(backend, k)
    else:
        _, _, delta = cartan.build_deformed(backend, s, k)
    mass = cartan.mass_vector(backend, delta.domain)
    return eigensolve(delta, mass, count=count, method=method, k=k, s=s)


def betti_numbers(backend: BackendMatrices, kmax: int, s: float = 0.0,
                  s_probes=None) -> list[int]:
    """Equivariant Betti numbers beta^0..beta^kmax as kernel dimensions.

    When s_probes is given (an iterable of deformation parameters, the
    canonical choice being (0, 4, 16)) the kernel dimensions must be
    identical at every probe, which is the checkable form of the
    deformation invariance of the cohomology.  A kernel without a
    factor-100 separation from the gap raises AmbiguousKernelError.
    """
    probes = [s] if s_probes is None else list(s_probes)
    results = []
    for sv in probes:
        betti = []
        for k in range(kmax + 1):
            rep = delta_spectrum(backend, k, s=sv)
            if rep.kernel_dim > 0 and rep.separation < SEPARATION_FACTOR:
                raise AmbiguousKernelError(
                    f"degree {k}, s={sv}: kernel/gap separation "
                    f"{rep.separation:.1f} < {SEPARATION_FACTOR}; increase the "
                    "grid or the eigenvalue count")
            betti.append(rep.kernel_dim)
        results.append(betti)
    for other in results[1:]:
        if other != results[0]:
            raise AmbiguousKernelError(
                f"kernel dimensions vary across deformation probes: {results}")
    return results[0]


def trace_phi(report: SpectrumReport, spec: TraceSpec) -> float:
    """Sum of phi over the spectrum, guarded by the truncation tail bound.

    If the report holds fewer eigenvalues than the dimension, the missing
    tail is bounded by phi(largest computed eigenvalue) times the number
    of missing eigenvalues, which must stay below 1e-6.
    """
    if report.count == 0:
        return 0.0
    lam = np.asarray(report.eigenvalues)
    missing = report.dim - report.count
    if missing > 0:
        bound = float(spec.phi(lam.max())) * missing
        if bound > TRACE_TAIL_BOUND:
            raise TailBoundError(
                f"tail bound {bound:.3e} exceeds {TRACE_TAIL_BOUND:.0e}; "
                "request more eigenvalues")
    return float(spec.phi(lam).sum())


@dataclass
class SweepPoint:
    s: float
    report: SpectrumReport
    mu: float


@dataclass
class SweepResult:
    k: int
    points: list[SweepPoint]
    kernel_constant: bool
    gap_monotone_from: float | None = None
    notes: list[str] = field(default_factory=list)

    def gaps(self):
        return [(p.s, p.report.gap) for p in self.points]


def sweep_s(backend: BackendMatrices, k: int, s_list, trace_spec: TraceSpec,
            count: int | None = None, threads: int = 1) -> SweepResult:
    """Deformation sweep of degree k: spectra and trace values per s.

    The kernel dimension must stay constant along the sweep; a change
    flags that the grid cannot resolve the O(s^{-1/2}) ground states and
    is reported on the result rather than silently accepted.  The result
    also records from which s onward the observed gap is nondecreasing.
    """
    s_values = list(s_list)
    if any(sv < 0 for sv in s_values):
        raise ValueError("deformation parameters must be nonnegative")
    if sorted(s_values) != s_values:
        raise ValueError("s_list must be ascending")
    def _one(sv):
        rep = delta_spectrum(backend, k, s=sv, count=count)
        return SweepPoint(s=sv, report=rep, mu=trace_phi(rep, trace_spec))

    points = parallel_map(_one, s_values, threads=threads)
    kernels = [p.report.kernel_dim for p in points]
    constant = len(set(kernels)) <= 1
    notes = []
    if not constant:
        notes.append(
            f"kernel dimension varies along the sweep ({kernels}); the grid "
            "is too coarse for the largest s (ground states have width ~ s^-1/2)")
    monotone_from = None
    gaps = [p.report.gap for p in points]
    for start in range(len(gaps)):
        tail = gaps[start:]
        if all(b >= a * (1 - 1e-12) for a, b in zip(tail, tail[1:])):
            monotone_from = s_values[start]
            break
    return SweepResult(k=k, points=points, kernel_constant=constant,
                       gap_monotone_from=monotone_from, notes=notes)


def de_rham_index(backend: BackendMatrices) -> int:
    """dim ker Delta^n - dim ker Delta^{n+1}: the index of d_eq + d_eq*."""
    n = backend.n
    return (delta_spectrum(backend, n).kernel_dim
            - delta_spectrum(backend, n + 1).kernel_dim)


def periodicity_defect(backend: BackendMatrices, k: int) -> float:
    """Largest eigenvalue discrepancy between degrees k and k+2.

    Multiplication by t identifies the two degree spaces blockwise; for
    k >= n the identification conjugates one Laplacian into the other, so
    the sorted spectra agree to solver precision.
    """
    if not cartan.t_shift_dims_match(backend, k):
        raise cartan.AssemblyError(f"t-shift is not a bijection at degree {k}")
    lo = delta_spectrum(backend, k)
    hi = delta_spectrum(backend, k + 2)
    a = np.asarray(lo.eigenvalues)
    b = np.asarray(hi.eigenvalues)
    return float(np.abs(a - b).max()) if a.size else 0.0


def reports_to_json(reports, path) -> None:
    """Write spectrum reports as a JSON list with a stable key order."""
    payload = [r.to_record() for r in reports]
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def reports_to_csv(reports, path) -> None:
    """Write eigenvalues as CSV rows (k, s, index, value)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "s", "index", "value"])
        for rep in reports:
            for idx, lam in enumerate(rep.eigenvalues):
                writer.writerow([rep.k, _fmt(rep.s), idx, _fmt(lam)])


def _fmt(x: float) -> str:
    return format(float(x), ".17g")
