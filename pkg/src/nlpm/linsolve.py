"""Solvers for the per-step linear systems.

Operators are passed as procedures mapping an array of field shape to an
array of the same shape. ``solve_dense`` also accepts an explicit matrix.
"""

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import BreakdownError, InvalidArgumentError, SingularSystemError, SolverFailure
from .spectral import GridField, _all_axes, _analyze, _synthesize

DENSE_MAX_DIM = 4096
DENSE_TOL = 1e-10
COND_LIMIT = 1e12
BREAKDOWN = 1e-30


@dataclass(frozen=True)
class SolveReport:
    iterations: int
    relative_residual: float
    method: str  # "dense" or "krylov"
    preconditioner_coefficient: float = float("nan")


def _as_array(rhs):
    return rhs.values if isinstance(rhs, GridField) else np.asarray(rhs, dtype=float)


def _wrap(like, x):
    return like.with_values(x) if isinstance(like, GridField) else x


def relative_residual(apply, x, b):
    """``||apply(x) - b|| / ||b||`` computed from scratch (0 when ``b = 0`` and ``x = 0``)."""
    r = np.asarray(apply(x)) - b
    bn = np.linalg.norm(b)
    if bn == 0.0:
        return float(np.linalg.norm(r))
    return float(np.linalg.norm(r) / bn)


def assemble(apply, shape):
    """Dense matrix of ``apply`` built column by column from unit vectors."""
    size = int(np.prod(shape))
    mat = np.empty((size, size))
    e = np.zeros(size)
    for j in range(size):
        e[j] = 1.0
        mat[:, j] = np.asarray(apply(e.reshape(shape))).ravel()
        e[j] = 0.0
    return mat


def solve_dense(apply, rhs):
    """LU solve of a system given as a procedure or as an explicit matrix.

    Raises SingularSystemError when the 1-norm condition estimate exceeds
    ``1e12``.
    """
    b = _as_array(rhs)
    shape = b.shape
    size = b.size
    if size > DENSE_MAX_DIM:
        raise InvalidArgumentError(f"dense solve limited to {DENSE_MAX_DIM} unknowns, got {size}")
    if callable(apply):
        mat = assemble(apply, shape)
        op = apply
    else:
        mat = np.asarray(apply, dtype=float)
        if mat.shape != (size, size):
            raise InvalidArgumentError(f"matrix shape {mat.shape} does not match rhs size {size}")

        def op(v):
            return (mat @ v.ravel()).reshape(shape)

    anorm = np.linalg.norm(mat, 1)
    with warnings.catch_warnings():
        # exact singularity is reported through the condition estimate below
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(mat, check_finite=False)
    rcond, _ = sla.lapack.dgecon(lu, anorm, norm="1")
    if not rcond > 1.0 / COND_LIMIT:
        report = SolveReport(0, float("inf"), "dense")
        raise SingularSystemError(f"matrix condition estimate {1.0 / max(rcond, 1e-300):.3e} exceeds {COND_LIMIT:.0e}",
                                  report=report)
    x = sla.lu_solve((lu, piv), b.ravel(), check_finite=False)
    res = relative_residual(op, x.reshape(shape), b)
    if res > DENSE_TOL:
        # one step of iterative refinement
        r = b.ravel() - mat @ x
        x = x + sla.lu_solve((lu, piv), r, check_finite=False)
        res = relative_residual(op, x.reshape(shape), b)
    report = SolveReport(1, res, "dense")
    if res > DENSE_TOL:
        raise SolverFailure(f"dense residual {res:.3e} above {DENSE_TOL:.0e}", x=x.reshape(shape), report=report)
    return _wrap(rhs, x.reshape(shape)), report


class SpectralPreconditioner:
    """Exact inverse of ``I - h_t * abar * A`` with ``abar = mean(a)``."""

    def __init__(self, abar, h_t, spectrum):
        self.coefficient = float(abar)
        self.h_t = float(h_t)
        self.spectrum = spectrum
        self._symbol = 1.0 / (1.0 + self.h_t * self.coefficient * spectrum.eigenvalues)

    def __call__(self, v):
        axes = _all_axes(self.spectrum.dim)
        return _synthesize(_analyze(v, self.spectrum.bc, axes) * self._symbol, self.spectrum.bc, axes)


def make_constant_coefficient_preconditioner(a, h_t, s):
    a = _as_array(a)
    return SpectralPreconditioner(float(np.mean(a)), h_t, s)


def _dot(u, v):
    return float(np.dot(u.ravel(), v.ravel()))


def _breakdown(msg, x, it):
    return BreakdownError(msg, x=x, report=SolveReport(it, float("nan"), "krylov"))


def _bicgstab(apply, b, precond, tol, max_iter):
    """Right-preconditioned BiCGStab; yields ``(x, iterations, converged)``."""
    x = np.zeros_like(b)
    r = b.copy()
    r_hat = b.copy()
    rho = alpha = omega = 1.0
    v = np.zeros_like(b)
    p = np.zeros_like(b)
    it = 0
    while it < max_iter:
        it += 1
        rho_new = _dot(r_hat, r)
        if abs(rho_new) < BREAKDOWN:
            raise _breakdown("BiCGStab breakdown: <r_hat, r> vanished", x, it)
        beta = (rho_new / rho) * (alpha / omega)
        p = r + beta * (p - omega * v)
        p_hat = precond(p)
        v = apply(p_hat)
        denom = _dot(r_hat, v)
        if abs(denom) < BREAKDOWN:
            raise _breakdown("BiCGStab breakdown: <r_hat, v> vanished", x, it)
        alpha = rho_new / denom
        s = r - alpha * v
        if np.linalg.norm(s) <= tol:
            x = x + alpha * p_hat
            return x, it, True
        s_hat = precond(s)
        t = apply(s_hat)
        tt = _dot(t, t)
        if tt < BREAKDOWN:
            raise _breakdown("BiCGStab breakdown: ||t|| vanished", x, it)
        omega = _dot(t, s) / tt
        x = x + alpha * p_hat + omega * s_hat
        r = s - omega * t
        if np.linalg.norm(r) <= tol:
            return x, it, True
        if abs(omega) < BREAKDOWN:
            raise _breakdown("BiCGStab breakdown: omega vanished", x, it)
        rho = rho_new
    return x, it, False


def _cg(apply, b, precond, tol, max_iter):
    x = np.zeros_like(b)
    r = b.copy()
    z = precond(r)
    p = z.copy()
    rz = _dot(r, z)
    it = 0
    while it < max_iter:
        it += 1
        q = apply(p)
        pq = _dot(p, q)
        if abs(pq) < BREAKDOWN:
            raise _breakdown("CG breakdown: <p, Ap> vanished", x, it)
        alpha = rz / pq
        x = x + alpha * p
        r = r - alpha * q
        if np.linalg.norm(r) <= tol:
            return x, it, True
        z = precond(r)
        rz_new = _dot(r, z)
        if abs(rz_new) < BREAKDOWN:
            raise _breakdown("CG breakdown: <r, Mr> vanished", x, it)
        p = z + (rz_new / rz) * p
        rz = rz_new
    return x, it, False


def solve_krylov(apply, rhs, precond=None, tol=1e-10, max_iter=500, symmetric=False):
    """Preconditioned BiCGStab, or CG when the caller asserts ``symmetric``.

    The right-hand side is scaled to unit norm internally so the breakdown
    threshold is relative. Every accepted solution has its residual
    recomputed from scratch; if recursion drift leaves it above ``tol`` the
    iteration restarts from the current iterate (at most twice).
    """
    b = _as_array(rhs)
    shape = b.shape
    coeff = getattr(precond, "coefficient", float("nan"))
    bn = np.linalg.norm(b)
    if bn == 0.0:
        return _wrap(rhs, np.zeros(shape)), SolveReport(0, 0.0, "krylov", coeff)
    precond = precond if precond is not None else (lambda v: v)

    def op(v):
        return np.asarray(apply(v.reshape(shape)))

    method = _cg if symmetric else _bicgstab
    x = np.zeros(shape)
    total = 0
    for _ in range(3):
        r0 = (b - op(x)) / bn if total else b / bn
        try:
            dx, it, ok = method(op, r0, precond, tol, max_iter - total)
        except BreakdownError as exc:
            best = x + bn * exc.x
            res = relative_residual(op, best, b)
            report = SolveReport(total + exc.report.iterations, res, "krylov", coeff)
            raise BreakdownError(str(exc), x=best, report=report) from None
        x = x + bn * dx
        total += it
        res = relative_residual(op, x, b)
        if res <= tol:
            return _wrap(rhs, x), SolveReport(total, res, "krylov", coeff)
        if not ok or total >= max_iter:
            break
    report = SolveReport(total, res, "krylov", coeff)
    raise SolverFailure(f"Krylov solve stopped at residual {res:.3e} after {total} iterations (tol {tol:.0e})",
                        x=x, report=report)
