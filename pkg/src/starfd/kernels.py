"""Small convex solvers shared by the WMMSE and surface subproblems."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "KernelError", "AscentResult",
    "min_quadratic_ball", "min_scalar_quadratic_box",
    "project_pair_ball", "project_pair_ball_vec", "project_unit_disc",
    "projected_gradient_ascent",
]


class KernelError(ValueError):
    """A kernel precondition failed (shape, symmetry, definiteness)."""


def min_quadratic_ball(a_mat: np.ndarray, b_vec: np.ndarray, power: float,
                       tol: float = 1e-10) -> np.ndarray:
    """Minimize x^H A x - 2 Re(b^H x) subject to ||x||^2 <= power.

    A must be Hermitian positive semidefinite.  If the unconstrained
    stationary point is feasible it is returned (minimum-norm solution on
    the range of A); otherwise the multiplier of the active ball
    constraint is found by bisecting ||(A + lam I)^-1 b||^2 = power, which
    is monotone in lam and bracketed by [0, ||b|| / sqrt(power)].
    """
    a = np.asarray(a_mat, dtype=complex)
    b = np.asarray(b_vec, dtype=complex).ravel()
    n = b.shape[0]
    if a.shape != (n, n):
        raise KernelError(f"matrix shape {a.shape} does not match vector length {n}")
    if power <= 0:
        raise KernelError(f"power budget must be positive, got {power}")
    scale = float(np.max(np.abs(a))) if a.size else 0.0
    if scale > 0 and float(np.max(np.abs(a - a.conj().T))) > 1e-8 * scale:
        raise KernelError("matrix must be Hermitian")

    b_norm = float(np.linalg.norm(b))
    if b_norm == 0.0:
        return np.zeros(n, complex)

    evals, vecs = np.linalg.eigh(0.5 * (a + a.conj().T))
    if evals[0] < -1e-8 * max(1.0, float(evals[-1])):
        raise KernelError("matrix must be positive semidefinite")
    evals = np.clip(evals, 0.0, None)
    c = vecs.conj().T @ b

    # Unconstrained minimum-norm stationary point, if it exists.
    lam_max = float(evals[-1])
    rank_tol = max(lam_max, 1.0) * 1e-14
    null = evals <= rank_tol
    if not np.any(np.abs(c[null]) > 1e-12 * b_norm):
        x0_coeff = np.where(null, 0.0, c / np.where(null, 1.0, evals))
        if float(np.sum(np.abs(x0_coeff) ** 2)) <= power * (1.0 + 1e-12):
            return vecs @ x0_coeff

    def norm_sq(lam: float) -> float:
        return float(np.sum(np.abs(c) ** 2 / (evals + lam) ** 2))

    lo = 0.0
    hi = b_norm / np.sqrt(power)
    for _ in range(64):
        if norm_sq(hi) <= power:
            break
        hi *= 2.0
    else:
        raise KernelError("ball multiplier is not bracketable; matrix is not PSD")
    x_sq = None
    for _ in range(300):
        mid = 0.5 * (lo + hi)
        x_sq = norm_sq(mid)
        if abs(x_sq - power) <= tol * power:
            lo = hi = mid
            break
        if x_sq > power:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-18 * max(1.0, hi):
            break
    lam = 0.5 * (lo + hi)
    return vecs @ (c / (evals + lam))


def min_scalar_quadratic_box(a: float, b: float, p_max: float) -> float:
    """Minimize a p^2 - 2 b p over 0 <= p <= sqrt(p_max)."""
    if not (a > 0):
        raise KernelError(f"quadratic coefficient must be positive, got {a}")
    if not (p_max > 0):
        raise KernelError(f"box bound must be positive, got {p_max}")
    return float(min(max(b / a, 0.0), np.sqrt(p_max)))


def project_pair_ball(t: complex, r: complex) -> tuple:
    """Project one (transmit, reflect) pair onto |t|^2 + |r|^2 <= 1."""
    s = np.sqrt(abs(t) ** 2 + abs(r) ** 2)
    if s <= 1.0:
        return t, r
    return t / s, r / s


def project_pair_ball_vec(q_t: np.ndarray, q_r: np.ndarray):
    """Element-wise pair-ball projection for whole coefficient vectors."""
    s = np.sqrt(np.abs(q_t) ** 2 + np.abs(q_r) ** 2)
    scale = 1.0 / np.maximum(1.0, s)
    return q_t * scale, q_r * scale


def project_unit_disc(q: np.ndarray) -> np.ndarray:
    """Element-wise projection onto |q| <= 1."""
    return q / np.maximum(1.0, np.abs(q))


@dataclass(frozen=True)
class AscentResult:
    x: np.ndarray
    value: float
    iterations: int
    converged: bool


def projected_gradient_ascent(objective, gradient, project, x0: np.ndarray,
                              eps: float, max_iter: int = 200,
                              step0: float = 1.0,
                              armijo: float = 1e-4) -> AscentResult:
    """Maximize a smooth objective over a set given by its projection.

    Backtracking halves the step from ``step0`` until the projected move
    satisfies an Armijo increase; accepted iterates never decrease the
    objective.  Terminates when the relative increase over one iteration
    drops below ``eps`` or no ascent step can be found.
    """
    x = project(np.array(x0))
    f = float(objective(x))
    step_prev = step0
    for it in range(1, max_iter + 1):
        g = gradient(x)
        # Restarting the backtracking near the last accepted step saves
        # most of the halving work once the natural scale is known.
        step = min(step0, 4.0 * step_prev)
        accepted = False
        for _ in range(60):
            cand = project(x + step * g)
            diff = cand - x
            inner = 2.0 * float(np.real(np.vdot(g, diff)))
            if inner > 0.0:
                fc = float(objective(cand))
                if fc >= f + armijo * inner:
                    accepted = True
                    break
            step *= 0.5
        if not accepted:
            return AscentResult(x=x, value=f, iterations=it, converged=True)
        step_prev = step
        gain = (fc - f) / max(1.0, abs(f))
        x, f = cand, fc
        if gain < eps:
            return AscentResult(x=x, value=f, iterations=it, converged=True)
    return AscentResult(x=x, value=f, iterations=max_iter, converged=False)
