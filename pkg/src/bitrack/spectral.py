"""Coordinate reduction of the Laplacian and the associated Lyapunov equation.

The reduction picks ``Theta = [1, psi]`` where the columns of ``psi`` span
the nonzero eigenspaces of the Laplacian, so that

    Theta^{-1} L Theta = [[0, 0], [0, L_tilde]]

with ``L_tilde`` (block) diagonal. The first row of ``Theta^{-1}`` is the
normalized left null vector ``pi`` and the remaining rows form ``phi``.
Tracking errors are measured in the coordinates ``eta = phi (I - 1 pi) x``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ConfigurationError, NumericalError

__all__ = [
    "SpectralReduction",
    "LyapunovSolution",
    "reduce",
    "solve_lyapunov",
    "error_coordinates",
]

# eigenvector matrices worse conditioned than this are treated as defective
_DEFECTIVE_COND = 1e8


@dataclass(frozen=True, eq=False)
class SpectralReduction:
    pi: np.ndarray
    J: np.ndarray
    theta: np.ndarray
    theta_inv: np.ndarray
    L_tilde: np.ndarray
    eigenvalues: np.ndarray

    @property
    def n(self) -> int:
        return self.L_tilde.shape[0]

    @property
    def tau(self) -> np.ndarray:
        return self.theta_inv[0]

    @property
    def phi(self) -> np.ndarray:
        return self.theta_inv[1:]

    @property
    def psi(self) -> np.ndarray:
        return self.theta[:, 1:]

    @property
    def disagreement(self) -> np.ndarray:
        """The projector ``I - J`` that removes the consensus component."""
        return np.eye(self.J.shape[0]) - self.J

    @property
    def gram_phi(self) -> np.ndarray:
        return self.phi @ self.phi.T

    @property
    def gram_psi(self) -> np.ndarray:
        return self.psi.T @ self.psi

    def norm_bounds(self) -> tuple[float, float]:
        """``(lo, hi)`` with ``lo |eta|^2 <= |xi|^2 <= hi |eta|^2``.

        Holds because ``xi = psi eta`` for every state; equality ``lo == hi == 1``
        only when the columns of ``psi`` are orthonormal.
        """
        ev = np.linalg.eigvalsh(self.gram_psi)
        return float(ev[0]), float(ev[-1])

    def off_block_residual(self, lap) -> float:
        t = self.theta_inv @ np.asarray(lap, dtype=float) @ self.theta
        blk = t.copy()
        blk[1:, 1:] -= self.L_tilde
        return float(np.abs(blk).max())


@dataclass(frozen=True, eq=False)
class LyapunovSolution:
    H: np.ndarray
    kappa: float

    @property
    def lambda_max(self) -> float:
        return float(np.linalg.eigvalsh(self.H)[-1])

    @property
    def lambda_min(self) -> float:
        return float(np.linalg.eigvalsh(self.H)[0])

    @property
    def h(self) -> float:
        """Reciprocal of the smallest eigenvalue of ``H``."""
        return 1.0 / self.lambda_min

    def residual(self, L_tilde) -> float:
        L_tilde = np.asarray(L_tilde, dtype=float)
        r = self.H @ L_tilde + L_tilde.T @ self.H - self.kappa * np.eye(len(self.H))
        return float(np.linalg.norm(r))


def _left_null_vector(lap, scale):
    u, s, vh = np.linalg.svd(lap.T)
    tol = 1e-9 * max(scale, 1.0)
    if np.count_nonzero(s <= tol) > 1:
        raise ConfigurationError(
            "topology lacks rooted spanning tree: zero eigenvalue is repeated"
        )
    pi = vh[-1]
    pi = pi / pi.sum()
    pi[np.abs(pi) < 1e-14] = 0.0
    if np.any(pi < -1e-9):
        raise NumericalError("left null vector of the Laplacian has negative entries")
    return np.clip(pi, 0.0, None) / np.clip(pi, 0.0, None).sum()


def _sign_fix(v):
    nz = np.flatnonzero(np.abs(v) > 1e-12 * np.abs(v).max())
    return -v if v[nz[0]] < 0 else v


def _eigen_basis(lap, zero_tol):
    vals, vecs = np.linalg.eig(lap)
    keep = np.abs(vals) > zero_tol
    vals, vecs = vals[keep], vecs[:, keep]
    # descending real part, then positive imaginary part first within a pair
    order = np.lexsort((-vals.imag, -vals.real))
    vals, vecs = vals[order], vecs[:, order]

    cols, blocks, spectrum = [], [], []
    k = 0
    while k < len(vals):
        lam, v = vals[k], vecs[:, k]
        if abs(lam.imag) <= 1e-10 * max(1.0, abs(lam)):
            v = _sign_fix(v.real / np.linalg.norm(v.real))
            cols.append(v)
            blocks.append(np.array([[lam.real]]))
            spectrum.append(complex(lam.real, 0.0))
            k += 1
            continue
        if lam.imag < 0 or k + 1 >= len(vals):
            raise NumericalError("unpaired complex eigenvalue in Laplacian spectrum")
        # rotate so the largest-magnitude entry is real positive
        v = v / np.linalg.norm(v)
        p = np.argmax(np.abs(v))
        v = v * np.exp(-1j * np.angle(v[p]))
        a, b = lam.real, lam.imag
        # L [u, w] = [u, w] [[a, b], [-b, a]] for v = u + i w
        cols.extend([v.real, v.imag])
        blocks.append(np.array([[a, b], [-b, a]]))
        spectrum.extend([complex(a, b), complex(a, -b)])
        k += 2
    return np.column_stack(cols) if cols else np.zeros((lap.shape[0], 0)), blocks, spectrum


def reduce(lap) -> SpectralReduction:
    """Split a Laplacian into its consensus direction and the reduced block ``L_tilde``.

    Raises :class:`ConfigurationError` when 0 is a repeated eigenvalue (no
    spanning tree rooted at the leader) and :class:`NumericalError` when the
    Laplacian is defective or the eigenvector basis is singular.
    """
    lap = np.asarray(lap, dtype=float)
    if lap.ndim != 2 or lap.shape[0] != lap.shape[1]:
        raise ConfigurationError("Laplacian must be square")
    scale = float(np.abs(lap).max()) if lap.size else 0.0
    pi = _left_null_vector(lap, scale)
    size = lap.shape[0]
    ones = np.ones(size)

    psi, blocks, spectrum = _eigen_basis(lap, zero_tol=1e-9 * max(scale, 1.0))
    if psi.shape[1] != size - 1:
        raise ConfigurationError(
            "topology lacks rooted spanning tree: zero eigenvalue is repeated"
        )
    theta = np.column_stack([ones, psi])
    cond = float(np.linalg.cond(theta))
    if not np.isfinite(cond) or cond > _DEFECTIVE_COND:
        raise NumericalError(
            "Laplacian is defective or nearly so; no diagonal reduction", condition=cond
        )
    theta_inv = np.linalg.inv(theta)
    # pi is exactly the first row of theta_inv; keep the clean null vector
    if np.abs(theta_inv[0] - pi).max() > 1e-8:
        raise NumericalError("left null vector disagrees with the eigenbasis", condition=cond)
    theta_inv[0] = pi
    L_tilde = scipy.linalg.block_diag(*blocks) if blocks else np.zeros((0, 0))
    return SpectralReduction(
        pi=pi,
        J=np.outer(ones, pi),
        theta=theta,
        theta_inv=theta_inv,
        L_tilde=L_tilde,
        eigenvalues=np.array(spectrum),
    )


def solve_lyapunov(L_tilde, kappa: float = 1.0) -> LyapunovSolution:
    """Solve ``H L_tilde + L_tilde^T H = kappa I`` for symmetric positive-definite ``H``."""
    L_tilde = np.asarray(L_tilde, dtype=float)
    if kappa <= 0:
        raise ConfigurationError("kappa must be positive")
    n = L_tilde.shape[0]
    ev = np.linalg.eigvals(L_tilde)
    if np.any(ev.real <= 0):
        raise NumericalError(
            f"-L_tilde is not Hurwitz: eigenvalue with real part {ev.real.min():.3e}"
        )
    # scipy solves A X + X A^H = Q; take A = L_tilde^T
    H = scipy.linalg.solve_continuous_lyapunov(L_tilde.T, kappa * np.eye(n))
    H = 0.5 * (H + H.T)
    sol = LyapunovSolution(H=H, kappa=float(kappa))
    rel = sol.residual(L_tilde) / (kappa * np.sqrt(n))
    if rel > 1e-9:
        op = np.kron(np.eye(n), L_tilde.T) + np.kron(L_tilde.T, np.eye(n))
        raise NumericalError(
            f"Lyapunov residual {rel:.3e} exceeds tolerance", condition=np.linalg.cond(op)
        )
    try:
        np.linalg.cholesky(H)
    except np.linalg.LinAlgError:
        raise NumericalError("Lyapunov solution is not positive definite") from None
    return sol


def error_coordinates(x, sr: SpectralReduction):
    """Return ``(xi, eta)`` for a state or a stack of states (last axis = agents)."""
    x = np.asarray(x, dtype=float)
    xi = x - (x @ sr.pi)[..., None]
    eta = xi @ sr.phi.T
    return xi, eta
