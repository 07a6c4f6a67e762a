"""Base-2 information measures over finite distributions and pure-state ensembles.

Pure-state ensembles are never represented by density matrices. An ensemble
``sum_i w_i |s_i><s_i|`` is described by its Gram matrix ``G_ij = <s_i|s_j>``
and weights ``w``; its nonzero spectrum equals that of
``K_ij = sqrt(w_i w_j) G_ij``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import KernelError, ShapeError, ValidationError

PROB_TOL = 1e-12
PSD_TOL = 1e-9


def as_distribution(weights, tol: float = PROB_TOL) -> np.ndarray:
    """Validate ``weights`` as a probability distribution and return it as floats.

    Any array shape is accepted (joint distributions are 2-d).
    """
    w = np.asarray(weights, dtype=float)
    if w.size == 0:
        raise ValidationError("empty distribution")
    if not np.all(np.isfinite(w)):
        raise ValidationError("distribution contains non-finite weights")
    if w.min() < -tol or w.max() > 1 + tol:
        raise ValidationError(f"weights outside [0, 1]: min={w.min():.3g}, max={w.max():.3g}")
    total = w.sum()
    if abs(total - 1.0) > tol:
        raise ValidationError(f"weights sum to {total!r}, not 1")
    return np.clip(w, 0.0, 1.0)


def _plogp(w: np.ndarray) -> float:
    w = w[w > 0]
    return float(-np.sum(w * np.log2(w)))


def shannon_entropy(weights, tol: float = PROB_TOL) -> float:
    """Shannon entropy in bits, with ``0 log 0 = 0``."""
    return _plogp(as_distribution(weights, tol).ravel())


def mutual_information(joint, tol: float = PROB_TOL) -> float:
    """I(A;B) = H(A) + H(B) - H(A,B) for a joint table indexed ``[a, b]``."""
    p = np.asarray(joint, dtype=float)
    if p.ndim != 2:
        raise ShapeError(f"joint distribution must be 2-d over (A, B), got shape {p.shape}")
    p = as_distribution(p, tol)
    mi = _plogp(p.sum(axis=1)) + _plogp(p.sum(axis=0)) - _plogp(p.ravel())
    return max(mi, 0.0)


def kl_divergence(p, q, tol: float = PROB_TOL) -> float:
    """Relative entropy D(p || q) in bits.

    Returns ``math.inf`` when the support of ``p`` is not contained in that of ``q``.
    """
    p = as_distribution(p, tol).ravel()
    q = as_distribution(q, tol).ravel()
    if p.shape != q.shape:
        raise ShapeError(f"distributions over different index sets: {p.shape} vs {q.shape}")
    mask = p > 0
    if np.any(q[mask] <= 0):
        return math.inf
    return max(float(np.sum(p[mask] * np.log2(p[mask] / q[mask]))), 0.0)


def check_gram(gram, tol: float = PSD_TOL) -> np.ndarray:
    """Validate an overlap kernel: square, Hermitian, unit diagonal, |G_ij| <= 1, PSD.

    Real kernels come back as float arrays; complex kernels with a vanishing
    imaginary part are demoted to real.
    """
    g = np.asarray(gram)
    if g.ndim != 2 or g.shape[0] != g.shape[1] or g.shape[0] == 0:
        raise KernelError(f"Gram matrix must be square and non-empty, got shape {g.shape}")
    if np.iscomplexobj(g):
        if np.max(np.abs(g.imag)) <= tol:
            g = g.real
        g = g.astype(complex) if np.iscomplexobj(g) else g.astype(float)
    else:
        g = g.astype(float)
    if not np.all(np.isfinite(g)):
        raise KernelError("Gram matrix contains non-finite entries")
    if np.max(np.abs(g - g.conj().T)) > tol:
        raise KernelError("Gram matrix is not Hermitian")
    if np.max(np.abs(np.diag(g) - 1.0)) > tol:
        raise KernelError("Gram matrix diagonal must be 1 (unit-norm states)")
    if np.max(np.abs(g)) > 1 + tol:
        raise KernelError("Gram entries must have modulus at most 1")
    lam_min = float(np.linalg.eigvalsh(g).min())
    if lam_min < -tol:
        raise KernelError(f"Gram matrix is not positive semidefinite (smallest eigenvalue {lam_min:.3g})")
    return g


def kernel_spectrum(gram: np.ndarray, weights: np.ndarray, tol: float = PSD_TOL) -> np.ndarray:
    """Eigenvalues of ``sqrt(w_i w_j) G_ij`` over the support of ``weights``.

    Eigenvalues above ``-tol`` are clamped to zero; anything below raises
    :class:`KernelError`. ``gram`` is assumed already validated.
    """
    support = np.flatnonzero(weights > 0)
    if support.size == 1:
        return np.array([1.0])
    s = np.sqrt(weights[support])
    k = s[:, None] * gram[np.ix_(support, support)] * s[None, :]
    lam = np.linalg.eigvalsh(k)
    if lam.min() < -tol:
        raise KernelError(f"weighted kernel has eigenvalue {lam.min():.3g} < -{tol}")
    lam = np.clip(lam, 0.0, None)
    if abs(lam.sum() - 1.0) > tol:
        raise KernelError(f"weighted kernel spectrum sums to {lam.sum()!r}, not 1")
    return lam


def ensemble_entropy(gram, weights, tol: float = PSD_TOL) -> float:
    """Von Neumann entropy (bits) of ``sum_i w_i |s_i><s_i|`` given the Gram matrix of the |s_i>."""
    g = check_gram(gram, tol)
    w = as_distribution(weights).ravel()
    if w.shape[0] != g.shape[0]:
        raise ShapeError(f"{w.shape[0]} weights for a {g.shape[0]}-state kernel")
    return _plogp(kernel_spectrum(g, w, tol))


@dataclass(frozen=True)
class WeightedKernel:
    """A pure-state ensemble: overlap kernel plus mixing weights."""

    gram: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        g = check_gram(self.gram)
        w = as_distribution(self.weights).ravel()
        if w.shape[0] != g.shape[0]:
            raise ShapeError(f"{w.shape[0]} weights for a {g.shape[0]}-state kernel")
        object.__setattr__(self, "gram", g)
        object.__setattr__(self, "weights", w)

    def spectrum(self) -> np.ndarray:
        return kernel_spectrum(self.gram, self.weights)

    def entropy(self) -> float:
        return _plogp(self.spectrum())


def holevo_information(prior, conditionals, gram, tol: float = PSD_TOL) -> float:
    """Holevo quantity H(sum_z P(z) rho_z) - sum_z P(z) H(rho_z).

    Args:
        prior: probabilities P(z) over ``n`` labels.
        conditionals: ``(n, S)`` array; row ``z`` holds the weights of rho_z
            over the ``S`` kernel states.
        gram: ``(S, S)`` overlap kernel shared by every rho_z.
    """
    g = check_gram(gram, tol)
    prior = as_distribution(prior, 1e-9).ravel()
    cond = np.atleast_2d(np.asarray(conditionals, dtype=float))
    if cond.shape != (prior.shape[0], g.shape[0]):
        raise ShapeError(
            f"conditionals have shape {cond.shape}, expected ({prior.shape[0]}, {g.shape[0]})"
        )
    mix = prior @ cond
    mix = mix / mix.sum()
    total = _plogp(kernel_spectrum(g, mix, tol))
    for pz, w in zip(prior, cond):
        if pz == 0 or np.count_nonzero(w) <= 1:
            continue
        total -= pz * _plogp(kernel_spectrum(g, w / w.sum(), tol))
    return max(total, 0.0)


def gram_factor(gram: np.ndarray, cutoff: float = 1e-10) -> np.ndarray:
    """Rows ``V_i`` with ``sum_k conj(V_ik) V_jk = G_ij``, in the minimal (rank) dimension."""
    lam, u = np.linalg.eigh(gram)
    keep = lam > cutoff
    return np.conj(u[:, keep]) * np.sqrt(lam[keep])[None, :]


def ensemble_relative_entropy(gram, w_rho, w_sigma, tol: float = PSD_TOL) -> float:
    """Quantum relative entropy D(rho || sigma) in bits between two ensembles on one kernel.

    Logarithms are taken on the support of ``sigma``; ``math.inf`` is returned
    when ``rho`` has weight outside it.
    """
    g = check_gram(gram, tol)
    w_rho = as_distribution(w_rho, 1e-9).ravel()
    w_sigma = as_distribution(w_sigma, 1e-9).ravel()
    v = gram_factor(g)
    # columns are the state vectors |s_i> in the rank basis
    a = v.conj().T
    rho = (a * w_rho[None, :]) @ a.conj().T
    sigma = (a * w_sigma[None, :]) @ a.conj().T
    lam_s, u_s = np.linalg.eigh(sigma)
    supp = lam_s > tol
    lam_r = np.clip(np.linalg.eigvalsh(rho), 0.0, None)
    neg_entropy = -_plogp(lam_r)
    u = u_s[:, supp]
    overlap = u.conj().T @ rho @ u
    leak = np.real(np.trace(rho)) - np.real(np.trace(overlap))
    if leak > tol:
        return math.inf
    cross = float(np.real(np.sum(np.diag(overlap) * np.log2(lam_s[supp]))))
    return max(neg_entropy - cross, 0.0)
