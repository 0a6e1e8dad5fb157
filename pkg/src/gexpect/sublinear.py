"""The sublinear generator G over an interval volatility band and the
explicit constants of the Gaussian-bump decay bounds.

For the canonical uncertainty set {gamma : s_lo*I <= gamma <= s_hi*I} the
generator has the eigenvalue-split closed form

    G(A) = 1/2 * (s_hi * sum_i max(lam_i, 0) + s_lo * sum_i min(lam_i, 0)),

equivalently 1/2 * sup tr(gamma*A) over the band.  Everything in this module
is pure arithmetic on immutable inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SymMatrix",
    "VolatilityBand",
    "CoefficientBounds",
    "SupersolutionConstants",
    "GDiagnostics",
    "g_eval",
    "g_eval_batch",
    "g_structural_check",
    "decay_constants",
    "driftless_constants",
    "coordinate_decay_constants",
    "supersolution_value",
    "sym_eigvals",
    "sym_sqrt",
]

SYMMETRY_RTOL = 1e-12


def _as_symmetric(a, rtol: float = SYMMETRY_RTOL) -> np.ndarray:
    """Validate (within round-off) and return a as a float symmetric matrix."""
    m = np.asarray(getattr(a, "entries", a), dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    scale = max(float(np.max(np.abs(m))), 1.0)
    if float(np.max(np.abs(m - m.T))) > rtol * scale:
        raise ValueError("matrix is not symmetric within tolerance")
    return 0.5 * (m + m.T)


@dataclass(frozen=True)
class SymMatrix:
    """Dense symmetric real matrix; symmetry is enforced exactly."""

    dim: int
    entries: np.ndarray

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        m = np.asarray(self.entries, dtype=float)
        if m.shape != (self.dim, self.dim):
            raise ValueError(f"entries must have shape ({self.dim}, {self.dim})")
        if not np.array_equal(m, m.T):
            raise ValueError("entries must be exactly symmetric")
        object.__setattr__(self, "entries", m)

    @classmethod
    def from_array(cls, a) -> "SymMatrix":
        """Build from an array-like, symmetrizing round-off differences."""
        m = _as_symmetric(a)
        return cls(dim=m.shape[0], entries=m)


@dataclass(frozen=True)
class VolatilityBand:
    """Variance band (s_lo, s_hi) defining the uncertainty set; 0 < s_lo <= s_hi."""

    sigma_low_sq: float
    sigma_high_sq: float

    def __post_init__(self):
        lo, hi = float(self.sigma_low_sq), float(self.sigma_high_sq)
        if not (0.0 < lo <= hi < np.inf):
            raise ValueError(
                f"band must satisfy 0 < sigma_low_sq <= sigma_high_sq < inf, "
                f"got ({lo}, {hi})"
            )
        object.__setattr__(self, "sigma_low_sq", lo)
        object.__setattr__(self, "sigma_high_sq", hi)

    @property
    def is_degenerate(self) -> bool:
        return self.sigma_low_sq == self.sigma_high_sq


@dataclass(frozen=True)
class CoefficientBounds:
    """Declared structural bounds of an SDE coefficient set.

    lambda_/Lambda_ bound sigma*sigma^T (or sigma^T*sigma when n > d),
    gamma_row/Gamma_row bound each row |sigma_i|^2, L bounds |b_i| and
    |h_i^{jk}|, C and C_prime are the Lipschitz constants of (b, h) and
    sigma, and lambda_bar/Lambda_bar bound the diffusion of a generic
    process when used outside the SDE setting.
    """

    n: int
    d: int
    lambda_: float = 1.0
    Lambda_: float = 1.0
    gamma_row: float = 1.0
    Gamma_row: float = 1.0
    L: float = 0.0
    C: float = 0.0
    C_prime: float = 0.0
    lambda_bar: float = 1.0
    Lambda_bar: float = 1.0

    def __post_init__(self):
        if self.n < 1 or self.d < 1:
            raise ValueError("n and d must be positive")
        if not (0.0 < self.lambda_ <= self.Lambda_):
            raise ValueError("need 0 < lambda_ <= Lambda_")
        if not (0.0 < self.gamma_row <= self.Gamma_row):
            raise ValueError("need 0 < gamma_row <= Gamma_row")
        if min(self.L, self.C, self.C_prime) < 0.0:
            raise ValueError("L, C, C_prime must be nonnegative")
        if not (0.0 < self.lambda_bar <= self.Lambda_bar):
            raise ValueError("need 0 < lambda_bar <= Lambda_bar")


@dataclass(frozen=True)
class SupersolutionConstants:
    """The tuple (alpha, beta, epsilon, kappa, delta_aT, m_min) of a decay bound."""

    alpha: float
    beta: float
    epsilon: float
    kappa: float
    delta_aT: float
    m_min: float

    def __post_init__(self):
        if self.alpha <= 0.0 or self.beta <= 0.0:
            raise ValueError("alpha and beta must be positive")
        if self.epsilon <= 0.0:
            raise ValueError("epsilon must be positive")
        if self.kappa < 0.0 or self.delta_aT < 0.0:
            raise ValueError("kappa and delta_aT must be nonnegative")
        if abs(self.m_min - 8.0 * self.kappa) > 1e-12 * max(1.0, self.m_min):
            raise ValueError("m_min must equal 8*kappa")


def sym_eigvals(a: np.ndarray) -> np.ndarray:
    """Eigenvalues of symmetric matrices, shape (..., d, d) -> (..., d).

    Closed forms for d <= 2 (the hot path when called per grid node),
    LAPACK otherwise.
    """
    d = a.shape[-1]
    if d == 1:
        return a[..., 0, :].copy()
    if d == 2:
        half_tr = 0.5 * (a[..., 0, 0] + a[..., 1, 1])
        # discriminant of the characteristic polynomial, clipped at 0
        disc = 0.25 * (a[..., 0, 0] - a[..., 1, 1]) ** 2 + a[..., 0, 1] * a[..., 1, 0]
        root = np.sqrt(np.maximum(disc, 0.0))
        return np.stack([half_tr - root, half_tr + root], axis=-1)
    return np.linalg.eigvalsh(a)


def sym_sqrt(a: np.ndarray) -> np.ndarray:
    """Symmetric PSD square root via eigendecomposition."""
    m = _as_symmetric(a)
    w, v = np.linalg.eigh(m)
    if w.min() < -1e-10 * max(1.0, abs(w.max())):
        raise ValueError("matrix is not positive semidefinite")
    return (v * np.sqrt(np.maximum(w, 0.0))) @ v.T


def g_eval(a, band: VolatilityBand) -> float:
    """Value of the generator:  1/2 * sup{tr(gamma*A) : band} by eigenvalue split."""
    m = _as_symmetric(a)
    lam = sym_eigvals(m)
    pos = float(np.sum(np.maximum(lam, 0.0)))
    neg = float(np.sum(np.minimum(lam, 0.0)))
    return 0.5 * (band.sigma_high_sq * pos + band.sigma_low_sq * neg)


def g_eval_batch(a: np.ndarray, band: VolatilityBand) -> np.ndarray:
    """Vectorized g_eval over a stack of symmetric matrices (..., d, d)."""
    lam = sym_eigvals(np.asarray(a, dtype=float))
    pos = np.sum(np.maximum(lam, 0.0), axis=-1)
    neg = np.sum(np.minimum(lam, 0.0), axis=-1)
    return 0.5 * (band.sigma_high_sq * pos + band.sigma_low_sq * neg)


@dataclass(frozen=True)
class GDiagnostics:
    """Measured slacks of the structural inequalities of G (all >= 0 when valid)."""

    g_a: float
    g_b: float
    lower_slack: float  # G(A)-G(B) - s_lo/2 * tr(A-B)
    upper_slack: float  # s_hi/2 * tr(A-B) - (G(A)-G(B))
    norm_slack: float  # s_hi/2 * sqrt(d * tr(A A^T)) - |G(A)|
    ordered: bool  # A - B PSD within tolerance; sandwich slacks valid only if True


def g_structural_check(a, b, band: VolatilityBand, psd_tol: float = 1e-10) -> GDiagnostics:
    """Measure the sandwich  s_lo/2*tr(A-B) <= G(A)-G(B) <= s_hi/2*tr(A-B)
    (valid for A >= B) and the norm bound |G(A)| <= s_hi/2*sqrt(d*tr(AA^T)).

    If A - B is not PSD (min eigenvalue < -psd_tol) the sandwich slacks are
    still reported but flagged via ordered=False.
    """
    ma, mb = _as_symmetric(a), _as_symmetric(b)
    if ma.shape != mb.shape:
        raise ValueError("A and B must have the same shape")
    diff = ma - mb
    min_eig = float(sym_eigvals(diff).min())
    ordered = min_eig >= -psd_tol

    ga, gb = g_eval(ma, band), g_eval(mb, band)
    tr_diff = float(np.trace(diff))
    d = ma.shape[0]
    norm_bound = 0.5 * band.sigma_high_sq * np.sqrt(d) * np.sqrt(float(np.trace(ma @ ma.T)))
    return GDiagnostics(
        g_a=ga,
        g_b=gb,
        lower_slack=(ga - gb) - 0.5 * band.sigma_low_sq * tr_diff,
        upper_slack=0.5 * band.sigma_high_sq * tr_diff - (ga - gb),
        norm_slack=norm_bound - abs(ga),
        ordered=ordered,
    )


def _kappa_general(bounds: CoefficientBounds, band: VolatilityBand, delta_aT: float) -> float:
    nd = min(bounds.n, bounds.d)
    bulk = band.sigma_high_sq * bounds.d * np.sqrt(bounds.d) + 1.0
    return bounds.C * bulk + delta_aT**2 * bulk**2 / (nd * bounds.lambda_ * band.sigma_low_sq)


def decay_constants(
    bounds: CoefficientBounds,
    band: VolatilityBand,
    T: float,
    delta_aT: float = 0.0,
) -> SupersolutionConstants:
    """Constants of the Gaussian-bump decay bound for general bounded-drift
    coefficients:

        alpha = (n^d) * lambda * s_lo / (8 d s_hi Lambda)
        beta  = 1 / (2 d s_hi Lambda)
        kappa = C*(s_hi*d*sqrt(d)+1) + delta^2*(s_hi*d*sqrt(d)+1)^2 / ((n^d)*lambda*s_lo)
        eps   = min(1/(8 kappa), T),   m_min = 8 kappa

    where n^d = min(n, d) and delta is the sup of the drift coefficients
    along the centre point (supply it, or compute via
    gexpect.coeffs.coefficient_sup).
    """
    if T <= 0.0:
        raise ValueError("T must be positive")
    if delta_aT < 0.0:
        raise ValueError("delta_aT must be nonnegative")
    nd = min(bounds.n, bounds.d)
    alpha = nd * bounds.lambda_ * band.sigma_low_sq / (8.0 * bounds.d * band.sigma_high_sq * bounds.Lambda_)
    beta = 1.0 / (2.0 * bounds.d * band.sigma_high_sq * bounds.Lambda_)
    kappa = _kappa_general(bounds, band, delta_aT)
    eps = T if kappa == 0.0 else min(1.0 / (8.0 * kappa), T)
    return SupersolutionConstants(alpha, beta, eps, kappa, delta_aT, 8.0 * kappa)


def driftless_constants(bounds: CoefficientBounds, band: VolatilityBand, T: float) -> SupersolutionConstants:
    """Sharper constants available when b = h = 0:

        alpha = (n^d) * lambda * s_lo / (2 d s_hi Lambda),
        beta  = 1 / (d s_hi Lambda),  eps = T,  kappa = 0,  m_min = 0.

    For the canonical driftless case sigma = I, n = d this reduces to
    alpha = s_lo / (2 s_hi) and beta = 1/(d s_hi).
    """
    if T <= 0.0:
        raise ValueError("T must be positive")
    nd = min(bounds.n, bounds.d)
    alpha = nd * bounds.lambda_ * band.sigma_low_sq / (2.0 * bounds.d * band.sigma_high_sq * bounds.Lambda_)
    beta = 1.0 / (bounds.d * band.sigma_high_sq * bounds.Lambda_)
    return SupersolutionConstants(alpha, beta, T, 0.0, 0.0, 0.0)


def coordinate_decay_constants(bounds: CoefficientBounds, band: VolatilityBand, T: float) -> SupersolutionConstants:
    """Per-coordinate variant using the row bounds gamma_row <= |sigma_i|^2
    <= Gamma_row and |b_i|, |h_i^{jk}| <= L:

        alpha = gamma_row * s_lo / (8 s_hi Gamma_row),
        beta  = 1 / (2 s_hi Gamma_row),
        kappa = L^2 (s_hi d sqrt(d) + 1)^2 / (gamma_row s_lo),
        eps   = min(1/(8 kappa), T),  m_min = 8 kappa.
    """
    if T <= 0.0:
        raise ValueError("T must be positive")
    alpha = bounds.gamma_row * band.sigma_low_sq / (8.0 * band.sigma_high_sq * bounds.Gamma_row)
    beta = 1.0 / (2.0 * band.sigma_high_sq * bounds.Gamma_row)
    bulk = band.sigma_high_sq * bounds.d * np.sqrt(bounds.d) + 1.0
    kappa = bounds.L**2 * bulk**2 / (bounds.gamma_row * band.sigma_low_sq)
    eps = T if kappa == 0.0 else min(1.0 / (8.0 * kappa), T)
    return SupersolutionConstants(alpha, beta, eps, kappa, 0.0, 8.0 * kappa)


def supersolution_value(
    t,
    x,
    constants: SupersolutionConstants,
    a,
    T: float,
    m: float,
    coordinate: int | None = None,
):
    """The explicit supersolution

        (1 + m(T-t))^(-alpha) * exp(-m beta r^2 / (2 (1 + m(T-t))))

    with r^2 = |x-a|^2, or |x_i - a_i|^2 when a coordinate index is given.
    Broadcasts over t and x; x has shape (..., n) for n > 1.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t > T + 1e-12):
        raise ValueError("requires t <= T")
    if m < constants.m_min - 1e-12:
        raise ValueError(f"m={m} below m_min={constants.m_min}")
    x = np.asarray(x, dtype=float)
    a = np.atleast_1d(np.asarray(a, dtype=float))
    n = a.size
    if n == 1:
        # scalar state: x may have any shape of coordinate values
        r_sq = (x - a[0]) ** 2
    else:
        if x.shape[-1] != n:
            raise ValueError(f"x must have last axis of size {n}")
        if coordinate is None:
            r_sq = np.sum((x - a) ** 2, axis=-1)
        else:
            r_sq = (x[..., coordinate] - a[coordinate]) ** 2
    stretch = 1.0 + m * (T - t)
    return stretch ** (-constants.alpha) * np.exp(-m * constants.beta * r_sq / (2.0 * stretch))
