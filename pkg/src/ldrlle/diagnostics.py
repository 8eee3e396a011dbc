"""Verification harnesses and embedding-quality statistics.

Covers the pieces that check the algorithm rather than run it: per-point
reconstruction errors, the perturbation-stability bound and its Monte Carlo
study on the grid cross, the preimage objective-value scaling check, and the
statistics used to compare embeddings against ground truth (affine-fit R^2,
Procrustes residual, rank correlation).
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import orthogonal_procrustes
from scipy.stats import spearmanr

from .embedding import phi
from .errors import SingularNeighborhoodError, UndefinedCorrelationError
from .neighbors import NeighborhoodMatrix, knn
from .weights import (
    assemble_weight_matrix,
    ldr_weights,
    lle_weights,
    lle_weights_pinv,
    neighborhood_spectrum,
)

# Top singular value of the rescaled grid cross; must stay below 1 for the
# stability bound to apply, and 0.99 keeps all the study epsilons inside the
# bound's precondition region.
CROSS_LAMBDA1 = 0.99

DEFAULT_EPSILONS = (1e-2, 1e-4, 1e-6)
DEFAULT_TRIALS = 1000


def reconstruction_error(Xi: NeighborhoodMatrix, w) -> float:
    """Squared residual ||sum_j w_j (eta_j - x_i)||^2 = w' Xi Xi' w."""
    rows = np.asarray(Xi.rows, dtype=float)
    w = np.asarray(w, dtype=float)
    if w.shape != (rows.shape[0],):
        raise ValueError(
            f"weight vector shape {w.shape} does not match K = {rows.shape[0]}"
        )
    r = rows.T @ w
    return float(r @ r)


def theorem1_bound(lambda_d: float, alpha: float, epsilon: float) -> Optional[float]:
    """Stability bound 20 * epsilon / (lambda_d^2 * (1 - alpha)), or None.

    The bound on the weight displacement under a unit-Frobenius perturbation
    of size epsilon holds only when
    epsilon < min(lambda_d^4, lambda_d^2 * (1 - alpha)) / 72 (and the
    neighborhood is scaled so its top singular value is below 1, which is the
    caller's responsibility).  When the precondition fails, None is returned
    and nothing is asserted.
    """
    if not lambda_d > 0.0:
        raise ValueError(f"lambda_d must be > 0, got {lambda_d}")
    if not 0.0 <= alpha < 1.0:
        raise ValueError(f"alpha must be in [0, 1), got {alpha}")
    if not epsilon > 0.0:
        raise ValueError(f"epsilon must be > 0, got {epsilon}")
    limit = min(lambda_d ** 4, lambda_d ** 2 * (1.0 - alpha)) / 72.0
    if not epsilon < limit:
        return None
    return 20.0 * epsilon / (lambda_d ** 2 * (1.0 - alpha))


def grid_cross_neighborhood(lambda1: float = CROSS_LAMBDA1) -> NeighborhoodMatrix:
    """The planar grid cross: a grid point's 4 nearest neighbors, centered.

    Rows are (+-1, 0, 0, 0) and (0, +-1, 0, 0) rescaled so the top singular
    value is lambda1; K = D = 4, the two non-zero singular values coincide,
    alpha = 0, and the exact reconstruction weights are uniform.
    """
    if not lambda1 > 0.0:
        raise ValueError(f"lambda1 must be > 0, got {lambda1}")
    rows = np.zeros((4, 4))
    rows[0, 0] = 1.0
    rows[1, 0] = -1.0
    rows[2, 1] = 1.0
    rows[3, 1] = -1.0
    rows *= lambda1 / np.sqrt(2.0)  # unscaled singular values: sqrt(2), sqrt(2), 0, 0
    return NeighborhoodMatrix.from_rows(rows)


@dataclass
class PerturbationReport:
    """Per-epsilon record of weight displacements under unit-Frobenius noise."""

    epsilon: float
    trials: int
    distances_classical: np.ndarray
    distances_ldr: np.ndarray
    bound: Optional[float]         # None when the bound's preconditions fail
    preconditions_met: np.ndarray  # bool per trial


def perturbation_experiment(epsilons=DEFAULT_EPSILONS, trials: int = DEFAULT_TRIALS,
                            seed: int = 0) -> list[PerturbationReport]:
    """Monte Carlo stability study on the grid cross.

    Each trial perturbs the cross by epsilon times a unit-Frobenius Gaussian
    matrix and records how far both solvers' weights move from the exact
    uniform answer.  The classical arm solves with delta = 0 (K = D, so no
    regularization is called for), falling back to the pseudo-inverse when
    the perturbed Gram matrix is still numerically singular; the rank-d arm
    uses d = 2, the cross's true dimension.

    Noise is seeded from (seed, epsilon index, trial), so any subset of
    trials reproduces independently of execution order.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    base = grid_cross_neighborhood()
    uniform = np.full(4, 0.25)
    spec = neighborhood_spectrum(base, 2)
    lam_d = float(spec.singular_values[1])
    reports = []
    for e_idx, eps in enumerate(epsilons):
        if not eps > 0.0:
            raise ValueError(f"epsilon must be > 0, got {eps}")
        bound = theorem1_bound(lam_d, spec.alpha, eps)
        d_classical = np.empty(trials)
        d_ldr = np.empty(trials)
        for t in range(trials):
            rng = np.random.Generator(
                np.random.PCG64(np.random.SeedSequence([seed, e_idx, t]))
            )
            E = rng.standard_normal((4, 4))
            E /= np.linalg.norm(E)
            Xt = NeighborhoodMatrix.from_rows(base.rows + eps * E)
            try:
                w_cl = lle_weights(Xt, 0.0)
            except SingularNeighborhoodError:
                w_cl = lle_weights_pinv(Xt)
            w_ldr = ldr_weights(Xt, 2)
            d_classical[t] = np.linalg.norm(w_cl - uniform)
            d_ldr[t] = np.linalg.norm(w_ldr - uniform)
        met = np.full(trials, bound is not None)
        reports.append(
            PerturbationReport(float(eps), trials, d_classical, d_ldr, bound, met)
        )
    return reports


def perturbation_report_dict(reports, config: dict | None = None) -> dict:
    """JSON-ready summary: per-epsilon distance stats, bound, violation count.

    A violation is a rank-d displacement at or above the bound in a trial
    whose preconditions held; the bound is a strict inequality.
    """
    rows = []
    for r in reports:
        violations = None
        if r.bound is not None:
            violations = int(np.sum((r.distances_ldr >= r.bound) & r.preconditions_met))
        rows.append({
            "epsilon": r.epsilon,
            "trials": r.trials,
            "bound": r.bound,
            "preconditions_met": bool(r.preconditions_met.all()),
            "violations": violations,
            "classical": _distance_stats(r.distances_classical),
            "ldr": _distance_stats(r.distances_ldr),
        })
    out = {"reports": rows}
    if config is not None:
        out["config"] = config
    return out


def _distance_stats(d: np.ndarray) -> dict:
    return {
        "median": float(np.median(d)),
        "p95": float(np.percentile(d, 95)),
        "max": float(d.max()),
    }


TAIL_VANISH_REL = 1e-12


@dataclass
class Theorem2Result:
    """Preimage objective value against its spectral-tail scale.

    ratio = (phi(Z)/N) / (max_i lambda_{d+1}(i) * r_max^2); NaN when the
    spectral tail vanishes (rank-d data reconstructs exactly, leaving both
    numerator and denominator at rounding level).
    """

    phi_z_over_n: float
    max_lambda_dp1: float
    r_max: float
    ratio: float


def theorem2_check_from_parts(preimage, W, spectra) -> Theorem2Result:
    """Evaluate the objective-value check from an assembled weight matrix.

    The tail counts as vanished when the largest discarded singular value
    is within TAIL_VANISH_REL of the largest retained one; an exact-zero
    test would miss data that is rank d up to rounding.
    """
    n = W.shape[0]
    phi_z = phi(preimage, W) / n
    max_tail = max(float(s.singular_values[s.d]) for s in spectra)
    max_lead = max(float(s.singular_values[0]) for s in spectra)
    r_max = max(float(s.radius) for s in spectra)
    if max_tail <= TAIL_VANISH_REL * max_lead:
        ratio = float("nan")
    else:
        ratio = phi_z / (max_tail * r_max ** 2)
    return Theorem2Result(phi_z, max_tail, r_max, ratio)


def theorem2_check(sample, K: int, d: int) -> Theorem2Result:
    """Objective value of the ground-truth preimage under rank-d weights.

    Builds the K-neighbor graph and rank-d weight matrix on the embedded
    points, then evaluates the reconstruction objective on the sample's
    preimage parameters.  For a well-sampled smooth sheet the ratio stays
    bounded as n grows; that boundedness is the check.
    """
    graph = knn(sample.points, K)
    W, spectra = assemble_weight_matrix(sample.points, graph, "ldr", d=d)
    return theorem2_check_from_parts(sample.preimage, W, spectra)


def permuted_preimage_null(W, preimage, permutations: int = 20, seed: int = 0) -> float:
    """Median phi(Z_perm)/N over random row permutations of the preimage.

    Null scale for the objective when weights and parameters are unrelated;
    a real preimage should sit far below it.
    """
    if permutations < 1:
        raise ValueError(f"permutations must be >= 1, got {permutations}")
    Z = np.asarray(preimage, dtype=float)
    rng = np.random.Generator(np.random.PCG64(seed))
    n = W.shape[0]
    vals = [phi(Z[rng.permutation(n)], W) / n for _ in range(permutations)]
    return float(np.median(vals))


@dataclass
class EmbeddingDiagnostics:
    """Quality statistics for one embedding run."""

    phi_value: Optional[float]
    linear_r2: float
    procrustes_residual: Optional[float]
    rank_correlation: Optional[float]


def linear_r2(X, Y) -> float:
    """Fraction of centered output variance explained by the best affine map X -> Y.

    A value near 1 means the embedding is (close to) a linear projection of
    the input; clipped into [0, 1] against roundoff.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    if X.ndim != 2 or X.shape[0] != Y.shape[0]:
        raise ValueError(f"X shape {X.shape} does not match Y shape {Y.shape}")
    A = np.column_stack([X, np.ones(X.shape[0])])
    coef, *_ = np.linalg.lstsq(A, Y, rcond=None)
    resid = Y - A @ coef
    Yc = Y - Y.mean(axis=0)
    denom = float((Yc * Yc).sum())
    if denom == 0.0:
        raise ValueError("output has zero variance; affine fit undefined")
    return float(np.clip(1.0 - float((resid * resid).sum()) / denom, 0.0, 1.0))


def procrustes_residual(Y, reference) -> float:
    """Relative residual of the best scaled orthogonal alignment of Y to the reference.

    Both inputs are centered first; the residual is normalized by the
    reference's Frobenius norm, so 0 means a perfect match up to rigid motion
    and scale.
    """
    Y = np.asarray(Y, dtype=float)
    R = np.asarray(reference, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    if R.ndim == 1:
        R = R[:, None]
    if Y.shape != R.shape:
        raise ValueError(f"shapes {Y.shape} and {R.shape} differ")
    Yc = Y - Y.mean(axis=0)
    Rc = R - R.mean(axis=0)
    ynorm2 = float((Yc * Yc).sum())
    rnorm2 = float((Rc * Rc).sum())
    if ynorm2 == 0.0 or rnorm2 == 0.0:
        raise ValueError("degenerate (constant) input; alignment undefined")
    Q, scale = orthogonal_procrustes(Yc, Rc)
    c = scale / ynorm2
    diff = c * (Yc @ Q) - Rc
    return float(np.sqrt(float((diff * diff).sum()) / rnorm2))


def monotonicity_1d(Y, preimage) -> float:
    """Spearman rank correlation of a one-column embedding against ground truth.

    Signed: -1 is as good as +1 (the embedding's orientation is arbitrary).
    Raises UndefinedCorrelationError when either input is constant.
    """
    y = np.asarray(Y, dtype=float).ravel()
    z = np.asarray(preimage, dtype=float).ravel()
    if y.shape != z.shape:
        raise ValueError(f"lengths {y.size} and {z.size} differ")
    if np.ptp(y) == 0.0 or np.ptp(z) == 0.0:
        raise UndefinedCorrelationError("rank correlation undefined for constant input")
    rho = spearmanr(y, z).statistic
    return float(rho)


def linear_projection_diagnostic(X, Y, reference=None, weights=None,
                                 preimage=None) -> EmbeddingDiagnostics:
    """Bundle of embedding-quality statistics.

    linear_r2 is always computed from (X, Y).  procrustes_residual is filled
    when a same-shape reference is supplied, phi_value when a weight matrix
    is supplied, and rank_correlation when Y and the supplied preimage are
    both one-column.
    """
    r2 = linear_r2(X, Y)
    pres = procrustes_residual(Y, reference) if reference is not None else None
    phi_v = phi(Y, weights) if weights is not None else None
    rc = None
    if preimage is not None:
        Ymat = np.asarray(Y, dtype=float)
        Z = np.asarray(preimage, dtype=float)
        y_cols = 1 if Ymat.ndim == 1 else Ymat.shape[1]
        z_cols = 1 if Z.ndim == 1 else Z.shape[1]
        if y_cols == 1 and z_cols == 1:
            rc = monotonicity_1d(Ymat, Z)
    return EmbeddingDiagnostics(phi_v, r2, pres, rc)
