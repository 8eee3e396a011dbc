"""Reconstruction-weight solvers.

Two methods are provided.  The classical solver reconstructs each point from
its neighbors as they sit in the ambient space, regularizing the Gram matrix
when asked to (mandatory once K > D, where the Gram matrix is singular).  The
low-dimensional-representation (LDR) solver first replaces each neighborhood
by its best rank-d approximation and returns the minimum-norm weights that
reconstruct the center exactly from that representation; it needs no
regularization, and the weights depend only on the projector onto the
discarded singular directions, which is well defined whenever the top-d
spectral gap is.
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sparse

from .datasets import validate_cloud
from .errors import DegenerateWeightsError, GeneralPositionError, SingularNeighborhoodError
from .neighbors import NeighborGraph, NeighborhoodMatrix, neighborhood_matrix

# Regularization scale: the ridge added to the Gram matrix is
# (delta / K) * trace(G), so it is invariant to input scaling.
DEFAULT_DELTA = 1e-9

# Reciprocal-condition floor below which an unregularized Gram solve refuses.
RCOND_MIN = 1e-12

# Per-neighbor floor on 1'U2U2'1 (scaled by K) for the general-position check.
GENERAL_POSITION_TOL = 1e-12

# Relative spectral-gap floor below which the rank-d split is flagged.
GAP_WARN_REL = 1e-6


@dataclass
class NeighborhoodSpectrum:
    """SVD of one centered neighborhood, split at rank d.

    singular_values has length K (zero-padded when D < K) in descending
    order.  U1 spans the top-d left-singular directions and U2 the rest;
    alpha = (1/K) * ||U1' 1||^2 measures how much of the ones vector the
    retained subspace captures (alpha -> 1 means the projected neighbors
    leave general position).  gap_warning flags a numerically ill-defined
    split: (lambda_d - lambda_{d+1}) / lambda_1 below 1e-6.
    """

    singular_values: np.ndarray  # (K,)
    U1: np.ndarray               # (K, d)
    U2: np.ndarray               # (K, K - d)
    alpha: float
    d: int
    radius: float = float("nan")
    center_index: int = -1
    gap_warning: bool = False


def _fix_signs(U: np.ndarray) -> np.ndarray:
    """Make each column's largest-magnitude entry positive (first one on ties)."""
    lead = np.argmax(np.abs(U), axis=0)
    flip = U[lead, np.arange(U.shape[1])] < 0.0
    U = U.copy()
    U[:, flip] *= -1.0
    return U


def neighborhood_spectrum(Xi: NeighborhoodMatrix, d: int) -> NeighborhoodSpectrum:
    """Full SVD split of a neighborhood at rank d (requires 1 <= d < K).

    Column signs follow the largest-magnitude-entry-positive convention, so
    repeated runs on the same machine agree bit for bit.
    """
    rows = np.asarray(Xi.rows, dtype=float)
    K = rows.shape[0]
    if not 1 <= d < K:
        raise ValueError(f"need 1 <= d < K = {K}, got d = {d}")
    U, s, _ = np.linalg.svd(rows, full_matrices=True)
    U = _fix_signs(U)
    lam = np.zeros(K)
    lam[: s.size] = s
    U1 = U[:, :d]
    U2 = U[:, d:]
    proj = U1.T @ np.ones(K)
    alpha = float(proj @ proj) / K
    top = lam[0]
    gap_warning = bool(top <= 0.0 or (lam[d - 1] - lam[d]) / top < GAP_WARN_REL)
    return NeighborhoodSpectrum(
        singular_values=lam,
        U1=U1,
        U2=U2,
        alpha=alpha,
        d=d,
        radius=Xi.radius,
        center_index=Xi.center_index,
        gap_warning=gap_warning,
    )


def _gram_rcond(G: np.ndarray) -> float:
    evals = np.linalg.eigvalsh(G)
    top = evals[-1]
    if top <= 0.0:
        return 0.0
    return max(float(evals[0]), 0.0) / float(top)


def _normalize(w: np.ndarray) -> np.ndarray:
    total = w.sum()
    if total == 0.0 or abs(total) < 1e-14 * np.abs(w).sum():
        raise DegenerateWeightsError("weight vector sums to zero; normalization undefined")
    return w / total


def lle_weights(Xi: NeighborhoodMatrix, delta: float) -> np.ndarray:
    """Classical reconstruction weights, optionally regularized.

    Solves (G + delta_eff * I) w = 1 for the Gram matrix G = Xi Xi' and
    normalizes w to sum to one, with delta_eff = (delta / K) * trace(G).
    With delta = 0 the Gram matrix must be nonsingular to working precision
    (reciprocal condition number above 1e-12), which fails whenever K > D.
    """
    if delta < 0.0:
        raise ValueError(f"delta must be >= 0, got {delta}")
    rows = np.asarray(Xi.rows, dtype=float)
    K = rows.shape[0]
    G = rows @ rows.T
    trace = float(np.trace(G))
    if delta == 0.0:
        rcond = _gram_rcond(G)
        if rcond < RCOND_MIN:
            raise SingularNeighborhoodError(
                f"Gram matrix is singular to working precision (rcond = {rcond:.2e}); "
                "pass delta > 0 or use the rank-d method",
                rcond=rcond,
            )
        lhs = G
    elif trace == 0.0:
        # All neighbors coincide with the center; the ridge objective alone
        # remains and its minimizer under the sum constraint is uniform.
        return np.full(K, 1.0 / K)
    else:
        lhs = G + (delta / K) * trace * np.eye(K)
    return _normalize(np.linalg.solve(lhs, np.ones(K)))


def lle_weights_pinv(Xi: NeighborhoodMatrix) -> np.ndarray:
    """Unregularized weights via the pseudo-inverse: G^+ 1, normalized.

    Minimum-norm solution of the stationarity equation G w proportional to 1;
    used where the exact delta = 0 solution is wanted even when the Gram
    matrix is singular (e.g. the perturbation study).
    """
    rows = np.asarray(Xi.rows, dtype=float)
    G = rows @ rows.T
    return _normalize(np.linalg.pinv(G) @ np.ones(rows.shape[0]))


def ldr_weights_from_spectrum(spec: NeighborhoodSpectrum) -> np.ndarray:
    """Rank-d representation weights from a precomputed spectrum.

    w = U2 U2' 1 / (1' U2 U2' 1): the unique minimum-norm vector in the span
    of the discarded singular directions whose entries sum to one.  Raises
    GeneralPositionError when 1' U2 U2' 1 <= 1e-12 * K, i.e. the ones vector
    numerically lies inside the retained subspace (alpha = 1).
    """
    U2 = spec.U2
    K = U2.shape[0]
    coef = U2.T @ np.ones(K)
    denom = float(coef @ coef)
    if denom <= GENERAL_POSITION_TOL * K:
        raise GeneralPositionError(
            f"projected neighborhood is not in general position "
            f"(1'U2U2'1 = {denom:.3e}, alpha = {spec.alpha:.6f})",
            alpha=spec.alpha,
        )
    return (U2 @ coef) / denom


def ldr_weights(Xi: NeighborhoodMatrix, d: int) -> np.ndarray:
    """Weights that reconstruct the center exactly from the rank-d
    approximation of its neighborhood.

    The returned vector lies in the span of the trailing K - d left-singular
    vectors, sums to one, and among all such vectors has the smallest l2
    norm.  No regularization parameter exists; when K > D (ambient dimension)
    the discarded span always contains exact annihilators of the data, so the
    reconstruction is exact where the classical Gram solve would have needed
    a ridge.
    """
    return ldr_weights_from_spectrum(neighborhood_spectrum(Xi, d))


def assemble_weight_matrix(cloud, graph: NeighborGraph, method: str, *, d: int,
                           delta: float = DEFAULT_DELTA):
    """Solve per-point weights and assemble the sparse N x N row-stochastic W.

    method is "classical" (ambient-space weights regularized by delta) or
    "ldr" (rank-d representation weights).  Neighborhood spectra are computed
    for every point regardless of method, so callers can report alpha,
    singular values, radii, and gap warnings; for classical with d >= K the
    spectra list is empty since no rank split exists.

    Returns (W, spectra) with W in CSR format, row i carrying point i's
    weights on its neighbor columns.  Per-neighborhood failures are re-raised
    with the offending point index attached.
    """
    X = validate_cloud(cloud)
    if method not in ("classical", "ldr"):
        raise ValueError(f"unknown method {method!r}; expected 'classical' or 'ldr'")
    n, K = graph.indices.shape
    if method == "ldr" and not 1 <= d < K:
        raise ValueError(f"rank-d method needs 1 <= d < K = {K}, got d = {d}")
    with_spectra = 1 <= d < K
    data = np.empty((n, K))
    spectra = []
    for i in range(n):
        Xi = neighborhood_matrix(X, graph, i)
        spec = neighborhood_spectrum(Xi, d) if with_spectra else None
        if spec is not None:
            spectra.append(spec)
        try:
            if method == "ldr":
                w = ldr_weights_from_spectrum(spec)
            else:
                w = lle_weights(Xi, delta)
        except (SingularNeighborhoodError, DegenerateWeightsError, GeneralPositionError) as exc:
            exc.point_index = i
            exc.args = (f"point {i}: {exc.args[0]}",)
            raise
        data[i] = w
    indptr = np.arange(0, n * K + 1, K)
    W = sparse.csr_matrix((data.ravel(), graph.indices.ravel().copy(), indptr), shape=(n, n))
    return W, spectra


def save_weight_matrix(W, path) -> None:
    """Write W as coordinate-format text: one "i,j,value" line per entry."""
    coo = sparse.coo_matrix(W)
    lines = [
        f"{int(i)},{int(j)},{repr(float(v))}"
        for i, j, v in zip(coo.row, coo.col, coo.data)
    ]
    Path(path).write_text("\n".join(lines) + "\n")


def save_spectra(spectra, path) -> None:
    """Write spectra as CSV rows: center index, lambda_1..lambda_K, alpha, radius."""
    lines = []
    for s in spectra:
        cells = [str(int(s.center_index))]
        cells.extend(repr(float(v)) for v in s.singular_values)
        cells.append(repr(float(s.alpha)))
        cells.append(repr(float(s.radius)))
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n")
