"""Sandwich variance estimators for dyadic OLS.

All three estimators share one meat routine::

    meat = sum_s omega(s / b) * sum_m sum_{m' in shell(m, s)} Y_m Y_m'^T

with ``Y_m = x_m * e_m`` the score of dyad ``m``. EHW keeps only ``s = 0``,
dyadic-robust keeps ``s <= 1`` with unit weights and network-HAC weights
every shell by the kernel. Everything is in raw (unnormalised) sums, so the
estimate is ``bread @ meat @ bread`` with ``bread = (X'X)^-1`` and confidence
intervals need no extra sample-size factor.

Because the three share the same accumulation (shell 0 first, then shells in
increasing distance, block by block), the collapse identities hold to the
last bit: rectangular ``b < 1`` reproduces EHW and rectangular ``b = 1``
reproduces dyadic-robust.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, replace

import numpy as np
from scipy import linalg, stats

from .constants import (
    BANDWIDTH_DEGREE_FLOOR,
    BANDWIDTH_DEGREE_SOURCES,
    BANDWIDTH_LOG_SCALE,
    ESTIMATOR_KINDS,
    KERNEL_KINDS,
    SYMMETRY_TOLERANCE,
)
from .dyad_graph import DyadNetwork, dyad_diameter, iter_shell_blocks
from .errors import NetdyadError, NotPositiveSemidefiniteError
from .observability import log_timing
from .settings import get_settings
from .types import BandwidthChoice, OlsFit, VarianceEstimate

logger = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class Kernel:
    """Symmetric kernel with ``omega(0) = 1`` and support ``|z| <= 1``."""

    kind: str = "rectangular"

    def __post_init__(self) -> None:
        if self.kind not in KERNEL_KINDS:
            raise NetdyadError(
                f"unknown kernel {self.kind!r}; expected one of {', '.join(KERNEL_KINDS)}"
            )

    def __call__(self, z: float | np.ndarray) -> np.ndarray:
        z = np.abs(np.asarray(z, dtype=np.float64))
        inside = z <= 1.0
        if self.kind == "rectangular":
            return np.where(inside, 1.0, 0.0)
        return np.where(inside, 1.0 - z, 0.0)

    def shell_weights(self, bandwidth: float) -> tuple[float, ...]:
        """``omega(s / b)`` for ``s = 0, 1, ...`` up to the last nonzero weight.

        ``b = 0`` keeps shell 0 only.
        """
        _check_bandwidth(bandwidth)
        if bandwidth == 0:
            return (1.0,)
        weights = [1.0]
        s = 1
        while s <= bandwidth:
            weight = float(self(s / bandwidth))
            if weight == 0.0:
                break
            weights.append(weight)
            s += 1
        return tuple(weights)


RECTANGULAR = Kernel("rectangular")
BARTLETT = Kernel("bartlett")


def ehw_variance(fit: OlsFit, net: DyadNetwork | None = None) -> VarianceEstimate:
    """Eicker-Huber-White estimate, ``bread (sum_m e_m^2 x_m x_m') bread``.

    ``net`` is optional; when given, the fit rows are checked against it.
    """
    if net is None:
        dyad_ids = fit.data.dyad_ids
        n_dyads = int(dyad_ids.max()) + 1 if dyad_ids.size else 0
        meat = _accumulate_meat(_aligned_scores(fit, n_dyads), None, (1.0,))
    else:
        meat = _accumulate_meat(_aligned_scores(fit, net.n_dyads), net, (1.0,))
    return VarianceEstimate(matrix=_sandwich(fit.bread, meat), kind="ehw")


def dyadic_robust_variance(fit: OlsFit, net: DyadNetwork) -> VarianceEstimate:
    """Dyadic-robust estimate over each dyad and the dyads adjacent to it."""
    meat = _accumulate_meat(_aligned_scores(fit, net.n_dyads), net, (1.0, 1.0))
    return VarianceEstimate(matrix=_sandwich(fit.bread, meat), kind="dyadic")


def network_hac_variance(
    fit: OlsFit,
    net: DyadNetwork,
    kernel: Kernel | str = RECTANGULAR,
    bandwidth: float = 2.0,
) -> VarianceEstimate:
    """Kernel-weighted network-HAC estimate over shells up to the bandwidth.

    BFS is truncated at the last shell with a nonzero kernel weight
    (``floor(b)`` for the rectangular kernel). Disconnected dyads never
    contribute.

    Raises:
        NetdyadError: for a negative or non-finite bandwidth.
    """
    kernel = kernel if isinstance(kernel, Kernel) else Kernel(kernel)
    weights = kernel.shell_weights(bandwidth)
    with log_timing(
        logger,
        "Computed network-HAC meat",
        level=logging.DEBUG,
        estimator="network",
        bandwidth=bandwidth,
        n_dyads=net.n_dyads,
    ):
        meat = _accumulate_meat(_aligned_scores(fit, net.n_dyads), net, weights)
    return VarianceEstimate(
        matrix=_sandwich(fit.bread, meat),
        kind="network",
        kernel=kernel.kind,
        bandwidth=float(bandwidth),
    )


def estimate_variance(
    kind: str,
    fit: OlsFit,
    net: DyadNetwork,
    *,
    kernel: Kernel | str = RECTANGULAR,
    bandwidth: float = 2.0,
) -> VarianceEstimate:
    """Dispatch on estimator name (``ehw``, ``dyadic`` or ``network``)."""
    if kind == "ehw":
        return ehw_variance(fit, net)
    if kind == "dyadic":
        return dyadic_robust_variance(fit, net)
    if kind == "network":
        return network_hac_variance(fit, net, kernel, bandwidth)
    raise NetdyadError(
        f"unknown estimator {kind!r}; expected one of {', '.join(ESTIMATOR_KINDS)}"
    )


def default_bandwidth(net: DyadNetwork, *, degree: str = "dyad") -> float:
    """Bandwidth rule ``2 log(M) / log(max(average degree, 1.05))``.

    ``degree="dyad"`` uses the dyad-network average degree; ``"node"`` uses
    the node-level average degree ``2M / N``.
    """
    if degree not in BANDWIDTH_DEGREE_SOURCES:
        raise NetdyadError(f"unknown bandwidth degree source {degree!r}")
    n_dyads = net.n_dyads
    if n_dyads == 0:
        raise NetdyadError("bandwidth rule needs at least one dyad")
    if degree == "dyad":
        average = net.average_degree()
    else:
        average = 2.0 * n_dyads / net.n_nodes
    denominator = math.log(max(average, BANDWIDTH_DEGREE_FLOOR))
    return BANDWIDTH_LOG_SCALE * math.log(n_dyads) / denominator


def resolve_bandwidth(
    choice: BandwidthChoice, net: DyadNetwork, *, degree: str = "dyad"
) -> float:
    """Turn ``"auto"``, ``"diameter"`` or a number into a bandwidth."""
    if choice == "auto":
        return default_bandwidth(net, degree=degree)
    if choice == "diameter":
        return float(dyad_diameter(net))
    value = float(choice)
    _check_bandwidth(value)
    return value


def repair_psd(
    v: VarianceEstimate, epsilon: float | None = None
) -> VarianceEstimate:
    """Add ``epsilon`` to every eigenvalue of ``v`` and reassemble.

    Raises:
        NetdyadError: if ``v`` is not symmetric (relative 1e-12) or
            ``epsilon`` is negative.
    """
    eps = get_settings().psd_epsilon if epsilon is None else float(epsilon)
    if not (math.isfinite(eps) and eps >= 0):
        raise NetdyadError(f"PSD repair epsilon must be >= 0, got {epsilon}")
    matrix = np.asarray(v.matrix, dtype=np.float64)
    _check_symmetric(matrix)
    eigenvalues, eigenvectors = linalg.eigh(matrix)
    repaired = (eigenvectors * (eigenvalues + eps)) @ eigenvectors.T
    return replace(
        v,
        matrix=_symmetrize(repaired),
        psd_repaired=True,
        psd_epsilon=eps,
    )


def needs_psd_repair(v: VarianceEstimate) -> bool:
    """True when ``v`` has a negative eigenvalue."""
    matrix = np.asarray(v.matrix, dtype=np.float64)
    if matrix.shape == (1, 1):
        return bool(matrix[0, 0] < 0)
    return bool(linalg.eigvalsh(matrix)[0] < 0)


def ensure_psd(v: VarianceEstimate, epsilon: float | None = None) -> VarianceEstimate:
    """Repair ``v`` only if it has a negative eigenvalue.

    Unlike :func:`repair_psd`, negative eigenvalues are clipped to zero
    before ``epsilon`` is added, so the result is PSD however negative the
    smallest eigenvalue was. PSD inputs come back unchanged.
    """
    if not needs_psd_repair(v):
        return v
    eps = get_settings().psd_epsilon if epsilon is None else float(epsilon)
    if not (math.isfinite(eps) and eps >= 0):
        raise NetdyadError(f"PSD repair epsilon must be >= 0, got {epsilon}")
    matrix = np.asarray(v.matrix, dtype=np.float64)
    _check_symmetric(matrix)
    eigenvalues, eigenvectors = linalg.eigh(matrix)
    shifted = np.maximum(eigenvalues, 0.0) + eps
    repaired = _symmetrize((eigenvectors * shifted) @ eigenvectors.T)
    # reassembly can leave a zero variance a rounding step below 0
    diagonal = np.diag_indices_from(repaired)
    repaired[diagonal] = np.maximum(repaired[diagonal], 0.0)
    return replace(v, matrix=repaired, psd_repaired=True, psd_epsilon=eps)


def normal_critical_value(level: float) -> float:
    if not 0.0 < level < 1.0:
        raise NetdyadError(f"confidence level must lie in (0, 1), got {level}")
    return float(stats.norm.ppf((1.0 + level) / 2.0))


def standard_errors(v: VarianceEstimate) -> np.ndarray:
    """Square roots of the diagonal of ``v``.

    Raises:
        NotPositiveSemidefiniteError: if any diagonal entry is negative.
    """
    diagonal = v.diagonal
    negative = np.flatnonzero(diagonal < 0)
    if negative.size:
        k = int(negative[0])
        raise NotPositiveSemidefiniteError(
            f"{v.kind} variance has negative diagonal entry {diagonal[k]:.3e} "
            f"at coordinate {k}; apply repair_psd before building intervals"
        )
    return np.sqrt(diagonal)


def confidence_interval(
    fit: OlsFit,
    v: VarianceEstimate,
    coord: int,
    level: float = 0.95,
) -> tuple[float, float]:
    """Normal interval ``beta_k +/- z_{(1+level)/2} sqrt(v_kk)``."""
    n_coef = fit.beta_hat.shape[0]
    if not 0 <= coord < n_coef:
        raise NetdyadError(f"coordinate {coord} outside [0, {n_coef})")
    critical = normal_critical_value(level)
    variance = float(v.matrix[coord, coord])
    if variance < 0:
        raise NotPositiveSemidefiniteError(
            f"{v.kind} variance of coefficient {coord} is negative "
            f"({variance:.3e}); apply repair_psd before building intervals"
        )
    half_width = critical * math.sqrt(variance)
    beta = float(fit.beta_hat[coord])
    return beta - half_width, beta + half_width


def _accumulate_meat(
    scores: np.ndarray,
    net: DyadNetwork | None,
    weights: Sequence[float],
    block_size: int | None = None,
) -> np.ndarray:
    """``sum_s weights[s] * sum_m sum_{m' in shell(m, s)} Y_m Y_m'^T``.

    ``weights[0]`` is the shell-0 weight and is always 1. Shells are produced
    block by block with BFS truncated at ``len(weights) - 1``. Without a
    network only shell 0 is available, over the same row blocks.
    """
    n_regressors = scores.shape[1]
    meat = np.zeros((n_regressors, n_regressors))
    s_max = len(weights) - 1
    if net is None:
        if s_max:
            raise NetdyadError("shells beyond 0 need a dyad network")
        size = block_size or get_settings().shell_block_size
        blocks = (
            (slice(start, min(start + size, scores.shape[0])), [])
            for start in range(0, scores.shape[0], size)
        )
    else:
        blocks = iter_shell_blocks(net, s_max, block_size=block_size)
    for rows, shells in blocks:
        own = scores[rows]
        meat += weights[0] * (own.T @ own)
        for s, shell in enumerate(shells, start=1):
            meat += weights[s] * (own.T @ (shell @ scores))
    return _symmetrize(meat)


def _aligned_scores(fit: OlsFit, n_dyads: int) -> np.ndarray:
    """Scores scattered onto dyad ids ``0..M-1``; absent dyads score zero."""
    dyad_ids = fit.data.dyad_ids
    if dyad_ids.size and (dyad_ids.min() < 0 or dyad_ids.max() >= n_dyads):
        raise NetdyadError(
            f"fit rows reference dyad ids outside the network's [0, {n_dyads})"
        )
    if np.unique(dyad_ids).size != dyad_ids.size:
        raise NetdyadError("fit rows reference the same dyad more than once")
    scores = np.zeros((n_dyads, fit.beta_hat.shape[0]))
    scores[dyad_ids] = fit.scores
    return scores


def _sandwich(bread: np.ndarray, meat: np.ndarray) -> np.ndarray:
    return _symmetrize(bread @ meat @ bread)


def _symmetrize(matrix: np.ndarray) -> np.ndarray:
    return (matrix + matrix.T) / 2.0


def _check_symmetric(matrix: np.ndarray) -> None:
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise NetdyadError(f"variance matrix must be square, got shape {matrix.shape}")
    scale = max(float(np.max(np.abs(matrix), initial=0.0)), np.finfo(float).tiny)
    asymmetry = float(np.max(np.abs(matrix - matrix.T), initial=0.0))
    if asymmetry > SYMMETRY_TOLERANCE * scale:
        raise NetdyadError(
            f"variance matrix is not symmetric (max |V - V'| = {asymmetry:.3e})"
        )


def _check_bandwidth(bandwidth: float) -> None:
    if not math.isfinite(bandwidth):
        raise NetdyadError(f"bandwidth must be finite, got {bandwidth}")
    if bandwidth < 0:
        raise NetdyadError(f"bandwidth must be >= 0, got {bandwidth}")


__all__ = [
    "BARTLETT",
    "Kernel",
    "RECTANGULAR",
    "confidence_interval",
    "default_bandwidth",
    "dyadic_robust_variance",
    "ehw_variance",
    "ensure_psd",
    "estimate_variance",
    "needs_psd_repair",
    "network_hac_variance",
    "normal_critical_value",
    "repair_psd",
    "resolve_bandwidth",
    "standard_errors",
]
