"""OLS for the dyadic linear model and within-group demeaning.

Coefficients come from a thin SVD of the design matrix rather than from
inverting X'X. The bread ``(X'X)^-1 = V S^-2 V'`` is still materialised
because every sandwich estimator needs it.
"""

from __future__ import annotations

import logging

import numpy as np
from scipy import linalg

from .errors import NetdyadError, RankDeficiencyError
from .settings import get_settings
from .types import OlsFit, RegressionData

logger = logging.getLogger(__name__)

INTERCEPT_NAME = "intercept"


def ols_fit(data: RegressionData, *, condition_limit: float | None = None) -> OlsFit:
    """Least-squares fit of ``y`` on ``X``.

    Args:
        data: Aligned outcome, design matrix and dyad ids.
        condition_limit: Upper bound on cond(X'X); defaults to
            ``NETDYAD_CONDITION_LIMIT`` (1e12).

    Raises:
        NetdyadError: if there are fewer rows than regressors.
        RankDeficiencyError: if X'X is singular or worse conditioned than
            ``condition_limit``.
    """
    n_rows, n_regressors = data.X.shape
    if n_regressors == 0:
        raise NetdyadError("design matrix has no columns")
    if n_rows < n_regressors:
        raise NetdyadError(
            f"{n_rows} observations cannot identify {n_regressors} coefficients"
        )
    limit = condition_limit
    if limit is None:
        limit = get_settings().condition_limit

    u, singular, vt = linalg.svd(data.X, full_matrices=False, check_finite=False)
    smallest = float(singular[-1])
    condition = np.inf if smallest == 0 else float((singular[0] / smallest) ** 2)
    if not condition <= limit:
        raise RankDeficiencyError(smallest, condition)

    beta_hat = vt.T @ ((u.T @ data.y) / singular)
    bread = (vt.T / singular**2) @ vt
    bread = (bread + bread.T) / 2
    residuals = data.y - data.X @ beta_hat
    logger.debug(
        "Fitted OLS",
        extra={"n_dyads": n_rows, "n_regressors": n_regressors, "condition": condition},
    )
    return OlsFit(
        beta_hat=beta_hat,
        residuals=residuals,
        bread=bread,
        data=data,
        singular_values=singular,
    )


def within_demean(data: RegressionData) -> RegressionData:
    """Subtract group means from ``y`` and every non-intercept column of ``X``.

    The intercept column (``data.intercept_index``) is dropped; it is
    absorbed by the group effects.
    """
    if data.group_ids is None:
        raise NetdyadError("within_demean needs group_ids; none were supplied")
    _, inverse = np.unique(data.group_ids, return_inverse=True)
    inverse = inverse.ravel()
    counts = np.bincount(inverse).astype(np.float64)

    keep = [k for k in range(data.n_regressors) if k != data.intercept_index]
    y = data.y - _group_means(data.y, inverse, counts)
    X = np.empty((data.n_rows, len(keep)))
    for column, k in enumerate(keep):
        X[:, column] = data.X[:, k] - _group_means(data.X[:, k], inverse, counts)
    return RegressionData(
        y=y,
        X=X,
        dyad_ids=data.dyad_ids,
        column_names=tuple(data.column_names[k] for k in keep),
        group_ids=data.group_ids,
        intercept_index=None,
    )


def add_intercept(data: RegressionData) -> RegressionData:
    """Prepend a column of ones named ``intercept``."""
    if data.intercept_index is not None:
        return data
    X = np.column_stack([np.ones(data.n_rows), data.X])
    return RegressionData(
        y=data.y,
        X=X,
        dyad_ids=data.dyad_ids,
        column_names=(INTERCEPT_NAME, *data.column_names),
        group_ids=data.group_ids,
        intercept_index=0,
    )


def count_groups(data: RegressionData) -> int | None:
    if data.group_ids is None:
        return None
    return int(np.unique(data.group_ids).size)


def _group_means(
    values: np.ndarray, inverse: np.ndarray, counts: np.ndarray
) -> np.ndarray:
    sums = np.bincount(inverse, weights=values, minlength=counts.size)
    return (sums / counts)[inverse]


__all__ = [
    "INTERCEPT_NAME",
    "add_intercept",
    "count_groups",
    "ols_fit",
    "within_demean",
]
