"""
Group Statistics

Mann-Whitney contrasts between regulariser kinds and the direction-of-effect
checks run after a sweep. Only filter-passing networks are used.
"""

import logging
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from scipy import stats

from ..core.constraints import RegularizerKind
from ..core.errors import EmptySelectionError, InvalidInputError
from ..core.numerics import mann_whitney, pearson
from ..core.settings import get_settings
from ..metrics.analyze import COLUMNS, MetricsTable
from ..training.schema import TaskName
from .figures import filtered_frame
from .schema import ClaimCheck, GroupComparison

logger = logging.getLogger(__name__)

ALPHA = 0.05

_METRICS = [c for c in COLUMNS if c not in ("kind", "gamma", "seed", "epoch")]


def _at_epoch(frame: pd.DataFrame, epoch: Optional[int]) -> pd.DataFrame:
    if epoch is None:
        last = frame.groupby(["kind", "gamma", "seed"])["epoch"].transform("max")
        return frame[frame["epoch"] == last]
    return frame[frame["epoch"] == epoch]


def compare_groups(
    table: MetricsTable,
    metric: str,
    kind_a: RegularizerKind,
    kind_b: RegularizerKind,
    epoch: Optional[int] = None,
    task: TaskName = TaskName.INFERENCE,
    gammas: Optional[Sequence[float]] = None,
    alternative: str = "less",
    thresholds: Optional[Dict[str, float]] = None,
) -> GroupComparison:
    """
    Mann-Whitney U of `metric` for kind_a against kind_b.

    Args:
        epoch: epoch to compare; None means each run's final epoch
        gammas: restrict both groups to these gammas
        alternative: "less" tests metric(kind_a) < metric(kind_b)

    Raises:
        InvalidInputError: unknown metric
        EmptySelectionError: either group is empty after filtering
    """
    if metric not in _METRICS:
        raise InvalidInputError(f"unknown metric {metric!r}")
    thresholds = thresholds or get_settings().filters.thresholds
    frame = _at_epoch(filtered_frame(table, task, thresholds), epoch)
    if gammas is not None:
        frame = frame[frame["gamma"].isin(list(gammas))]

    a_kind, b_kind = RegularizerKind(kind_a).value, RegularizerKind(kind_b).value
    a = frame.loc[frame["kind"] == a_kind, metric].dropna().to_numpy()
    b = frame.loc[frame["kind"] == b_kind, metric].dropna().to_numpy()
    if a.size == 0 or b.size == 0:
        raise EmptySelectionError(f"{metric}: {a_kind} has {a.size} networks, {b_kind} has {b.size}")

    u, p = mann_whitney(a, b, alternative=alternative)
    return GroupComparison(
        metric=metric,
        kind_a=a_kind,
        kind_b=b_kind,
        median_a=float(np.median(a)),
        median_b=float(np.median(b)),
        u=u,
        p=p,
        n_a=int(a.size),
        n_b=int(b.size),
        alternative=alternative,
    )


def _upper_half(frame: pd.DataFrame) -> List[float]:
    grid = np.sort(frame["gamma"].unique())
    return [float(g) for g in grid[len(grid) // 2:]]


def _contrast_claim(
    name: str,
    table: MetricsTable,
    metric: str,
    alternative: str,
    task: TaskName,
    gammas: List[float],
    thresholds: Dict[str, float],
) -> ClaimCheck:
    try:
        cmp = compare_groups(
            table, metric, RegularizerKind.SE_SPACE_COMM, RegularizerKind.BASELINE_L1,
            task=task, gammas=gammas, alternative=alternative, thresholds=thresholds,
        )
    except EmptySelectionError as e:
        return ClaimCheck(name=name, statistic=float("nan"), p=float("nan"), passed=False, detail=str(e))
    return ClaimCheck(
        name=name,
        statistic=cmp.u,
        p=cmp.p,
        passed=cmp.p < ALPHA,
        detail=f"median sernn={cmp.median_a:.4g} l1={cmp.median_b:.4g} (n={cmp.n_a}/{cmp.n_b})",
    )


def _kind_final(final: pd.DataFrame, kind: RegularizerKind) -> pd.DataFrame:
    return final[final["kind"] == kind.value]


def _q_entropy_claim(final: pd.DataFrame, permutations: int, seed: int) -> ClaimCheck:
    name = "modularity_vs_entropy"
    try:
        se = _kind_final(final, RegularizerKind.SE_SPACE_COMM)
        l1 = _kind_final(final, RegularizerKind.BASELINE_L1)
        r_se, p_se = pearson(se["Q"], se["H_W"], permutations, seed)
        r_l1, _ = pearson(l1["Q"], l1["H_W"], permutations, seed)
    except InvalidInputError as e:
        return ClaimCheck(name=name, statistic=float("nan"), p=float("nan"), passed=False, detail=str(e))
    return ClaimCheck(
        name=name,
        statistic=r_se,
        p=p_se,
        passed=r_se < -0.3 and p_se < 0.01 and r_l1 > r_se,
        detail=f"r sernn={r_se:.3f} l1={r_l1:.3f}",
    )


def _distance_claim(final: pd.DataFrame) -> ClaimCheck:
    se = _kind_final(final, RegularizerKind.SE_SPACE_COMM).dropna(subset=["dist_corr_r"])
    l1 = _kind_final(final, RegularizerKind.BASELINE_L1).dropna(subset=["dist_corr_r"])
    if se.empty or l1.empty:
        return ClaimCheck(name="distance_vs_weight", statistic=float("nan"), p=float("nan"), passed=False,
                          detail="no distance correlations recorded")
    se_share = float(np.mean((se["dist_corr_r"] < -0.1) & (se["dist_corr_p"] < 0.01)))
    l1_share = float(np.mean(l1["dist_corr_r"].abs() < 0.1))
    return ClaimCheck(
        name="distance_vs_weight",
        statistic=se_share,
        p=float(np.median(se["dist_corr_p"])),
        passed=se_share >= 0.7 and l1_share >= 0.7,
        detail=f"sernn negative share={se_share:.2f}, l1 flat share={l1_share:.2f}",
    )


def _trend_claim(final: pd.DataFrame, metric: str) -> ClaimCheck:
    name = f"{metric}_trend"
    rhos = {}
    for kind in (RegularizerKind.SE_SPACE_COMM, RegularizerKind.BASELINE_L1):
        medians = _kind_final(final, kind).groupby("gamma")[metric].median()
        if len(medians) < 3 or medians.nunique() < 2:
            return ClaimCheck(name=name, statistic=float("nan"), p=float("nan"), passed=False,
                              detail=f"{kind.value}: too few distinct grid medians")
        result = stats.spearmanr(medians.index.to_numpy(), medians.to_numpy())
        rhos[kind] = (float(result.statistic), float(result.pvalue))
    rho_se, p_se = rhos[RegularizerKind.SE_SPACE_COMM]
    rho_l1, _ = rhos[RegularizerKind.BASELINE_L1]
    return ClaimCheck(
        name=name,
        statistic=rho_se,
        p=p_se,
        passed=rho_se < -0.5 and abs(rho_l1) < 0.3,
        detail=f"spearman sernn={rho_se:.3f} l1={rho_l1:.3f}",
    )


def directional_report(table: MetricsTable, task: TaskName = TaskName.INFERENCE) -> List[ClaimCheck]:
    """
    Direction-of-effect checks comparing seRNN with L1:
    lower weight entropy, modularity/entropy anticorrelation, negative
    distance/weight correlation, lower communicability entropy, smaller
    spectral radius, higher spectral entropy, and eigenvalues and weights
    becoming more symmetric as gamma grows.
    """
    settings = get_settings()
    thresholds = settings.filters.thresholds
    try:
        frame = filtered_frame(table, task, thresholds)
    except EmptySelectionError as e:
        return [ClaimCheck(name="filter", statistic=float("nan"), p=float("nan"), passed=False, detail=str(e))]

    final = _at_epoch(frame, None)
    upper = _upper_half(final)
    perms, seed = settings.stats.permutations, settings.stats.permutation_seed

    checks = [
        _contrast_claim("weight_entropy", table, "H_W", "less", task, upper, thresholds),
        _q_entropy_claim(final, perms, seed),
        _distance_claim(final),
        _contrast_claim("communicability_entropy", table, "H_C", "less", task, upper, thresholds),
        _contrast_claim("spectral_radius", table, "lambda_max", "less", task, upper, thresholds),
        _contrast_claim("spectral_entropy", table, "H_lambda", "greater", task, upper, thresholds),
        _trend_claim(final, "imag_fraction"),
        _trend_claim(final, "sym_index"),
    ]
    for c in checks:
        logger.info(f"{c.name}: {'PASS' if c.passed else 'FAIL'} ({c.detail})")
    return checks
