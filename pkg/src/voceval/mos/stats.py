"""Mean opinion score with 95% confidence intervals.

Half-widths use Student-t quantiles at 0.975. The table below covers degrees
of freedom 1 through 200; beyond that the normal quantile 1.96 is close
enough (the df=200 entry already agrees to three decimals).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

from ..errors import NoRatingsError

_NORMAL_Q975 = 1.96

# t(0.975, df) for df = 1..200.
_T_975 = (
    12.706205, 4.302653, 3.182446, 2.776445, 2.570582, 2.446912, 2.364624, 2.306004,
    2.262157, 2.228139, 2.200985, 2.178813, 2.160369, 2.144787, 2.131450, 2.119905,
    2.109816, 2.100922, 2.093024, 2.085963, 2.079614, 2.073873, 2.068658, 2.063899,
    2.059539, 2.055529, 2.051831, 2.048407, 2.045230, 2.042272, 2.039513, 2.036933,
    2.034515, 2.032245, 2.030108, 2.028094, 2.026192, 2.024394, 2.022691, 2.021075,
    2.019541, 2.018082, 2.016692, 2.015368, 2.014103, 2.012896, 2.011741, 2.010635,
    2.009575, 2.008559, 2.007584, 2.006647, 2.005746, 2.004879, 2.004045, 2.003241,
    2.002465, 2.001717, 2.000995, 2.000298, 1.999624, 1.998972, 1.998341, 1.997730,
    1.997138, 1.996564, 1.996008, 1.995469, 1.994945, 1.994437, 1.993943, 1.993464,
    1.992997, 1.992543, 1.992102, 1.991673, 1.991254, 1.990847, 1.990450, 1.990063,
    1.989686, 1.989319, 1.988960, 1.988610, 1.988268, 1.987934, 1.987608, 1.987290,
    1.986979, 1.986675, 1.986377, 1.986086, 1.985802, 1.985523, 1.985251, 1.984984,
    1.984723, 1.984467, 1.984217, 1.983972, 1.983731, 1.983495, 1.983264, 1.983038,
    1.982815, 1.982597, 1.982383, 1.982173, 1.981967, 1.981765, 1.981567, 1.981372,
    1.981180, 1.980992, 1.980808, 1.980626, 1.980448, 1.980272, 1.980100, 1.979930,
    1.979764, 1.979600, 1.979439, 1.979280, 1.979124, 1.978971, 1.978820, 1.978671,
    1.978524, 1.978380, 1.978239, 1.978099, 1.977961, 1.977826, 1.977692, 1.977561,
    1.977431, 1.977304, 1.977178, 1.977054, 1.976931, 1.976811, 1.976692, 1.976575,
    1.976460, 1.976346, 1.976233, 1.976122, 1.976013, 1.975905, 1.975799, 1.975694,
    1.975590, 1.975488, 1.975387, 1.975288, 1.975189, 1.975092, 1.974996, 1.974902,
    1.974808, 1.974716, 1.974625, 1.974535, 1.974446, 1.974358, 1.974271, 1.974185,
    1.974100, 1.974017, 1.973934, 1.973852, 1.973771, 1.973691, 1.973612, 1.973534,
    1.973457, 1.973381, 1.973305, 1.973231, 1.973157, 1.973084, 1.973012, 1.972941,
    1.972870, 1.972800, 1.972731, 1.972663, 1.972595, 1.972528, 1.972462, 1.972396,
    1.972332, 1.972268, 1.972204, 1.972141, 1.972079, 1.972017, 1.971957, 1.971896,
)


def t_quantile_975(df: int) -> float:
    if df < 1:
        raise ValueError(f"degrees of freedom must be >= 1, got {df}")
    if df <= len(_T_975):
        return _T_975[df - 1]
    return _NORMAL_Q975


@dataclass(frozen=True)
class MosSummary:
    system_name: str
    n: int
    mean: float
    ci95_half_width: Optional[float]  # None when a single rating gives no spread


def summarize_scores(system_name: str, scores: Sequence[int]) -> MosSummary:
    if not scores:
        raise NoRatingsError(f"no ratings for system {system_name!r}")
    n = len(scores)
    mean = sum(scores) / n
    if n == 1:
        return MosSummary(system_name, 1, mean, None)
    var = sum((s - mean) ** 2 for s in scores) / (n - 1)
    half = t_quantile_975(n - 1) * math.sqrt(var) / math.sqrt(n)
    return MosSummary(system_name, n, mean, half)


def summarize(ratings_by_system: Dict[str, Sequence[int]]) -> List[MosSummary]:
    """One summary per system, ratings pooled across sessions and utterances."""
    if not any(ratings_by_system.values()):
        raise NoRatingsError("no ratings stored yet")
    return [
        summarize_scores(name, scores)
        for name, scores in sorted(ratings_by_system.items())
        if scores
    ]


def format_mos(mean: float, ci95_half_width: Optional[float]) -> str:
    """Render like "4.10±0.059"; a lone rating has no interval to show."""
    if ci95_half_width is None:
        return f"{mean:.2f}"
    return f"{mean:.2f}±{ci95_half_width:.3f}"
