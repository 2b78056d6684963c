"""Pure scoring pipeline: step likelihoods, aggregation, discretization, risk-matrix lookup.

Every function here is a pure function of its arguments and safe to call
concurrently. All arithmetic is 64-bit floating point; ``math.fsum`` is used
for every accumulation so results are independent of summation order.
Reported values are rounded to 3 decimals only at serialization time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Any, NamedTuple, Sequence

from .catalog import SCORE_MAX, SCORE_MIN
from .chain import STEP_MULTIPLIER_MAX

if TYPE_CHECKING:
    from .chain import Portfolio

#: Top of the ordinal threat/exposure scale; the probability conversion,
#: matrix, and discretization all assume this value.
N_MAX = 5

#: Upper bound for the environment-level global multiplier.
GLOBAL_MULTIPLIER_MAX = 2.0

#: Qualitative labels for the discretized likelihood ordinal.
LIKELIHOOD_LABELS = {1: "Very unlikely", 2: "Unlikely", 3: "Possible", 4: "Likely", 5: "Frequent"}

#: Qualitative labels for the impact ordinal.
IMPACT_LABELS = {1: "Very low", 2: "Low", 3: "Medium", 4: "High", 5: "Very high"}


class AggregationMethod(str, Enum):
    """Strategy for collapsing per-step likelihoods into one scenario likelihood."""

    MAXIMUM = "max"
    AVERAGE = "avg"
    GEOMETRIC_MEAN = "geom"


class RiskBand(str, Enum):
    """Qualitative rating band of a risk-matrix cell."""

    LOW = "Low"
    MEDIUM = "Medium"
    HIGH = "High"


_BAND_RANK = {RiskBand.LOW: 0, RiskBand.MEDIUM: 1, RiskBand.HIGH: 2}


@dataclass(frozen=True)
class RiskCell:
    """One cell of the 5x5 risk matrix."""

    value: int
    band: RiskBand


# Band layout of the standard 27005-style product matrix, rows L=1..5,
# columns I=1..5. Bands are a function of cell position, not value: value 4
# is Low at (2,2) but Medium at (1,4) and (4,1).
_DEFAULT_BANDS = (
    ("Low", "Low", "Low", "Medium", "Medium"),
    ("Low", "Low", "Medium", "Medium", "Medium"),
    ("Low", "Medium", "Medium", "Medium", "High"),
    ("Medium", "Medium", "Medium", "High", "High"),
    ("Medium", "Medium", "High", "High", "High"),
)


@dataclass(frozen=True)
class RiskMatrix:
    """Explicit 5x5 table mapping (likelihood, impact) to a numeric value and band.

    Invariants: ``value == likelihood * impact`` for every cell, and bands are
    non-decreasing along every row and column.
    """

    cells: tuple[tuple[RiskCell, ...], ...]

    def __post_init__(self) -> None:
        if len(self.cells) != N_MAX or any(len(row) != N_MAX for row in self.cells):
            raise ValueError("risk matrix must be 5x5")
        for li in range(N_MAX):
            for ii in range(N_MAX):
                cell = self.cells[li][ii]
                if cell.value != (li + 1) * (ii + 1):
                    raise ValueError(
                        f"cell (L={li + 1}, I={ii + 1}) must hold {(li + 1) * (ii + 1)}, got {cell.value}")
                if ii > 0 and _BAND_RANK[cell.band] < _BAND_RANK[self.cells[li][ii - 1].band]:
                    raise ValueError(f"band decreases along row L={li + 1} at I={ii + 1}")
                if li > 0 and _BAND_RANK[cell.band] < _BAND_RANK[self.cells[li - 1][ii].band]:
                    raise ValueError(f"band decreases along column I={ii + 1} at L={li + 1}")

    def lookup(self, likelihood: int, impact: int) -> RiskCell:
        return risk_lookup(likelihood, impact, self)

    def to_doc(self) -> list[list[dict[str, Any]]]:
        return [[{"value": c.value, "band": c.band.value} for c in row] for row in self.cells]


def default_risk_matrix() -> RiskMatrix:
    """The standard 5x5 product matrix. Every cell value is exactly L x I;
    note that some published 27005-style tables print 12 at (L=2, I=5),
    which contradicts the product rule the other 24 cells follow."""
    return RiskMatrix(tuple(
        tuple(RiskCell(value=(li + 1) * (ii + 1), band=RiskBand(_DEFAULT_BANDS[li][ii]))
              for ii in range(N_MAX))
        for li in range(N_MAX)
    ))


def matrix_from_doc(doc: Any) -> RiskMatrix:
    return RiskMatrix(tuple(
        tuple(RiskCell(value=cell["value"], band=RiskBand(cell["band"])) for cell in row)
        for row in doc
    ))


@dataclass(frozen=True)
class AssessmentConfig:
    """Portfolio-wide scoring parameters.

    ``acceptance_threshold`` overrides the portfolio context's threshold when
    set. ``boundary_epsilon`` is added before flooring during discretization to
    make exact interval edges land deterministically on the upper side.
    """

    method: AggregationMethod = AggregationMethod.GEOMETRIC_MEAN
    global_multiplier: float = 1.0
    matrix: RiskMatrix = field(default_factory=default_risk_matrix)
    boundary_epsilon: float = 1e-9
    n_max: int = N_MAX
    acceptance_threshold: int | None = None

    def __post_init__(self) -> None:
        m = self.global_multiplier
        if isinstance(m, bool) or not isinstance(m, (int, float)) or not 0.0 < float(m) <= GLOBAL_MULTIPLIER_MAX:
            raise ValueError(f"global multiplier must be in (0, {GLOBAL_MULTIPLIER_MAX}], got {m!r}")
        object.__setattr__(self, "global_multiplier", float(m))
        if not isinstance(self.method, AggregationMethod):
            raise ValueError(f"method must be an AggregationMethod, got {self.method!r}")
        if self.n_max != N_MAX:
            raise ValueError(f"this version supports n_max={N_MAX} only")
        if not self.boundary_epsilon >= 0.0:
            raise ValueError("boundary_epsilon must be >= 0")
        t = self.acceptance_threshold
        if t is not None and (isinstance(t, bool) or not isinstance(t, int) or not 1 <= t <= 25):
            raise ValueError(f"acceptance threshold must be an integer in 1..25, got {t!r}")

    def to_doc(self) -> dict[str, Any]:
        return {
            "method": self.method.value,
            "global_multiplier": self.global_multiplier,
            "boundary_epsilon": self.boundary_epsilon,
            "n_max": self.n_max,
            "acceptance_threshold": self.acceptance_threshold,
            "matrix": self.matrix.to_doc(),
        }


@dataclass(frozen=True)
class LikelihoodBounds:
    """Portfolio-wide [lower, upper] range the discretization grid is built on."""

    lower: float
    upper: float

    def __post_init__(self) -> None:
        if not self.upper > self.lower:
            raise ValueError(f"bounds upper ({self.upper}) must exceed lower ({self.lower})")

    def to_doc(self) -> dict[str, float]:
        return {"lower": round_reported(self.lower), "upper": round_reported(self.upper)}


@dataclass(frozen=True)
class ScenarioResult:
    """Full scoring outcome for one kill chain."""

    chain_id: str
    step_likelihoods: tuple[float, ...]
    raw_likelihood: float
    adjusted_likelihood: float
    discrete_likelihood: int
    impact: int
    risk_value: int
    risk_band: RiskBand
    weakest_step_index: int
    success_probability: float | None = None

    def to_doc(self) -> dict[str, Any]:
        doc: dict[str, Any] = {
            "chain_id": self.chain_id,
            "step_likelihoods": [round_reported(v) for v in self.step_likelihoods],
            "raw_likelihood": round_reported(self.raw_likelihood),
            "adjusted_likelihood": round_reported(self.adjusted_likelihood),
            "discrete_likelihood": self.discrete_likelihood,
            "impact": self.impact,
            "risk_value": self.risk_value,
            "risk_band": self.risk_band.value,
            "weakest_step_index": self.weakest_step_index,
        }
        if self.success_probability is not None:
            doc["success_probability"] = round_probability(self.success_probability)
        return doc


class Aggregate(NamedTuple):
    """Continuous scenario likelihood plus, for the geometric mean, the full-chain success probability."""

    raw: float
    success_probability: float | None = None


def round_reported(value: float) -> float:
    """3-decimal rounding applied to reported reals (full precision is kept internally)."""
    return round(value, 3)


def round_probability(value: float) -> float:
    """Probabilities too small for 3-decimal rounding keep 4 significant digits."""
    if value >= 5e-4 or value == 0.0:
        return round(value, 3)
    return float(f"{value:.3e}")


def _require_ordinal(name: str, value: Any) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or not SCORE_MIN <= value <= SCORE_MAX:
        raise ValueError(f"{name} must be an integer in {SCORE_MIN}..{SCORE_MAX}, got {value!r}")
    return value


def step_likelihood(threat: int, exposure: int, multiplier: float) -> float:
    """Raw likelihood contribution of one step: (threat x exposure) x multiplier, in (0, 50]."""
    _require_ordinal("threat", threat)
    _require_ordinal("exposure", exposure)
    if isinstance(multiplier, bool) or not isinstance(multiplier, (int, float)) \
            or not 0.0 < float(multiplier) <= STEP_MULTIPLIER_MAX:
        raise ValueError(f"multiplier must be in (0, {STEP_MULTIPLIER_MAX}], got {multiplier!r}")
    return (threat * exposure) * float(multiplier)


def step_probability(likelihood: float, n_max: int = N_MAX) -> float:
    """Convert a step's likelihood into a success probability: min(1, likelihood / n_max^2)."""
    if not likelihood > 0.0:
        raise ValueError(f"likelihood must be positive, got {likelihood!r}")
    return min(1.0, likelihood / (n_max * n_max))


def aggregate(likelihoods: Sequence[float], method: AggregationMethod) -> Aggregate:
    """Collapse per-step likelihoods into a single continuous scenario likelihood.

    Maximum takes the easiest step; Average the mean; GeometricMean converts
    each step into a probability, multiplies them, and rescales the N-th root
    back onto the 0-5 scale. The geometric path runs in log space so long
    chains cannot underflow the aggregate (the returned success probability
    itself may still underflow to 0.0 for extreme chain lengths).
    """
    values = list(likelihoods)
    if not values:
        raise ValueError("cannot aggregate an empty likelihood list")
    for v in values:
        if not v > 0.0:
            raise ValueError(f"likelihoods must be positive, got {v!r}")

    if method is AggregationMethod.MAXIMUM:
        return Aggregate(raw=max(values))
    if method is AggregationMethod.AVERAGE:
        return Aggregate(raw=math.fsum(values) / len(values))
    if method is AggregationMethod.GEOMETRIC_MEAN:
        log_probabilities = [math.log(step_probability(v)) for v in values]
        log_product = math.fsum(log_probabilities)
        raw = N_MAX * math.exp(log_product / len(values))
        return Aggregate(raw=raw, success_probability=math.exp(log_product))
    raise ValueError(f"unknown aggregation method {method!r}")


def adjust(raw: float, config: AssessmentConfig) -> float:
    """Apply the environment-level global multiplier."""
    if not raw > 0.0:
        raise ValueError(f"raw likelihood must be positive, got {raw!r}")
    return raw * config.global_multiplier


def global_bounds(portfolio: "Portfolio", config: AssessmentConfig) -> LikelihoodBounds:
    """Likelihood bounds computed across the FULL set of scenarios.

    lower = 1*1*min(step multipliers)*M and upper = 5*5*max(step multipliers)*M,
    where min/max run over every step of every chain. Sharing one grid keeps
    discretized likelihoods comparable across chains; the guaranteed ratio
    upper/lower >= 25 means the bounds are always a valid interval.
    """
    multipliers = [step.multiplier
                   for chain in portfolio.chains.values()
                   for step in chain.steps]
    if not multipliers:
        raise ValueError("cannot compute bounds for an empty portfolio")
    m = config.global_multiplier
    return LikelihoodBounds(
        lower=(SCORE_MIN * SCORE_MIN) * min(multipliers) * m,
        upper=(SCORE_MAX * SCORE_MAX) * max(multipliers) * m,
    )


def discretize(adjusted: float, bounds: LikelihoodBounds, epsilon: float = 1e-9) -> int:
    """Map an adjusted likelihood onto the 1-5 ordinal over five equal intervals.

    ``epsilon`` biases exact interval edges upward before flooring; values
    below the lower bound clamp to 1, values at or above the upper bound
    clamp to 5.
    """
    fraction = (adjusted - bounds.lower) / (bounds.upper - bounds.lower)
    level = 1 + math.floor(N_MAX * fraction + epsilon)
    return max(1, min(N_MAX, level))


def risk_lookup(likelihood: int, impact: int, matrix: RiskMatrix) -> RiskCell:
    """Look up the matrix cell for a (likelihood, impact) ordinal pair."""
    _require_ordinal("likelihood", likelihood)
    _require_ordinal("impact", impact)
    return matrix.cells[likelihood - 1][impact - 1]


@dataclass(frozen=True)
class MethodRecommendation:
    """A suggested aggregation method with the reasoning behind it."""

    method: AggregationMethod
    rationale: str


_RECOMMENDATIONS = {
    "safety-critical": MethodRecommendation(
        AggregationMethod.MAXIMUM,
        "A single weak step is enough to compromise a safety-critical system; "
        "the maximum keeps that step visible as an upper bound.",
    ),
    "regulatory-compliance": MethodRecommendation(
        AggregationMethod.MAXIMUM,
        "A conservative upper bound stands up to audit; the geometric mean is a "
        "defensible alternative when probabilistic traceability is preferred.",
    ),
    "balanced": MethodRecommendation(
        AggregationMethod.GEOMETRIC_MEAN,
        "Models the chain as a series of sequential successes, matching a balanced risk appetite.",
    ),
    "early-stage": MethodRecommendation(
        AggregationMethod.AVERAGE,
        "A quick, smoothed view across all steps while scores are still rough.",
    ),
}


def recommend_method(context: str | None = None) -> MethodRecommendation:
    """Suggest an aggregation method for a named assessment context.

    Defined contexts: safety-critical, regulatory-compliance, balanced,
    early-stage. With no context the geometric mean is the default: a
    probabilistic view of full-chain success without the conservatism of the
    maximum.
    """
    if context is None:
        return MethodRecommendation(
            AggregationMethod.GEOMETRIC_MEAN,
            "Default: a probabilistic view of full-chain success without the "
            "conservatism of the maximum.",
        )
    try:
        return _RECOMMENDATIONS[context]
    except KeyError:
        raise ValueError(
            f"unknown context {context!r}; expected one of {sorted(_RECOMMENDATIONS)}"
        ) from None
