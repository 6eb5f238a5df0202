"""Desk-scale simulation studies.

Two experiments: a polynomial model-order sweep in which the log model
evidence recovers the generating order, and a multi-session study in
which cross-validated evidence distinguishes a flexible per-condition
design from a constrained parametric-modulator design generated from the
same conditions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields

import numpy as np

from .distributions import NormalGammaParams, RngStream
from .glm import GlmDataset, cv_model_quality, log_model_evidence
from .numerics import SpdMatrix

__all__ = [
    "PolySweepConfig",
    "SweepResult",
    "CvStudyConfig",
    "CvStudyResult",
    "equally_spaced",
    "build_poly_design",
    "simulate_polynomial",
    "run_poly_sweep",
    "run_cv_study",
    "write_sweep_csv",
    "write_cv_csv",
    "load_config",
]

SWEEP_CSV_HEADER = "order,mean_lme,mean_acc,mean_com"
CV_CSV_HEADER = "replication,cvlme_a,cvlme_b,acc_a,acc_b,com_a,com_b"

# Parametric-modulator weights over the four condition levels.
PM_WEIGHTS = (0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0)


def _config_from_dict(cls, doc: dict):
    known = {f.name for f in fields(cls)}
    unknown = set(doc) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return cls(**doc)


@dataclass(frozen=True)
class PolySweepConfig:
    """Settings for the polynomial model-order sweep."""

    n_simulations: int = 100
    n_points: int = 100
    p_true: int = 5
    p_min: int = 0
    p_max: int = 20
    noise_variance: float = 1.0
    master_seed: int = 0

    def __post_init__(self):
        if self.n_simulations < 1 or self.n_points < 2:
            raise ValueError("need n_simulations >= 1 and n_points >= 2")
        if not (0 <= self.p_min <= self.p_true <= self.p_max):
            raise ValueError("require p_min <= p_true <= p_max with p_min >= 0")
        if self.noise_variance < 0.0:
            raise ValueError("noise variance must be nonnegative")

    @classmethod
    def from_dict(cls, doc: dict) -> "PolySweepConfig":
        return _config_from_dict(cls, doc)


@dataclass(frozen=True)
class SweepResult:
    """Per-order means across simulations plus the winning order."""

    orders: np.ndarray
    mean_lme: np.ndarray
    mean_acc: np.ndarray
    mean_com: np.ndarray
    argmax_order: int = field(init=False)

    def __post_init__(self):
        if len(self.orders) and np.max(
            np.abs(self.mean_lme - (self.mean_acc - self.mean_com))
        ) > 1e-8:
            raise ValueError("mean lme must equal mean acc - mean com")
        # np.argmax takes the first maximum; orders ascend, so ties break small.
        best = int(self.orders[int(np.argmax(self.mean_lme))]) if len(self.orders) else -1
        object.__setattr__(self, "argmax_order", best)


@dataclass(frozen=True)
class CvStudyConfig:
    """Settings for the multi-session cross-validation study."""

    n_replications: int = 100
    n_sessions: int = 5
    trials_per_condition: int = 3
    noise_variance: float = 1.0
    generator: str = "B"
    master_seed: int = 0

    def __post_init__(self):
        if self.n_sessions < 2:
            raise ValueError("the study requires at least 2 sessions")
        if self.n_replications < 1 or self.trials_per_condition < 1:
            raise ValueError("replications and trials per condition must be positive")
        if self.generator not in ("A", "B"):
            raise ValueError(f"generator must be 'A' or 'B', got {self.generator!r}")
        if self.noise_variance <= 0.0:
            raise ValueError("noise variance must be positive")

    @classmethod
    def from_dict(cls, doc: dict) -> "CvStudyConfig":
        return _config_from_dict(cls, doc)


@dataclass(frozen=True)
class CvStudyResult:
    """Per-replication cross-validated qualities for both designs."""

    cvlme_a: np.ndarray
    cvlme_b: np.ndarray
    acc_a: np.ndarray
    acc_b: np.ndarray
    com_a: np.ndarray
    com_b: np.ndarray

    @property
    def n_replications(self) -> int:
        return len(self.cvlme_a)

    @property
    def mean_delta_lme(self) -> float:
        return float(np.mean(self.cvlme_b - self.cvlme_a))

    @property
    def mean_delta_acc(self) -> float:
        return float(np.mean(self.acc_b - self.acc_a))

    @property
    def mean_delta_com(self) -> float:
        return float(np.mean(self.com_b - self.com_a))

    @property
    def selection_rate_b(self) -> float:
        return float(np.mean(self.cvlme_b > self.cvlme_a))


def equally_spaced(n: int) -> np.ndarray:
    """n points from -1 to +1 inclusive with constant step."""
    if n < 2:
        raise ValueError("need at least 2 points")
    return np.linspace(-1.0, 1.0, n)


def build_poly_design(x, order: int) -> np.ndarray:
    """Matrix of raw predictor powers x^0 .. x^order, one row per point."""
    x = np.asarray(x, dtype=float)
    if order < 0:
        raise ValueError("order must be nonnegative")
    if np.any(np.abs(x) > 1.0):
        raise ValueError("predictor values must lie in [-1, +1]")
    return np.vander(x, order + 1, increasing=True)


def simulate_polynomial(config: PolySweepConfig, replication: int) -> GlmDataset:
    """Generate one replication: y = X_{p_true} beta + noise, white noise.

    Coefficients and noise come from separate child streams of
    (master_seed, replication), so changing n_points does not reshuffle
    the coefficients.
    """
    base = RngStream(config.master_seed, replication)
    beta = base.child(0).generator.standard_normal(config.p_true + 1)
    noise = np.sqrt(config.noise_variance) * base.child(1).generator.standard_normal(
        config.n_points
    )
    x = equally_spaced(config.n_points)
    y = build_poly_design(x, config.p_true) @ beta + noise
    return GlmDataset(y=y, X=build_poly_design(x, config.p_true),
                      P=SpdMatrix.identity(config.n_points))


def _standard_prior(p: int) -> NormalGammaParams:
    """Unit normal prior on coefficients, flat-ish gamma prior on precision."""
    return NormalGammaParams(mu=np.zeros(p), lam=SpdMatrix.identity(p),
                             shape=1.0, rate=1.0)


def run_poly_sweep(config: PolySweepConfig) -> SweepResult:
    """Fit every order in [p_min, p_max] across all replications."""
    orders = np.arange(config.p_min, config.p_max + 1)
    x = equally_spaced(config.n_points)
    designs = [build_poly_design(x, int(p)) for p in orders]
    noise_precision = SpdMatrix.identity(config.n_points)
    sums = np.zeros((3, len(orders)))
    for rep in range(config.n_simulations):
        data = simulate_polynomial(config, rep)
        for idx, (order, X) in enumerate(zip(orders, designs)):
            dataset = GlmDataset(y=data.y, X=X, P=noise_precision)
            try:
                fit = log_model_evidence(dataset, _standard_prior(int(order) + 1))
            except ArithmeticError as exc:
                raise ArithmeticError(
                    f"fit failed at replication {rep}, order {order}: {exc}"
                ) from exc
            q = fit.quality
            sums[:, idx] += (q.lme, q.accuracy, q.complexity)
    means = sums / config.n_simulations
    return SweepResult(orders=orders, mean_lme=means[0],
                       mean_acc=means[1], mean_com=means[2])


def _condition_levels(trials_per_condition: int) -> np.ndarray:
    """(left, right) level pair per trial: all 4 x 4 combinations, repeated."""
    pairs = np.array([(i, j) for i in range(4) for j in range(4)])
    return np.repeat(pairs, trials_per_condition, axis=0)


def _design_flexible(levels: np.ndarray) -> np.ndarray:
    """Design A: one indicator column per (left, right) condition combination."""
    combo = levels[:, 0] * 4 + levels[:, 1]
    return np.eye(16)[combo]


def _design_modulated(levels: np.ndarray) -> np.ndarray:
    """Design B: all-trials column plus one parametric modulator per factor."""
    pm = np.asarray(PM_WEIGHTS)
    return np.column_stack([np.ones(len(levels)), pm[levels[:, 0]], pm[levels[:, 1]]])


def run_cv_study(config: CvStudyConfig) -> CvStudyResult:
    """Compare cross-validated evidence of designs A and B.

    Per replication, coefficients of the generating design are drawn once
    (shared across sessions) and session noise is drawn independently;
    both designs are then scored with leave-one-session-out evidence.
    """
    levels = _condition_levels(config.trials_per_condition)
    X_a = _design_flexible(levels)
    X_b = _design_modulated(levels)
    X_gen = X_b if config.generator == "B" else X_a
    n = len(levels)
    noise_precision = SpdMatrix.identity(n)
    out = {name: np.zeros(config.n_replications)
           for name in ("cvlme_a", "cvlme_b", "acc_a", "acc_b", "com_a", "com_b")}
    for rep in range(config.n_replications):
        base = RngStream(config.master_seed, rep)
        beta = base.child(0).generator.standard_normal(X_gen.shape[1])
        noise_rng = base.child(1).generator
        sessions_a, sessions_b = [], []
        for _ in range(config.n_sessions):
            eps = np.sqrt(config.noise_variance) * noise_rng.standard_normal(n)
            y = X_gen @ beta + eps
            sessions_a.append(GlmDataset(y=y, X=X_a, P=noise_precision))
            sessions_b.append(GlmDataset(y=y, X=X_b, P=noise_precision))
        qa = cv_model_quality(sessions_a)
        qb = cv_model_quality(sessions_b)
        out["cvlme_a"][rep], out["acc_a"][rep], out["com_a"][rep] = qa.lme, qa.accuracy, qa.complexity
        out["cvlme_b"][rep], out["acc_b"][rep], out["com_b"][rep] = qb.lme, qb.accuracy, qb.complexity
    return CvStudyResult(**out)


def _fmt(v: float) -> str:
    return format(float(v), ".12g")


def write_sweep_csv(result: SweepResult, path) -> None:
    """One row per model order; 12 significant digits, LF endings."""
    lines = [SWEEP_CSV_HEADER]
    for i, order in enumerate(result.orders):
        lines.append(
            f"{int(order)},{_fmt(result.mean_lme[i])},"
            f"{_fmt(result.mean_acc[i])},{_fmt(result.mean_com[i])}"
        )
    _write_lines(path, lines)


def write_cv_csv(result: CvStudyResult, path) -> None:
    """One row per replication of the cross-validation study."""
    lines = [CV_CSV_HEADER]
    for i in range(result.n_replications):
        lines.append(
            f"{i},{_fmt(result.cvlme_a[i])},{_fmt(result.cvlme_b[i])},"
            f"{_fmt(result.acc_a[i])},{_fmt(result.acc_b[i])},"
            f"{_fmt(result.com_a[i])},{_fmt(result.com_b[i])}"
        )
    _write_lines(path, lines)


def _write_lines(path, lines) -> None:
    try:
        with open(path, "w", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc}") from exc


def load_config(path, cls):
    """Read a flat JSON config, rejecting unknown keys."""
    with open(path) as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict):
        raise ValueError(f"config {path} must be a JSON object")
    return cls.from_dict(doc)
