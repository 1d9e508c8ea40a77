"""Event identities, panel datasets, and build configuration.

Every quantity modelled by this package is an attribute of a *recurring
event*: something that happens once per service day at a scheduled
time-of-day bucket (a bus arriving at a stop, flights on a route landing
within an hour, hourly traffic counts at a station). All types here are
immutable after construction and safe to share between workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Any, Iterable, Sequence

import numpy as np

MINUTES_PER_DAY = 1440


class LinkFamily(Enum):
    """Noise model and link-function pairing for the node regressions.

    ``GAUSSIAN_IDENTITY`` models real-valued attributes (delays) with an
    identity link; ``POISSON_EXP`` models counts with an exponential link.
    """

    GAUSSIAN_IDENTITY = "gaussian"
    POISSON_EXP = "poisson"

    @property
    def is_log_link(self) -> bool:
        return self is LinkFamily.POISSON_EXP


@dataclass(frozen=True)
class EventKey:
    """Identity of a recurring event: an entity label plus a time-of-day bucket.

    ``entity`` is an opaque label (stop id, origin-destination pair,
    "station+direction"); ``time_bucket`` is the bucket start in minutes
    from midnight; ``bucket_width`` is the bucket length in minutes.
    """

    entity: str
    time_bucket: int
    bucket_width: int = 60

    def __post_init__(self):
        if not self.entity:
            raise ValueError("entity label must be non-empty")
        if not 0 <= self.time_bucket < MINUTES_PER_DAY:
            raise ValueError(f"time_bucket {self.time_bucket} outside [0, 1440)")
        if self.bucket_width < 1:
            raise ValueError(f"bucket_width {self.bucket_width} must be >= 1")
        if self.time_bucket + self.bucket_width > MINUTES_PER_DAY:
            raise ValueError(
                f"bucket [{self.time_bucket}, {self.time_bucket + self.bucket_width}) "
                "extends past midnight"
            )

    @property
    def hour(self) -> int:
        return self.time_bucket // 60

    @property
    def hhmm(self) -> str:
        return f"{self.time_bucket // 60:02d}:{self.time_bucket % 60:02d}"

    def sort_key(self) -> tuple[int, str]:
        return (self.time_bucket, self.entity)

    def label(self) -> str:
        """Serialized form ``entity@HH:MM+width`` used in model files."""
        return f"{self.entity}@{self.hhmm}+{self.bucket_width}"

    @classmethod
    def from_label(cls, label: str) -> "EventKey":
        entity, _, tail = label.rpartition("@")
        # tail is "HH:MM+width"; HH:MM is fixed-width so entities may contain
        # both '@' and '+'.
        if not entity or len(tail) < 7 or tail[2] != ":" or tail[5] != "+":
            raise ValueError(f"malformed event key label {label!r}")
        try:
            hours, minutes = int(tail[:2]), int(tail[3:5])
            width = int(tail[6:])
        except ValueError:
            raise ValueError(f"malformed event key label {label!r}") from None
        return cls(entity, hours * 60 + minutes, width)

    def __str__(self) -> str:
        return f"{self.entity}@{self.hhmm}"


@dataclass(frozen=True)
class Violation:
    """One broken panel invariant; data, not an exception."""

    rule: str
    message: str
    day: str | None = None
    key: EventKey | None = None

    def __str__(self) -> str:
        where = []
        if self.day is not None:
            where.append(f"day={self.day}")
        if self.key is not None:
            where.append(f"event={self.key}")
        loc = f" [{', '.join(where)}]" if where else ""
        return f"{self.rule}: {self.message}{loc}"


@dataclass(frozen=True, eq=False)
class PanelDataset:
    """Day x event matrix of observed attribute values with missingness.

    ``values[d][e]`` is the attribute of ``catalog[e]`` on ``days[d]``; NaN
    marks a missing observation. ``covariates`` optionally carries one
    static vector per day (day-of-week one-hots, weather, ...) shared by
    every event regression.

    ``values`` is normally a float ndarray, but arbitrary nested sequences
    are accepted so that malformed data can be represented and reported by
    :func:`validate_panel` instead of blowing up at construction.
    """

    catalog: tuple[EventKey, ...]
    days: tuple[str, ...]
    values: Any
    covariates: Any = None
    covariate_names: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "catalog", tuple(self.catalog))
        object.__setattr__(self, "days", tuple(self.days))
        object.__setattr__(self, "covariate_names", tuple(self.covariate_names))
        if isinstance(self.values, np.ndarray):
            frozen = self.values.view()
            frozen.flags.writeable = False
            object.__setattr__(self, "values", frozen)
        if isinstance(self.covariates, np.ndarray):
            frozen = self.covariates.view()
            frozen.flags.writeable = False
            object.__setattr__(self, "covariates", frozen)

    @property
    def n_days(self) -> int:
        return len(self.days)

    @property
    def n_events(self) -> int:
        return len(self.catalog)

    @cached_property
    def matrix(self) -> np.ndarray:
        """Values as a read-only float matrix (valid panels only)."""
        m = np.asarray(self.values, dtype=float)
        if m.ndim != 2 or m.shape != (self.n_days, self.n_events):
            raise ValueError("panel values are not a days x events matrix")
        m = m.view()
        m.flags.writeable = False
        return m

    @cached_property
    def column_index(self) -> dict[EventKey, int]:
        return {key: i for i, key in enumerate(self.catalog)}

    @cached_property
    def day_order(self) -> tuple[int, ...]:
        """Row indices sorted by day label; canonical order for reductions."""
        return tuple(sorted(range(self.n_days), key=self.days.__getitem__))

    def column(self, key: EventKey) -> np.ndarray:
        return self.matrix[:, self.column_index[key]]

    def event_mean(self, key: EventKey) -> float:
        """Mean of the event's non-missing values, reduced in day-label order.

        The fixed reduction order makes the result invariant to permutations
        of the panel's rows, which keeps model builds bit-reproducible.
        Returns NaN when the event was never observed.
        """
        col = self.column(key)[list(self.day_order)]
        kept = col[np.isfinite(col)]
        if kept.size == 0:
            return math.nan
        return float(kept.mean())


def validate_panel(panel: PanelDataset, family: LinkFamily) -> list[Violation]:
    """Check every panel invariant for the given family.

    Returns an empty list iff the panel is well formed. Violations are data:
    callers decide whether to raise, repair, or report.
    """
    out: list[Violation] = []

    seen: dict[tuple[str, int], EventKey] = {}
    for key in panel.catalog:
        ident = (key.entity, key.time_bucket)
        if ident in seen:
            out.append(Violation("duplicate-key", f"{key} repeats {seen[ident]}", key=key))
        else:
            seen[ident] = key

    seen_days: set[str] = set()
    for day in panel.days:
        if day in seen_days:
            out.append(Violation("duplicate-day", f"day label {day!r} repeats", day=day))
        seen_days.add(day)

    values = panel.values
    rows: Sequence[Any]
    if isinstance(values, np.ndarray) and values.ndim == 2:
        if values.shape != (panel.n_days, panel.n_events):
            out.append(
                Violation(
                    "dimension",
                    f"values shape {values.shape} != ({panel.n_days}, {panel.n_events})",
                )
            )
            return out
        rows = values
    else:
        try:
            rows = list(values)
        except TypeError:
            out.append(Violation("dimension", "values is not a matrix"))
            return out
        if len(rows) != panel.n_days:
            out.append(Violation("dimension", f"{len(rows)} rows for {panel.n_days} days"))
            return out
        for day, row in zip(panel.days, rows):
            try:
                width = len(row)
            except TypeError:
                width = -1
            if width != panel.n_events:
                out.append(
                    Violation(
                        "dimension",
                        f"row has {width} entries for {panel.n_events} events",
                        day=day,
                    )
                )
        if any(v.rule == "dimension" for v in out):
            return out

    for d, day in enumerate(panel.days):
        for e, key in enumerate(panel.catalog):
            v = float(rows[d][e])
            if math.isnan(v):
                continue
            if math.isinf(v):
                out.append(Violation("non-finite", f"value is {v}", day=day, key=key))
            elif family is LinkFamily.POISSON_EXP and v < 0:
                out.append(
                    Violation("negative-count", f"count value {v} < 0", day=day, key=key)
                )

    if panel.covariates is not None:
        cov = panel.covariates
        n_cov = len(panel.covariate_names)
        cov_rows = list(cov) if not isinstance(cov, np.ndarray) else cov
        if len(cov_rows) != panel.n_days:
            out.append(
                Violation("covariate-length", f"{len(cov_rows)} covariate rows for {panel.n_days} days")
            )
        else:
            for day, row in zip(panel.days, cov_rows):
                if len(row) != n_cov:
                    out.append(
                        Violation(
                            "covariate-length",
                            f"covariate vector has {len(row)} entries, expected {n_cov}",
                            day=day,
                        )
                    )
    return out


@dataclass(frozen=True)
class BuildConfig:
    """Knobs of a graph build, shared by every node regression.

    Exactly one of ``lam`` (a single penalty weight) or ``lambda_path``
    (a strictly descending sweep; the sparsest acceptable model along the
    path is selected per node) must be set.
    """

    family: LinkFamily
    lam: float | None = None
    lambda_path: tuple[float, ...] | None = None
    max_parents: int = 5
    min_history_days: int = 10
    standardize: bool = True
    candidate_window_minutes: int | None = None

    def __post_init__(self):
        if (self.lam is None) == (self.lambda_path is None):
            raise ValueError("exactly one of lam / lambda_path must be set")
        if self.lam is not None and not self.lam >= 0:
            raise ValueError(f"lambda must be >= 0, got {self.lam}")
        if self.lambda_path is not None:
            path = tuple(float(v) for v in self.lambda_path)
            object.__setattr__(self, "lambda_path", path)
            if not path:
                raise ValueError("lambda_path must be non-empty")
            if any(not v >= 0 for v in path):
                raise ValueError("lambda_path values must be >= 0")
            if any(a <= b for a, b in zip(path, path[1:])):
                raise ValueError("lambda_path must be strictly descending")
        if self.max_parents < 1:
            raise ValueError(f"max_parents must be positive, got {self.max_parents}")
        if self.min_history_days < 1:
            raise ValueError(f"min_history_days must be positive, got {self.min_history_days}")
        if self.candidate_window_minutes is not None and self.candidate_window_minutes < 1:
            raise ValueError("candidate_window_minutes must be positive when set")

    def penalties(self) -> tuple[float, ...]:
        """The configured penalty sweep (a single lambda becomes a length-1 path)."""
        if self.lambda_path is not None:
            return self.lambda_path
        return (float(self.lam),)


def sorted_catalog(keys: Iterable[EventKey]) -> tuple[EventKey, ...]:
    """Canonical catalog order: ascending time bucket, then entity label."""
    return tuple(sorted(keys, key=EventKey.sort_key))
