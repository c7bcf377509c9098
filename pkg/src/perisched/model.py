"""Domain model for periodic railway timetabling.

Everything here works on integer minutes inside a repeating cycle of
``period`` minutes. A timetable assigns each arrival/departure event a
canonical time in ``[0, period)``; the published schedule is that pattern
repeated every period. Constraints are periodic interval constraints on
pairwise event differences: a constraint with window ``[lo, hi]`` between
an earlier event x and a later event y is satisfied when some integer q
makes ``lo <= time(y) - time(x) + q*period <= hi``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Sequence

import numpy as np

from .errors import BoundInversion, MalformedInstance, MissingEvent, ValidationError


class EventKind(Enum):
    ARRIVAL = "arrival"
    DEPARTURE = "departure"


class ConstraintKind(Enum):
    RUNNING = "running"
    DWELL = "dwell"
    HEADWAY = "headway"
    SINGLE_TRACK = "single_track"
    CONNECTION = "connection"


#: Constraint kinds whose violation makes a timetable infeasible.
HARD_KINDS = (
    ConstraintKind.RUNNING,
    ConstraintKind.DWELL,
    ConstraintKind.HEADWAY,
    ConstraintKind.SINGLE_TRACK,
)


@dataclass(frozen=True)
class Event:
    """A single arrival or departure of a train at a station."""

    kind: EventKind
    train: str
    station: str

    @classmethod
    def arrival(cls, train: str, station: str) -> "Event":
        return cls(EventKind.ARRIVAL, train, station)

    @classmethod
    def departure(cls, train: str, station: str) -> "Event":
        return cls(EventKind.DEPARTURE, train, station)

    def sort_key(self) -> tuple[str, str, str]:
        return (self.train, self.station, self.kind.value)


@dataclass(frozen=True)
class Trip:
    """One leg of a train route, with its running window and the dwell
    window at the arrival station (absent on the final leg)."""

    from_station: str
    to_station: str
    running_lo: int
    running_hi: int
    dwell_after_lo: int | None = None
    dwell_after_hi: int | None = None

    @property
    def has_dwell(self) -> bool:
        return self.dwell_after_lo is not None


@dataclass(frozen=True)
class Train:
    id: str
    basic_headway: int
    route: tuple[Trip, ...]


@dataclass(frozen=True)
class Segment:
    """A piece of track between two stations. ``single_track`` means
    opposite-direction trains must share the one track."""

    from_station: str
    to_station: str
    single_track: bool = False

    def pair(self) -> tuple[str, str]:
        a, b = self.from_station, self.to_station
        return (a, b) if a <= b else (b, a)


@dataclass(frozen=True)
class ConnectionSpec:
    """A passenger transfer: the onward train should depart ``station``
    between ``conn_lo`` and ``conn_hi`` minutes after the feeder arrives."""

    feeder_train: str
    onward_train: str
    station: str
    conn_lo: int
    conn_hi: int


@dataclass(frozen=True)
class WeightConfig:
    """Violation weights per constraint family. Hard families (headway,
    single-track) must outweigh the soft connection family."""

    running: int | float = 1000
    dwell: int | float = 1000
    headway: int | float = 100
    single_track: int | float = 100
    connection: int | float = 1

    def weight_for(self, kind: ConstraintKind) -> int | float:
        return getattr(self, kind.value)


@dataclass(frozen=True)
class InstanceMeta:
    name: str = ""
    synthetic: bool = False
    notes: str = ""


@dataclass(frozen=True)
class Instance:
    """A full timetabling problem: network, trains and their bounds."""

    period: int
    stations: tuple[str, ...]
    segments: tuple[Segment, ...]
    trains: tuple[Train, ...]
    connections: tuple[ConnectionSpec, ...]
    weights: WeightConfig = WeightConfig()
    meta: InstanceMeta = InstanceMeta()


@dataclass(frozen=True)
class PeriodicConstraint:
    """Periodic window constraint between two events.

    Satisfied iff some integer q puts ``time(later) - time(earlier) +
    q*period`` inside ``[lo, hi]``. Windows are narrower than the period,
    so at most one q can work.
    """

    kind: ConstraintKind
    earlier: Event
    later: Event
    lo: int
    hi: int

    def describe(self) -> str:
        return (
            f"{self.kind.value}: {self.earlier.kind.value} {self.earlier.train}"
            f"@{self.earlier.station} -> {self.later.kind.value}"
            f" {self.later.train}@{self.later.station} in [{self.lo}, {self.hi}]"
        )


@dataclass(frozen=True)
class Timetable:
    """Canonical event times, each in ``[0, period)``."""

    period: int
    times: dict[Event, int]

    def __post_init__(self):
        for event, t in self.times.items():
            if not 0 <= t < self.period:
                raise ValidationError(
                    f"time {t} for {event.kind.value} of {event.train} at "
                    f"{event.station} is outside [0, {self.period})"
                )

    def of(self, event: Event) -> int:
        try:
            return self.times[event]
        except KeyError:
            raise MissingEvent(
                f"timetable has no {event.kind.value} of train {event.train} "
                f"at station {event.station}"
            ) from None

    def __contains__(self, event: Event) -> bool:
        return event in self.times


class Violation(NamedTuple):
    constraint: PeriodicConstraint
    diff: int
    q: int


@dataclass(frozen=True)
class EvaluationReport:
    """Violation tally of one timetable against one constraint set."""

    violations_by_type: dict[ConstraintKind, int]
    weighted_fitness: int | float
    violated: tuple[Violation, ...] = ()

    @property
    def hard_violations(self) -> int:
        return sum(self.violations_by_type[k] for k in HARD_KINDS)

    @property
    def soft_violations(self) -> int:
        return self.violations_by_type[ConstraintKind.CONNECTION]

    @property
    def feasible(self) -> bool:
        return self.hard_violations == 0

    @property
    def feasible_with_connections(self) -> bool:
        return self.hard_violations == 0 and self.soft_violations == 0


def train_events(train: Train) -> tuple[Event, ...]:
    """All events of a train in journey order: departure at the origin,
    then arrival and departure per stopover, then the final arrival.
    Because routes chain, that is exactly dep/arr per trip."""
    events: list[Event] = []
    for trip in train.route:
        events.append(Event.departure(train.id, trip.from_station))
        events.append(Event.arrival(train.id, trip.to_station))
    return tuple(events)


def instance_events(instance: Instance) -> tuple[Event, ...]:
    """Every event of every train, in train order then journey order."""
    out: list[Event] = []
    for train in instance.trains:
        out.extend(train_events(train))
    return tuple(out)


def validate_instance(instance: Instance) -> None:
    """Check every structural invariant, raising ValidationError (or the
    MalformedInstance subclass for dangling references) with a message
    naming the offending element."""
    if instance.period < 2:
        raise ValidationError(f"period must be >= 2, got {instance.period}")

    stations = instance.stations
    if len(set(stations)) != len(stations):
        raise ValidationError("duplicate station ids")
    known = set(stations)

    seen_pairs: set[tuple[str, str]] = set()
    for seg in instance.segments:
        if seg.from_station == seg.to_station:
            raise ValidationError(
                f"segment {seg.from_station}-{seg.to_station} joins a station to itself"
            )
        for s in (seg.from_station, seg.to_station):
            if s not in known:
                raise MalformedInstance(f"segment references unknown station {s!r}")
        if seg.pair() in seen_pairs:
            raise ValidationError(
                f"more than one segment for station pair {seg.pair()}"
            )
        seen_pairs.add(seg.pair())

    if not instance.trains:
        raise ValidationError("instance has no trains")
    ids = [t.id for t in instance.trains]
    if len(set(ids)) != len(ids):
        raise ValidationError("duplicate train ids")

    for train in instance.trains:
        if not train.route:
            raise ValidationError(f"train {train.id} has an empty route")
        if not 1 <= train.basic_headway < instance.period:
            raise ValidationError(
                f"train {train.id}: basic_headway {train.basic_headway} "
                f"not in [1, {instance.period})"
            )
        last = len(train.route) - 1
        for k, trip in enumerate(train.route):
            where = f"train {train.id} trip {k} ({trip.from_station}->{trip.to_station})"
            if trip.from_station == trip.to_station:
                raise ValidationError(f"{where}: departs and arrives at the same station")
            for s in (trip.from_station, trip.to_station):
                if s not in known:
                    raise MalformedInstance(f"{where}: unknown station {s!r}")
            if k < last and trip.to_station != train.route[k + 1].from_station:
                raise ValidationError(
                    f"{where}: route breaks at {trip.to_station}, next trip "
                    f"starts at {train.route[k + 1].from_station}"
                )
            if not 1 <= trip.running_lo <= trip.running_hi < instance.period:
                raise ValidationError(
                    f"{where}: running window [{trip.running_lo}, {trip.running_hi}] "
                    f"invalid for period {instance.period}"
                )
            has_lo = trip.dwell_after_lo is not None
            has_hi = trip.dwell_after_hi is not None
            if has_lo != has_hi:
                raise ValidationError(f"{where}: dwell window only half specified")
            if k < last and not has_lo:
                raise ValidationError(f"{where}: intermediate stop lacks a dwell window")
            if k == last and has_lo:
                raise ValidationError(f"{where}: final trip must not carry a dwell window")
            if has_lo and not (
                0 <= trip.dwell_after_lo <= trip.dwell_after_hi < instance.period
            ):
                raise ValidationError(
                    f"{where}: dwell window [{trip.dwell_after_lo}, "
                    f"{trip.dwell_after_hi}] invalid for period {instance.period}"
                )
        # one canonical time per (kind, station): no station may repeat per kind
        departures = [t.from_station for t in train.route]
        arrivals = [t.to_station for t in train.route]
        if len(set(departures)) != len(departures) or len(set(arrivals)) != len(arrivals):
            raise ValidationError(
                f"train {train.id} visits a station twice in the same role; "
                f"event times would be ambiguous"
            )

    by_id = {t.id: t for t in instance.trains}
    for conn in instance.connections:
        label = (
            f"connection {conn.feeder_train}->{conn.onward_train} at {conn.station}"
        )
        if conn.station not in known:
            raise MalformedInstance(f"{label}: unknown station {conn.station!r}")
        feeder = by_id.get(conn.feeder_train)
        onward = by_id.get(conn.onward_train)
        if feeder is None:
            raise MalformedInstance(f"{label}: unknown train {conn.feeder_train!r}")
        if onward is None:
            raise MalformedInstance(f"{label}: unknown train {conn.onward_train!r}")
        if conn.station not in (t.to_station for t in feeder.route):
            raise MalformedInstance(
                f"{label}: feeder never arrives at {conn.station}"
            )
        if conn.station not in (t.from_station for t in onward.route):
            raise MalformedInstance(
                f"{label}: onward train never departs from {conn.station}"
            )
        if not 0 <= conn.conn_lo <= conn.conn_hi:
            raise ValidationError(f"{label}: window [{conn.conn_lo}, {conn.conn_hi}] inverted")
        if conn.conn_hi - conn.conn_lo >= instance.period:
            raise ValidationError(
                f"{label}: window wider than the period is always satisfied"
            )

    w = instance.weights
    for kind in ConstraintKind:
        value = w.weight_for(kind)
        if not (isinstance(value, (int, float)) and math.isfinite(value) and value >= 0):
            raise ValidationError(
                f"weight for {kind.value} must be a finite non-negative number, "
                f"got {value!r}"
            )
    if not (w.headway > w.connection and w.single_track > w.connection):
        raise ValidationError(
            "hard-constraint weights (headway, single_track) must exceed the "
            "connection weight"
        )


def _normalized_window(lo: int, hi: int, period: int) -> tuple[int, int]:
    # Shift the window by whole periods until hi < period. Keeps the
    # satisfied set identical and guarantees -period < lo <= hi < period,
    # which the brute-force q in {-1, 0, 1} trial relies on.
    shift = (hi // period) * period if hi >= period else 0
    return lo - shift, hi - shift


def derive_bounds(instance: Instance) -> list[PeriodicConstraint]:
    """Build the full constraint set of an instance.

    Families, in output order:

    * running: one per trip, window = the trip's running bounds, between
      the departure and the arrival of that leg.
    * dwell: one per intermediate stop, window = the dwell bounds,
      between arrival and departure at the stop.
    * headway: one per ordered pair of distinct trains that share a
      directed trip s->t, between their departures at s. Lower bound =
      |running_lo(i) - running_lo(j)| + basic_headway(i); upper bound =
      period - basic_headway(j).
    * single_track: one per ordered pair of trains crossing a single-track
      segment in opposite directions, between the opposing train's arrival
      and this train's departure at the entry station. Lower bound =
      2 * min of the two running_lo values + basic_headway(i); upper bound
      = period - basic_headway(j).
    * connection: one per connection spec, between feeder arrival and
      onward departure.

    Ordering within a family is by train id (pairs by (i, j)), then route
    position, so the output depends only on the instance content. Windows
    at least a full period wide are dropped with a warning; an inverted
    window raises BoundInversion.
    """
    T = instance.period
    trains = sorted(instance.trains, key=lambda t: t.id)
    by_id = {t.id: t for t in instance.trains}

    out: list[PeriodicConstraint] = []

    def emit(kind, earlier, later, lo, hi):
        lo, hi = _normalized_window(lo, hi, T)
        if lo > hi:
            raise BoundInversion(
                f"{kind.value} constraint between {earlier} and {later} has "
                f"lo {lo} > hi {hi}"
            )
        if hi - lo >= T:
            warnings.warn(
                f"dropping vacuous {kind.value} constraint ({earlier} -> {later}): "
                f"window [{lo}, {hi}] spans a full period",
                stacklevel=3,
            )
            return
        out.append(PeriodicConstraint(kind, earlier, later, lo, hi))

    for train in trains:
        for trip in train.route:
            emit(
                ConstraintKind.RUNNING,
                Event.departure(train.id, trip.from_station),
                Event.arrival(train.id, trip.to_station),
                trip.running_lo,
                trip.running_hi,
            )

    for train in trains:
        for trip in train.route[:-1]:
            if trip.dwell_after_lo is None:
                raise MalformedInstance(
                    f"train {train.id}: intermediate stop at {trip.to_station} "
                    f"lacks a dwell window"
                )
            emit(
                ConstraintKind.DWELL,
                Event.arrival(train.id, trip.to_station),
                Event.departure(train.id, trip.to_station),
                trip.dwell_after_lo,
                trip.dwell_after_hi,
            )

    for ti in trains:
        for tj in trains:
            if ti.id == tj.id:
                continue
            for trip_i in ti.route:
                for trip_j in tj.route:
                    if (
                        trip_i.from_station == trip_j.from_station
                        and trip_i.to_station == trip_j.to_station
                    ):
                        emit(
                            ConstraintKind.HEADWAY,
                            Event.departure(tj.id, trip_j.from_station),
                            Event.departure(ti.id, trip_i.from_station),
                            abs(trip_i.running_lo - trip_j.running_lo)
                            + ti.basic_headway,
                            T - tj.basic_headway,
                        )

    single = {
        seg.pair() for seg in instance.segments if seg.single_track
    }
    if single:
        for ti in trains:
            for tj in trains:
                if ti.id == tj.id:
                    continue
                for trip_i in ti.route:
                    if Segment(trip_i.from_station, trip_i.to_station).pair() not in single:
                        continue
                    for trip_j in tj.route:
                        if (
                            trip_j.from_station == trip_i.to_station
                            and trip_j.to_station == trip_i.from_station
                        ):
                            emit(
                                ConstraintKind.SINGLE_TRACK,
                                Event.arrival(tj.id, trip_i.from_station),
                                Event.departure(ti.id, trip_i.from_station),
                                2 * min(trip_i.running_lo, trip_j.running_lo)
                                + ti.basic_headway,
                                T - tj.basic_headway,
                            )

    for conn in sorted(
        instance.connections,
        key=lambda c: (c.feeder_train, c.onward_train, c.station),
    ):
        feeder = by_id.get(conn.feeder_train)
        onward = by_id.get(conn.onward_train)
        if feeder is None or onward is None:
            raise MalformedInstance(
                f"connection references unknown train "
                f"{conn.feeder_train if feeder is None else conn.onward_train!r}"
            )
        if conn.station not in (t.to_station for t in feeder.route):
            raise MalformedInstance(
                f"connection at {conn.station}: feeder {feeder.id} never arrives there"
            )
        if conn.station not in (t.from_station for t in onward.route):
            raise MalformedInstance(
                f"connection at {conn.station}: train {onward.id} never departs there"
            )
        emit(
            ConstraintKind.CONNECTION,
            Event.arrival(conn.feeder_train, conn.station),
            Event.departure(conn.onward_train, conn.station),
            conn.conn_lo,
            conn.conn_hi,
        )

    return out


def eval_constraint(
    c: PeriodicConstraint, tt: Timetable, period: int
) -> tuple[bool, int, int]:
    """Check one periodic constraint against a timetable.

    Returns ``(satisfied, q, diff)`` where ``diff`` is the periodic
    difference ``(time(later) - time(earlier)) mod period`` and q records
    whether the pair wraps the period boundary (1 when the later event's
    canonical time precedes the earlier event's, else 0; forced to 0 when
    unsatisfied).

    The check itself is modulo arithmetic: the window ``[lo, hi]`` taken
    mod period covers ``hi - lo + 1`` residues, so membership reduces to
    ``(diff - lo) mod period <= hi - lo``.
    """
    tx = tt.of(c.earlier)
    ty = tt.of(c.later)
    d = (ty - tx) % period
    satisfied = (d - c.lo) % period <= c.hi - c.lo
    q = 1 if satisfied and ty < tx else 0
    return satisfied, q, d


def evaluate(
    tt: Timetable,
    constraints: Sequence[PeriodicConstraint],
    weights: WeightConfig,
) -> EvaluationReport:
    """Tally violations of each family and the weighted fitness.

    Each violated constraint counts once toward its family regardless of
    how far outside the window the difference lies; the fitness is the
    weighted sum of those counts (exact integer arithmetic when the
    weights are integers).
    """
    period = tt.period
    counts = {kind: 0 for kind in ConstraintKind}
    violated: list[Violation] = []
    for c in constraints:
        satisfied, q, d = eval_constraint(c, tt, period)
        if not satisfied:
            counts[c.kind] += 1
            violated.append(Violation(c, d, q))
    fitness = sum(counts[k] * weights.weight_for(k) for k in ConstraintKind)
    return EvaluationReport(counts, fitness, tuple(violated))


def shift_timetable(tt: Timetable, delta: int, period: int) -> Timetable:
    """Rotate every event time by ``delta`` within the period."""
    return Timetable(period, {e: (t + delta) % period for e, t in tt.times.items()})


def expand_periods(tt: Timetable, k: int, period: int) -> list[tuple[int, Event]]:
    """Unroll the canonical pattern over ``k`` consecutive periods.

    Each event appears once per period at ``canonical + p*period``; the
    result is sorted by absolute time (ties by train, station, kind).
    """
    if k < 1:
        raise ValueError(f"need at least one period, got k={k}")
    entries = [
        (t + p * period, event)
        for event, t in tt.times.items()
        for p in range(k)
    ]
    entries.sort(key=lambda item: (item[0], item[1].sort_key()))
    return entries


def random_timetable(
    instance: Instance, rng: np.random.Generator
) -> Timetable:
    """Uniform random canonical time for every event; a test utility."""
    events = instance_events(instance)
    times = rng.integers(0, instance.period, size=len(events))
    return Timetable(
        instance.period, {e: int(t) for e, t in zip(events, times)}
    )
