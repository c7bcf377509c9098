"""Instance files, bundled networks, and the synthetic large network.

The interchange format is a single JSON document::

    {
      "period": 60,
      "stations": ["A", "B", ...],
      "segments": [{"from": "A", "to": "B", "single_track": false}, ...],
      "trains": [
        {"id": "L1a", "basic_headway": 3, "route": [
          {"from": "A", "to": "B", "running": [9, 12], "dwell_after": [2, 4]},
          {"from": "B", "to": "C", "running": [7, 9]}
        ]},
        ...
      ],
      "connections": [
        {"feeder": "L1a", "onward": "L3a", "station": "C", "window": [2, 8]}
      ],
      "weights": {"running": 1000, "dwell": 1000, "headway": 100,
                  "single_track": 100, "connection": 1},
      "metadata": {"name": "...", "synthetic": false, "notes": "..."}
    }

All times are integer minutes. The final trip of a route carries no
"dwell_after". Unknown keys anywhere are rejected by name. Files are
saved with stations first and trains ordered by id, so diffs stay stable.

Timetables use a sibling format::

    {"period": 60, "events": [
        {"train": "L1a", "station": "A", "kind": "departure", "time": 10},
        ...]}
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

import numpy as np

from . import codec, model
from .errors import (
    GenerationInfeasible,
    IoError,
    MissingEvent,
    ParseError,
    ValidationError,
)
from .model import (
    ConnectionSpec,
    ConstraintKind,
    Event,
    EventKind,
    Instance,
    InstanceMeta,
    Segment,
    Timetable,
    Train,
    Trip,
    WeightConfig,
)

__all__ = [
    "load",
    "save",
    "loads",
    "dumps",
    "load_timetable",
    "save_timetable",
    "build_cs1",
    "generate_cs2_like",
    "bundled_path",
    "BUILTIN_NAMES",
]

BUILTIN_NAMES = ("cs1", "cs2")


# ---------------------------------------------------------------------------
# parsing helpers

def _reject_unknown(obj: dict, allowed: set[str], where: str) -> None:
    for key in obj:
        if key not in allowed:
            raise ValidationError(f"unknown key {key!r} in {where}")


def _want(obj: dict, key: str, where: str):
    if key not in obj:
        raise ValidationError(f"missing key {key!r} in {where}")
    return obj[key]


def _int_pair(value, where: str) -> tuple[int, int]:
    if (
        not isinstance(value, list)
        or len(value) != 2
        or not all(isinstance(v, int) and not isinstance(v, bool) for v in value)
    ):
        raise ValidationError(f"{where} must be a pair of integers, got {value!r}")
    return value[0], value[1]


def _an_int(value, where: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise ValidationError(f"{where} must be an integer, got {value!r}")
    return value


def _a_str(value, where: str) -> str:
    if not isinstance(value, str):
        raise ValidationError(f"{where} must be a string, got {value!r}")
    return value


def _a_list(value, where: str) -> list:
    if not isinstance(value, list):
        raise ValidationError(f"{where} must be a list")
    return value


def _parse_trip(obj, index: int, train_id: str) -> Trip:
    where = f"trip {index} of train {train_id}"
    if not isinstance(obj, dict):
        raise ValidationError(f"{where} must be an object")
    _reject_unknown(obj, {"from", "to", "running", "dwell_after"}, where)
    running = _int_pair(_want(obj, "running", where), f"{where} running")
    dwell = obj.get("dwell_after")
    dwell_pair = (None, None) if dwell is None else _int_pair(dwell, f"{where} dwell_after")
    return Trip(
        from_station=_a_str(_want(obj, "from", where), f"{where} from"),
        to_station=_a_str(_want(obj, "to", where), f"{where} to"),
        running_lo=running[0],
        running_hi=running[1],
        dwell_after_lo=dwell_pair[0],
        dwell_after_hi=dwell_pair[1],
    )


def _instance_from_document(doc) -> Instance:
    if not isinstance(doc, dict):
        raise ValidationError("instance document must be a JSON object")
    _reject_unknown(
        doc,
        {"period", "stations", "segments", "trains", "connections", "weights", "metadata"},
        "instance",
    )

    period = _an_int(_want(doc, "period", "instance"), "period")
    stations = tuple(
        _a_str(s, "station id")
        for s in _a_list(_want(doc, "stations", "instance"), "stations")
    )

    segments = []
    for k, seg in enumerate(_a_list(doc.get("segments", []), "segments")):
        where = f"segment {k}"
        if not isinstance(seg, dict):
            raise ValidationError(f"{where} must be an object")
        _reject_unknown(seg, {"from", "to", "single_track"}, where)
        single = seg.get("single_track", False)
        if not isinstance(single, bool):
            raise ValidationError(f"{where} single_track must be a boolean")
        segments.append(
            Segment(
                _a_str(_want(seg, "from", where), f"{where} from"),
                _a_str(_want(seg, "to", where), f"{where} to"),
                single,
            )
        )

    trains = []
    for k, tr in enumerate(_a_list(_want(doc, "trains", "instance"), "trains")):
        where = f"train {k}"
        if not isinstance(tr, dict):
            raise ValidationError(f"{where} must be an object")
        _reject_unknown(tr, {"id", "basic_headway", "route"}, where)
        train_id = _a_str(_want(tr, "id", where), f"{where} id")
        route = tuple(
            _parse_trip(trip, i, train_id)
            for i, trip in enumerate(_a_list(_want(tr, "route", where), f"{where} route"))
        )
        trains.append(
            Train(
                id=train_id,
                basic_headway=_an_int(
                    _want(tr, "basic_headway", where), f"{where} basic_headway"
                ),
                route=route,
            )
        )

    connections = []
    for k, conn in enumerate(_a_list(doc.get("connections", []), "connections")):
        where = f"connection {k}"
        if not isinstance(conn, dict):
            raise ValidationError(f"{where} must be an object")
        _reject_unknown(conn, {"feeder", "onward", "station", "window"}, where)
        lo, hi = _int_pair(_want(conn, "window", where), f"{where} window")
        connections.append(
            ConnectionSpec(
                feeder_train=_a_str(_want(conn, "feeder", where), f"{where} feeder"),
                onward_train=_a_str(_want(conn, "onward", where), f"{where} onward"),
                station=_a_str(_want(conn, "station", where), f"{where} station"),
                conn_lo=lo,
                conn_hi=hi,
            )
        )

    weights = WeightConfig()
    if "weights" in doc:
        wobj = doc["weights"]
        if not isinstance(wobj, dict):
            raise ValidationError("weights must be an object")
        _reject_unknown(
            wobj, {"running", "dwell", "headway", "single_track", "connection"}, "weights"
        )
        fields = {}
        for name, value in wobj.items():
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ValidationError(f"weight {name!r} must be a number")
            fields[name] = value
        weights = WeightConfig(**fields)

    meta = InstanceMeta()
    if "metadata" in doc:
        mobj = doc["metadata"]
        if not isinstance(mobj, dict):
            raise ValidationError("metadata must be an object")
        _reject_unknown(mobj, {"name", "synthetic", "notes"}, "metadata")
        meta = InstanceMeta(
            name=_a_str(mobj.get("name", ""), "metadata name"),
            synthetic=bool(mobj.get("synthetic", False)),
            notes=_a_str(mobj.get("notes", ""), "metadata notes"),
        )

    instance = Instance(
        period=period,
        stations=stations,
        segments=tuple(segments),
        trains=tuple(trains),
        connections=tuple(connections),
        weights=weights,
        meta=meta,
    )
    model.validate_instance(instance)
    return instance


def loads(text: str) -> Instance:
    """Parse and fully validate an instance from a JSON string."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"line {e.lineno}, column {e.colno}: {e.msg}") from e
    return _instance_from_document(doc)


def load(path: str | Path) -> Instance:
    """Load and fully validate an instance file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise IoError(f"cannot read {path}: {e}") from e
    return loads(text)


def _instance_document(instance: Instance) -> dict:
    trains = sorted(instance.trains, key=lambda t: t.id)
    segments = sorted(instance.segments, key=lambda s: s.pair())
    doc: dict = {
        "period": instance.period,
        "stations": list(instance.stations),
        "segments": [
            {"from": s.from_station, "to": s.to_station, "single_track": s.single_track}
            for s in segments
        ],
        "trains": [
            {
                "id": t.id,
                "basic_headway": t.basic_headway,
                "route": [
                    {
                        "from": trip.from_station,
                        "to": trip.to_station,
                        "running": [trip.running_lo, trip.running_hi],
                        **(
                            {"dwell_after": [trip.dwell_after_lo, trip.dwell_after_hi]}
                            if trip.has_dwell
                            else {}
                        ),
                    }
                    for trip in t.route
                ],
            }
            for t in trains
        ],
        "connections": [
            {
                "feeder": c.feeder_train,
                "onward": c.onward_train,
                "station": c.station,
                "window": [c.conn_lo, c.conn_hi],
            }
            for c in instance.connections
        ],
        "weights": {
            "running": instance.weights.running,
            "dwell": instance.weights.dwell,
            "headway": instance.weights.headway,
            "single_track": instance.weights.single_track,
            "connection": instance.weights.connection,
        },
    }
    if instance.meta != InstanceMeta():
        doc["metadata"] = {
            "name": instance.meta.name,
            "synthetic": instance.meta.synthetic,
            "notes": instance.meta.notes,
        }
    return doc


def dumps(instance: Instance) -> str:
    return json.dumps(_instance_document(instance), indent=2) + "\n"


def save(instance: Instance, path: str | Path) -> None:
    """Write an instance in canonical form (trains ordered by id)."""
    try:
        Path(path).write_text(dumps(instance), encoding="utf-8")
    except OSError as e:
        raise IoError(f"cannot write {path}: {e}") from e


# ---------------------------------------------------------------------------
# timetable files

def save_timetable(tt: Timetable, path: str | Path) -> None:
    events = sorted(tt.times, key=lambda e: e.sort_key())
    doc = {
        "period": tt.period,
        "events": [
            {
                "train": e.train,
                "station": e.station,
                "kind": e.kind.value,
                "time": tt.times[e],
            }
            for e in events
        ],
    }
    try:
        Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    except OSError as e:
        raise IoError(f"cannot write {path}: {e}") from e


def load_timetable(path: str | Path, instance: Instance) -> Timetable:
    """Load a timetable file and check it covers the instance's events."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise IoError(f"cannot read {path}: {e}") from e
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"line {e.lineno}, column {e.colno}: {e.msg}") from e
    if not isinstance(doc, dict):
        raise ValidationError("timetable document must be a JSON object")
    _reject_unknown(doc, {"period", "events"}, "timetable")
    period = _an_int(_want(doc, "period", "timetable"), "timetable period")
    if period != instance.period:
        raise ValidationError(
            f"timetable period {period} does not match instance period {instance.period}"
        )
    times: dict[Event, int] = {}
    for k, entry in enumerate(_a_list(_want(doc, "events", "timetable"), "events")):
        where = f"timetable event {k}"
        if not isinstance(entry, dict):
            raise ValidationError(f"{where} must be an object")
        _reject_unknown(entry, {"train", "station", "kind", "time"}, where)
        kind_name = _a_str(_want(entry, "kind", where), f"{where} kind")
        try:
            kind = EventKind(kind_name)
        except ValueError:
            raise ValidationError(f"{where}: kind must be arrival or departure") from None
        event = Event(
            kind,
            _a_str(_want(entry, "train", where), f"{where} train"),
            _a_str(_want(entry, "station", where), f"{where} station"),
        )
        if event in times:
            raise ValidationError(f"{where}: duplicate event")
        times[event] = _an_int(_want(entry, "time", where), f"{where} time")

    expected = set(model.instance_events(instance))
    for event in times:
        if event not in expected:
            raise ValidationError(
                f"timetable lists {event.kind.value} of {event.train} at "
                f"{event.station}, which the instance never schedules"
            )
    for event in expected:
        if event not in times:
            raise MissingEvent(
                f"timetable lacks {event.kind.value} of train {event.train} "
                f"at station {event.station}"
            )
    return Timetable(period, times)


def bundled_path(name: str) -> Path:
    """Filesystem path of a bundled instance ('cs1' or 'cs2')."""
    if name not in BUILTIN_NAMES:
        raise KeyError(f"no bundled instance named {name!r}")
    filename = {"cs1": "cs1.json", "cs2": "cs2_synthetic.json"}[name]
    return Path(str(resources.files("perisched") / "data" / filename))


# ---------------------------------------------------------------------------
# shared construction helpers

def _mid(lo: int, hi: int) -> int:
    return lo + (hi - lo) // 2


def _line_trains(
    line_id: str,
    stations: list[str],
    run_windows: dict[tuple[str, str], tuple[int, int]],
    dwell_windows: dict[str, tuple[int, int]],
    headway: int,
) -> tuple[Train, Train]:
    """Forward and reverse train of one line; same windows both ways."""

    def build(train_id: str, path: list[str]) -> Train:
        trips = []
        for k in range(len(path) - 1):
            a, b = path[k], path[k + 1]
            lo, hi = run_windows[(a, b) if a <= b else (b, a)]
            if k < len(path) - 2:
                dlo, dhi = dwell_windows[b]
                trips.append(Trip(a, b, lo, hi, dlo, dhi))
            else:
                trips.append(Trip(a, b, lo, hi))
        return Train(train_id, headway, tuple(trips))

    return (
        build(f"{line_id}a", stations),
        build(f"{line_id}b", list(reversed(stations))),
    )


def _nominal_phase_times(train: Train, period: int) -> dict[Event, int]:
    """Event times of a train departing at minute 0 with every running and
    dwell gene at the middle of its window."""
    times: dict[Event, int] = {}
    clock = 0
    times[Event.departure(train.id, train.route[0].from_station)] = 0
    last = len(train.route) - 1
    for k, trip in enumerate(train.route):
        clock += _mid(trip.running_lo, trip.running_hi)
        times[Event.arrival(train.id, trip.to_station)] = clock % period
        if k < last:
            clock += _mid(trip.dwell_after_lo, trip.dwell_after_hi)
            times[Event.departure(train.id, trip.to_station)] = clock % period
    return times


def _nominal_timetable(
    trains: tuple[Train, ...], phases: dict[str, int], period: int
) -> Timetable:
    times: dict[Event, int] = {}
    for train in trains:
        phase = phases[train.id]
        for event, t in _nominal_phase_times(train, period).items():
            times[event] = (t + phase) % period
    return Timetable(period, times)


def _nominal_genotype(instance: Instance, phases: dict[str, int]) -> codec.Genotype:
    genes: list[int] = []
    for train in instance.trains:
        genes.append(phases[train.id])
        last = len(train.route) - 1
        for k, trip in enumerate(train.route):
            genes.append(_mid(trip.running_lo, trip.running_hi))
            if k < last:
                genes.append(_mid(trip.dwell_after_lo, trip.dwell_after_hi))
    return codec.Genotype(tuple(genes))


# ---------------------------------------------------------------------------
# case study 1: small interconnected network, four lines over ten stations

_CS1_PERIOD = 60

_CS1_LINE_STATIONS = {
    "L1": ["A", "B", "C", "D", "E"],
    "L2": ["F", "B", "G", "D", "H"],
    "L3": ["I", "C", "G", "J", "F"],
    "L4": ["J", "A", "H", "E", "I"],
}

_CS1_HEADWAY = {"L1": 3, "L2": 4, "L3": 3, "L4": 4}

# running windows per segment (keys sorted), minutes
_CS1_RUN = {
    ("A", "B"): (9, 12),
    ("B", "C"): (7, 9),
    ("C", "D"): (10, 13),
    ("D", "E"): (8, 10),
    ("B", "F"): (11, 14),
    ("B", "G"): (6, 8),
    ("D", "G"): (9, 11),
    ("D", "H"): (12, 15),
    ("C", "I"): (8, 10),
    ("C", "G"): (7, 9),
    ("G", "J"): (10, 12),
    ("F", "J"): (9, 12),
    ("A", "J"): (10, 13),
    ("A", "H"): (8, 11),
    ("E", "H"): (9, 11),
    ("E", "I"): (7, 9),
}

_CS1_SINGLE_TRACK = {("E", "I")}

# reference first departures; L4b is placed so the single-track window
# over E-I holds for the reference pattern
_CS1_PHASE = {
    "L1a": 0,
    "L1b": 30,
    "L2a": 7,
    "L2b": 37,
    "L3a": 14,
    "L3b": 44,
    "L4a": 21,
    "L4b": 30,
}

# feeder, onward, station; windows are set +/-1 around the reference gap
_CS1_TRANSFERS = [
    ("L1a", "L3a", "C"),
    ("L1a", "L2a", "D"),
    ("L1b", "L2b", "D"),
    ("L2a", "L3a", "G"),
    ("L2b", "L3b", "G"),
    ("L3a", "L2a", "F"),
    ("L4a", "L3a", "I"),
]

_CS1_CONN_SLACK = 1


def build_cs1() -> Instance:
    """Small benchmark network: 4 lines (8 trains), 10 stations, period 60,
    one single-track branch and 7 timed transfers.

    The connection windows are centered on a reference timetable that
    satisfies every constraint, so a perfect schedule always exists. The
    layout is a reconstruction built to the published summary counts of
    the original network, not its (unpublished) running times.
    """
    T = _CS1_PERIOD
    dwell = {s: (2, 4) for s in "ABCDEFGHIJ"}
    trains: list[Train] = []
    for line_id, stations in _CS1_LINE_STATIONS.items():
        trains.extend(
            _line_trains(line_id, stations, _CS1_RUN, dwell, _CS1_HEADWAY[line_id])
        )
    trains.sort(key=lambda t: t.id)

    reference = _nominal_timetable(tuple(trains), _CS1_PHASE, T)
    connections = []
    for feeder, onward, station in _CS1_TRANSFERS:
        gap = (
            reference.of(Event.departure(onward, station))
            - reference.of(Event.arrival(feeder, station))
        ) % T
        connections.append(
            ConnectionSpec(
                feeder,
                onward,
                station,
                max(0, gap - _CS1_CONN_SLACK),
                gap + _CS1_CONN_SLACK,
            )
        )

    segments = tuple(
        Segment(a, b, (a, b) in _CS1_SINGLE_TRACK)
        for a, b in sorted(_CS1_RUN)
    )
    instance = Instance(
        period=T,
        stations=tuple("ABCDEFGHIJ"),
        segments=segments,
        trains=tuple(trains),
        connections=tuple(connections),
        weights=WeightConfig(),
        meta=InstanceMeta(
            name="cs1",
            synthetic=False,
            notes="ten-station four-line network with one single-track branch",
        ),
    )
    model.validate_instance(instance)
    return instance


def cs1_reference_genotype() -> codec.Genotype:
    """The reference solution of `build_cs1` as a genotype (fitness 0)."""
    return _nominal_genotype(build_cs1(), _CS1_PHASE)


# ---------------------------------------------------------------------------
# synthetic large network in the shape of case study 2

_CS2_TARGET = {
    ConstraintKind.RUNNING: 236,
    ConstraintKind.DWELL: 188,
    ConstraintKind.HEADWAY: 8,
    ConstraintKind.SINGLE_TRACK: 6,
    ConstraintKind.CONNECTION: 14,
}

_CS2_STATIONS = tuple(f"S{k:02d}" for k in range(1, 27))
_CS2_PERIOD = 60
_CS2_LINES = 24
_CS2_CONNECTION_COUNT = 14


def _edge(a: str, b: str) -> tuple[str, str]:
    return (a, b) if a <= b else (b, a)


def _walk(rng, length: int, used: set, start: str | None = None) -> list[str] | None:
    """Random simple path with `length` edges, none previously used."""
    stations = _CS2_STATIONS
    path = [start if start is not None else stations[rng.integers(len(stations))]]
    for _ in range(length):
        options = [
            s
            for s in stations
            if s not in path and _edge(path[-1], s) not in used
        ]
        if not options:
            return None
        path.append(options[rng.integers(len(options))])
    return path


def _walk_through(rng, length: int, used: set, shared: tuple[str, str]):
    """Random simple path with `length` edges containing the shared edge
    (in either orientation); only the shared edge may be reused."""
    u, v = shared
    if rng.integers(2):
        u, v = v, u
    prefix_len = int(rng.integers(0, length))  # edges before the shared one
    suffix_len = length - 1 - prefix_len
    head = _walk(rng, prefix_len, used | {_edge(u, v)}, start=u)
    if head is None or v in head:
        return None
    head.reverse()  # walked outward from u; route runs toward u
    path = head + [v]
    for _ in range(suffix_len):
        options = [
            s
            for s in _CS2_STATIONS
            if s not in path and _edge(path[-1], s) not in used
        ]
        if not options:
            return None
        path.append(options[rng.integers(len(options))])
    return path


def generate_cs2_like(seed: int) -> Instance:
    """Deterministic synthetic network with the published shape of the
    large case study: 26 stations, 24 lines (48 trains), 14 connections
    and 452 constraints in total, period 60.

    The line data of the real network is not public, so this generates a
    random network matching those summary counts: 22 five-trip and 2
    four-trip lines, two corridor segments shared by a pair of lines
    (headway constraints) and three single-track branch segments. Bounds
    are sampled, then a reference timetable is fixed and the connection
    windows are centered on it, so every generated instance is solvable
    to zero violations.
    """
    rng = np.random.default_rng(seed)
    for _ in range(64):
        instance = _try_generate_cs2(rng, seed)
        if instance is not None:
            return instance
    raise GenerationInfeasible(
        f"could not assemble a conforming network for seed {seed}"
    )


def _try_generate_cs2(rng, seed: int) -> Instance | None:
    T = _CS2_PERIOD
    lengths = [5] * 22 + [4] * 2
    # lines 0+1 and 2+3 share a corridor segment; lines 4..6 own a
    # single-track segment; membership is disjoint so the reference
    # pattern can be phase-fixed one group at a time
    used: set[tuple[str, str]] = set()
    paths: list[list[str]] = []
    shared_edges: list[tuple[str, str]] = []
    single_edges: list[tuple[str, str]] = []

    for line in range(_CS2_LINES):
        if line in (1, 3):
            shared = shared_edges[line // 2]
            path = _walk_through(rng, lengths[line], used, shared)
        else:
            path = _walk(rng, lengths[line], used)
        if path is None:
            return None
        paths.append(path)
        edges = [_edge(a, b) for a, b in zip(path, path[1:])]
        used.update(edges)
        if line in (0, 2):
            shared_edges.append(edges[len(edges) // 2])
        if line in (4, 5, 6):
            single_edges.append(edges[len(edges) // 2])

    if set().union(*[set(p) for p in paths]) != set(_CS2_STATIONS):
        return None  # leave no station unserved

    run_windows: dict[tuple[str, str], tuple[int, int]] = {}
    for path in paths:
        for a, b in zip(path, path[1:]):
            key = _edge(a, b)
            if key not in run_windows:
                lo = int(rng.integers(7, 15))
                run_windows[key] = (lo, lo + int(rng.integers(2, 5)))
    dwell_windows = {}
    for s in _CS2_STATIONS:
        lo = int(rng.integers(1, 4))
        dwell_windows[s] = (lo, lo + int(rng.integers(1, 4)))

    trains: list[Train] = []
    line_ids = []
    for line, path in enumerate(paths):
        line_id = f"L{line + 1:02d}"
        line_ids.append(line_id)
        headway = int(rng.integers(3, 6))
        trains.extend(
            _line_trains(line_id, path, run_windows, dwell_windows, headway)
        )
    trains.sort(key=lambda t: t.id)

    segments = tuple(
        Segment(a, b, (a, b) in set(single_edges)) for a, b in sorted(used)
    )

    skeleton = Instance(
        period=T,
        stations=_CS2_STATIONS,
        segments=segments,
        trains=tuple(trains),
        connections=(),
        weights=WeightConfig(),
    )

    phases = {t.id: int(rng.integers(T)) for t in trains}
    pairwise = [
        c
        for c in model.derive_bounds(skeleton)
        if c.kind in (ConstraintKind.HEADWAY, ConstraintKind.SINGLE_TRACK)
    ]
    # phase-fix one independent group at a time: the second corridor line
    # of each sharing pair and the reverse train of each single-track line
    groups = [
        ("L02a", "L02b"),
        ("L04a", "L04b"),
        ("L05b",),
        ("L06b",),
        ("L07b",),
    ]
    for movable in groups:
        relevant = [
            c
            for c in pairwise
            if c.earlier.train in movable or c.later.train in movable
        ]
        base = dict(phases)
        for delta in range(T):
            for train_id in movable:
                phases[train_id] = (base[train_id] + delta) % T
            tt = _nominal_timetable(tuple(trains), phases, T)
            if all(model.eval_constraint(c, tt, T)[0] for c in relevant):
                break
        else:
            return None

    reference = _nominal_timetable(tuple(trains), phases, T)
    if not all(model.eval_constraint(c, reference, T)[0] for c in pairwise):
        return None

    # pick transfer points between distinct lines
    line_of = lambda train_id: train_id[:3]
    candidates = []
    for feeder in trains:
        arrive_at = {trip.to_station for trip in feeder.route}
        for onward in trains:
            if line_of(onward.id) == line_of(feeder.id):
                continue
            for station in sorted(arrive_at):
                if station in (trip.from_station for trip in onward.route):
                    candidates.append((feeder.id, onward.id, station))
    if len(candidates) < _CS2_CONNECTION_COUNT:
        return None
    picked = rng.choice(len(candidates), size=_CS2_CONNECTION_COUNT, replace=False)
    connections = []
    for index in sorted(int(i) for i in picked):
        feeder, onward, station = candidates[index]
        gap = (
            reference.of(Event.departure(onward, station))
            - reference.of(Event.arrival(feeder, station))
        ) % T
        slack_lo = int(rng.integers(1, 3))
        slack_hi = int(rng.integers(1, 3))
        connections.append(
            ConnectionSpec(feeder, onward, station, max(0, gap - slack_lo), gap + slack_hi)
        )

    instance = Instance(
        period=T,
        stations=_CS2_STATIONS,
        segments=segments,
        trains=tuple(trains),
        connections=tuple(connections),
        weights=WeightConfig(),
        meta=InstanceMeta(
            name=f"cs2-synthetic-{seed}",
            synthetic=True,
            notes=(
                "randomly generated network matching the published summary "
                "shape of the large case study (station, train, connection "
                "and constraint counts); not the real line data"
            ),
        ),
    )
    model.validate_instance(instance)

    census: dict[ConstraintKind, int] = {k: 0 for k in ConstraintKind}
    for c in model.derive_bounds(instance):
        census[c.kind] += 1
    if census != _CS2_TARGET:
        return None

    # the reference pattern must satisfy everything, including connections
    genotype = _nominal_genotype(instance, phases)
    report = model.evaluate(
        codec.decode(genotype, instance),
        model.derive_bounds(instance),
        instance.weights,
    )
    if report.weighted_fitness != 0:
        return None
    return instance
