"""Device calibration snapshots, error maps and synthetic calibration data.

Times are held in seconds.  The JSON format stores T1/T2 in microseconds and
durations in nanoseconds; conversion is done by exact decimal shifts so that
``load(dump(snapshot)) == snapshot`` holds bit for bit.
"""

from __future__ import annotations

import json
import math
import re
import warnings
from collections import defaultdict
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Mapping

import numpy as np

from .interaction import check_mode
from .topology import CouplingMap

__all__ = [
    "CalibrationError",
    "LookupMiss",
    "QubitProperties",
    "GateProperties",
    "CalibrationSnapshot",
    "ErrorMap",
    "load_calibration",
    "calibration_to_json",
    "dump_calibration",
    "dumps_exact",
    "error_map",
    "idle_error",
    "synth_calibration",
    "PROFILES",
]

PROFILES = ("uniform", "gradient", "hotspot")


class CalibrationError(ValueError):
    pass


class LookupMiss(KeyError):
    """Strict-mode error map has no entry for an instruction."""

    def __str__(self):
        return str(self.args[0]) if self.args else "missing calibration entry"


def _probability(value, what: str) -> float:
    try:
        p = float(value)
    except (TypeError, ValueError):
        raise CalibrationError(f"{what}: not a number ({value!r})") from None
    if not 0.0 <= p <= 1.0 or math.isnan(p):
        raise CalibrationError(f"{what}: probability {p} outside [0, 1]")
    return p


def _positive(value, what: str) -> float:
    try:
        x = float(value)
    except (TypeError, ValueError):
        raise CalibrationError(f"{what}: not a number ({value!r})") from None
    if not x > 0 or math.isinf(x):
        raise CalibrationError(f"{what}: must be positive, got {x}")
    return x


@dataclass(frozen=True)
class QubitProperties:
    t1: float | None = None
    t2: float | None = None
    readout_error: float | None = None


@dataclass(frozen=True)
class GateProperties:
    name: str
    qubits: tuple[int, ...]
    error: float
    duration: float | None = None


@dataclass(frozen=True)
class CalibrationSnapshot:
    """One calibration report for one device.

    ``readout_error`` entries left out of the source data are filled with the
    device average at load time, so every qubit carries one.
    """

    device_name: str
    timestamp: str
    qubits: tuple[QubitProperties, ...]
    gates: tuple[GateProperties, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(self.qubits))
        object.__setattr__(self, "gates", tuple(self.gates))
        n = len(self.qubits)
        for i, q in enumerate(self.qubits):
            if q.t1 is not None:
                _positive(q.t1, f"qubit {i} t1")
            if q.t2 is not None:
                _positive(q.t2, f"qubit {i} t2")
            if q.readout_error is not None:
                _probability(q.readout_error, f"qubit {i} readout_error")
            if q.t1 is not None and q.t2 is not None and q.t2 > 2 * q.t1:
                warnings.warn(f"{self.device_name}: qubit {i} has T2 > 2*T1", stacklevel=3)
        for g in self.gates:
            _probability(g.error, f"gate {g.name}{g.qubits} error")
            if g.duration is not None:
                _positive(g.duration, f"gate {g.name}{g.qubits} duration")
            if any(not 0 <= q < n for q in g.qubits):
                raise CalibrationError(f"gate {g.name}{g.qubits} references a qubit outside [0, {n})")

    @property
    def num_qubits(self) -> int:
        return len(self.qubits)

    def readout(self, qubit: int) -> float:
        return self.qubits[qubit].readout_error

    def duration(self, name: str, qubits: tuple[int, ...], exact: bool = True) -> float:
        """Duration of ``name`` on ``qubits``.

        With ``exact=False`` a missing entry falls back to the reversed pair,
        then to the mean duration of ``name`` across the device.
        """
        table = self._durations
        d = table.get((name, qubits))
        if d is None and not exact:
            if len(qubits) == 2:
                d = table.get((name, qubits[::-1]))
            if d is None:
                same = [v for (n, _), v in table.items() if n == name]
                d = sum(same) / len(same) if same else None
        if d is None:
            raise LookupMiss(f"no duration for {name}{tuple(qubits)}")
        return d

    @property
    def _durations(self) -> dict:
        cache = self.__dict__.get("_dur_cache")
        if cache is None:
            cache = {(g.name, g.qubits): g.duration for g in self.gates if g.duration is not None}
            object.__setattr__(self, "_dur_cache", cache)
        return cache


# ---------------------------------------------------------------------------
# JSON

def _shift(value: Decimal, places: int) -> float:
    return float(value.scaleb(places))


def _unshift(seconds: float, places: int) -> float:
    # nearest float to the exact decimal shift; not always bit-exact on reload
    return float(Decimal(repr(seconds)).scaleb(places))


class _Exact(str):
    """Decimal digits that :func:`dumps_exact` writes as a bare JSON number."""


def _exact(seconds: float, places: int) -> _Exact:
    d = Decimal(repr(seconds)).scaleb(places).normalize()
    return _Exact(f"{d:f}" if -30 < d.adjusted() < 30 else str(d))


_MARK = "\x00\x01exact:"
_EXACT_RE = re.compile(r'"\\u0000\\u0001exact:(-?[0-9][0-9.]*(?:E[-+]?[0-9]+)?)"')  # as json escapes _MARK


def dumps_exact(obj, **kwargs) -> str:
    """``json.dumps`` that writes :class:`_Exact` values as unquoted numbers.

    JSON numbers are read back as decimals, so this keeps ``load(dump(x)) == x``
    bit for bit even when the unit shift has no float-to-float inverse.
    """

    def mark(o):
        if isinstance(o, _Exact):
            return _MARK + o
        if isinstance(o, dict):
            return {k: mark(v) for k, v in o.items()}
        if isinstance(o, list):
            return [mark(v) for v in o]
        return o

    return _EXACT_RE.sub(r"\1", json.dumps(mark(obj), **kwargs))


def load_calibration(text: str | Mapping) -> CalibrationSnapshot:
    """Read a calibration JSON document.

    ``{"device": .., "timestamp": .., "qubits": [{"t1_us", "t2_us", "readout_error"}],
    "gates": [{"name", "qubits", "error", "duration_ns"}]}``
    """
    if isinstance(text, str):
        try:
            data = json.loads(text, parse_float=Decimal, parse_int=Decimal)
        except json.JSONDecodeError as exc:
            raise CalibrationError(f"invalid JSON: {exc.msg} (line {exc.lineno})") from None
    else:
        data = json.loads(json.dumps(text), parse_float=Decimal, parse_int=Decimal)
    if not isinstance(data, dict):
        raise CalibrationError("calibration must be a JSON object")
    try:
        raw_qubits = data["qubits"]
        raw_gates = data.get("gates", [])
        if not isinstance(raw_qubits, list) or not isinstance(raw_gates, list):
            raise CalibrationError("qubits and gates must be lists")
        readouts = [_probability(q["readout_error"], f"qubit {i} readout_error")
                    for i, q in enumerate(raw_qubits) if q.get("readout_error") is not None]
        default_ro = sum(readouts) / len(readouts) if readouts else 0.0
        qubits = []
        for i, q in enumerate(raw_qubits):
            if not isinstance(q, dict):
                raise CalibrationError(f"qubit {i}: expected an object")
            t1 = q.get("t1_us")
            t2 = q.get("t2_us")
            ro = q.get("readout_error")
            qubits.append(QubitProperties(
                t1=None if t1 is None else _positive(_shift(Decimal(t1), -6), f"qubit {i} t1"),
                t2=None if t2 is None else _positive(_shift(Decimal(t2), -6), f"qubit {i} t2"),
                readout_error=default_ro if ro is None else _probability(ro, f"qubit {i} readout_error"),
            ))
        gates = []
        for g in raw_gates:
            dur = g.get("duration_ns")
            gates.append(GateProperties(
                name=str(g["name"]),
                qubits=tuple(int(q) for q in g["qubits"]),
                error=_probability(g["error"], f"gate {g['name']} error"),
                duration=None if dur is None else _shift(Decimal(dur), -9),
            ))
        return CalibrationSnapshot(
            device_name=str(data.get("device", "")),
            timestamp=str(data.get("timestamp", "")),
            qubits=tuple(qubits),
            gates=tuple(gates),
        )
    except (KeyError, TypeError, AttributeError) as exc:
        raise CalibrationError(f"calibration schema violation: {exc!r}") from None


def calibration_to_json(snap: CalibrationSnapshot, exact: bool = False) -> dict:
    """JSON-ready dict.  With ``exact=True`` time fields are exact decimal
    strings meant for :func:`dumps_exact`; otherwise the nearest floats."""
    unshift = _exact if exact else _unshift
    qubits = []
    for q in snap.qubits:
        d = {}
        if q.t1 is not None:
            d["t1_us"] = unshift(q.t1, 6)
        if q.t2 is not None:
            d["t2_us"] = unshift(q.t2, 6)
        d["readout_error"] = q.readout_error
        qubits.append(d)
    gates = []
    for g in snap.gates:
        d = {"name": g.name, "qubits": list(g.qubits), "error": g.error}
        if g.duration is not None:
            d["duration_ns"] = unshift(g.duration, 9)
        gates.append(d)
    return {"device": snap.device_name, "timestamp": snap.timestamp,
            "qubits": qubits, "gates": gates}


def dump_calibration(snap: CalibrationSnapshot) -> str:
    return dumps_exact(calibration_to_json(snap, exact=True), indent=2) + "\n"


# ---------------------------------------------------------------------------
# error maps

@dataclass(frozen=True)
class ErrorMap:
    """Instruction -> error probability lookup for one device.

    Strict maps answer only calibrated ``(name, qubits)`` pairs.  Loose maps
    answer by location: a one-qubit instruction gets the mean error of all
    one-qubit entries on that qubit, a two-qubit one the mean over every
    two-qubit entry on the edge (either orientation).  Locations without any
    entry fall back to the device-wide per-arity means in ``averages``.
    ``measure`` always reads the qubit's readout error; a loose ``reset``
    uses its own entry when calibrated and the one-qubit mean otherwise.
    """

    mode: str
    exact: Mapping[tuple[str, tuple[int, ...]], float]
    readout: tuple[float, ...]
    averages: Mapping[str, float]
    per_location: Mapping[tuple[int, ...], float] = field(default_factory=dict)

    def error(self, name: str, qubits: tuple[int, ...]) -> float:
        if name == "measure":
            return self.readout[qubits[0]]
        if self.mode == "strict":
            try:
                return self.exact[(name, qubits)]
            except KeyError:
                raise LookupMiss(f"no calibration entry for {name}{tuple(qubits)}") from None
        if name == "reset" and (name, qubits) in self.exact:
            return self.exact[(name, qubits)]
        key = qubits if len(qubits) == 1 else (min(qubits), max(qubits))
        e = self.per_location.get(key)
        if e is None:
            e = self.averages["1q" if len(qubits) == 1 else "2q"]
        return e

    def __getitem__(self, key: tuple[str, tuple[int, ...]]) -> float:
        return self.error(*key)


def error_map(snap: CalibrationSnapshot, mode: str = "loose") -> ErrorMap:
    """Build the error lookup used by the scorers."""
    check_mode(mode)
    exact: dict[tuple[str, tuple[int, ...]], float] = {}
    by_loc: dict[tuple[int, ...], list[float]] = defaultdict(list)
    by_arity: dict[int, list[float]] = defaultdict(list)
    for g in snap.gates:
        if g.name == "measure":
            continue  # readout error lives on the qubit record
        exact[(g.name, g.qubits)] = g.error
        if g.name == "reset":
            continue
        loc = g.qubits if len(g.qubits) == 1 else tuple(sorted(g.qubits))
        by_loc[loc].append(g.error)
        by_arity[len(g.qubits)].append(g.error)
    readout = tuple(q.readout_error for q in snap.qubits)

    def mean(xs):
        return math.fsum(xs) / len(xs) if xs else 0.0

    averages = {"1q": mean(by_arity[1]), "2q": mean(by_arity[2]), "readout": mean(readout)}
    per_location = {loc: mean(v) for loc, v in by_loc.items()} if mode == "loose" else {}
    return ErrorMap(mode, exact, readout, averages, per_location)


def idle_error(t1: float, t2: float, dt: float) -> float:
    """Error probability of a qubit idling for ``dt`` seconds.

    ``1 - (exp(-dt/T1) + 2 exp(-dt/T2')) / 3`` with ``T2' = min(T2, 2 T1)``:
    one minus the mean shrink factor of the three Bloch-vector components
    under amplitude damping and dephasing.
    """
    if not t1 > 0 or not t2 > 0:
        raise ValueError("t1 and t2 must be positive")
    if dt < 0 or math.isnan(dt):
        raise ValueError("dt must be non-negative")
    if dt == 0:
        return 0.0
    t2_eff = min(t2, 2.0 * t1)
    value = 1.0 - (math.exp(-dt / t1) + 2.0 * math.exp(-dt / t2_eff)) / 3.0
    return min(1.0, max(0.0, value))


# ---------------------------------------------------------------------------
# synthetic data

_SX_NS = 35.5
_CX_NS = 300.0
_MEAS_NS = 700.0


def _round(x: float, digits: int = 6) -> float:
    return float(f"{x:.{digits}g}")


def synth_calibration(
    cm: CouplingMap,
    seed: int = 0,
    profile: str = "uniform",
    name: str | None = None,
    scale: float = 1.0,
) -> CalibrationSnapshot:
    """Deterministic synthetic calibration for ``cm``.

    ``uniform``: every qubit and gate identical.
    ``gradient``: errors grow with graph distance from qubit 0 (plus a small
    seeded jitter), so that corner of the device is strictly best.
    ``hotspot``: uniform, except one seeded-random edge whose ``cx`` error is
    far above everything else.

    ``scale`` multiplies every error rate (clipped at 1).
    """
    if profile not in PROFILES:
        raise ValueError(f"profile must be one of {PROFILES}")
    rng = np.random.default_rng(seed)
    n = cm.num_qubits
    und = cm.undirected_edges()

    base_1q, base_2q, base_ro = 3e-4, 1e-2, 2e-2
    t1_us, t2_us = 100.0, 80.0
    if profile == "gradient":
        dist = _bfs_distance(cm, 0)
        far = max((d for d in dist if d is not None), default=0) or 1
        level = [1.0 + 4.0 * ((d if d is not None else far) / far) for d in dist]
        jitter = rng.uniform(0.97, 1.03, size=n)
        q_factor = [level[q] * jitter[q] for q in range(n)]
    else:
        q_factor = [1.0] * n

    def clip(x):
        return min(1.0, _round(x * scale))

    qubits = []
    for q in range(n):
        f = q_factor[q]
        qubits.append(QubitProperties(
            t1=float(Decimal(repr(_round(t1_us / f))).scaleb(-6)),
            t2=float(Decimal(repr(_round(t2_us / f))).scaleb(-6)),
            readout_error=clip(base_ro * f),
        ))
    sx_dur = float(Decimal(repr(_SX_NS)).scaleb(-9))
    cx_dur = float(Decimal(repr(_CX_NS)).scaleb(-9))
    meas_dur = float(Decimal(repr(_MEAS_NS)).scaleb(-9))
    gates: list[GateProperties] = []
    for q in range(n):
        e1 = clip(base_1q * q_factor[q])
        gates.append(GateProperties("rz", (q,), 0.0, sx_dur))
        gates.append(GateProperties("sx", (q,), e1, sx_dur))
        gates.append(GateProperties("x", (q,), e1, sx_dur))
        gates.append(GateProperties("reset", (q,), clip(base_ro * q_factor[q]), meas_dur))
        gates.append(GateProperties("measure", (q,), qubits[q].readout_error, meas_dur))
    hot = None
    if profile == "hotspot" and und:
        hot = und[int(rng.integers(len(und)))]
    for a, b in sorted(cm.edges):
        if profile == "gradient":
            e2 = base_2q * (q_factor[a] + q_factor[b]) / 2 * (1.0 + 0.02 * (a > b))
        else:
            e2 = base_2q
        if hot is not None and (min(a, b), max(a, b)) == hot:
            e2 = base_2q * 10
        gates.append(GateProperties("cx", (a, b), clip(e2), cx_dur))
    return CalibrationSnapshot(
        device_name=name or f"synthetic-{profile}-{n}q",
        timestamp="1970-01-01T00:00:00Z",
        qubits=tuple(qubits),
        gates=tuple(gates),
    )


def _bfs_distance(cm: CouplingMap, source: int) -> list[int | None]:
    dist: list[int | None] = [None] * cm.num_qubits
    if cm.num_qubits == 0:
        return dist
    dist[source] = 0
    frontier = [source]
    while frontier:
        nxt = []
        for u in frontier:
            for w in sorted(cm.neighbors[u]):
                if dist[w] is None:
                    dist[w] = dist[u] + 1
                    nxt.append(w)
        frontier = nxt
    return dist
