"""Scenario files: map, agents, formula and disturbance schedule."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import jsonschema

from ..errors import SchemaError
from ..ltl.parser import LTLSyntaxError, parse
from ..models.product import UpdateInfo
from ..models.ts import MapEdge, OperatingStateMachine, OpTransition, TopoMap

_EDGE = {
    "type": "object",
    "required": ["from", "to"],
    "properties": {
        "from": {"type": "string"},
        "to": {"type": "string"},
        "cost": {"type": "number", "minimum": 0},
        "duration": {"type": "integer", "minimum": 0},
        "capability": {"type": ["string", "null"]},
    },
    "additionalProperties": False,
}

_OPSM = {
    "type": "object",
    "required": ["states", "initial"],
    "properties": {
        "states": {"type": "array", "items": {"type": "string"}, "minItems": 1},
        "initial": {"type": "string"},
        "transitions": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["from", "action", "to"],
                "properties": {
                    "from": {"type": "string"},
                    "action": {"type": "string"},
                    "to": {"type": "string"},
                    "cost": {"type": "number", "minimum": 0},
                    "duration": {"type": "integer", "minimum": 0},
                },
                "additionalProperties": False,
            },
        },
        "bindings": {"type": "object", "additionalProperties": {"type": "array", "items": {"type": "string"}}},
    },
    "additionalProperties": False,
}

_TRIGGER = {
    "type": "object",
    "properties": {
        "tick": {"type": "integer", "minimum": 0},
        "enter": {"type": "string"},
    },
    "minProperties": 1,
    "maxProperties": 1,
    "additionalProperties": False,
}

_DISTURBANCE = {
    "type": "object",
    "required": ["trigger", "kind"],
    "properties": {
        "trigger": _TRIGGER,
        "kind": {"enum": ["fall", "critical_failure", "state_jump", "env_change"]},
        "agent": {"type": "string"},
        "to": {
            "type": "object",
            "properties": {"location": {"type": "string"}, "opstate": {"type": "string"}},
            "additionalProperties": False,
        },
        "update": {
            "type": "object",
            "properties": {
                "delete_edges": {"type": "array", "items": {"type": "array", "items": {"type": "string"}, "minItems": 2, "maxItems": 2}},
                "add_edges": {"type": "array", "items": {"type": "array", "items": {"type": "string"}, "minItems": 2, "maxItems": 2}},
                "relabel": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["location", "label"],
                        "properties": {
                            "location": {"type": "string"},
                            "opstate": {"type": "string"},
                            "label": {"type": "array", "items": {"type": "string"}},
                        },
                        "additionalProperties": False,
                    },
                },
                "kinds": {"type": "array", "items": {"enum": ["legged", "wheeled"]}},
            },
            "additionalProperties": False,
        },
        "delivery": {"enum": ["immediate", "on_encounter"]},
    },
    "additionalProperties": False,
}

SCHEMA = {
    "type": "object",
    "required": ["formula", "map", "agents"],
    "properties": {
        "name": {"type": "string"},
        "propositions": {"type": "array", "items": {"type": "string"}},
        "formula": {"type": "string", "minLength": 1},
        "map": {
            "type": "object",
            "required": ["locations", "edges"],
            "properties": {
                "locations": {"type": "array", "items": {"type": "string"}, "minItems": 1},
                "edges": {"type": "array", "items": _EDGE},
            },
            "additionalProperties": False,
        },
        "opsms": {"type": "object", "additionalProperties": _OPSM},
        "agents": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["name", "kind", "start", "opsm"],
                "properties": {
                    "name": {"type": "string"},
                    "kind": {"enum": ["legged", "wheeled"]},
                    "capabilities": {"type": "array", "items": {"type": "string"}},
                    "start": {"type": "string"},
                    "opsm": {"type": "string"},
                },
                "additionalProperties": False,
            },
        },
        "disturbances": {"type": "array", "items": _DISTURBANCE},
        "seed": {"type": "integer"},
        "tick_rate": {"type": "integer", "minimum": 1},
        "recovery_seconds": {"type": "number", "minimum": 0},
        "tick_budget": {"type": "integer", "minimum": 1},
    },
    "additionalProperties": False,
}


@dataclass
class AgentSpec:
    name: str
    kind: str
    start: str
    opsm: str
    capabilities: list[str] = field(default_factory=list)


@dataclass
class DisturbanceEvent:
    """One scheduled disturbance.

    ``tick`` or ``enter`` gives the trigger; ``enter`` fires at the start of
    the tick after ``agent`` arrives at that location (first arrival only).
    For environment changes ``update`` is given in map terms and translated
    per agent; ``infos`` may instead carry ready-made per-agent updates.
    """

    kind: str
    agent: str | None = None
    tick: int | None = None
    enter: str | None = None
    to: dict[str, str] = field(default_factory=dict)
    update: dict[str, Any] = field(default_factory=dict)
    delivery: str = "on_encounter"
    infos: dict[str, UpdateInfo] | None = None

    def to_json(self) -> dict:
        out: dict[str, Any] = {"kind": self.kind}
        if self.agent is not None:
            out["agent"] = self.agent
        out["trigger"] = {"tick": self.tick} if self.tick is not None else {"enter": self.enter}
        if self.to:
            out["to"] = dict(self.to)
        if self.update:
            out["update"] = self.update
        if self.kind == "env_change":
            out["delivery"] = self.delivery
        if self.infos is not None:
            out["infos"] = {a: i.to_json() for a, i in sorted(self.infos.items())}
        return out


@dataclass
class Scenario:
    formula: str
    topo: TopoMap
    opsms: dict[str, OperatingStateMachine]
    agents: list[AgentSpec]
    disturbances: list[DisturbanceEvent] = field(default_factory=list)
    propositions: list[str] = field(default_factory=list)
    seed: int = 0
    tick_rate: int = 10
    recovery_seconds: float = 3.0
    tick_budget: int = 1_000_000
    name: str = "scenario"

    def agent_index(self, name: str) -> int:
        for i, a in enumerate(self.agents):
            if a.name == name:
                return i
        raise KeyError(name)


DEFAULT_OPSM = OperatingStateMachine("idle", ["idle"], "idle")


def _parse_opsm(name: str, d: dict) -> OperatingStateMachine:
    return OperatingStateMachine(
        name,
        list(d["states"]),
        d["initial"],
        [
            OpTransition(t["from"], t["action"], t["to"], float(t.get("cost", 1.0)), int(t.get("duration", 1)))
            for t in d.get("transitions", [])
        ],
        {k: list(v) for k, v in d.get("bindings", {}).items()},
    )


def _fail(path: str, msg: str):
    raise SchemaError(path, msg)


def scenario_from_dict(data: Any) -> Scenario:
    try:
        jsonschema.validate(data, SCHEMA)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        if exc.validator == "required":
            missing = [k for k in exc.validator_value if k not in exc.instance]
            if missing:
                path = f"{path}/{missing[0]}" if path != "<root>" else missing[0]
        raise SchemaError(path, exc.message) from None

    try:
        parse(data["formula"])
    except LTLSyntaxError as exc:
        _fail("formula", str(exc))

    locs = data["map"]["locations"]
    if len(set(locs)) != len(locs):
        _fail("map/locations", "duplicate location")
    loc_set = set(locs)
    edges = []
    for i, e in enumerate(data["map"]["edges"]):
        for end in ("from", "to"):
            if e[end] not in loc_set:
                _fail(f"map/edges/{i}/{end}", f"unknown location {e[end]!r}")
        edges.append(MapEdge(e["from"], e["to"], float(e.get("cost", 1.0)), int(e.get("duration", 1)), e.get("capability")))
    topo = TopoMap(list(locs), edges)

    opsms = {"idle": DEFAULT_OPSM}
    for name, d in data.get("opsms", {}).items():
        opsm = _parse_opsm(name, d)
        if opsm.initial not in opsm.states:
            _fail(f"opsms/{name}/initial", f"unknown operating state {opsm.initial!r}")
        for j, t in enumerate(opsm.transitions):
            if t.src not in opsm.states or t.dst not in opsm.states:
                _fail(f"opsms/{name}/transitions/{j}", "unknown operating state")
        for action, places in opsm.bindings.items():
            for p in places:
                if p not in loc_set:
                    _fail(f"opsms/{name}/bindings/{action}", f"unknown location {p!r}")
        opsms[name] = opsm

    agents = []
    names = set()
    for i, a in enumerate(data["agents"]):
        if a["name"] in names:
            _fail(f"agents/{i}/name", "duplicate agent name")
        names.add(a["name"])
        if a["start"] not in loc_set:
            _fail(f"agents/{i}/start", f"unknown location {a['start']!r}")
        if a["opsm"] not in opsms:
            _fail(f"agents/{i}/opsm", f"unknown operating-state machine {a['opsm']!r}")
        agents.append(AgentSpec(a["name"], a["kind"], a["start"], a["opsm"], list(a.get("capabilities", []))))

    events = []
    for i, d in enumerate(data.get("disturbances", [])):
        trig = d["trigger"]
        agent = d.get("agent")
        if d["kind"] != "env_change" and agent is None:
            _fail(f"disturbances/{i}/agent", "required for this kind")
        if agent is not None and agent not in names:
            _fail(f"disturbances/{i}/agent", f"unknown agent {agent!r}")
        if "enter" in trig:
            if trig["enter"] not in loc_set:
                _fail(f"disturbances/{i}/trigger/enter", f"unknown location {trig['enter']!r}")
            if agent is None:
                _fail(f"disturbances/{i}/agent", "location triggers need an agent")
        if d["kind"] == "state_jump" and not d.get("to"):
            _fail(f"disturbances/{i}/to", "state jumps need a target")
        if d["kind"] == "env_change" and not d.get("update"):
            _fail(f"disturbances/{i}/update", "environment changes need an update")
        for key in ("delete_edges", "add_edges"):
            for j, pair in enumerate(d.get("update", {}).get(key, [])):
                for x in pair:
                    if x not in loc_set:
                        _fail(f"disturbances/{i}/update/{key}/{j}", f"unknown location {x!r}")
        for j, rl in enumerate(d.get("update", {}).get("relabel", [])):
            if rl["location"] not in loc_set:
                _fail(f"disturbances/{i}/update/relabel/{j}", f"unknown location {rl['location']!r}")
        events.append(
            DisturbanceEvent(
                d["kind"],
                agent,
                trig.get("tick"),
                trig.get("enter"),
                dict(d.get("to", {})),
                dict(d.get("update", {})),
                d.get("delivery", "on_encounter"),
            )
        )
    return Scenario(
        formula=data["formula"],
        topo=topo,
        opsms=opsms,
        agents=agents,
        disturbances=events,
        propositions=list(data.get("propositions", [])),
        seed=int(data.get("seed", 0)),
        tick_rate=int(data.get("tick_rate", 10)),
        recovery_seconds=float(data.get("recovery_seconds", 3.0)),
        tick_budget=int(data.get("tick_budget", 1_000_000)),
        name=data.get("name", "scenario"),
    )


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError("<root>", f"invalid JSON: {exc}") from None
    sc = scenario_from_dict(data)
    if sc.name == "scenario":
        sc.name = path.stem
    return sc


def bundled(name: str) -> Path:
    """Path of a scenario file shipped with the package."""
    from importlib.resources import files

    return Path(str(files("stap") / "data" / f"{name}.json"))
