"""Scenario files: UTF-8 JSON with exact rational strings.

    {"kind": "epr-bell",
     "properties": ["A1", "A2", "B1", "B2"],
     "tables": [{"context": "11", "left": "A1", "right": "B1",
                 "probs": {"++": "17/40", "+-": "3/40", "-+": "3/40", "--": "17/40"}},
                ...]}

Unknown top-level keys are ignored, so an ``analyze --json`` report can be
read back as a scenario.
"""

from __future__ import annotations

import json
from pathlib import Path

from .rational import format_rational, parse_rational
from .scenario import OUTCOMES, Kind, ObservedTable, Scenario, ScenarioError


class ScenarioFormatError(ScenarioError):
    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)


def _line_of(text: str, needle: str) -> int | None:
    pos = text.find(needle)
    if pos < 0:
        return None
    return text.count("\n", 0, pos) + 1


def parse_scenario(text: str) -> Scenario:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioFormatError(exc.msg, line=exc.lineno) from None
    if not isinstance(data, dict):
        raise ScenarioFormatError("top level must be an object")

    def need(obj, key, kind, path):
        if key not in obj:
            raise ScenarioFormatError("missing", field=path)
        value = obj[key]
        if not isinstance(value, kind):
            raise ScenarioFormatError(f"expected {kind.__name__}", field=path,
                                      line=_line_of(text, f'"{key}"'))
        return value

    kind_text = need(data, "kind", str, "kind")
    try:
        kind = Kind.parse(kind_text)
    except ScenarioError as exc:
        raise ScenarioFormatError(str(exc), field="kind", line=_line_of(text, '"kind"')) from None
    properties = need(data, "properties", list, "properties")
    if not all(isinstance(p, str) for p in properties):
        raise ScenarioFormatError("property names must be strings", field="properties")
    tables = []
    for k, entry in enumerate(need(data, "tables", list, "tables")):
        path = f"tables[{k}]"
        if not isinstance(entry, dict):
            raise ScenarioFormatError("expected object", field=path)
        context = need(entry, "context", str, f"{path}.context")
        line = _line_of(text, f'"{context}"')
        left = need(entry, "left", str, f"{path}.left")
        right = need(entry, "right", str, f"{path}.right")
        probs_obj = need(entry, "probs", dict, f"{path}.probs")
        probs = []
        for label in OUTCOMES:
            if label not in probs_obj:
                raise ScenarioFormatError("missing", field=f"{path}.probs.{label}", line=line)
            raw = probs_obj[label]
            if not isinstance(raw, str):
                raise ScenarioFormatError("probabilities must be exact strings like \"3/8\"",
                                          field=f"{path}.probs.{label}", line=line)
            try:
                probs.append(parse_rational(raw))
            except ValueError as exc:
                raise ScenarioFormatError(str(exc), field=f"{path}.probs.{label}", line=line) from None
        try:
            tables.append(ObservedTable.of(context, left, right, probs))
        except ScenarioError as exc:
            raise ScenarioFormatError(str(exc), field=path, line=line) from None
    try:
        return Scenario(kind, tuple(properties), tuple(tables))
    except ScenarioError as exc:
        raise ScenarioFormatError(str(exc)) from None


def load_scenario(path) -> Scenario:
    return parse_scenario(Path(path).read_text(encoding="utf-8"))


def scenario_to_json(s: Scenario) -> dict:
    return {
        "kind": s.kind.value,
        "properties": list(s.properties),
        "tables": [
            {
                "context": t.context,
                "left": t.left.property,
                "right": t.right.property,
                "probs": {label: format_rational(p) for label, p in zip(OUTCOMES, t.probs)},
            }
            for t in s.tables
        ],
    }


def dump_scenario(s: Scenario) -> str:
    return json.dumps(scenario_to_json(s), indent=2) + "\n"
