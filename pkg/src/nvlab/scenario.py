"""Scenario files: TOML documents holding a datum, an orbit model and expectations.

Layout::

    name = "doubling_torus"
    description = "..."
    h_rank = 0

    [datum]                      # or [mapping_torus] with h, bdry1, labels
    rank_u = [1, 1]
    rank_v = [0, 0]
    labels_u = [["a"], ["b"]]
    [datum.h]
    0 = [["1"]]
    1 = [["2"]]

    [orbit_model]
    cells = { 0 = ["v"], 1 = ["e"] }
    pieces = [{ source = "e", target = "e", degree = 2, label = [] }]

    [[expected]]
    kind = "zeta"                # zeta | torsion | incidence | betti
    value = "(1 - 2*t)/(1 - t)"
    provenance = "how the value was obtained"

Matrices are lists of rows; entries are ring-element strings (or integers).
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Union

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .group_algebra import GroupRingElement, ParseError, parse_element, parse_value, render_element
from .linalg import RingMatrix
from .novikov import CyclicCobordismDatum, InvalidDatum, mapping_torus_datum
from .zeta import GraphSelfMap, Piece, ZetaError

EXPECTED_KINDS = ("zeta", "torsion", "incidence", "betti")


class ScenarioError(ValueError):
    """Schema violation; ``field`` is a dotted path into the document."""

    def __init__(self, message: str, field: str = "", source: str = ""):
        where = ": ".join(x for x in (source, field) if x)
        super().__init__(f"{where}: {message}" if where else message)
        self.field = field
        self.source = source


@dataclass
class Expected:
    kind: str
    value: Any
    text: str
    provenance: str = ""
    pair: Optional[tuple] = None


@dataclass
class Scenario:
    name: str
    h_rank: int
    datum: Optional[CyclicCobordismDatum] = None
    orbit_model: Optional[GraphSelfMap] = None
    expected: List[Expected] = field(default_factory=list)
    description: str = ""
    path: Optional[str] = None


def _matrix(raw, field: str, h_rank: int, shape=None) -> RingMatrix:
    zero = GroupRingElement(h_rank=h_rank)
    if not isinstance(raw, list) or any(not isinstance(r, list) for r in raw):
        raise ScenarioError("expected a list of rows", field)
    rows = []
    for i, r in enumerate(raw):
        row = []
        for j, x in enumerate(r):
            if isinstance(x, bool) or not isinstance(x, (int, str)):
                raise ScenarioError(f"entry must be a string or integer, got {type(x).__name__}", f"{field}[{i}][{j}]")
            try:
                row.append(parse_element(str(x), h_rank))
            except ParseError as exc:
                raise ScenarioError(str(exc), f"{field}[{i}][{j}]") from None
        rows.append(row)
    if shape is None:
        if not rows:
            raise ScenarioError("empty matrix needs a known shape", field)
        shape = (len(rows), len(rows[0]))
    if shape[0] == 0 or shape[1] == 0:
        if rows and any(rows):
            raise ScenarioError(f"expected an empty {shape[0]}x{shape[1]} matrix", field)
        return RingMatrix.zeros(*shape, zero)
    if len(rows) != shape[0] or any(len(r) != shape[1] for r in rows):
        got = f"{len(rows)}x{len(rows[0]) if rows else 0}"
        raise ScenarioError(f"expected a {shape[0]}x{shape[1]} matrix, got {got}", field)
    return RingMatrix(rows, zero, shape)


def _degree_table(raw, field: str) -> Dict[int, Any]:
    if raw is None:
        return {}
    if not isinstance(raw, dict):
        raise ScenarioError("expected a table keyed by degree", field)
    out = {}
    for k, v in raw.items():
        try:
            out[int(k)] = v
        except ValueError:
            raise ScenarioError(f"degree key {k!r} is not an integer", field) from None
    return out


def _int_list(raw, field: str) -> List[int]:
    if not isinstance(raw, list) or any(isinstance(x, bool) or not isinstance(x, int) or x < 0 for x in raw):
        raise ScenarioError("expected a list of nonnegative integers", field)
    return list(raw)


_SHAPES = {
    "bdry1": lambda ru, rv, k: (ru(k - 1), ru(k)),
    "bdryv": lambda ru, rv, k: (rv(k - 1), rv(k)),
    "P": lambda ru, rv, k: (ru(k - 1), rv(k)),
    "N": lambda ru, rv, k: (rv(k), ru(k)),
    "h": lambda ru, rv, k: (ru(k), ru(k)),
}


def _parse_datum(raw: Mapping, h_rank: int, check: bool) -> CyclicCobordismDatum:
    known = {"rank_u", "rank_v", "labels_u", "labels_v", *_SHAPES}
    for key in raw:
        if key not in known:
            raise ScenarioError(f"unknown key {key!r}", f"datum.{key}")
    for key in ("rank_u", "rank_v"):
        if key not in raw:
            raise ScenarioError("missing", f"datum.{key}")
    rank_u = _int_list(raw["rank_u"], "datum.rank_u")
    rank_v = _int_list(raw["rank_v"], "datum.rank_v")
    if len(rank_u) != len(rank_v):
        raise ScenarioError("rank_u and rank_v must list the same degrees", "datum.rank_v")
    ru = lambda k: rank_u[k] if 0 <= k < len(rank_u) else 0
    rv = lambda k: rank_v[k] if 0 <= k < len(rank_v) else 0
    mats = {}
    for name, shape in _SHAPES.items():
        table = _degree_table(raw.get(name), f"datum.{name}")
        mats[name] = {k: _matrix(v, f"datum.{name}.{k}", h_rank, shape(ru, rv, k)) for k, v in table.items()}
    try:
        return CyclicCobordismDatum(h_rank, rank_u, rank_v, labels_u=raw.get("labels_u"),
                                    labels_v=raw.get("labels_v"), check=check, **mats)
    except InvalidDatum as exc:
        if exc.block is None:
            raise ScenarioError(str(exc), "datum") from None
        raise


def _parse_mapping_torus(raw: Mapping, h_rank: int) -> CyclicCobordismDatum:
    for key in raw:
        if key not in ("h", "bdry1", "labels"):
            raise ScenarioError(f"unknown key {key!r}", f"mapping_torus.{key}")
    htab = _degree_table(raw.get("h"), "mapping_torus.h")
    if not htab:
        raise ScenarioError("missing", "mapping_torus.h")
    h = {k: _matrix(v, f"mapping_torus.h.{k}", h_rank) for k, v in htab.items()}
    ranks = {k: m.rows for k, m in h.items()}
    btab = _degree_table(raw.get("bdry1"), "mapping_torus.bdry1")
    bdry1 = {k: _matrix(v, f"mapping_torus.bdry1.{k}", h_rank, (ranks.get(k - 1, 0), ranks.get(k, 0)))
             for k, v in btab.items()}
    try:
        return mapping_torus_datum(h, bdry1, h_rank, labels_u=raw.get("labels"))
    except InvalidDatum as exc:
        raise ScenarioError(str(exc), "mapping_torus") from None


def _parse_orbit_model(raw: Mapping, h_rank: int) -> GraphSelfMap:
    cells = _degree_table(raw.get("cells"), "orbit_model.cells")
    pieces = []
    for i, p in enumerate(raw.get("pieces", [])):
        f = f"orbit_model.pieces[{i}]"
        if not isinstance(p, dict):
            raise ScenarioError("expected a table", f)
        for key in ("source", "target", "degree"):
            if key not in p:
                raise ScenarioError(f"missing {key!r}", f)
        label = p.get("label", [])
        if not isinstance(label, list) or any(not isinstance(x, int) for x in label):
            raise ScenarioError("label must be a list of integers", f"{f}.label")
        pieces.append(Piece(str(p["source"]), str(p["target"]), p["degree"], tuple(label)))
    try:
        return GraphSelfMap(h_rank, cells, pieces)
    except ZetaError as exc:
        raise ScenarioError(str(exc), "orbit_model") from None


def _parse_expected(raw, h_rank: int) -> List[Expected]:
    out = []
    for i, e in enumerate(raw or []):
        f = f"expected[{i}]"
        if not isinstance(e, dict) or "kind" not in e or "value" not in e:
            raise ScenarioError("needs 'kind' and 'value'", f)
        kind = e["kind"]
        if kind not in EXPECTED_KINDS:
            raise ScenarioError(f"kind must be one of {EXPECTED_KINDS}", f"{f}.kind")
        pair = None
        if kind == "betti":
            value = _int_list(e["value"], f"{f}.value")
            text = str(value)
        else:
            text = str(e["value"])
            try:
                value = parse_value(text, h_rank)
            except ParseError as exc:
                raise ScenarioError(str(exc), f"{f}.value") from None
        if kind == "incidence":
            pair = e.get("pair")
            if not (isinstance(pair, list) and len(pair) == 2):
                raise ScenarioError("incidence needs pair = [r, s]", f"{f}.pair")
            pair = tuple(map(str, pair))
        out.append(Expected(kind, value, text, str(e.get("provenance", "")), pair))
    return out


def load_scenario(doc: Mapping, source: str = "", check: bool = True) -> Scenario:
    try:
        for key in doc:
            if key not in ("name", "description", "h_rank", "datum", "mapping_torus", "orbit_model", "expected"):
                raise ScenarioError(f"unknown top-level key {key!r}", key)
        h_rank = doc.get("h_rank", 0)
        if isinstance(h_rank, bool) or not isinstance(h_rank, int) or h_rank < 0:
            raise ScenarioError("must be a nonnegative integer", "h_rank")
        if "datum" in doc and "mapping_torus" in doc:
            raise ScenarioError("give either [datum] or [mapping_torus], not both", "mapping_torus")
        datum = None
        if "datum" in doc:
            datum = _parse_datum(doc["datum"], h_rank, check)
        elif "mapping_torus" in doc:
            datum = _parse_mapping_torus(doc["mapping_torus"], h_rank)
        model = _parse_orbit_model(doc["orbit_model"], h_rank) if "orbit_model" in doc else None
        if datum is None and model is None:
            raise ScenarioError("needs a datum, a mapping_torus or an orbit_model")
        name = str(doc.get("name") or Path(source).stem or "scenario")
        return Scenario(name, h_rank, datum, model, _parse_expected(doc.get("expected"), h_rank),
                        str(doc.get("description", "")), source or None)
    except ScenarioError as exc:
        if not exc.source and source:
            raise ScenarioError(str(exc), "", source) from None
        raise


BUNDLED_PACKAGE = "nvlab.scenarios"


def bundled_names() -> List[str]:
    files = resources.files(BUNDLED_PACKAGE).iterdir()
    return sorted(f.name[:-5] for f in files if f.name.endswith(".toml"))


def resolve(target: Union[str, Path]) -> tuple:
    """``(text, source)`` for a path or the name of a bundled scenario."""
    p = Path(target)
    if p.is_file():
        return p.read_text(encoding="utf-8"), str(p)
    name = p.name[:-5] if p.name.endswith(".toml") else p.name
    res = resources.files(BUNDLED_PACKAGE) / f"{name}.toml"
    if res.is_file():
        return res.read_text(encoding="utf-8"), f"{name}.toml"
    raise FileNotFoundError(f"no scenario file or bundled scenario named {str(target)!r}")


def parse_scenario(target: Union[str, Path], check: bool = True) -> Scenario:
    """Read and validate a scenario file (or bundled scenario by name).

    Raises :class:`ScenarioError` for schema problems and
    :class:`~nvlab.novikov.InvalidDatum` when ``D o D != 0``.
    """
    text, source = resolve(target)
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioError(str(exc), "", source) from None
    return load_scenario(doc, source, check)


def _render_matrix(M: RingMatrix) -> str:
    rows = ", ".join("[" + ", ".join(f'"{render_element(x)}"' for x in r) + "]" for r in M.entries)
    return f"[{rows}]"


def dump_datum(d: CyclicCobordismDatum, name: str = "scenario", description: str = "") -> str:
    """Scenario text for a datum; ``parse_scenario`` reads it back."""
    lines = [f'name = "{name}"']
    if description:
        lines.append(f'description = "{description}"')
    lines += [f"h_rank = {d.h_rank}", "", "[datum]",
              f"rank_u = {list(d.rank_u)}", f"rank_v = {list(d.rank_v)}",
              "labels_u = " + str([list(x) for x in d.labels_u]).replace("'", '"'),
              "labels_v = " + str([list(x) for x in d.labels_v]).replace("'", '"')]
    for nm in ("bdry1", "bdryv", "P", "N", "h"):
        mats = {k: m for k, m in getattr(d, nm).items() if m.rows and m.cols and not m.is_zero()}
        if not mats:
            continue
        lines += ["", f"[datum.{nm}]"]
        lines += [f"{k} = {_render_matrix(m)}" for k, m in sorted(mats.items())]
    return "\n".join(lines) + "\n"
