"""Command line front end and verification reports.

``nvlab <command> <scenario> [--order N] [--format text|json] [--all]``

Commands: validate, novikov, series, zeta, torsion, verify.  The exit
status is 0 exactly when every check in every report passes.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

from .chain import validate as validate_complex
from .group_algebra import K1Class, LocalizedElement, NovikovSeries, expand, k1_eq
from .linalg import RingMatrix, det
from .novikov import (
    assemble_E,
    change_of_base,
    datum_violations,
    inclusion_cone_torsion,
    incidence_series,
    novikov_complex,
    novikov_differential,
    square_block,
    torsion_of_inclusion,
)
from .scenario import Scenario, ScenarioError, bundled_names, parse_scenario
from .torsion import _class_of
from .zeta import (
    Unsupported,
    eta_from_orbits,
    eta_from_traces,
    nu_from_gfixed,
    orbit_census,
    zeta_from_eta,
    zeta_rational,
)

COMMANDS = ("validate", "novikov", "series", "zeta", "torsion", "verify")
DEFAULT_ORDER = 12

# formula strings shown next to each check
ANCHORS = {
    "datum": "D_k o D_{k+1} = 0 for the assembled block matrix",
    "delta": "delta = bdryv - N (1 - t h)^-1 P,  delta o delta = 0",
    "blocks": "T^-1 D T has zero (1,2), (2,1), (3,1), (3,2) blocks",
    "T": "[det T_k] = 1 (block unitriangular base change)",
    "euler": "chi(Novikov complex) = chi(E)",
    "series": "n(r,s) = bdryv(r,s) - sum_j <N (t h)^j P r, s>",
    "zeta": "zeta = prod_s det(1 - t h_s)^((-1)^(s+1)) = exp(eta)",
    "eta": "eta = sum_s (-1)^s sum_k Tr((t h_s)^k)/k = sum eps/m [gamma]",
    "integral": "zeta of an orbit census has integer coefficients",
    "torsion": "tau(inclusion) = prod_k [det(1 - t h_k)]^((-1)^(k+1))",
    "pivots": "torsion does not depend on the choice of minors",
    "main": "tau(inclusion) = [zeta]",
    "expected": "value recorded in the scenario file",
}


@dataclass
class Check:
    name: str
    status: str
    left: str
    right: str
    anchor: str

    @property
    def ok(self) -> bool:
        return self.status == "pass"


@dataclass
class VerificationReport:
    scenario: str
    command: str
    order: int
    checks: List[Check] = field(default_factory=list)
    info: List[List[str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def add(self, name: str, ok: bool, left, right, anchor: str) -> None:
        self.checks.append(Check(name, "pass" if ok else "fail", str(left), str(right), ANCHORS.get(anchor, anchor)))

    def note(self, key: str, value) -> None:
        self.info.append([key, str(value)])

    def to_dict(self) -> dict:
        return {"scenario": self.scenario, "command": self.command, "order": self.order,
                "ok": self.ok, "checks": [asdict(c) for c in self.checks], "info": self.info}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "VerificationReport":
        rep = cls(d["scenario"], d["command"], int(d["order"]))
        rep.checks = [Check(**c) for c in d["checks"]]
        rep.info = [list(x) for x in d["info"]]
        return rep

    @classmethod
    def from_json(cls, text: str) -> "VerificationReport":
        return cls.from_dict(json.loads(text))

    def to_text(self) -> str:
        lines = [f"== {self.command} {self.scenario} (order {self.order})"]
        for key, value in self.info:
            lines.append(f"   {key}: {value}")
        for c in self.checks:
            tag = "PASS" if c.ok else "FAIL"
            lines.append(f"{tag}  {c.name}")
            lines.append(f"      left:  {c.left}")
            lines.append(f"      right: {c.right}")
            lines.append(f"      ({c.anchor})")
        passed = sum(c.ok for c in self.checks)
        lines.append(f"result: {'PASS' if self.ok else 'FAIL'} ({passed}/{len(self.checks)} checks)")
        return "\n".join(lines)


def _render_matrix(M: RingMatrix) -> str:
    return "[" + "; ".join(", ".join(str(x) for x in r) for r in M.entries) + "]"


def _datum_checks(sc: Scenario, rep: VerificationReport) -> bool:
    d = sc.datum
    if d is None:
        return True
    bad = datum_violations(d)
    for k, (i, j) in bad:
        rep.add(f"datum: D_{k} o D_{k + 1} block (row{i},col{j}) vanishes", False,
                _render_matrix(square_block(d, k, i, j)), "0", "datum")
    if not bad:
        rep.add("datum: D o D = 0", True, "0", "0", "datum")
        E = assemble_E(d, check=False)
        rep.add("assembled E is a chain complex", validate_complex(E).ok, list(E.ranks), "valid", "datum")
    return not bad


def _cmd_validate(sc: Scenario, rep: VerificationReport, order: int) -> None:
    _datum_checks(sc, rep)
    m = sc.orbit_model
    if m is not None:
        rep.note("orbit model cells", {s: list(c) for s, c in sorted(m.cells.items())})
        cross = m.cross_degree_pieces()
        rep.add("orbit model pieces stay in one degree", not cross, len(cross), 0, "eta")
        if sc.datum is not None:
            hm = m.induced_matrices()
            same = all(hm.get(k, RingMatrix.zeros(0, 0, sc.datum.zero)) == sc.datum.h[k]
                       for k in range(sc.datum.top + 1)) and all(
                not hm[k].rows or k <= sc.datum.top for k in hm)
            rep.add("orbit model induces the datum's h", same,
                    {k: _render_matrix(x) for k, x in hm.items()},
                    {k: _render_matrix(x) for k, x in sc.datum.h.items()}, "zeta")


def _cmd_novikov(sc: Scenario, rep: VerificationReport, order: int) -> None:
    d = sc.datum
    if d is None:
        rep.note("novikov", "scenario has no datum")
        return
    nov = novikov_complex(d, check=False)
    for k, m in sorted(nov.delta.items()):
        rep.note(f"delta_{k}", _render_matrix(m))
    for (r, s), x in sorted(nov.incidence.items()):
        rep.note(f"n({r},{s})", x)
    rep.note("novikov betti", nov.betti())
    sq = validate_complex(nov.complex)
    rep.add("delta o delta = 0", sq.ok, sq.violations, [], "delta")
    cob = change_of_base(d)
    bad = cob.violations()
    rep.add("base change splits off the Novikov complex", not bad, bad, [], "blocks")
    nontrivial = [k for k, T in cob.T.items() if T.rows and not _class_of(det(T)).is_identity()]
    rep.add("base change has trivial determinant class", not nontrivial, nontrivial, [], "T")
    E = assemble_E(d, check=False)
    rep.add("Euler characteristic", nov.complex.euler_characteristic() == E.euler_characteristic(),
            nov.complex.euler_characteristic(), E.euler_characteristic(), "euler")
    other = novikov_differential(d, sign=+1)
    other_ok = all((other[k] @ other[k + 1]).is_zero() for k in range(1, d.top))
    rep.note("other sign bdryv + N R P squares to zero", other_ok)


def _cmd_series(sc: Scenario, rep: VerificationReport, order: int) -> None:
    d = sc.datum
    if d is None:
        rep.note("series", "scenario has no datum")
        return
    nov = novikov_complex(d, check=False)
    if not nov.incidence:
        rep.note("series", "no incidence pairs in adjacent degrees")
    for (r, s), x in sorted(nov.incidence.items()):
        it = incidence_series(d, r, s, order)
        ex = expand(x, order)
        rep.add(f"n({r},{s}) iteration = expansion", it == ex, it, ex, "series")


def _zeta_series(sc: Scenario, order: int) -> Dict[str, NovikovSeries]:
    paths = {}
    if sc.datum is not None:
        h = sc.datum.h
        paths["datum: determinant product"] = zeta_rational(h, sc.h_rank).expand(order).to_rational()
        paths["datum: traces"] = zeta_from_eta(eta_from_traces(h, order, sc.h_rank))
    m = sc.orbit_model
    if m is not None:
        hm = m.induced_matrices()
        paths["orbit model: determinant product"] = zeta_rational(hm, sc.h_rank).expand(order).to_rational()
        paths["orbit model: traces"] = zeta_from_eta(eta_from_traces(hm, order, sc.h_rank))
        try:
            paths["orbit model: closed orbits"] = zeta_from_eta(
                eta_from_orbits(orbit_census(m, order), order, sc.h_rank))
            paths["orbit model: G-fixed points"] = zeta_from_eta(nu_from_gfixed(m, order))
        except Unsupported:
            pass
    return paths


def _cmd_zeta(sc: Scenario, rep: VerificationReport, order: int) -> None:
    paths = _zeta_series(sc, order)
    names = list(paths)
    if not names:
        return
    if sc.datum is not None:
        rep.note("zeta (datum h)", zeta_rational(sc.datum.h, sc.h_rank))
    m = sc.orbit_model
    if m is not None:
        rep.note("zeta (orbit model)", zeta_rational(m.induced_matrices(), sc.h_rank))
        try:
            orbits = orbit_census(m, order)
        except Unsupported as exc:
            rep.note("orbit census", f"unsupported: {exc}")
        else:
            eo = eta_from_orbits(orbits, order, sc.h_rank)
            et = eta_from_traces(m.induced_matrices(), order, sc.h_rank)
            nu = nu_from_gfixed(m, order)
            rep.add("eta: closed orbits = traces", eo == et, eo, et, "eta")
            rep.add("eta: closed orbits = G-fixed points", eo == nu, eo, nu, "eta")
            z = paths["orbit model: closed orbits"]
            rep.add("zeta of the orbit census is integral", z.is_integral(), z, "integer coefficients", "integral")
    ref = paths[names[0]]
    for nm in names[1:]:
        rep.add(f"zeta: {nm} = {names[0]}", paths[nm] == ref, paths[nm], ref, "zeta")


def _cmd_torsion(sc: Scenario, rep: VerificationReport, order: int) -> None:
    d = sc.datum
    if d is None:
        rep.note("torsion", "scenario has no datum")
        return
    ti = torsion_of_inclusion(d)
    rep.note("path_a (quotient complex)", ti.path_a)
    rep.note("path_b (determinant product)", ti.path_b)
    rep.add("torsion: path_a = path_b", ti.agree(), ti.path_a, ti.path_b, "torsion")
    cone = inclusion_cone_torsion(d)
    rep.add("torsion: mapping cone of the inclusion = path_a", cone == ti.path_a, cone, ti.path_a, "torsion")
    rnd = torsion_of_inclusion(d, random.Random(order)).path_a
    rep.add("torsion: randomized pivots = path_a", rnd == ti.path_a, rnd, ti.path_a, "pivots")


def _expected_checks(sc: Scenario, rep: VerificationReport, order: int) -> None:
    for e in sc.expected:
        label = f"expected {e.kind}" + (f" n({e.pair[0]},{e.pair[1]})" if e.pair else "")
        if e.provenance:
            label += f" [{e.provenance}]"
        if e.kind == "zeta":
            h = sc.orbit_model.induced_matrices() if sc.orbit_model else sc.datum.h
            got = zeta_rational(h, sc.h_rank)
            want = e.value if isinstance(e.value, LocalizedElement) else LocalizedElement(e.value)
            rep.add(label, got == want, got, e.text, "expected")
        elif e.kind == "torsion":
            got = torsion_of_inclusion(sc.datum).path_a
            want = K1Class.of(e.value)
            rep.add(label, k1_eq(got, want), got, want, "expected")
        elif e.kind == "incidence":
            nov = novikov_complex(sc.datum, check=False)
            got = nov.incidence.get(e.pair)
            if got is None:
                rep.add(label, False, "no such pair", e.text, "expected")
            else:
                ok = bool(got) and k1_eq(K1Class.of(got), K1Class.of(e.value))
                rep.add(label + " up to +-g", ok, got, e.text, "expected")
        elif e.kind == "betti":
            got = novikov_complex(sc.datum, check=False).betti()
            rep.add(label, got == e.value, got, e.value, "expected")


def _cmd_verify(sc: Scenario, rep: VerificationReport, order: int) -> None:
    _cmd_validate(sc, rep, order)
    if sc.datum is not None:
        _cmd_novikov(sc, rep, order)
        _cmd_series(sc, rep, order)
        _cmd_torsion(sc, rep, order)
    _cmd_zeta(sc, rep, order)
    if sc.datum is not None and sc.orbit_model is not None:
        tau = torsion_of_inclusion(sc.datum).path_a
        z = K1Class.of(zeta_rational(sc.orbit_model.induced_matrices(), sc.h_rank))
        rep.add("torsion of the inclusion = class of zeta", k1_eq(tau, z), tau, z, "main")
    _expected_checks(sc, rep, order)


_HANDLERS: Dict[str, Callable] = {
    "validate": _cmd_validate,
    "novikov": _cmd_novikov,
    "series": _cmd_series,
    "zeta": _cmd_zeta,
    "torsion": _cmd_torsion,
    "verify": _cmd_verify,
}


def run(command: str, scenario, order: int = DEFAULT_ORDER) -> VerificationReport:
    """Run ``command`` on a :class:`Scenario`, a path or a bundled name."""
    if command not in _HANDLERS:
        raise ValueError(f"unknown command {command!r}; expected one of {COMMANDS}")
    sc = scenario if isinstance(scenario, Scenario) else parse_scenario(scenario, check=False)
    rep = VerificationReport(sc.name, command, order)
    if command != "validate" and sc.datum is not None and datum_violations(sc.datum):
        _datum_checks(sc, rep)
        return rep
    _HANDLERS[command](sc, rep, order)
    return rep


def _run_one(args) -> tuple:
    command, target, order = args
    try:
        return run(command, target, order).to_dict(), None
    except (ScenarioError, FileNotFoundError) as exc:
        return None, str(exc)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nvlab", description="Exact Novikov complex, zeta and torsion checks.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("scenario", nargs="?", help="scenario file or bundled scenario name")
    p.add_argument("--order", type=int, default=DEFAULT_ORDER, help="series truncation order (default 12)")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--all", action="store_true", help="run on every bundled scenario")
    p.add_argument("--jobs", type=int, default=1, help="parallel workers with --all")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.order < 1:
        print("nvlab: --order must be positive", file=sys.stderr)
        return 2
    if args.all:
        targets = bundled_names()
    elif args.scenario:
        targets = [args.scenario]
    else:
        print("nvlab: give a scenario or --all", file=sys.stderr)
        return 2
    jobs = [(args.command, t, args.order) for t in targets]
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(args.jobs) as ex:
            results = list(ex.map(_run_one, jobs))
    else:
        results = [_run_one(j) for j in jobs]
    errors = [err for _, err in results if err]
    reports = [VerificationReport.from_dict(r) for r, _ in results if r is not None]
    for err in errors:
        print(f"nvlab: {err}", file=sys.stderr)
    if args.format == "json":
        payload = [r.to_dict() for r in reports]
        print(json.dumps(payload if args.all else (payload[0] if payload else None), indent=2, sort_keys=True))
    else:
        print("\n\n".join(r.to_text() for r in reports))
    if errors:
        return 2
    return 0 if all(r.ok for r in reports) else 1


if __name__ == "__main__":
    sys.exit(main())
