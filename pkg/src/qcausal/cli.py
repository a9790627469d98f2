"""Command-line front end.

Usage::

    qcausal {epr,chsh,consistency,intervene,net} --config PATH [--out DIR]
            [--tol FLOAT] [--seed INT] [--format {text,csv,json}]

``--config`` takes a JSON file or the name of a bundled config
(``phi_plus``, ``product``, ``fig4``, ``noncommuting``, ``anticommuting``).

Exit codes: 0 all checks passed, 1 a physics check failed, 2 config error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import re
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from . import agents, bell, causal, microcausality
from . import linalg as la
from .errors import ConfigError, PreconditionError, QCausalError, ZeroProbabilityOutcome
from .quantum import DensityOperator, MeasurementModel, polarization_measurement
from .spacetime import Event, Region, WorldLine

BUNDLED = ("phi_plus", "product", "fig4", "noncommuting", "anticommuting")
DEFAULT_TOL = {"epr": 1e-12, "chsh": 1e-9, "consistency": 1e-10, "intervene": 1e-12, "net": 1e-12}

_ANGLE = re.compile(
    r"^\s*(?P<coef>[+-]?(\d+(\.\d*)?|\.\d+)?)\s*\*?\s*pi\s*(/\s*(?P<den>\d+(\.\d*)?))?\s*$"
)


# ---------------------------------------------------------------- parsing

def _req(d, key, path):
    if not isinstance(d, dict):
        raise ConfigError(path, "expected an object")
    if key not in d:
        raise ConfigError(f"{path}.{key}", "missing field")
    return d[key]


def parse_number(v, path) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(path, f"expected a number, got {v!r}")
    if not math.isfinite(v):
        raise ConfigError(path, "non-finite number")
    return float(v)


def parse_angle(v, path) -> float:
    """Radians as a number or a string such as ``"pi/4"`` or ``"3*pi/8"``."""
    if isinstance(v, str):
        m = _ANGLE.match(v)
        if m:
            coef = m.group("coef")
            c = 1.0 if coef in (None, "", "+") else -1.0 if coef == "-" else float(coef)
            den = float(m.group("den")) if m.group("den") else 1.0
            return c * math.pi / den
        try:
            return parse_number(float(v), path)
        except ValueError:
            raise ConfigError(path, f"malformed angle {v!r}") from None
    try:
        return parse_number(v, path)
    except ConfigError:
        raise ConfigError(path, f"malformed angle {v!r}") from None


def parse_grid(v, path) -> list[float]:
    """A list of angles, or ``{start, stop, step|num}`` (stop excluded)."""
    if isinstance(v, list):
        return [parse_angle(x, f"{path}[{i}]") for i, x in enumerate(v)]
    if isinstance(v, dict):
        start = parse_angle(_req(v, "start", path), f"{path}.start")
        stop = parse_angle(_req(v, "stop", path), f"{path}.stop")
        if "num" in v:
            num = v["num"]
            if not isinstance(num, int) or num < 1:
                raise ConfigError(f"{path}.num", "expected a positive integer")
        elif "step" in v:
            step = parse_angle(v["step"], f"{path}.step")
            if step <= 0:
                raise ConfigError(f"{path}.step", "step must be positive")
            num = int(round((stop - start) / step))
            if num < 1:
                raise ConfigError(path, "empty grid")
        else:
            raise ConfigError(path, "grid needs 'num' or 'step'")
        return [start + k * (stop - start) / num for k in range(num)]
    return [parse_angle(v, path)]


def parse_complex(v, path) -> complex:
    if isinstance(v, list):
        if len(v) != 2:
            raise ConfigError(path, "complex entries are [re, im] pairs")
        return complex(parse_number(v[0], f"{path}[0]"), parse_number(v[1], f"{path}[1]"))
    return complex(parse_number(v, path))


def parse_matrix(v, path) -> np.ndarray:
    if not isinstance(v, list) or not v or not all(isinstance(r, list) for r in v):
        raise ConfigError(path, "expected a list of rows")
    n = len(v[0])
    rows = []
    for i, r in enumerate(v):
        if len(r) != n:
            raise ConfigError(f"{path}[{i}]", "ragged matrix")
        rows.append([parse_complex(x, f"{path}[{i}][{j}]") for j, x in enumerate(r)])
    return np.array(rows, dtype=complex)


_PRODUCT = re.compile(r"^\s*product\((?P<args>[^)]*)\)\s*$")
_NET_PHI = re.compile(r"^\s*phi_plus_on\((?P<args>[^)]*)\)\s*$")


def parse_state(v, path, n_sites: int | None = None) -> DensityOperator:
    try:
        if isinstance(v, str):
            if v.strip() == "phi_plus":
                return bell.make_phi_plus()
            m = _PRODUCT.match(v)
            if m:
                args = [a for a in m.group("args").split(",")]
                if len(args) != 2:
                    raise ConfigError(path, "product(...) takes two angles")
                return bell.make_product(*(parse_angle(a.strip(), path) for a in args))
            m = _NET_PHI.match(v)
            if m and n_sites:
                i, j = (int(a) for a in m.group("args").split(","))
                return _net_phi_plus(n_sites, i, j)
            raise ConfigError(path, f"unknown state {v!r}")
        if isinstance(v, dict):
            if "ket" in v:
                psi = [parse_complex(x, f"{path}.ket[{k}]") for k, x in enumerate(v["ket"])]
                return DensityOperator.from_ket(psi, v.get("dims"))
            mat = parse_matrix(_req(v, "matrix", path), f"{path}.matrix")
            return DensityOperator(mat, v.get("dims"))
    except ConfigError:
        raise
    except (QCausalError, ValueError) as exc:
        raise ConfigError(path, str(exc)) from exc
    raise ConfigError(path, "expected a state name or an object")


def _net_phi_plus(n_sites: int, i: int, j: int) -> DensityOperator:
    """Phi+ on sites ``i, j`` of a qubit chain, every other site in ``|H>``."""
    if i == j or not (0 <= i < n_sites and 0 <= j < n_sites):
        raise ValueError("phi_plus_on needs two distinct valid sites")
    phi = bell.make_phi_plus().matrix
    h = la.ket_to_dm(la.KET_H)
    rest = [s for s in range(n_sites) if s not in (i, j)]
    mat = la.tensor_product(phi, *([h] * len(rest))) if rest else phi
    # reorder factors (i, j, rest...) -> (0 .. n-1)
    order = [i, j] + rest
    dims = [2] * n_sites
    t = mat.reshape(dims * 2)
    perm = [order.index(k) for k in range(n_sites)]
    t = t.transpose(perm + [p + n_sites for p in perm])
    return DensityOperator(t.reshape(2 ** n_sites, 2 ** n_sites), dims)


def parse_event_coords(v, path, spatial_dims) -> Event:
    t = parse_number(_req(v, "t", path), f"{path}.t")
    x = _req(v, "x", path)
    xs = [x] if not isinstance(x, list) else x
    if len(xs) != spatial_dims:
        raise ConfigError(f"{path}.x", f"expected {spatial_dims} spatial coordinates")
    return Event(t, tuple(parse_number(c, f"{path}.x") for c in xs))


def parse_point(v, path, spatial_dims) -> Event:
    if isinstance(v, dict):
        return parse_event_coords(v, path, spatial_dims)
    if not isinstance(v, list) or len(v) != spatial_dims + 1:
        raise ConfigError(path, f"a point is [t, x...] with {spatial_dims} spatial coordinates")
    return Event.from_coords([parse_number(c, f"{path}[{k}]") for k, c in enumerate(v)])


def parse_region(v, path, spatial_dims) -> Region:
    center = parse_point(_req(v, "center", path), f"{path}.center", spatial_dims)
    hw = _req(v, "half_widths", path)
    if not isinstance(hw, list):
        raise ConfigError(f"{path}.half_widths", "expected a list")
    try:
        return Region(center, tuple(parse_number(h, f"{path}.half_widths[{k}]") for k, h in enumerate(hw)))
    except (ValueError, QCausalError) as exc:
        raise ConfigError(path, str(exc)) from exc


def parse_event(v, path, spatial_dims, dims) -> agents.MeasurementEvent:
    label = _req(v, "label", path)
    loc = parse_event_coords(v, path, spatial_dims)
    kind = v.get("kind", "projective_polarization")
    target = v.get("target")
    if target is not None and not isinstance(target, (int, list)):
        raise ConfigError(f"{path}.target", "expected a subsystem index or list")
    try:
        if kind == "projective_polarization":
            theta = parse_angle(_req(v, "setting_angle", path), f"{path}.setting_angle")
            model = polarization_measurement(theta, target=target, label=label)
            setting = str(v["setting_angle"])
        elif kind == "operators":
            ops = _req(v, "operators", path)
            if not isinstance(ops, dict) or not ops:
                raise ConfigError(f"{path}.operators", "expected an object of outcome -> matrix")
            model = MeasurementModel(
                label,
                tuple((k, parse_matrix(m, f"{path}.operators.{k}")) for k, m in ops.items()),
                target,
            )
            setting = v.get("setting_label", "")
        else:
            raise ConfigError(f"{path}.kind", f"unknown event kind {kind!r}")
        model.full_operators(dims)
        outcome = _req(v, "outcome", path)
        return agents.MeasurementEvent(loc, model, outcome, setting, label)
    except ConfigError:
        raise
    except (ValueError, KeyError, QCausalError) as exc:
        raise ConfigError(path, str(exc)) from exc


def build_scenario(cfg) -> tuple[agents.Scenario, dict[str, list[Event]]]:
    state = parse_state(_req(_req(cfg, "preparation", "$"), "state", "$.preparation"), "$.preparation.state")
    geo = _req(cfg, "geometry", "$")
    sd = geo.get("spatial_dims", 1)
    if not isinstance(sd, int) or sd < 1:
        raise ConfigError("$.geometry.spatial_dims", "expected a positive integer")
    prep = None
    if "preparation_region" in geo:
        prep = parse_region(geo["preparation_region"], "$.geometry.preparation_region", sd)
    evs = [parse_event(e, f"$.geometry.events[{k}]", sd, state.dims)
           for k, e in enumerate(_req(geo, "events", "$.geometry"))]
    points: dict[str, list[Event]] = {}
    worldlines = {}
    for k, a in enumerate(geo.get("agents", [])):
        path = f"$.geometry.agents[{k}]"
        name = _req(a, "name", path)
        pts = [parse_point(p, f"{path}.points[{i}]", sd) for i, p in enumerate(_req(a, "points", path))]
        points[name] = pts
        try:
            worldlines[name] = WorldLine(tuple(pts), name)
        except (ValueError, QCausalError) as exc:
            raise ConfigError(path, str(exc)) from exc
    try:
        sc = agents.Scenario(state, tuple(evs), prep, worldlines)
    except (ValueError, QCausalError) as exc:
        raise ConfigError("$.geometry", str(exc)) from exc
    return sc, points


def load_config(spec: str) -> tuple[dict, bytes, str]:
    p = Path(spec)
    if p.is_file():
        raw = p.read_bytes()
    elif spec in BUNDLED or spec.removesuffix(".json") in BUNDLED:
        name = spec.removesuffix(".json") + ".json"
        raw = resources.files("qcausal").joinpath("configs", name).read_bytes()
    else:
        raise ConfigError("--config", f"no such file or bundled config: {spec!r}")
    try:
        cfg = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"line {exc.lineno} column {exc.colno}", exc.msg) from exc
    if not isinstance(cfg, dict):
        raise ConfigError("$", "top level must be an object")
    return cfg, raw, spec


# ---------------------------------------------------------------- reports

class Report:
    """Ordered report: checks, tables and provenance. Deterministic by construction."""

    def __init__(self, command: str, raw: bytes, seed: int, tol: float):
        self.command = command
        self.provenance = {
            "config_sha256": hashlib.sha256(raw).hexdigest(),
            "tool_version": __version__,
            "seed": seed,
        }
        self.tol = tol
        self.checks: list[dict] = []
        self.notes: list[str] = []
        self.tables: dict[str, tuple[list[str], list[list]]] = {}

    def check(self, name: str, passed: bool, value=None, detail: str = "") -> None:
        self.checks.append({"name": name, "passed": bool(passed), "value": value, "detail": detail})

    def note(self, text: str) -> None:
        self.notes.append(text)

    def table(self, name: str, columns, rows) -> None:
        self.tables[name] = (list(columns), [list(r) for r in rows])

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks)

    def to_json(self) -> str:
        doc = {
            "command": self.command,
            "provenance": self.provenance,
            "passed": self.passed,
            "checks": [{**c, "value": _jsonable(c["value"])} for c in self.checks],
            "notes": self.notes,
            "tables": {k: {"columns": c, "rows": [[_jsonable(x) for x in r] for r in rows]}
                       for k, (c, rows) in self.tables.items()},
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    def to_csv(self, name: str | None = None) -> str:
        if not self.tables:
            return ""
        name = name or next(iter(self.tables))
        cols, rows = self.tables[name]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            w.writerow([_fmt(x) for x in r])
        return buf.getvalue()

    def to_text(self) -> str:
        out = [f"qcausal {self.command}",
               f"  config sha256: {self.provenance['config_sha256']}",
               f"  version: {self.provenance['tool_version']}  seed: {self.provenance['seed']}",
               ""]
        for c in self.checks:
            mark = "PASS" if c["passed"] else "FAIL"
            val = "" if c["value"] is None else f" = {_fmt(c['value'])}"
            det = f"  ({c['detail']})" if c["detail"] else ""
            out.append(f"[{mark}] {c['name']}{val}{det}")
        if self.notes:
            out.append("")
            out.extend(self.notes)
        for name, (cols, rows) in self.tables.items():
            out.append("")
            out.append(f"{name}:")
            out.append("  " + "\t".join(cols))
            for r in rows:
                out.append("  " + "\t".join(_fmt(x) for x in r))
        out.append("")
        out.append("RESULT: " + ("all checks passed" if self.passed else "check failure"))
        return "\n".join(out) + "\n"


def _fmt(x) -> str:
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, (float, np.floating)):
        return bell.fmt17(x)
    if isinstance(x, (tuple, list)):
        return "(" + ", ".join(_fmt(v) for v in x) + ")"
    return str(x)


def _jsonable(x):
    if isinstance(x, (np.floating,)):
        x = float(x)
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    if isinstance(x, (tuple, list)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.integer):
        return int(x)
    return x


# ---------------------------------------------------------------- commands

def _analysis(cfg, command):
    an = cfg.get("analysis", {})
    if not isinstance(an, dict):
        raise ConfigError("$.analysis", "expected an object")
    sec = an.get(command, {})
    if not isinstance(sec, dict):
        raise ConfigError(f"$.analysis.{command}", "expected an object")
    return sec


def _state(cfg):
    return parse_state(_req(_req(cfg, "preparation", "$"), "state", "$.preparation"),
                       "$.preparation.state")


def cmd_epr(cfg, rep: Report) -> None:
    state = _state(cfg)
    sec = _analysis(cfg, "epr")
    a_grid = parse_grid(sec.get("a_grid", [0.0]), "$.analysis.epr.a_grid")
    b_grid = parse_grid(sec.get("b_grid", [0.0]), "$.analysis.epr.b_grid")
    report = bell.correlation_report(state, a_grid, b_grid)
    rep.table("epr", bell.CSV_COLUMNS, [r.values() for r in report.rows])

    ns = bell.verify_no_signalling(state, a_grid, b_grid, rep.tol)
    rep.check("parameter independence (no-signalling)", ns.passed, ns.max_gap, f"tol {rep.tol:g}")
    fact = [r.fact_gap for r in report.rows]
    rep.note(f"factorizability gap: max {bell.fmt17(max(fact))}, "
             f"rows failing at tol: {sum(g > rep.tol for g in fact)}/{len(fact)}")
    oi = [r.oi_gap for r in report.rows if not math.isnan(r.oi_gap)]
    if oi:
        rep.note(f"outcome independence gap: max {bell.fmt17(max(oi))}")


def cmd_chsh(cfg, rep: Report) -> None:
    state = _state(cfg)
    sec = _analysis(cfg, "chsh")
    grid = sec.get("grid", 64)
    n_scan = sec.get("random_scan", 10000)
    for key, v in (("grid", grid), ("random_scan", n_scan)):
        if not isinstance(v, int) or v < 1:
            raise ConfigError(f"$.analysis.chsh.{key}", "expected a positive integer")
    bound = bell.lhv_chsh_bound()
    rep.check("deterministic LHV bound equals 2", bound.max_abs == 2.0, bound.max_abs)
    opt = bell.optimize_chsh(state, grid=grid)
    rep.check("optimized quantum |S| within Tsirelson bound",
              opt.value <= bell.TSIRELSON + rep.tol, opt.value, f"tol {rep.tol:g}")
    scan = bell.random_chsh_scan(state, n_scan, np.random.default_rng(rep.provenance["seed"]))
    smax = float(np.max(np.abs(scan)))
    rep.check("random scan |S| within Tsirelson bound", smax <= bell.TSIRELSON + rep.tol, smax)
    rep.note(f"LHV bound: {bell.fmt17(bound.max_abs)}")
    rep.note(f"optimized |S|: {bell.fmt17(opt.value)} "
             f"({'violates' if opt.value > 2 + 1e-9 else 'respects'} the LHV bound)")
    rep.table("chsh", ["quantity", "value"], [
        ["lhv_bound", bound.max_abs],
        ["quantum_max", opt.value],
        ["grid_max", opt.grid_value],
        ["a", opt.angles[0]], ["a2", opt.angles[1]], ["b", opt.angles[2]], ["b2", opt.angles[3]],
        ["random_scan_max", smax],
        ["tsirelson", bell.TSIRELSON],
    ])


def cmd_consistency(cfg, rep: Report) -> None:
    sc, points = build_scenario(cfg)
    smc = microcausality.check_strong_microcausality(sc)
    anti = smc.anticommuting_pairs
    if smc.holds:
        rep.check("strong microcausality", True, 0.0)
    else:
        worst = max(v.commutator_norm for v in smc.violations)
        rep.check("strong microcausality", smc.excused_by_anticommutation, worst,
                  "anticommuting" if smc.excused_by_anticommutation else "non-commuting pair")
    vrows = [[v.events[0], v.events[1], str(v.outcomes[0]), str(v.outcomes[1]),
              v.commutator_norm, v.anticommuting] for v in smc.violations]
    rep.table("violations", ["event_1", "event_2", "outcome_1", "outcome_2", "commutator_norm",
                             "anticommuting"], vrows)
    if anti:
        rep.note("anticommuting pairs: " + ", ".join(f"{a}/{b}" for a, b in sorted(anti)))

    rows = []
    for name in sorted(points):
        for k, p in enumerate(points[name]):
            label = f"{name}[{k}]"
            visible = sc.visible(p)
            try:
                try:
                    res = agents.charlie_consistency(sc, p, rep.tol)
                except PreconditionError:
                    tr = agents.assign_state(sc, p)
                    rows.append([label, p.t, p.x, "/".join(tr.applied) or "-", "n/a", 0.0, True])
                    continue
            except ZeroProbabilityOutcome as exc:
                rep.check(f"state assignment at {label}", False, None,
                          f"zero-probability outcome at event {exc.event}")
                continue
            rows.append([label, p.t, p.x, "/".join(res.order_ab), "/".join(res.order_ba),
                         res.distance, res.consistent])
            rep.check(f"order-independent state at {label}", res.consistent, res.distance,
                      f"events {', '.join(e.name for e in visible)}")
    rep.table("assignments", ["point", "t", "x", "order_ab", "order_ba", "trace_distance", "consistent"],
              rows)


def cmd_intervene(cfg, rep: Report) -> None:
    state = _state(cfg)
    sec = _analysis(cfg, "intervene")
    a = parse_angle(sec.get("a", 0.0), "$.analysis.intervene.a")
    b = parse_angle(sec.get("b", 0.0), "$.analysis.intervene.b")
    model = causal.build_model(state, a, b)
    st = causal.stability_report(model, ("X", "Y"), rep.tol)
    rows = []
    for r in st.rows:
        rows.append([f"{r.cause}->{r.effect}", r.value, r.conditional[0], r.interventional[0], r.gap])
    rep.table("stability", ["direction", "cause_value", "P(effect=par|cause)", "P(effect=par|do(cause))",
                            "gap"], rows)
    for cause, effect, name in (("X", "Y", "(Same)"), ("Y", "X", "(Same*)")):
        r0 = next((r for r in st.rows if r.cause == cause and r.value == 0), None)
        if r0 is None:
            continue
        rep.note(f"{name}: P({effect}|{cause}=par)={bell.fmt17(r0.conditional[0])}, "
                 f"P({effect}|do {cause}=par)={bell.fmt17(r0.interventional[0])} -> "
                 f"{st.verdict(cause, effect).upper()} [{st.label}]")

    # interventions on outcomes never move the distant marginal
    joint = model.joint()
    drift = 0.0
    for cause, effect in (("X", "Y"), ("Y", "X")):
        marg = joint.table(effect)
        for c in (0, 1):
            d = causal.intervene(model, causal.InterventionSpec(cause, c)).table(effect)
            drift = max(drift, max(abs(d[k] - marg[k]) for k in marg))
    rep.check("do(outcome) leaves distant marginal unchanged", drift <= rep.tol, drift)

    sweep = parse_grid(sec.get("b_sweep", [b]), "$.analysis.intervene.b_sweep")
    sweep_model = causal.build_model(state, a, sweep)
    sw = causal.setting_sweep(sweep_model, "b")
    col = [v[0] for v in sw.values()]
    gap = max(col) - min(col)
    rep.check("do(b) sweep leaves Alice's marginal constant", gap <= rep.tol, gap)
    rep.table("b_sweep", ["b", "P(Y=par|do(b))"], [[k, v[0]] for k, v in sw.items()])

    if "alternative" in sec:
        alt = parse_state(sec["alternative"], "$.analysis.intervene.alternative")
        prep_model = causal.build_model({"prepared": state, "alternative": alt}, a, b)
        cc = causal.common_cause_test(prep_model, "prepared", "alternative", rep.tol)
        rep.note(f"do(Lambda: prepared -> alternative): joint delta {bell.fmt17(cc.joint_delta)}, "
                 f"correlation delta {bell.fmt17(cc.correlation_delta)} -> "
                 f"{'Lambda is a common cause' if cc.is_common_cause else 'no effect detected'}")


def cmd_net(cfg, rep: Report) -> None:
    sec = _analysis(cfg, "net")
    path = "$.analysis.net"
    sites = [parse_number(x, f"{path}.sites[{k}]") for k, x in enumerate(_req(sec, "sites", path))]
    regions = {}
    for name, r in _req(sec, "regions", path).items():
        regions[name] = parse_region(r, f"{path}.regions.{name}", 1)

    def region(name, p):
        if name not in regions:
            raise ConfigError(p, f"unknown region {name!r}")
        return regions[name]

    overrides = {}
    for k, o in enumerate(sec.get("support_overrides", [])):
        overrides[region(_req(o, "region", f"{path}.support_overrides[{k}]"),
                         f"{path}.support_overrides[{k}].region")] = o.get("sites", [])
    try:
        net = microcausality.LatticeNet(sites, int(sec.get("site_dim", 2)), overrides)
    except QCausalError as exc:
        raise ConfigError(path, str(exc)) from exc

    rows = []
    pairs = sec.get("pairs")
    if pairs is None:
        names = sorted(regions)
        pairs = [[x, y] for i, x in enumerate(names) for y in names[i + 1:]]
    for k, (n1, n2) in enumerate(pairs):
        r1, r2 = region(n1, f"{path}.pairs[{k}]"), region(n2, f"{path}.pairs[{k}]")
        res = microcausality.check_algebraic_microcausality(net, r1, r2, rep.tol)
        rows.append([n1, n2, res.applicable, res.holds if res.applicable else "n/a",
                     res.max_commutator])
        if res.applicable:
            rep.check(f"algebraic microcausality {n1}/{n2}", res.holds, res.max_commutator)
    rep.table("microcausality", ["region_1", "region_2", "spacelike", "holds", "max_commutator"], rows)

    for k, (inner, outer) in enumerate(sec.get("isotony", [])):
        p = f"{path}.isotony[{k}]"
        try:
            ok = microcausality.check_isotony(net, region(inner, p), region(outer, p))
        except PreconditionError as exc:
            raise ConfigError(p, str(exc)) from exc
        rep.check(f"isotony {inner} ⊆ {outer}", ok)

    if "bell" in sec:
        state = parse_state(_req(sec, "state", path), f"{path}.state", len(sites))
        for k, (n1, n2) in enumerate(sec["bell"]):
            p = f"{path}.bell[{k}]"
            try:
                s = microcausality.net_bell_correlation(net, region(n1, p), region(n2, p), state,
                                                        seed=rep.provenance["seed"])
            except QCausalError as exc:
                raise ConfigError(p, str(exc)) from exc
            rep.check(f"net CHSH {n1}/{n2} within Tsirelson bound", s <= bell.TSIRELSON + 1e-9, s)


COMMANDS = {
    "epr": cmd_epr,
    "chsh": cmd_chsh,
    "consistency": cmd_consistency,
    "intervene": cmd_intervene,
    "net": cmd_net,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qcausal", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON config path or bundled config name")
        p.add_argument("--out", type=Path, help="directory for report and CSV files")
        p.add_argument("--tol", type=float, help="check tolerance")
        p.add_argument("--seed", type=int, help="RNG seed (overrides analysis.seed)")
        p.add_argument("--format", choices=("text", "csv", "json"), default="text")
    return parser


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        cfg, raw, _ = load_config(args.config)
        seed = args.seed
        if seed is None:
            seed = cfg.get("analysis", {}).get("seed", 0) if isinstance(cfg.get("analysis"), dict) else 0
            if not isinstance(seed, int):
                raise ConfigError("$.analysis.seed", "expected an integer")
        tol = args.tol if args.tol is not None else DEFAULT_TOL[args.command]
        if not tol > 0:
            raise ConfigError("--tol", "tolerance must be positive")
        rep = Report(args.command, raw, seed, tol)
        COMMANDS[args.command](cfg, rep)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    rendered = {"text": rep.to_text(), "json": rep.to_json(), "csv": rep.to_csv()}
    stdout.write(rendered[args.format])
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "report.txt").write_text(rendered["text"])
        (args.out / "report.json").write_text(rendered["json"])
        for name in rep.tables:
            (args.out / f"{args.command}_{name}.csv").write_text(rep.to_csv(name))
    return 0 if rep.passed else 1


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
