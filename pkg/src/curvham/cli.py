"""Command line front end.

``curvham run config.json`` builds the surface, fields and lattice described
by a JSON run configuration, solves for the lowest states and writes CSV and
JSON artifacts. ``curvham verify <suite>`` runs a verification suite.

Exit codes: 0 success, 1 solver or verification failure, 2 invalid
configuration.
"""

from __future__ import annotations

import argparse
import copy
import csv
import json
import math
import os
import sys
import time
from contextlib import nullcontext
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np
from scipy.interpolate import RegularGridInterpolator

from . import fields as fl
from . import lattice as lat
from . import oracle
from . import spectra as spc
from .errors import ConfigurationError, ConvergenceError, CurvhamError
from .geometry import SurfaceKind, SurfaceSpec
from .units import Constants

EXIT_OK = 0
EXIT_SOLVER = 1
EXIT_CONFIG = 2
WORKERS_ENV = "CURVHAM_WORKERS"

_NUM = {"type": "number"}
_VEC3 = {"type": "array", "items": _NUM, "minItems": 3, "maxItems": 3}
_GRID2 = {"type": "array", "items": {"type": "array", "items": _NUM, "minItems": 1}, "minItems": 1}
_AXIS = {"type": "array", "items": _NUM, "minItems": 2}
_TABLE = {
    "type": "object",
    "additionalProperties": False,
    "required": ["q1", "values"],
    "properties": {"q1": _AXIS, "q2": _AXIS, "values": {"anyOf": [_GRID2, {"type": "array", "items": _NUM}]}},
}

SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["surface", "grid"],
    "properties": {
        "surface": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind"],
            "properties": {
                "kind": {"enum": [k.value for k in SurfaceKind]},
                "a": {"type": "number", "exclusiveMinimum": 0},
                "R": {"type": "number", "exclusiveMinimum": 0},
                "r": {"type": "number", "exclusiveMinimum": 0},
                "L": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "required": ["N1"],
            "properties": {
                "N1": {"type": "integer", "minimum": 4},
                "N2": {"type": "integer", "minimum": 1},
                "bc": {"enum": ["dirichlet", "periodic"]},
            },
        },
        "field": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "potential": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["kind"],
                    "properties": {
                        "kind": {"enum": ["none", "uniform", "flux", "tabulated"]},
                        "B0": _NUM,
                        "axis": _VEC3,
                        "alpha": _NUM,
                        "q1": _AXIS,
                        "q2": _AXIS,
                        "A1": {"anyOf": [_GRID2, {"type": "array", "items": _NUM}]},
                        "A2": {"anyOf": [_GRID2, {"type": "array", "items": _NUM}]},
                        "b_cart": _VEC3,
                    },
                },
                "V": {"anyOf": [_NUM, _TABLE]},
                "soc": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "W": {"type": "array", "items": _VEC3, "minItems": 3, "maxItems": 3},
                        "E": _VEC3,
                    },
                },
                "zeeman": {"type": "boolean"},
                "quad_order": {"type": "integer", "minimum": 1, "maximum": 32},
            },
        },
        "particle": {"enum": ["spin0", "pauli"]},
        "solver": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "k": {"type": "integer", "minimum": 1},
                "backend": {"enum": ["auto", "dense", "lanczos"]},
                "seed": {"type": "integer"},
                "tol": {"type": "number", "exclusiveMinimum": 0},
                "block": {"type": ["integer", "null"], "minimum": 1},
                "soc_scheme": {"enum": ["central", "links"]},
            },
        },
        "outputs": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "eigenvalues": {"type": "string"},
                "eigenvectors": {"type": ["string", "null"]},
                "states": {"type": "array", "items": {"type": "integer", "minimum": 0}},
                "report": {"type": "string"},
            },
        },
        "constants": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "hbar": {"type": "number", "exclusiveMinimum": 0},
                "m": {"type": "number", "exclusiveMinimum": 0},
                "e": {"type": "number", "exclusiveMinimum": 0},
                "g": _NUM,
                "c": {"type": ["number", "null"], "exclusiveMinimum": 0},
            },
        },
        "checks": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "gauge": {"type": "boolean"},
                "convergence": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["sizes"],
                    "properties": {"sizes": {"type": "array", "items": {"type": "integer", "minimum": 4}, "minItems": 3}},
                },
            },
        },
    },
}

DEFAULT_OUTPUTS = {"eigenvalues": "eigenvalues.csv", "eigenvectors": None, "report": "report.json"}
DEFAULT_SOLVER = {"k": 10, "backend": "auto", "seed": 0, "tol": 1e-10, "block": None, "soc_scheme": "central"}


def _field_path(err: jsonschema.ValidationError) -> str:
    path = ".".join(str(p) for p in err.absolute_path)
    if err.validator == "additionalProperties":
        extra = sorted(set(err.instance) - set(err.schema.get("properties", {})))
        path = ".".join(filter(None, [path, extra[0] if extra else ""]))
    elif err.validator == "required":
        missing = [r for r in err.validator_value if r not in err.instance]
        path = ".".join(filter(None, [path, missing[0] if missing else ""]))
    return path or "<root>"


@dataclass(frozen=True)
class RunConfig:
    """Validated run configuration; ``raw`` is the exact input mapping."""

    raw: dict

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        validator = jsonschema.Draft202012Validator(SCHEMA)
        errors = sorted(validator.iter_errors(d), key=lambda e: list(e.absolute_path))
        if errors:
            err = errors[0]
            raise ConfigurationError(err.message, field=_field_path(err))
        cfg = cls(copy.deepcopy(d))
        cfg._semantic_checks()
        return cfg

    @classmethod
    def load(cls, path: str | os.PathLike) -> "RunConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}", field="<file>") from None
        except OSError as exc:
            raise ConfigurationError(str(exc), field="<file>") from None
        if not isinstance(data, dict):
            raise ConfigurationError("top level must be an object", field="<root>")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return copy.deepcopy(self.raw)

    # -- typed views -------------------------------------------------------

    @property
    def particle(self) -> str:
        return self.raw.get("particle", "spin0")

    @property
    def solver(self) -> dict:
        return {**DEFAULT_SOLVER, **self.raw.get("solver", {})}

    @property
    def outputs(self) -> dict:
        return {**DEFAULT_OUTPUTS, **self.raw.get("outputs", {})}

    @property
    def checks(self) -> dict:
        return self.raw.get("checks", {})

    def constants(self) -> Constants:
        return Constants(**self.raw.get("constants", {}))

    def surface(self) -> SurfaceSpec:
        return SurfaceSpec.from_dict(self.raw["surface"])

    def grid(self, scale: float = 1.0) -> lat.LatticeGrid:
        g = self.raw["grid"]
        N1 = int(round(g["N1"] * scale))
        N2 = int(round(g.get("N2", 1) * scale))
        return lat.build_grid(self.surface(), N1, N2, bc=g.get("bc"))

    def _field(self) -> dict:
        return self.raw.get("field", {})

    def potential(self) -> fl.PotentialSpec:
        p = self._field().get("potential", {"kind": "none"})
        kind = p["kind"]
        if kind == "none":
            return fl.zero_potential()
        if kind == "uniform":
            _require(p, "B0", "field.potential")
            return fl.UniformB.along(p.get("axis", (0.0, 0.0, 1.0)), p["B0"])
        if kind == "flux":
            _require(p, "alpha", "field.potential")
            return fl.FluxLine(p["alpha"])
        _require(p, "q1", "field.potential")
        _require(p, "A1", "field.potential")
        s = self.surface()
        A1 = _table(p["q1"], p.get("q2"), p["A1"], s, "field.potential.A1")
        A2 = _table(p["q1"], p.get("q2"), p["A2"], s, "field.potential.A2") if "A2" in p else None

        def sampler(q1, q2):
            a1 = A1(q1, q2)
            return a1, (A2(q1, q2) if A2 is not None else np.zeros_like(a1))

        return fl.CustomTangential(sampler, b_cart=p.get("b_cart"), label="tabulated")

    def scalar_potential(self) -> fl.ScalarPotential | None:
        V = self._field().get("V")
        if V is None:
            return None
        if isinstance(V, (int, float)):
            return fl.ScalarPotential(float(V))
        return fl.ScalarPotential(_table(V["q1"], V.get("q2"), V["values"], self.surface(), "field.V.values"))

    def soc(self) -> fl.SOCVector | None:
        soc = self._field().get("soc")
        if not soc:
            return None
        c = self.constants()
        if "W" in soc and "E" in soc:
            raise ConfigurationError("give either W or E, not both", field="field.soc")
        if "W" in soc:
            return fl.SOCVector(np.array(soc["W"], float), c.g)
        if "E" in soc:
            return fl.soc_from_efield(soc["E"], c)
        return None

    def magnetic(self, p: fl.PotentialSpec) -> fl.MagneticFieldSpec | None:
        if not self._field().get("zeeman", self.particle == "pauli"):
            return None
        return fl.magnetic_field(p)

    def _semantic_checks(self) -> None:
        s = self.surface()
        g = self.raw["grid"]
        if s.kind is SurfaceKind.CYLINDER and s.L is None:
            raise ConfigurationError("cylinder needs the axial length L", field="surface.L")
        if s.kind is not SurfaceKind.RING and g.get("N2", 1) < 4:
            raise ConfigurationError("need N2 >= 4 on a two-dimensional surface", field="grid.N2")
        if "bc" in g and s.kind is not SurfaceKind.CYLINDER:
            raise ConfigurationError("bc only applies to the cylinder axis", field="grid.bc")
        p = self.potential()
        if self.particle == "pauli":
            # fails early when the Zeeman term needs B that the potential cannot supply
            try:
                self.magnetic(p)
            except CurvhamError as exc:
                raise ConfigurationError(str(exc), field="field.potential.b_cart") from None
        elif self._field().get("soc"):
            raise ConfigurationError("spin-orbit coupling needs particle 'pauli'", field="field.soc")
        self.soc()
        self.scalar_potential()
        k = self.solver["k"]
        dim = self.grid().n_sites * (2 if self.particle == "pauli" else 1)
        if k > dim:
            raise ConfigurationError(f"k={k} exceeds the operator dimension {dim}", field="solver.k")


def _require(d: dict, key: str, where: str) -> None:
    if key not in d:
        raise ConfigurationError(f"missing '{key}'", field=f"{where}.{key}")


def _table(q1, q2, values, s: SurfaceSpec, where: str):
    """Interpolating ``f(q1, q2)`` from a tabulated grid, angles wrapped."""
    q1 = np.asarray(q1, float)
    vals = np.asarray(values, float)
    if q2 is None:
        if vals.shape != q1.shape:
            raise ConfigurationError(f"table shape {vals.shape} does not match q1 ({q1.size})", field=where)
        interp = RegularGridInterpolator((q1,), vals, method="linear")
    else:
        q2 = np.asarray(q2, float)
        if vals.shape != (q1.size, q2.size):
            raise ConfigurationError(f"table shape {vals.shape} does not match ({q1.size}, {q2.size})", field=where)
        interp = RegularGridInterpolator((q1, q2), vals, method="linear")
    if not np.all(np.isfinite(vals)):
        raise ConfigurationError("table contains non-finite values", field=where)

    def wrap(q, period, lo):
        return q if period is None else lo + np.mod(q - lo, period)

    def f(a, b):
        a, b = np.broadcast_arrays(np.asarray(a, float), np.asarray(b, float))
        a = wrap(a, s.q1_period, q1[0])
        pts = a[..., None] if q2 is None else np.stack([a, wrap(b, s.q2_period, q2[0])], axis=-1)
        try:
            return interp(pts)
        except ValueError as exc:
            raise ConfigurationError(f"grid point outside the table: {exc}", field=where) from None

    return f


# ---------------------------------------------------------------------------
# run


def _fmt(x: float) -> str:
    return repr(float(x))


def _assemble(cfg: RunConfig, g: lat.LatticeGrid, chi: np.ndarray | None = None) -> lat.SurfaceOperator:
    c = cfg.constants()
    p = cfg.potential()
    links = lat.link_phases(g, p, quad_order=cfg._field().get("quad_order", 4), constants=c)
    if chi is not None:
        links = lat.site_gauge_transform(links, chi)
    V = cfg.scalar_potential()
    if cfg.particle == "pauli":
        return lat.assemble_pauli(
            g, links, soc=cfg.soc(), b=cfg.magnetic(p), V=V, constants=c, scheme=cfg.solver["soc_scheme"]
        )
    return lat.assemble_spin0(g, links, V=V, constants=c)


def _solve(cfg: RunConfig, op: lat.SurfaceOperator, k: int | None = None) -> spc.SpectrumResult:
    sv = cfg.solver
    return spc.eigen_lowest(
        op, k or sv["k"], backend=sv["backend"], seed=sv["seed"], tol=sv["tol"], block=sv["block"]
    )


def _fix_phase(vecs: np.ndarray) -> np.ndarray:
    """Make the largest component of each column real and positive."""
    idx = np.argmax(np.abs(vecs), axis=0)
    ph = vecs[idx, np.arange(vecs.shape[1])]
    return vecs * (np.abs(ph) / ph)


def write_eigenvalues(path: Path, res: spc.SpectrumResult) -> None:
    groups = res.degeneracy_groups()
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "energy", "residual", "degeneracy_group"])
        for i, (E, r, gid) in enumerate(zip(res.eigenvalues, res.residuals, groups)):
            w.writerow([i, _fmt(E), _fmt(r), int(gid)])


def write_eigenvectors(path: Path, res: spc.SpectrumResult, op: lat.SurfaceOperator, states) -> None:
    g = op.grid
    Q1, Q2 = g.mesh()
    q1, q2 = Q1.ravel(), Q2.ravel()
    n = g.n_sites
    vecs = _fix_phase(res.eigenvectors)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["state", "q1", "q2", "re", "im"] + (["spin"] if op.spin == 2 else []))
        for s_idx in states:
            v = vecs[:, s_idx]
            for spin in range(op.spin):
                part = v[spin * n : (spin + 1) * n]
                for a, b, z in zip(q1, q2, part):
                    row = [s_idx, _fmt(a), _fmt(b), _fmt(z.real), _fmt(z.imag)]
                    w.writerow(row + (["up" if spin == 0 else "down"] if op.spin == 2 else []))


def _reference(cfg: RunConfig, k: int) -> np.ndarray | None:
    """Closed-form levels when the configuration has them."""
    s = cfg.surface()
    if cfg.particle != "spin0" or cfg._field().get("V") is not None:
        return None
    p = cfg.potential()
    c = cfg.constants()
    alpha = p.alpha if isinstance(p, fl.FluxLine) else (0.0 if lat._zero_field(p) else None)
    n = int(math.isqrt(k)) + k
    if s.kind is SurfaceKind.RING and alpha is not None:
        return oracle.ring_spectrum(s.a, alpha, n, c).values(k)
    if s.kind is SurfaceKind.SPHERE and alpha == 0.0:
        return oracle.sphere_spectrum(s.a, n, c).values(k)
    if s.kind is SurfaceKind.CYLINDER and alpha is not None and cfg.raw["grid"].get("bc", "dirichlet") == "dirichlet":
        return oracle.cylinder_spectrum(s.a, s.L, alpha, n, n, c).values(k)
    return None


def _convergence(cfg: RunConfig, sizes) -> dict:
    k = cfg.solver["k"]
    N1 = cfg.raw["grid"]["N1"]
    ref = _reference(cfg, k)
    hs, vals = [], []
    for N in sizes:
        g = cfg.grid(N / N1)
        vals.append(_solve(cfg, _assemble(cfg, g)).eigenvalues)
        hs.append(g.d1)
    vals = np.array(vals)
    if ref is not None:
        rep = spc.fit_order(hs, vals - ref)
        against = "oracle"
    else:
        if len(sizes) < 4:
            raise ConfigurationError("without a closed-form reference at least 4 sizes are needed", field="checks.convergence.sizes")
        finest = int(np.argmin(hs))
        keep = [i for i in range(len(hs)) if i != finest]
        rep = spc.fit_order([hs[i] for i in keep], vals[keep] - vals[finest])
        against = "finest grid"
    return {"sizes": list(sizes), "reference": against, "slope": _json_num(rep.slope), **rep.to_dict()}


def _json_num(x: float):
    return x if math.isfinite(x) else None


def run(cfg: RunConfig, out_dir: Path, verify_gauge: bool = False) -> dict:
    """Execute a run and write its artifacts; returns the report."""
    t_start = time.perf_counter()
    timings: dict[str, float] = {}
    out_dir.mkdir(parents=True, exist_ok=True)
    outs = cfg.outputs

    t0 = time.perf_counter()
    g = cfg.grid()
    op = _assemble(cfg, g)
    timings["assemble"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    res = _solve(cfg, op)
    timings["solve"] = time.perf_counter() - t0

    write_eigenvalues(out_dir / outs["eigenvalues"], res)
    if outs["eigenvectors"]:
        states = outs.get("states", list(range(res.k)))
        bad = [s for s in states if s >= res.k]
        if bad:
            raise ConfigurationError(f"states {bad} exceed k={res.k}", field="outputs.states")
        write_eigenvectors(out_dir / outs["eigenvectors"], res, op, states)

    report: dict[str, Any] = {
        "config": cfg.to_dict(),
        "dimension": op.dim,
        "backend": res.backend,
        "scale": op.scale,
        "hermiticity_residual": op.hermiticity_residual(),
        "max_residual": float(res.residuals.max()),
        "eigenvalues": [float(x) for x in res.eigenvalues],
        "solver": {k: v for k, v in res.metadata.items() if k not in ("operator", "seconds")},
    }
    if verify_gauge or cfg.checks.get("gauge"):
        t0 = time.perf_counter()
        rng = np.random.default_rng(cfg.solver["seed"])
        chi = rng.uniform(0.0, 2.0 * math.pi, g.shape)
        res2 = _solve(cfg, _assemble(cfg, g, chi))
        report["gauge_max_drift"] = float(np.abs(res.eigenvalues - res2.eigenvalues).max())
        timings["gauge"] = time.perf_counter() - t0
    if "convergence" in cfg.checks:
        t0 = time.perf_counter()
        report["convergence"] = _convergence(cfg, cfg.checks["convergence"]["sizes"])
        timings["convergence"] = time.perf_counter() - t0
    timings["total"] = time.perf_counter() - t_start
    report["timings"] = timings
    with open(out_dir / outs["report"], "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=False)
        fh.write("\n")
    return report


# ---------------------------------------------------------------------------
# entry point


def _thread_limit():
    n = os.environ.get(WORKERS_ENV)
    if not n:
        return nullcontext()
    try:
        workers = int(n)
        if workers < 1:
            raise ValueError
    except ValueError:
        raise ConfigurationError(f"must be a positive integer, got {n!r}", field=WORKERS_ENV) from None
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=workers)


def build_parser() -> argparse.ArgumentParser:
    from .verify import SUITES

    ap = argparse.ArgumentParser(prog="curvham", description="Spectra of charged particles on curved surfaces.")
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="solve the configuration in a JSON file")
    r.add_argument("config", help="path to the JSON run configuration")
    r.add_argument("--out", default=".", help="directory for the output files (default: current directory)")
    r.add_argument("--seed", type=int, help="override solver.seed")
    r.add_argument("--verify", choices=["gauge"], action="append", default=[], help="extra checks to run")
    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("suite", choices=sorted(SUITES))
    v.add_argument("--out", help="write the JSON report here as well")
    return ap


def _cmd_run(args) -> int:
    cfg = RunConfig.load(args.config)
    if args.seed is not None:
        raw = cfg.to_dict()
        raw.setdefault("solver", {})["seed"] = args.seed
        cfg = RunConfig.from_dict(raw)
    try:
        report = run(cfg, Path(args.out), verify_gauge="gauge" in args.verify)
    except ConvergenceError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        res = getattr(exc, "residuals", None)
        if res is not None:
            print("residuals: " + " ".join(_fmt(r) for r in np.ravel(res)), file=sys.stderr)
        return EXIT_SOLVER
    summary = {k: report[k] for k in ("dimension", "backend", "max_residual", "eigenvalues")}
    if "gauge_max_drift" in report:
        summary["gauge_max_drift"] = report["gauge_max_drift"]
    print(json.dumps(summary))
    return EXIT_OK


def _cmd_verify(args) -> int:
    from .verify import run_suite

    rep = run_suite(args.suite)
    for c in rep.checks:
        print(c.line())
    payload = json.dumps(rep.to_dict(), indent=2)
    if args.out:
        Path(args.out).write_text(payload + "\n", encoding="utf-8")
    else:
        print(payload)
    return EXIT_OK if rep.passed else EXIT_SOLVER


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with _thread_limit():
            if args.command == "run":
                return _cmd_run(args)
            return _cmd_verify(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CurvhamError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
