"""Verification suites: oracle comparisons with measured numbers and pass/fail.

Each check function returns a list of :class:`Check` records. Suites group
the checks; :func:`run_suite` executes one and :func:`run_criteria` runs the
numbered acceptance checks.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass
from typing import Callable, Iterator

import numpy as np

from . import fields as fl
from . import geometry as geo
from . import lattice as lat
from . import oracle
from . import spectra as spc
from .errors import ConfigurationError
from .geometry import SurfaceSpec
from .units import NATURAL

SEED = 20240611


@dataclass(frozen=True)
class Check:
    criterion: int | str
    name: str
    passed: bool
    measured: float
    expected: str
    seconds: float = 0.0
    note: str = ""

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        msg = f"{tag} [{self.criterion}] {self.name}: measured {self.measured:.6g} (expected {self.expected})"
        if self.note:
            msg += f"; {self.note}"
        return msg

    def to_dict(self) -> dict:
        d = asdict(self)
        d["measured"] = _finite_or_str(self.measured)
        return d


def _finite_or_str(x: float):
    x = float(x)
    return x if math.isfinite(x) else repr(x)


@dataclass(frozen=True)
class SuiteReport:
    suite: str
    checks: list[Check]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {"suite": self.suite, "passed": self.passed, "checks": [c.to_dict() for c in self.checks]}


class _Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.t0


def _rel(values, ref, floor: float) -> float:
    values = np.asarray(values, float)
    ref = np.asarray(ref, float)
    return float(np.max(np.abs(values - ref) / np.maximum(np.abs(ref), floor)))


def _random_points(s: SurfaceSpec, n: int, rng: np.random.Generator):
    if s.kind is geo.SurfaceKind.SPHERE:
        q1 = rng.uniform(1e-2, math.pi - 1e-2, n)
    else:
        q1 = rng.uniform(0.0, geo.TWO_PI, n)
    if s.kind is geo.SurfaceKind.CYLINDER:
        q2 = rng.uniform(-3.0, 3.0, n)
    else:
        q2 = rng.uniform(0.0, geo.TWO_PI, n)
    return q1, q2


CURVED = (SurfaceSpec.cylinder(1.0), SurfaceSpec.sphere(1.0), SurfaceSpec.torus(2.0, 0.5))


def _table_gke(s: SurfaceSpec, q1):
    kin = NATURAL.kinetic
    if s.kind is geo.SurfaceKind.CYLINDER:
        return np.full_like(q1, -kin / (4.0 * s.a**2))
    if s.kind is geo.SurfaceKind.SPHERE:
        return np.zeros_like(q1)
    return -kin * s.R**2 / (4.0 * s.r**2 * (s.R + s.r * np.cos(q1)) ** 2)


# ---------------------------------------------------------------------------
# 1, 2: curvature


def check_gke_table(n: int = 1000, seed: int = SEED) -> list[Check]:
    out = []
    for s in CURVED:
        rng = np.random.default_rng(seed)
        with _Timer() as t:
            q1, q2 = _random_points(s, n, rng)
            closed = geo.geometric_potential(s, q1, q2)
            brute = oracle.embedding_gke(s, q1, q2)
            table = _table_gke(s, q1)
        err = float(max(np.abs(closed - brute).max(), np.abs(closed - table).max()))
        ok = err <= 1e-10 and t.seconds < 1.0
        out.append(Check(1, f"GKE table, {s.kind.value}", ok, err, "<= 1e-10 in < 1 s", t.seconds))
    return out


def check_normal_momentum(n: int = 1000, seed: int = SEED) -> list[Check]:
    out = []
    for s in CURVED:
        rng = np.random.default_rng(seed + 1)
        with _Timer() as t:
            q1, q2 = _random_points(s, n, rng)
            corr = geo.normal_momentum_correction(s, q1, q2)
            M, _ = oracle.embedding_curvatures(s, q1, q2)
        err = float(np.abs(corr + M).max())
        out.append(Check(2, f"normal momentum correction = -M, {s.kind.value}", err <= 1e-12, err, "<= 1e-12", t.seconds))
    return out


# ---------------------------------------------------------------------------
# operators shared by several criteria


def ring_operator(N: int, alpha: float, a: float = 1.0) -> lat.SurfaceOperator:
    g = lat.build_grid(SurfaceSpec.ring(a), N)
    return lat.assemble_spin0(g, lat.link_phases(g, fl.FluxLine(alpha)))


def torus_operator(N1: int, N2: int, B0: float = 0.5, potential=None, quad_order: int = 4, chi=None):
    s = SurfaceSpec.torus(2.0, 0.5)
    g = lat.build_grid(s, N1, N2)
    p = potential if potential is not None else fl.UniformB((0.0, 0.0, 1.0), B0)
    links = lat.link_phases(g, p, quad_order=quad_order)
    if chi is not None:
        links = lat.site_gauge_transform(links, chi)
    return lat.assemble_spin0(g, links)


def sphere_operator(N1: int, N2: int, B0: float = 0.0) -> lat.SurfaceOperator:
    g = lat.build_grid(SurfaceSpec.sphere(1.0), N1, N2)
    return lat.assemble_spin0(g, lat.link_phases(g, fl.UniformB((0.0, 0.0, 1.0), B0)))


def cylinder_pauli(N1: int, N2: int, B0: float = 0.0, soc=None, alpha: float = 0.0, chi=None, L: float = math.pi):
    s = SurfaceSpec.cylinder(1.0, L)
    g = lat.build_grid(s, N1, N2)
    p = fl.UniformB((0.0, 0.0, 1.0), B0) if B0 else fl.FluxLine(alpha)
    links = lat.link_phases(g, p)
    if chi is not None:
        links = lat.site_gauge_transform(links, chi)
    b = fl.magnetic_field(p)
    return g, links, lat.assemble_pauli(g, links, soc=soc, b=b)


def random_soc(rng: np.random.Generator, scale: float = 0.5) -> fl.SOCVector:
    return fl.SOCVector(scale * rng.standard_normal((3, 3)))


# ---------------------------------------------------------------------------
# 3: ring spectra


RING_N = 1024
RING_ALPHAS = (0.0, 0.25, 0.5)


def check_ring_spectra(N: int = RING_N, k: int = 7) -> list[Check]:
    out = []
    kin = NATURAL.kinetic
    total = 0.0
    for alpha in RING_ALPHAS:
        with _Timer() as t:
            res = spc.eigen_lowest(ring_operator(N, alpha), k)
        total += t.seconds
        ref = oracle.ring_spectrum(1.0, alpha, k).values(k)
        err = _rel(res.eigenvalues, ref, kin)
        out.append(
            Check(3, f"ring N={N} alpha={alpha} lowest {k}", err <= 1e-5, err, "relative <= 1e-5", t.seconds,
                  "relative to max(|E|, hbar^2/2ma^2)")
        )
    out.append(Check(3, f"ring runtime, {len(RING_ALPHAS)} fluxes", total < 10.0, total, "< 10 s", total))
    out.extend(check_alpha_periodicity(N, criterion=3))
    return out


def check_alpha_periodicity(N: int = RING_N, k: int = 7, criterion: int | str = 3) -> list[Check]:
    out = []
    for alpha in RING_ALPHAS:
        with _Timer() as t:
            e0 = spc.eigen_lowest(ring_operator(N, alpha), k).eigenvalues
            e1 = spc.eigen_lowest(ring_operator(N, alpha + 1.0), k).eigenvalues
        drift = float(np.abs(e0 - e1).max())
        out.append(Check(criterion, f"ring alpha-periodicity N={N} alpha={alpha} lowest {k}", drift <= 1e-12, drift,
                         "<= 1e-12", t.seconds))
    return out


# ---------------------------------------------------------------------------
# 4: discrete gauge invariance


def check_site_gauge(seed: int = SEED) -> list[Check]:
    rng = np.random.default_rng(seed + 4)
    out = []
    with _Timer() as t:
        g = lat.build_grid(SurfaceSpec.ring(1.0), 256)
        links = lat.link_phases(g, fl.FluxLine(0.3))
        chi = rng.uniform(0.0, geo.TWO_PI, g.shape)
        e0 = spc.eigen_lowest(lat.assemble_spin0(g, links), g.n_sites).eigenvalues
        e1 = spc.eigen_lowest(lat.assemble_spin0(g, lat.site_gauge_transform(links, chi)), g.n_sites).eigenvalues
    drift = float(np.abs(e0 - e1).max())
    out.append(Check(4, "site gauge ring N=256 full spectrum", drift <= 1e-12, drift, "<= 1e-12", t.seconds))

    with _Timer() as t:
        chi = rng.uniform(0.0, geo.TWO_PI, (64, 64))
        e0 = spc.eigen_lowest(torus_operator(64, 64), 20, backend="lanczos", seed=seed).eigenvalues
        e1 = spc.eigen_lowest(torus_operator(64, 64, chi=chi), 20, backend="lanczos", seed=seed).eigenvalues
    drift = float(np.abs(e0 - e1).max())
    out.append(Check(4, "site gauge torus 64x64 lowest 20", drift <= 1e-12, drift, "<= 1e-12", t.seconds))
    return out


# ---------------------------------------------------------------------------
# 5: continuum gauge consistency


def _chi(q1, q2):
    return np.sin(q1) * np.cos(q2)


def _grad_chi(q1, q2):
    return np.cos(q1) * np.cos(q2), -np.sin(q1) * np.sin(q2)


GAUGE_SIZES = (32, 64, 128)


def gauge_drift(N: int, quad_order: int = 4, k: int = 10, B0: float = 0.5, seed: int = SEED) -> tuple[float, float]:
    """Max drift of the lowest ``k`` torus levels under ``A -> A + grad' chi``."""
    s = SurfaceSpec.torus(2.0, 0.5)
    p = fl.UniformB((0.0, 0.0, 1.0), B0)
    shifted = fl.gauge_shift(p, _chi, s, grad=_grad_chi)
    t0 = time.perf_counter()
    e0 = spc.eigen_lowest(torus_operator(N, N, potential=p, quad_order=quad_order), k, backend="lanczos", seed=seed)
    e1 = spc.eigen_lowest(torus_operator(N, N, potential=shifted, quad_order=quad_order), k, backend="lanczos", seed=seed)
    return float(np.abs(e0.eigenvalues - e1.eigenvalues).max()), time.perf_counter() - t0


def check_continuum_gauge(sizes=GAUGE_SIZES, floor: float = 1e-12) -> list[Check]:
    drifts, secs = [], 0.0
    for N in sizes:
        d, t = gauge_drift(N)
        drifts.append(d)
        secs += t
    rep = spc.fit_order([geo.TWO_PI / N for N in sizes], np.array(drifts), floor=floor)
    note = "drifts " + ", ".join(f"{d:.3e}" for d in drifts)
    if rep.floor.all():
        note += f"; all at or below {floor:g}, order not measurable"
    return [Check(5, "continuum gauge drift order", bool(rep.slope >= 1.8), rep.slope, ">= 1.8", secs, note)]


# ---------------------------------------------------------------------------
# 6: free sphere


SPHERE_LEVELS = (0, 1, 2, 3, 4)


def sphere_reference(k: int = 25) -> np.ndarray:
    return oracle.sphere_spectrum(1.0, max(SPHERE_LEVELS)).values(k)


def check_sphere_free(N1: int = 128, sizes=(32, 64, 128), seed: int = SEED) -> list[Check]:
    k = sum(2 * l + 1 for l in SPHERE_LEVELS)
    ref = sphere_reference(k)
    results = {}
    for n in sorted(set(sizes) | {N1}):
        with _Timer() as t:
            res = spc.eigen_lowest(sphere_operator(n, 2 * n), k, backend="lanczos", seed=seed)
        results[n] = (res, t.seconds)
    res, secs = results[N1]
    err = _rel(res.eigenvalues, ref, NATURAL.kinetic)
    degs = [m for _, m in res.levels()]
    expected_degs = [2 * l + 1 for l in SPHERE_LEVELS]
    out = [
        Check(6, f"sphere {N1}x{2 * N1} levels l<=4", err <= 1e-3, err, "relative <= 1e-3", secs,
              "relative to max(|E|, hbar^2/2ma^2)"),
        Check(6, "sphere degeneracies", degs == expected_degs, float(len(degs)), f"groups {expected_degs}", 0.0,
              f"found {degs}"),
        Check(6, f"sphere {N1}x{2 * N1} Lanczos runtime", secs < 120.0, secs, "< 120 s", secs),
    ]
    errs = np.array([results[n][0].eigenvalues - ref for n in sizes])
    rep = spc.fit_order([math.pi / n for n in sizes], errs[:, 1:])
    out.append(Check(6, "sphere convergence slope", rep.slope >= 1.8, rep.slope, ">= 1.8", 0.0,
                     "min over levels l=1..4"))
    return out


# ---------------------------------------------------------------------------
# 7: sphere in a uniform field


SLOPE_STATES = ((1, 1), (1, -1), (2, 1), (2, -1))


def _sector_level(N1: int, N2: int, B0: float, l: int, m: int) -> float:
    op = sphere_operator(N1, N2, B0)
    ev = np.linalg.eigvalsh(spc.phi_sector(op, m))
    # within a Fourier sector l = |m|, |m|+1, ... in ascending order
    return float(ev[l - abs(m)])


def sphere_b_slope(l: int, m: int, N1: int = 64, N2: int = 1024, h: float = 0.01) -> float:
    """Richardson-extrapolated ``dE/dB0`` at ``B0 = 0`` from central differences."""

    def central(step):
        return (_sector_level(N1, N2, step, l, m) - _sector_level(N1, N2, -step, l, m)) / (2.0 * step)

    return (4.0 * central(0.5 * h) - central(h)) / 3.0


def check_sphere_b_slope(N1: int = 64, N2: int = 1024) -> list[Check]:
    out = []
    for l, m in SLOPE_STATES:
        with _Timer() as t:
            slope = sphere_b_slope(l, m, N1, N2)
            ref = oracle.sphere_uniform_b_first_order(1.0, 1.0, l, m)
        err = abs(slope - ref) / abs(ref)
        out.append(Check(7, f"sphere dE/dB0 (l,m)=({l},{m})", err <= 1e-4, err, "relative <= 1e-4", t.seconds,
                         f"slope {slope:.10f}, oracle {ref:.10f}"))
    return out


# ---------------------------------------------------------------------------
# 9: Pauli reductions


def _small_grids() -> Iterator[lat.LatticeGrid]:
    yield lat.build_grid(SurfaceSpec.ring(1.0), 64)
    yield lat.build_grid(SurfaceSpec.cylinder(1.0, math.pi), 24, 12)
    yield lat.build_grid(SurfaceSpec.sphere(1.0), 16, 32)
    yield lat.build_grid(SurfaceSpec.torus(2.0, 0.5), 24, 24)


def check_pauli_doubling() -> list[Check]:
    out = []
    for g in _small_grids():
        with _Timer() as t:
            links = lat.link_phases(g, fl.zero_potential())
            H0 = lat.assemble_spin0(g, links)
            HP = lat.assemble_pauli(g, links, soc=fl.SOCVector(np.zeros((3, 3))), b=fl.MagneticFieldSpec.constant((0, 0, 0)))
            n = g.n_sites
            M = HP.matrix
            A, B, C, D = M[:n, :n], M[n:, n:], M[:n, n:], M[n:, :n]
            same = (A != H0.matrix).nnz == 0 and (B != H0.matrix).nnz == 0 and C.count_nonzero() == 0 and D.count_nonzero() == 0
            e0 = spc.eigen_lowest(H0, n).eigenvalues
            e1 = spc.eigen_lowest(HP, 2 * n).eigenvalues
        # the 2n solve only differs from the n solve by round-off
        drift = float(np.abs(np.repeat(e0, 2) - e1).max()) / H0.scale
        ok = same and drift <= 1e-12
        out.append(Check(9, f"Pauli W=0 B=0 doubling, {g.surface.kind.value}", ok, drift,
                         "bitwise equal blocks; spectra within 1e-12 scale", t.seconds,
                         "blocks identical" if same else "blocks differ"))
    return out


def check_zeeman_split(B0: float = 0.2, N1: int = 32, N2: int = 16) -> list[Check]:
    with _Timer() as t:
        g, links, HP = cylinder_pauli(N1, N2, B0=B0)
        H0 = lat.assemble_spin0(g, links)
        n = g.n_sites
        e0 = spc.eigen_lowest(H0, n).eigenvalues
        e1 = spc.eigen_lowest(HP, 2 * n).eigenvalues
    shift = NATURAL.magneton * B0
    expect = np.sort(np.concatenate([e0 - shift, e0 + shift]))
    drift = float(np.abs(e1 - expect).max())
    return [Check(9, f"Zeeman splitting, cylinder B0={B0}", drift <= 1e-10, drift, "<= 1e-10", t.seconds,
                  f"split +-{shift:g}")]


# ---------------------------------------------------------------------------
# 10: spin-orbit identity


def check_soc_identity(count: int = 10, seed: int = SEED) -> list[Check]:
    out = []
    rng = np.random.default_rng(seed + 10)
    for s in CURVED:
        g = lat.build_grid(SurfaceSpec.cylinder(1.0, 4.0) if s.kind is geo.SurfaceKind.CYLINDER else s, 64, 64)
        Q1, Q2 = g.mesh()
        worst, mag = 0.0, 0.0
        with _Timer() as t:
            for _ in range(count):
                rep = oracle.soc_divergence_identity_residual(s, rng.standard_normal((3, 3)), Q1, Q2)
                worst = max(worst, rep.max_residual)
                mag = max(mag, rep.max_magnitude)
        out.append(Check(10, f"SOC divergence identity, {s.kind.value}", worst <= 1e-10, worst, "<= 1e-10", t.seconds,
                         f"{count} random W, largest term {mag:.3g}"))
    return out


PAULI_SOC_GRID = (24, 12)


def pauli_soc_operators(seed: int = SEED):
    """Pauli cylinder with random flux and W, and a random site-gauge copy."""
    rng = np.random.default_rng(seed + 11)
    alpha = float(rng.uniform(-1.0, 1.0))
    soc = random_soc(rng)
    chi = rng.uniform(0.0, geo.TWO_PI, PAULI_SOC_GRID)
    _, _, op = cylinder_pauli(*PAULI_SOC_GRID, soc=soc, alpha=alpha)
    _, _, op2 = cylinder_pauli(*PAULI_SOC_GRID, soc=soc, alpha=alpha, chi=chi)
    return alpha, op, op2


def check_pauli_soc_gauge(seed: int = SEED) -> list[Check]:
    with _Timer() as t:
        alpha, op, op2 = pauli_soc_operators(seed)
        herm = op.hermiticity_residual() / op.scale
        e0 = spc.eigen_lowest(op, op.dim).eigenvalues
        e1 = spc.eigen_lowest(op2, op2.dim).eigenvalues
    drift = float(np.abs(e0 - e1).max())
    return [
        Check(10, f"Pauli SOC cylinder Hermitian (alpha={alpha:.4f})", herm <= 1e-13, herm, "<= 1e-13 relative", t.seconds),
        Check(10, "Pauli SOC cylinder site gauge, full spectrum", drift <= 1e-12, drift, "<= 1e-12", 0.0),
    ]


# ---------------------------------------------------------------------------
# 8: Hermiticity of every operator above


def criterion_operators(seed: int = SEED) -> Iterator[tuple[str, lat.SurfaceOperator]]:
    for alpha in RING_ALPHAS:
        yield f"ring N={RING_N} alpha={alpha}", ring_operator(RING_N, alpha)
        yield f"ring N={RING_N} alpha={alpha + 1}", ring_operator(RING_N, alpha + 1.0)
    rng = np.random.default_rng(seed + 4)
    g = lat.build_grid(SurfaceSpec.ring(1.0), 256)
    links = lat.link_phases(g, fl.FluxLine(0.3))
    yield "ring N=256 gauge copy", lat.assemble_spin0(g, lat.site_gauge_transform(links, rng.uniform(0, geo.TWO_PI, g.shape)))
    yield "torus 64x64", torus_operator(64, 64)
    yield "torus 64x64 gauge copy", torus_operator(64, 64, chi=rng.uniform(0, geo.TWO_PI, (64, 64)))
    s = SurfaceSpec.torus(2.0, 0.5)
    shifted = fl.gauge_shift(fl.UniformB((0.0, 0.0, 1.0), 0.5), _chi, s, grad=_grad_chi)
    for N in GAUGE_SIZES:
        yield f"torus {N}^2", torus_operator(N, N)
        yield f"torus {N}^2 gauge shifted", torus_operator(N, N, potential=shifted)
    for N in (32, 64, 128):
        yield f"sphere {N}x{2 * N}", sphere_operator(N, 2 * N)
    for B0 in (0.005, 0.01):
        for sign in (1, -1):
            yield f"sphere 64x1024 B0={sign * B0}", sphere_operator(64, 1024, sign * B0)
    for g in _small_grids():
        yield f"Pauli {g.surface.kind.value} W=0", lat.assemble_pauli(g, soc=fl.SOCVector(np.zeros((3, 3))))
    yield "Pauli cylinder Zeeman", cylinder_pauli(32, 16, B0=0.2)[2]
    _, op, op2 = pauli_soc_operators(seed)
    yield "Pauli cylinder SOC", op
    yield "Pauli cylinder SOC gauge copy", op2


def check_hermiticity(seed: int = SEED) -> list[Check]:
    worst, name, count = 0.0, "", 0
    with _Timer() as t:
        for label, op in criterion_operators(seed):
            r = op.hermiticity_residual() / op.scale
            count += 1
            if r >= worst:
                worst, name = r, label
    return [Check(8, f"Hermiticity of {count} operators", worst <= 1e-13, worst, "<= 1e-13 relative", t.seconds,
                  f"worst: {name}")]


# ---------------------------------------------------------------------------
# 11: solver cross-validation


def check_solver_agreement(seed: int = SEED) -> list[Check]:
    op = torus_operator(64, 64)
    with _Timer() as t:
        d = spc.eigen_lowest(op, 10, backend="dense")
        z = spc.eigen_lowest(op, 10, backend="lanczos", seed=seed)
    err = _rel(z.eigenvalues, d.eigenvalues, NATURAL.kinetic)
    return [
        Check(11, f"dense vs Lanczos, torus dim {op.dim}", err <= 1e-9, err, "relative <= 1e-9", t.seconds),
        Check(11, "dense + Lanczos runtime", t.seconds < 60.0, t.seconds, "< 60 s", t.seconds),
    ]


# ---------------------------------------------------------------------------
# convergence orders outside the numbered list


def check_ring_order(sizes=(64, 128, 256, 512)) -> list[Check]:
    with _Timer() as t:
        rep = spc.convergence_study(
            lambda N: ring_operator(N, 0.0), 3, sizes, oracle.ring_spectrum(1.0, 0.0, 2).values(3),
        )
    # levels n = +-1 are the 2nd and 3rd eigenvalues
    slope = float(np.min(rep.slopes[1:]))
    return [Check("order", "ring n=1 convergence slope", abs(slope - 2.0) <= 0.1, slope, "2.0 +- 0.1", t.seconds)]


def check_sphere_order(sizes=(32, 64, 128)) -> list[Check]:
    with _Timer() as t:
        errs = []
        for n in sizes:
            op = sphere_operator(n, 2 * n)
            e0 = np.linalg.eigvalsh(spc.phi_sector(op, 0))[1]
            e1 = np.linalg.eigvalsh(spc.phi_sector(op, 1))[0]
            errs.append([e0 - 1.0, e1 - 1.0])
        rep = spc.fit_order([math.pi / n for n in sizes], np.array(errs))
    return [Check("order", "sphere l=1 convergence slope", rep.slope >= 1.8, rep.slope, ">= 1.8", t.seconds,
                  "m=0 and m=1 Fourier sectors")]


def check_floor_order(sizes=(64, 128, 256)) -> list[Check]:
    errs = []
    for N in sizes:
        e0 = spc.eigen_lowest(ring_operator(N, 0.25), 5).eigenvalues
        e1 = spc.eigen_lowest(ring_operator(N, 1.25), 5).eigenvalues
        errs.append(e0 - e1)
    rep = spc.fit_order([geo.TWO_PI / N for N in sizes], np.array(errs))
    flagged = bool(rep.floor.all())
    return [Check("order", "alpha-periodicity errors flagged at floor", flagged, float(np.abs(rep.errors).max()),
                  "all levels at floor")]


# ---------------------------------------------------------------------------
# suites


CRITERIA: dict[int, Callable[[], list[Check]]] = {
    1: check_gke_table,
    2: check_normal_momentum,
    3: check_ring_spectra,
    4: check_site_gauge,
    5: check_continuum_gauge,
    6: check_sphere_free,
    7: check_sphere_b_slope,
    8: check_hermiticity,
    9: lambda: check_pauli_doubling() + check_zeeman_split(),
    10: lambda: check_soc_identity() + check_pauli_soc_gauge(),
    11: check_solver_agreement,
}

SUITES: dict[str, tuple[Callable[[], list[Check]], ...]] = {
    "curvature": (check_gke_table, check_normal_momentum),
    "gauge": (check_site_gauge, lambda: check_alpha_periodicity(criterion="gauge")),
    "identity": (check_soc_identity, check_pauli_soc_gauge, check_hermiticity),
    "spectra": (check_ring_spectra, check_sphere_free, check_sphere_b_slope, check_pauli_doubling,
                check_zeeman_split, check_solver_agreement),
    "convergence": (check_continuum_gauge, check_ring_order, check_sphere_order, check_floor_order),
}


def run_suite(name: str) -> SuiteReport:
    if name not in SUITES:
        raise ConfigurationError(f"unknown suite {name!r}; expected one of {sorted(SUITES)}", field="suite")
    checks: list[Check] = []
    for fn in SUITES[name]:
        checks.extend(fn())
    return SuiteReport(name, checks)


def run_criteria(numbers=None) -> list[Check]:
    out: list[Check] = []
    for c in numbers or sorted(CRITERIA):
        out.extend(CRITERIA[c]())
    return out
