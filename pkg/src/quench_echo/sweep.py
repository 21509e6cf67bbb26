"""Parameter sweeps, finite-size scaling and fidelity comparisons.

A sweep evaluates one quench per grid point of the final parameter, in a
worker pool, and gathers the results into grid order before anything is
written, so output bytes do not depend on the worker count.
"""

from __future__ import annotations

import dataclasses
import io
import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .aa import GOLDEN, AAParams, aa_quench_average, build_aa_hamiltonian, potential_profile
from .echo import DEGENERACY_TOL
from .errors import QuenchEchoError, ValidationError
from .fidelity import (
    DEFAULT_DELTA,
    aa_echo_closure,
    chi_delta_numeric,
    fidelity_susceptibility_pert,
    haldane_echo_closure,
    haldane_susceptibilities,
    ising_echo_closure,
    ising_susceptibilities,
)
from .haldane import HaldaneParams, chi_lambda, haldane_rate
from .ising import IsingParams, ising_rate_discrete
from .linalg import eig_hermitian

log = logging.getLogger(__name__)

CSV_HEADER = ("lambda_f", "L_bar", "eta", "chi")
SCALING_HEADER = ("size", "peak_location", "peak_height")
FIDELITY_HEADER = ("lambda", "chi_delta", "four_chi_F")

# model -> (allowed quench parameters, fixed-parameter defaults, size bounds)
MODELS = {
    "aa": (("delta",), {"J": 1.0, "alpha": GOLDEN}, (2, 4096)),
    "ising": (("h",), {"J": 1.0}, (4, 1 << 20)),
    "haldane": (("M", "phi"), {"M": 0.0, "phi": math.pi / 2, "t1": 4.0, "t2": 1.0}, (4, 256)),
}


def fmt(x) -> str:
    """Round-trip exact float formatting; ``None`` becomes an empty field."""
    if x is None:
        return ""
    return format(float(x), ".17g")


@dataclass(frozen=True)
class SweepConfig:
    model: str
    quench_parameter: str
    lambda_i: float
    lambda_f_grid: tuple
    size: int
    fixed_params: dict = field(default_factory=dict)
    derivative_step: float | None = None
    degeneracy_tol: float = DEGENERACY_TOL
    output_path: str | None = None

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValidationError(f"unknown model {self.model!r}; choose from {sorted(MODELS)}")
        allowed, defaults, (lo, hi) = MODELS[self.model]
        if self.quench_parameter not in allowed:
            raise ValidationError(
                f"model {self.model!r} is quenched in {allowed}, not {self.quench_parameter!r}"
            )
        extra = set(self.fixed_params) - set(defaults)
        if extra:
            raise ValidationError(f"unknown fixed parameters for {self.model}: {sorted(extra)}")
        if self.quench_parameter in self.fixed_params:
            raise ValidationError(f"{self.quench_parameter!r} is the quench parameter and cannot be fixed")
        try:
            start, stop, count = self.lambda_f_grid
        except (TypeError, ValueError):
            raise ValidationError("lambda_f_grid must be [start, stop, count]") from None
        if int(count) != count or count < 2:
            raise ValidationError(f"grid count must be an integer >= 2, got {count}")
        if not start < stop:
            raise ValidationError(f"grid start {start} must be below stop {stop}")
        object.__setattr__(self, "lambda_f_grid", (float(start), float(stop), int(count)))
        if int(self.size) != self.size or not lo <= self.size <= hi:
            raise ValidationError(f"size for {self.model} must be an integer in [{lo}, {hi}], got {self.size}")
        object.__setattr__(self, "size", int(self.size))
        if self.model == "ising" and self.size % 2:
            raise ValidationError("Ising chain length must be even")
        if self.derivative_step is not None:
            m = self.derivative_step / self.grid_step
            if not self.derivative_step > 0 or abs(m - round(m)) > 1e-9 or round(m) < 1:
                raise ValidationError(
                    f"derivative_step {self.derivative_step} must be a positive multiple of the grid step {self.grid_step}"
                )
        if not self.degeneracy_tol >= 0:
            raise ValidationError("degeneracy_tol must be non-negative")

    @classmethod
    def from_dict(cls, d: dict) -> "SweepConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        missing = {"model", "quench_parameter", "lambda_i", "lambda_f_grid", "size"} - set(d)
        if missing:
            raise ValidationError(f"missing config keys: {sorted(missing)}")
        return cls(**d)

    @classmethod
    def from_json(cls, path) -> "SweepConfig":
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: invalid JSON ({exc})") from None
        if not isinstance(data, dict):
            raise ValidationError(f"{path}: config must be a JSON object")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["lambda_f_grid"] = list(self.lambda_f_grid)
        d["fixed_params"] = dict(sorted(self.fixed_params.items()))
        return d

    def replace(self, **changes) -> "SweepConfig":
        return dataclasses.replace(self, **changes)

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(*self.lambda_f_grid)

    @property
    def grid_step(self) -> float:
        start, stop, count = self.lambda_f_grid
        return (stop - start) / (count - 1)

    @property
    def stencil(self) -> int:
        if self.derivative_step is None:
            return 1
        return int(round(self.derivative_step / self.grid_step))

    def params(self) -> dict:
        return {**MODELS[self.model][1], **self.fixed_params}

    @property
    def modes(self) -> int:
        """Number of factors in the many-body echo (sites or momenta)."""
        return self.size * self.size if self.model == "haldane" else self.size


@dataclass
class SweepRow:
    lambda_f: float
    L_bar: float | None = None
    eta: float | None = None
    chi: float | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass
class SweepResult:
    rows: list
    meta: dict

    @property
    def failed(self) -> list:
        return [r for r in self.rows if not r.ok]

    @property
    def partial(self) -> bool:
        return bool(self.meta.get("partial"))

    def column(self, name: str) -> np.ndarray:
        return np.array([np.nan if getattr(r, name) is None else getattr(r, name) for r in self.rows])

    def to_csv(self) -> str:
        return table_csv(CSV_HEADER, ((r.lambda_f, r.L_bar, r.eta, r.chi) for r in self.rows))

    def meta_json(self) -> str:
        return json.dumps(self.meta, indent=2, sort_keys=True) + "\n"


def table_csv(header, rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(fmt(x) for x in row) + "\n")
    return buf.getvalue()


def meta_path(output_path) -> Path:
    p = Path(output_path)
    return p.with_name(p.stem + ".meta.json")


def evaluate_point(cfg: SweepConfig, lambda_f: float):
    """``(L_bar, eta)`` for one quench ``lambda_i -> lambda_f``."""
    prm = cfg.params()
    if cfg.model == "aa":
        p_i = AAParams(cfg.size, cfg.lambda_i, prm["J"], prm["alpha"])
        return aa_quench_average(p_i, lambda_f, cfg.degeneracy_tol)
    if cfg.model == "ising":
        eta = ising_rate_discrete(cfg.lambda_i, lambda_f, cfg.size, prm["J"])
    else:
        base = HaldaneParams(prm["M"], prm["phi"], cfg.size, prm["t1"], prm["t2"])
        q = cfg.quench_parameter
        eta = haldane_rate(base.replace(**{q: cfg.lambda_i}), base.replace(**{q: float(lambda_f)}), cfg.degeneracy_tol)
    return math.exp(-cfg.modes * eta), eta


def _safe_point(cfg, lam):
    try:
        return evaluate_point(cfg, lam), None
    except QuenchEchoError as exc:
        return None, f"{type(exc).__name__}: {exc}"


def _map_ordered(fn, items, threads: int):
    """Apply ``fn`` to ``items`` with ``threads`` workers; results in input order.

    On KeyboardInterrupt the completed prefix-independent results are kept and
    the rest are reported as ``None``; the second return value says whether
    the run was cut short.
    """
    out = [None] * len(items)
    if threads <= 1:
        try:
            for i, x in enumerate(items):
                out[i] = fn(x)
        except KeyboardInterrupt:
            return out, True
        return out, False
    pool = ThreadPoolExecutor(max_workers=threads)
    futures = [pool.submit(fn, x) for x in items]
    try:
        for i, f in enumerate(futures):
            out[i] = f.result()
    except KeyboardInterrupt:
        for f in futures:
            f.cancel()
        pool.shutdown(wait=True, cancel_futures=True)
        for i, f in enumerate(futures):
            if f.done() and not f.cancelled() and f.exception() is None:
                out[i] = f.result()
        return out, True
    pool.shutdown()
    return out, False


def run_sweep(cfg: SweepConfig, threads: int = 1, record_wall_time: bool = False) -> SweepResult:
    """Evaluate ``L_bar``, ``eta`` and ``chi`` on every grid point.

    ``chi`` is the negative second difference of ``eta`` on the sweep grid
    itself (stencil spacing ``derivative_step``, default one grid step) and is
    empty where the stencil leaves the grid or touches a failed row. Rows that
    raise are kept and marked failed; the sweep continues.
    """
    t0 = time.perf_counter()
    grid = cfg.grid
    log.info("sweep %s/%s: %d points, size %d, %d worker(s)", cfg.model, cfg.quench_parameter, len(grid), cfg.size, threads)
    results, interrupted = _map_ordered(lambda lam: _safe_point(cfg, lam), list(grid), threads)

    rows = []
    for lam, res in zip(grid, results):
        if res is None:
            rows.append(None)
            continue
        value, err = res
        if err is not None:
            log.warning("lambda_f=%s failed: %s", fmt(lam), err)
            rows.append(SweepRow(float(lam), error=err))
        else:
            rows.append(SweepRow(float(lam), value[0], value[1]))

    m, h = cfg.stencil, cfg.stencil * cfg.grid_step
    for i, row in enumerate(rows):
        if row is None or not row.ok or i - m < 0 or i + m >= len(rows):
            continue
        lo, hi = rows[i - m], rows[i + m]
        if lo is None or hi is None or not lo.ok or not hi.ok:
            continue
        row.chi = chi_lambda((lo.eta, row.eta, hi.eta), h)

    done = [r for r in rows if r is not None]
    meta: dict[str, Any] = {
        "config": cfg.to_dict(),
        "version": __version__,
        "columns": list(CSV_HEADER),
        "eta_normalization": "per momentum mode" if cfg.model == "haldane" else "per site",
        "rows": len(done),
        "partial": interrupted,
        "failed_rows": [{"lambda_f": r.lambda_f, "error": r.error} for r in done if not r.ok],
    }
    wall = time.perf_counter() - t0
    if record_wall_time:
        meta["wall_time_s"] = wall
    log.info("sweep finished in %.2f s (%d failed)", wall, len(meta["failed_rows"]))
    return SweepResult(done, meta)


def parabolic_peak(x, y):
    """Vertex of the parabola through the discrete maximum and its neighbours.

    NaN entries are ignored when locating the maximum. At the edge of the
    finite data the discrete maximum itself is returned.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    valid = np.isfinite(y)
    if not np.any(valid):
        raise ValidationError("no finite values to locate a peak")
    i = int(np.nanargmax(np.where(valid, y, -np.inf)))
    if i == 0 or i == len(y) - 1 or not (valid[i - 1] and valid[i + 1]):
        return float(x[i]), float(y[i])
    ym, y0, yp = y[i - 1], y[i], y[i + 1]
    curv = ym - 2.0 * y0 + yp
    if curv >= 0:
        return float(x[i]), float(y0)
    s = 0.5 * (ym - yp) / curv
    dx = x[i + 1] - x[i]
    return float(x[i] + s * dx), float(y0 - 0.25 * (ym - yp) * s)


@dataclass(frozen=True)
class ScalingRow:
    size: int
    peak_location: float
    peak_height: float


def run_scaling(cfg: SweepConfig, sizes, threads: int = 1) -> list:
    """Peak location and height of the transition signal at several sizes.

    The signal is ``chi`` for the Haldane model and ``|dL_bar/dDelta_f|`` for
    the Aubry-Andre chain. The Ising rate has a size-independent closed form,
    so a scaling study is refused.
    """
    if cfg.model == "ising":
        raise ValidationError("finite-size scaling is undefined for the Ising chain (closed-form, size-independent rate)")
    sizes = [int(s) for s in sizes]
    if len(sizes) < 2 or sorted(set(sizes)) != sizes:
        raise ValidationError(f"sizes must be strictly ascending with at least two entries, got {sizes}")
    table = []
    for size in sizes:
        res = run_sweep(cfg.replace(size=size), threads=threads)
        if res.failed or res.partial:
            raise QuenchEchoError(f"sweep at size {size} did not complete cleanly")
        x = res.column("lambda_f")
        if cfg.model == "aa":
            y = np.abs(np.gradient(res.column("L_bar"), x))
        else:
            y = res.column("chi")
        loc, height = parabolic_peak(x, y)
        log.info("size %d: peak at %.6g, height %.6g", size, loc, height)
        table.append(ScalingRow(size, loc, height))
    return table


def fidelity_point(cfg: SweepConfig, lam: float, delta: float = DEFAULT_DELTA):
    """``(chi_delta, 4 chi_F)`` at ``lam`` by finite quench and by perturbation sum."""
    prm = cfg.params()
    lam = float(lam)
    if cfg.model == "aa":
        p = AAParams(cfg.size, lam, prm["J"], prm["alpha"])
        chi_d = chi_delta_numeric(aa_echo_closure(p, cfg.degeneracy_tol), lam, delta)
        spec = eig_hermitian(build_aa_hamiltonian(p))
        chi_f = fidelity_susceptibility_pert(spec, np.diag(potential_profile(p)))
    elif cfg.model == "ising":
        chi_d = chi_delta_numeric(ising_echo_closure(prm["J"], cfg.size), lam, delta)
        chi_f = ising_susceptibilities(IsingParams(lam, prm["J"]), cfg.size)[1]
    else:
        q = cfg.quench_parameter
        p = HaldaneParams(prm["M"], prm["phi"], cfg.size, prm["t1"], prm["t2"]).replace(**{q: lam})
        chi_d = chi_delta_numeric(haldane_echo_closure(p, q), lam, delta)
        chi_f = haldane_susceptibilities(p, q)[1]
    return chi_d, 4.0 * chi_f


def run_fidelity_compare(cfg: SweepConfig, lambda_grid=None, delta: float = DEFAULT_DELTA, threads: int = 1) -> list:
    """Table of ``(lambda, chi_delta, four_chi_F)`` over ``lambda_grid``.

    Defaults to the config's ``lambda_f_grid``; ``lambda_i`` is ignored since
    each row quenches from ``lambda`` to ``lambda + delta``.
    """
    if not delta > 0:
        raise ValidationError(f"delta must be positive, got {delta}")
    grid = cfg.grid if lambda_grid is None else np.asarray(lambda_grid, dtype=float)
    values, interrupted = _map_ordered(lambda lam: fidelity_point(cfg, lam, delta), list(grid), threads)
    if interrupted:
        raise KeyboardInterrupt
    return [(float(lam), cd, fc) for lam, (cd, fc) in zip(grid, values)]
