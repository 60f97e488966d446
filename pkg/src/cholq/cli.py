"""Command-line orchestration: validated configs, deterministic artifacts.

Six commands cover the library's pipelines::

    cholq bulk solve        equilibrium orders + twisting-power ratio (stdout/CSV)
    cholq bulk map          (tau, alpha) sweep -> CSV + gnuplot matrix
    cholq frank             elastic constants, chiral strength, wavenumber
    cholq gamma             coarsening-gap table for a kernel file
    cholq minimize          descend the discrete energy from a chosen start
    cholq validate-kernels  structural-assumption audit of a kernel file

Every file-writing run leaves ``<prefix>.manifest.json`` beside its outputs
with the echoed configuration, package version, wall time, and every derived
constant the pipeline consumed.  CSV and binary outputs are byte-identical
across repeated runs of the same configuration and seed: the only randomness
is numpy's PCG64 generator seeded explicitly through ``--seed``, and all
floats are printed through one fixed 12-significant-digit formatter.

Exit codes: 0 success; 2 configuration error (bad flags, malformed files,
out-of-domain parameters); 3 numerical failure (solver or quadrature, with
the module error echoed); 4 kernel-assumption violation.

The ``CHOLESTERIC_THREADS`` environment variable caps worker threads in the
pipelines that parallelize internally; the orchestration here stays
single-threaded.
"""

from __future__ import annotations

import dataclasses
import sys
import time
from dataclasses import dataclass

import click
import numpy as np

from . import __version__, bulk, kernels, oflimit, qtensor, runtime, torus
from . import nonlocal_energy as nl
from .errors import AssumptionViolation, ConfigError, NumericalError

_COMMANDS = ("bulk-solve", "bulk-map", "frank", "gamma", "minimize", "validate-kernels")
_NEED_KERNELS = ("frank", "gamma", "minimize", "validate-kernels")
_NEED_OUT = ("bulk-map", "gamma", "minimize")


# ----------------------------------------------------------------------
# Configuration
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class RunConfig:
    """One validated run request; every pipeline consumes exactly one.

    ``from_mapping`` rejects unknown keys so stale or misspelled options
    fail loudly instead of silently using defaults.
    """

    command: str
    kernels: str | None = None
    out: str | None = None
    tau: float | None = None
    alpha: float | None = None
    rho0: float = 1.0
    eps_list: tuple = ()
    grid: tuple = ()
    quad_degree: int | None = None
    seed: int = 0
    tol: float = 1e-8
    descent: str = "helix"
    init: str = "helix"
    max_iter: int = 800
    mode: str = "auto"
    tau_range: tuple = (0.02, 0.16, 20)
    alpha_range: tuple = (0.1, 2.0, 20)

    @classmethod
    def from_mapping(cls, mapping):
        allowed = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(mapping) - allowed)
        if unknown:
            raise ConfigError(f"unknown config key '{unknown[0]}'")
        try:
            cfg = cls(**mapping)
        except TypeError as exc:
            raise ConfigError(f"bad config: {exc}") from exc
        cfg.validate()
        return cfg

    def validate(self):
        """Check every numeric field against its pipeline's precondition."""
        if self.command not in _COMMANDS:
            raise ConfigError(f"unknown command '{self.command}'")
        if self.command in _NEED_KERNELS and not self.kernels:
            raise ConfigError(f"{self.command}: a kernel file is required")
        if self.command in _NEED_OUT and not self.out:
            raise ConfigError(f"{self.command}: an output prefix is required")
        if self.tau is not None and not self.tau > 0:
            raise ConfigError("tau must be positive")
        if self.alpha is not None and not self.alpha > 0:
            raise ConfigError("alpha must be positive")
        if not np.isfinite(self.rho0) or self.rho0 < 0:
            raise ConfigError("rho0 must be a finite non-negative number")
        if any(not (float(e) > 0) for e in self.eps_list):
            raise ConfigError("every eps must be positive")
        if any(int(n) <= 0 or int(n) != n for n in self.grid):
            raise ConfigError("grid sizes must be positive integers")
        if len(self.grid) not in (0, 3):
            raise ConfigError("grid must have three sizes n1,n2,n3")
        if self.quad_degree is not None and int(self.quad_degree) < 8:
            raise ConfigError("quad_degree must be at least 8")
        if int(self.seed) < 0:
            raise ConfigError("seed must be a non-negative integer")
        if not self.tol > 0:
            raise ConfigError("tol must be positive")
        if self.descent not in ("none", "helix", "random", "both"):
            raise ConfigError(f"unknown descent option '{self.descent}'")
        if self.mode not in ("auto", "spectral", "sampled"):
            raise ConfigError(f"unknown evaluation mode '{self.mode}'")
        kind = self.init.split(":", 1)[0]
        if kind not in ("helix", "random", "random-profile", "constant"):
            raise ConfigError(f"unknown initializer '{self.init}'")
        for rng_name, rng in (("tau-range", self.tau_range), ("alpha-range", self.alpha_range)):
            lo, hi, n = rng
            if not (0 < lo <= hi) or int(n) < 1:
                raise ConfigError(f"{rng_name}: need 0 < min <= max and steps >= 1")
        if self.max_iter < 1:
            raise ConfigError("max_iter must be at least 1")


def _jsonable(value):
    if isinstance(value, (np.floating, float)):
        return float(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (tuple, list)):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    return value


def _write_manifest(cfg, derived, outputs, t0):
    """Manifest JSON beside the outputs; carries every consumed constant."""
    manifest = {
        "command": cfg.command,
        "config": _jsonable(dataclasses.asdict(cfg)),
        "version": __version__,
        "wall_time_s": round(time.time() - t0, 3),
        "derived_constants": {k: _jsonable(v) for k, v in derived.items()},
        "outputs": sorted(outputs),
    }
    path = f"{cfg.out}.manifest.json"
    runtime.dump_json(manifest, path)
    return path


def _pnum(x):
    """Stdout float format: fmt(), but scalars always keep a decimal point."""
    s = runtime.fmt(x)
    return s if any(c in s for c in ".en") else s + ".0"


def _write_lines(path, lines):
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


# ----------------------------------------------------------------------
# Pipelines (pure functions of a RunConfig; the click layer is plumbing)
# ----------------------------------------------------------------------

def _derived_for_kernels(ks, n_radial=None):
    kw = {} if n_radial is None else {"n_radial": int(n_radial)}
    k_hh = kernels.k0(ks.HH, **kw)
    k_hd = kernels.k0(ks.HD, **kw)
    k_dd = kernels.k0(ks.DD, **kw)
    if k_hh <= 0:
        raise ConfigError("kernel file: host-host mean coupling must be positive")
    return {"k0_HH": k_hh, "k0_HD": k_hd, "k0_DD": k_dd,
            "beta": kernels.beta_coefficient(ks.cH),
            "tau": 1.0 / k_hh, "alpha": k_hd / k_hh}


def _load_kernels(cfg):
    ks = kernels.load_kernel_set(cfg.kernels)
    return ks, _derived_for_kernels(ks, n_radial=cfg.quad_degree)


def run_bulk_solve(cfg):
    t0 = time.time()
    tau = 0.12 if cfg.tau is None else cfg.tau
    alpha = 1.0 if cfg.alpha is None else cfg.alpha
    s0 = bulk.solve_s0(tau)
    htp = bulk.htp_dimensionless(tau, alpha)  # raises DomainError when isotropic
    sc = htp * s0
    line = (f"tau={_pnum(tau)} alpha={_pnum(alpha)} "
            f"s0={_pnum(s0)} sc={_pnum(sc)} htp={_pnum(htp)}")
    click.echo(line)
    derived = {"s0": s0, "sc": sc, "htp": htp}
    outputs = []
    if cfg.out:
        csv_path = f"{cfg.out}.csv"
        _write_lines(csv_path, ["tau,alpha,s0,sc,htp",
                                ",".join(runtime.fmt(v) for v in (tau, alpha, s0, sc, htp))])
        outputs.append(csv_path)
        outputs.append(_write_manifest(cfg, derived, outputs, t0))
    return 0


def htp_table(taus, alphas):
    """Sweep the twisting-power map; returns (s0s, matrix) with NaN isotropic cells."""
    s0s = np.array([bulk.solve_s0(t) for t in taus])
    matrix = bulk.htp_map(taus, alphas)
    return s0s, matrix


def emit_plotdata(taus, alphas, s0s, matrix, prefix):
    """Write the sweep as a flat CSV plus a gnuplot ``nonuniform matrix`` file.

    The matrix file has one row per alpha and one column per tau, which is
    the native layout of the sweep; no plotting binary is run.  Raises a
    numerical failure when no cell is nematic, since the map would be empty.
    """
    if matrix.size == 0:
        raise ConfigError("emit_plotdata: empty table")
    if not np.isfinite(matrix).any():
        raise NumericalError(
            "empty nematic range: every sampled tau is isotropic; "
            "lower the tau range below the transition")
    csv_path = f"{prefix}.csv"
    lines = ["tau,alpha,s0,sc,htp"]
    for i, a in enumerate(alphas):
        for j, t in enumerate(taus):
            h = matrix[i, j]
            sc = h * s0s[j] if np.isfinite(h) else float("nan")
            s0 = s0s[j] if s0s[j] > 0 else float("nan")
            lines.append(",".join(runtime.fmt(v) for v in (t, a, s0, sc, h)))
    try:
        _write_lines(csv_path, lines)
    except OSError as exc:
        raise NumericalError(f"i/o failure writing '{csv_path}': {exc}") from exc

    mat_path = f"{prefix}.matrix.dat"
    rows = ["# twisting-power ratio sc/s0; gnuplot: splot '...' nonuniform matrix",
            "# first row: ncols then tau values; rows: alpha then one value per tau",
            " ".join([str(len(taus))] + [runtime.fmt(t) for t in taus])]
    for i, a in enumerate(alphas):
        rows.append(" ".join([runtime.fmt(a)] + [runtime.fmt(matrix[i, j])
                                                 for j in range(len(taus))]))
    try:
        _write_lines(mat_path, rows)
    except OSError as exc:
        raise NumericalError(f"i/o failure writing '{mat_path}': {exc}") from exc
    return csv_path, mat_path


def read_plotdata(csv_path):
    """Parse an emitted sweep CSV back into (taus, alphas, matrix).

    Inverse of :func:`emit_plotdata` up to float formatting; used by the
    round-trip check and handy for downstream scripts.
    """
    with open(csv_path) as fh:
        header = fh.readline().strip()
        if header != "tau,alpha,s0,sc,htp":
            raise ConfigError(f"read_plotdata: unexpected header '{header}'")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    taus = sorted({float(r[0]) for r in rows})
    alphas = sorted({float(r[1]) for r in rows})
    ti = {t: j for j, t in enumerate(taus)}
    ai = {a: i for i, a in enumerate(alphas)}
    matrix = np.full((len(alphas), len(taus)), np.nan)
    for r in rows:
        matrix[ai[float(r[1])], ti[float(r[0])]] = float(r[4])
    return np.array(taus), np.array(alphas), matrix


def run_bulk_map(cfg):
    t0 = time.time()
    tlo, thi, tn = cfg.tau_range
    alo, ahi, an = cfg.alpha_range
    taus = np.linspace(tlo, thi, int(tn))
    alphas = np.linspace(alo, ahi, int(an))
    s0s, matrix = htp_table(taus, alphas)
    csv_path, mat_path = emit_plotdata(taus, alphas, s0s, matrix, cfg.out)
    n_nem = int(np.isfinite(matrix[0]).sum())
    click.echo(f"bulk map: {len(alphas)}x{len(taus)} cells, "
               f"{n_nem}/{len(taus)} nematic temperatures -> {csv_path}")
    derived = {"s0_per_tau": list(s0s), "nematic_temperatures": n_nem}
    _write_manifest(cfg, derived, [csv_path, mat_path], t0)
    return 0


def run_frank(cfg):
    t0 = time.time()
    ks, derived = _load_kernels(cfg)
    tau = derived["tau"] if cfg.tau is None else cfg.tau
    alpha = derived["alpha"] if cfg.alpha is None else cfg.alpha
    k11, k22, k33 = kernels.frank_constants(ks.HH)
    s0 = bulk.solve_s0(tau)
    if s0 <= 0:
        raise NumericalError(f"frank: host is isotropic at tau={runtime.fmt(tau)}")
    sc = bulk.solve_sc(tau, alpha, s0=s0)
    q = kernels.wavenumber_q(ks, cfg.rho0, s0, sc)
    derived.update({"K11": k11, "K22": k22, "K33": k33,
                    "s0": s0, "sc": sc, "q": q, "rho0": cfg.rho0})
    lines = ["K11,K22,K33,beta,q",
             ",".join(runtime.fmt(v) for v in (k11, k22, k33, derived["beta"], q))]
    click.echo("\n".join(lines))
    if cfg.out:
        csv_path = f"{cfg.out}.csv"
        _write_lines(csv_path, lines)
        _write_manifest(cfg, derived, [csv_path], t0)
    return 0


def run_gamma(cfg):
    t0 = time.time()
    ks, derived = _load_kernels(cfg)
    eps_list = cfg.eps_list or (0.5, 0.25, 0.125)
    shape = cfg.grid or (4, 4, 64)
    grid = torus.TorusGrid(tuple(int(n) for n in shape))
    schedule = nl.DescentSchedule(max_iter=int(cfg.max_iter))
    rows, coeffs, m_star = oflimit.gamma_gap(
        ks, cfg.rho0, list(eps_list), grid, mode=cfg.mode,
        descent=cfg.descent, schedule=schedule, seed=int(cfg.seed),
        threads=runtime.thread_count())
    csv_path = f"{cfg.out}.csv"
    _write_lines(csv_path, [oflimit.GammaRow.CSV_HEADER] + [r.csv() for r in rows])
    for r in rows:
        click.echo(f"eps={runtime.fmt(r.eps)} gap={runtime.fmt(r.gap)}"
                   + (f" [{r.error}]" if r.error else ""))
    derived.update({"K11": coeffs.K11, "K22": coeffs.K22, "K33": coeffs.K33,
                    "beta": coeffs.beta, "s0": coeffs.s0, "sc": coeffs.sc,
                    "q": coeffs.q, "m_star": m_star, "rho0": cfg.rho0})
    _write_manifest(cfg, derived, [csv_path], t0)
    return 0


def _initial_field(cfg, grid, params):
    kind, _, arg = cfg.init.partition(":")
    if kind == "random":
        return torus.random_field(grid, runtime.make_rng(cfg.seed))
    if kind == "random-profile":
        return torus.random_profile_field(grid, runtime.make_rng(cfg.seed))
    s0e, sce = bulk.perturbed_equilibrium(params)
    if s0e <= 0:
        raise NumericalError("minimize: host is isotropic at the model temperature")
    if kind == "helix":
        m = float(arg) if arg else 0.5
        return torus.helical_ansatz(grid, m, s0e, sce)
    scale = float(arg) if arg else 1.0
    sig_e1 = qtensor.sigma(np.array([1.0, 0.0, 0.0]))  # uniaxial along the first axis
    return torus.constant_field(grid, scale * s0e * sig_e1, scale * sce * sig_e1)


def run_minimize(cfg):
    t0 = time.time()
    ks, derived = _load_kernels(cfg)
    if len(cfg.eps_list) != 1:
        raise ConfigError("minimize: exactly one eps is required")
    eps = float(cfg.eps_list[0])
    shape = cfg.grid or (4, 4, 64)
    grid = torus.TorusGrid(tuple(int(n) for n in shape))
    params = nl.model_params_for(ks, rho0=cfg.rho0, eps=eps)
    start = _initial_field(cfg, grid, params)
    schedule = nl.DescentSchedule(max_iter=int(cfg.max_iter))
    res = nl.minimize(start, ks, params, schedule=schedule, mode=cfg.mode)
    m_fit, fit_info = torus.extract_wavenumber(res.fields.host, grid)
    xi_lock = res.diagnostics.get("xi_lock_rel", float("nan"))
    csv_path = f"{cfg.out}.csv"
    _write_lines(csv_path, [
        "energy,converged,iterations,grad_norm,m_extracted,fit_residual,xi_lock_rel",
        ",".join([runtime.fmt(res.energy), str(int(res.converged)),
                  str(res.iterations), runtime.fmt(res.grad_norm),
                  runtime.fmt(m_fit), runtime.fmt(fit_info.get("residual", float("nan"))),
                  runtime.fmt(xi_lock)])])
    fields_path = torus.save_fields(f"{cfg.out}.fields", res.fields,
                                    meta={"command": "minimize", "eps": eps,
                                          "seed": int(cfg.seed), "init": cfg.init})
    click.echo(f"energy={runtime.fmt(res.energy)} iterations={res.iterations} "
               f"converged={res.converged} m={runtime.fmt(m_fit)} "
               f"xi_lock_rel={runtime.fmt(xi_lock)}")
    s0 = bulk.solve_s0(derived["tau"])
    sc = bulk.solve_sc(derived["tau"], derived["alpha"], s0=s0) if s0 > 0 else float("nan")
    k11, k22, k33 = kernels.frank_constants(ks.HH)
    derived.update({"K11": k11, "K22": k22, "K33": k33, "s0": s0, "sc": sc,
                    "q": kernels.wavenumber_q(ks, cfg.rho0, s0, sc) if s0 > 0 else float("nan"),
                    "eps": eps, "rho0": cfg.rho0})
    _write_manifest(cfg, derived, [csv_path, fields_path, f"{cfg.out}.fields.json"], t0)
    return 0


def run_validate_kernels(cfg):
    ks, _ = _load_kernels(cfg)
    report = kernels.validate_assumptions(ks, seed=int(cfg.seed))
    click.echo(f"envelope bounds: c1={runtime.fmt(report.c1)} "
               f"c2={runtime.fmt(report.c2)} c_chiral={runtime.fmt(report.c_chiral)} "
               f"({report.n_samples} samples)")
    for name, fit in sorted(report.per_kernel.items()):
        if isinstance(fit, tuple):
            click.echo(f"  {name}: eigenvalue/envelope ratio in "
                       f"[{runtime.fmt(fit[0])}, {runtime.fmt(fit[1])}]")
        else:
            click.echo(f"  {name}: operator-norm/envelope ratio <= {runtime.fmt(fit)}")
    if not report.passed:
        for v in report.violations:
            click.echo(f"violation: {v}", err=True)
        raise AssumptionViolation(
            f"kernel set failed {len(report.violations)} structural bound check(s)")
    click.echo("kernel set satisfies the structural assumptions")
    return 0


_PIPELINES = {
    "bulk-solve": run_bulk_solve,
    "bulk-map": run_bulk_map,
    "frank": run_frank,
    "gamma": run_gamma,
    "minimize": run_minimize,
    "validate-kernels": run_validate_kernels,
}


def run(cfg):
    """Dispatch one validated RunConfig; returns 0 or raises a package error."""
    cfg.validate()
    return _PIPELINES[cfg.command](cfg)


# ----------------------------------------------------------------------
# click layer
# ----------------------------------------------------------------------

def _execute(mapping):
    try:
        cfg = RunConfig.from_mapping(mapping)
        code = run(cfg)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(2)
    except AssumptionViolation as exc:
        click.echo(f"kernel assumption violation: {exc}", err=True)
        sys.exit(4)
    except NumericalError as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        sys.exit(3)
    sys.exit(code)


def _parse_triple(text, name):
    parts = text.split(",")
    if len(parts) != 3:
        raise click.BadParameter(f"{name} needs 'min,max,steps'")
    return float(parts[0]), float(parts[1]), int(parts[2])


def _parse_grid(text):
    parts = [p for p in text.split(",") if p]
    if len(parts) == 1:
        return (4, 4, int(parts[0]))
    if len(parts) != 3:
        raise click.BadParameter("grid needs 'n3' or 'n1,n2,n3'")
    return tuple(int(p) for p in parts)


@click.group(name="cholq")
@click.version_option(version=__version__, prog_name="cholq")
def main():
    """Mean-field pipelines for chirally doped nematic liquid crystals.

    Exit codes: 0 ok, 2 config error, 3 numerical failure,
    4 kernel-assumption violation.  CHOLESTERIC_THREADS caps parallelism.
    """


@main.group(name="bulk")
def bulk_group():
    """Homogeneous two-species thermodynamics."""


@bulk_group.command(name="solve")
@click.option("--tau", type=float, default=0.12, show_default=True,
              help="Reduced temperature of the host.")
@click.option("--alpha", type=float, default=1.0, show_default=True,
              help="Dopant/host mean-coupling ratio.")
@click.option("--out", type=str, default=None, help="Output prefix (CSV + manifest).")
def bulk_solve_cmd(tau, alpha, out):
    """Equilibrium order parameters and twisting-power ratio at one state point."""
    _execute({"command": "bulk-solve", "tau": tau, "alpha": alpha, "out": out})


@bulk_group.command(name="map")
@click.option("--tau-range", type=str, default="0.02,0.16,20", show_default=True,
              help="Temperature sweep as 'min,max,steps'.")
@click.option("--alpha-range", type=str, default="0.1,2.0,20", show_default=True,
              help="Coupling-ratio sweep as 'min,max,steps'.")
@click.option("--out", type=str, required=True, help="Output prefix.")
def bulk_map_cmd(tau_range, alpha_range, out):
    """Sweep the twisting-power ratio over a (tau, alpha) grid."""
    _execute({"command": "bulk-map", "out": out,
              "tau_range": _parse_triple(tau_range, "tau-range"),
              "alpha_range": _parse_triple(alpha_range, "alpha-range")})


@main.command(name="frank")
@click.option("--kernels", "kernels_path", type=str, required=True,
              help="Kernel-set JSON file.")
@click.option("--rho0", type=float, default=1.0, show_default=True,
              help="Dopant number density entering the wavenumber.")
@click.option("--tau", type=float, default=None,
              help="Override the temperature derived from the kernel file.")
@click.option("--alpha", type=float, default=None,
              help="Override the coupling ratio derived from the kernel file.")
@click.option("--quad-degree", type=int, default=None,
              help="Radial quadrature resolution for moment integrals.")
@click.option("--out", type=str, default=None, help="Output prefix (CSV + manifest).")
def frank_cmd(kernels_path, rho0, tau, alpha, quad_degree, out):
    """Elastic constants, chiral strength, and equilibrium wavenumber."""
    _execute({"command": "frank", "kernels": kernels_path, "rho0": rho0,
              "tau": tau, "alpha": alpha, "quad_degree": quad_degree, "out": out})


@main.command(name="gamma")
@click.option("--kernels", "kernels_path", type=str, required=True,
              help="Kernel-set JSON file.")
@click.option("--rho0", type=float, default=1.0, show_default=True)
@click.option("--eps", "eps_text", type=str, default="0.5,0.25,0.125",
              show_default=True, help="Comma-separated interaction widths.")
@click.option("--grid", "grid_text", type=str, default="4,4,64", show_default=True,
              help="Torus grid 'n1,n2,n3' (or just 'n3' with a thin 4x4 cross-section).")
@click.option("--descent", type=click.Choice(["none", "helix", "random", "both"]),
              default="helix", show_default=True,
              help="Which minimizations to run per width.")
@click.option("--mode", type=click.Choice(["auto", "spectral", "sampled"]),
              default="auto", show_default=True, help="Kernel evaluation mode.")
@click.option("--max-iter", type=int, default=800, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=str, required=True, help="Output prefix.")
def gamma_cmd(kernels_path, rho0, eps_text, grid_text, descent, mode, max_iter, seed, out):
    """Gap between the discrete energy and its coarsening limit over widths."""
    _execute({"command": "gamma", "kernels": kernels_path, "rho0": rho0,
              "eps_list": tuple(float(e) for e in eps_text.split(",") if e),
              "grid": _parse_grid(grid_text), "descent": descent, "mode": mode,
              "max_iter": max_iter, "seed": seed, "out": out})


@main.command(name="minimize")
@click.option("--kernels", "kernels_path", type=str, required=True,
              help="Kernel-set JSON file.")
@click.option("--rho0", type=float, default=1.0, show_default=True)
@click.option("--eps", type=float, required=True, help="Interaction width.")
@click.option("--grid", "grid_text", type=str, default="4,4,64", show_default=True)
@click.option("--init", type=str, default="helix", show_default=True,
              help="Start state: 'helix[:m]', 'random', 'random-profile', "
                   "or 'constant[:scale]'.")
@click.option("--mode", type=click.Choice(["auto", "spectral", "sampled"]),
              default="auto", show_default=True)
@click.option("--max-iter", type=int, default=800, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=str, required=True, help="Output prefix.")
def minimize_cmd(kernels_path, rho0, eps, grid_text, init, mode, max_iter, seed, out):
    """Minimize the discrete energy; writes summary CSV and a field dump."""
    _execute({"command": "minimize", "kernels": kernels_path, "rho0": rho0,
              "eps_list": (eps,), "grid": _parse_grid(grid_text), "init": init,
              "mode": mode, "max_iter": max_iter, "seed": seed, "out": out})


@main.command(name="validate-kernels")
@click.option("--kernels", "kernels_path", type=str, required=True,
              help="Kernel-set JSON file.")
@click.option("--seed", type=int, default=0, show_default=True,
              help="Seed for the sampled direction set.")
def validate_kernels_cmd(kernels_path, seed):
    """Audit a kernel file against the structural operator bounds."""
    _execute({"command": "validate-kernels", "kernels": kernels_path, "seed": seed})


if __name__ == "__main__":
    main()
