"""Command-line entry point: ``singular-circuits <command> [options]``.

Settings come from built-in defaults, then an INI file (``--config``), then
``--set section.key=value`` overrides, then the dedicated flags.  Every
command writes comma-separated tables and a ``summary.txt`` of key = value
lines into ``--out``.
"""
from __future__ import annotations

import argparse
import configparser
import math
import sys
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from . import analysis, solver, switched
from .core import BallastDescriptor, FourierSeries, PeriodicWaveform, to_fourier
from .elements import (
    ChargeControlledInstance,
    HysteresisLamp,
    PowerLawBranch,
    PowerLawHysteresisElement,
    SignHardlimiter,
    drive_memristive,
    powerlaw_return_point,
)
from .errors import CircuitError, ConfigError
from .fourier import SUPER_POLYNOMIAL, coefficient_decay_order

TWO_PI = 2.0 * math.pi

DEFAULTS = {
    "circuit": {
        "element": "hardlimiter",
        "A": "1.0",
        "L_prime": "0.0",
        "ballast_R": "0.0",
        "ballast_L": "1.0",
        "ballast_C": "",
        "U": repr(math.pi),
        "omega": repr(TWO_PI),
        "waveform": "sin",
        "samples": "4096",
    },
    "solver": {"method": "harmonic", "nh": "999", "tol": "1e-9", "periods": "2000"},
    "sweep": {"U_grid": "2, 3, 5, 8, 12, 20, 30, 50"},
    "powerlaw": {
        "D1": "1.0", "alpha1": "1.0", "D2": "1.0", "alpha2": "2.0",
        "amplitude": "1.0", "omegas": "1.0, 10.0", "samples": "4096",
    },
    "memristor": {
        "R0": "100.0", "k": "1000.0", "q0": "0.0", "amplitude": "0.01",
        "omega": repr(TWO_PI), "samples": "4096", "periods": "1",
    },
    "switched": {"fixture": "chaos", "t_end": "", "dt": "", "horizon": "", "renorm_interval": "1.0"},
    "poynting": {"l": "3.0", "r": "0.01", "v": "5.0", "i": "2.0"},
}


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def write_csv(path: Path, header: Sequence[str], columns: Sequence) -> None:
    cols = [np.asarray(c) for c in columns]
    n = len(cols[0])
    lines = [",".join(header)]
    for k in range(n):
        lines.append(",".join(fmt(c[k]) for c in cols))
    path.write_text("\n".join(lines) + "\n")


class Summary:
    def __init__(self, command: str, cfg: configparser.ConfigParser):
        self.items: list = [("command", command)]
        for section in cfg.sections():
            for key, value in cfg.items(section):
                self.items.append((f"config.{section}.{key}", value))

    def add(self, key: str, value) -> None:
        self.items.append((key, fmt(value)))

    def text(self) -> str:
        return "".join(f"{k} = {v}\n" for k, v in self.items)


# ------------------------------------------------------------- configuration


def load_config(path: Optional[str], sets: Sequence[str], args: argparse.Namespace) -> configparser.ConfigParser:
    cfg = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    cfg.optionxform = str
    cfg.read_dict(DEFAULTS)
    if path:
        if not Path(path).is_file():
            raise ConfigError(f"config file not found: {path}")
        cfg.read(path)
    for item in sets or ():
        key, sep, value = item.partition("=")
        section, dot, option = key.strip().partition(".")
        if not sep or not dot:
            raise ConfigError(f"--set expects section.key=value, got {item!r}")
        if not cfg.has_section(section):
            cfg.add_section(section)
        cfg.set(section, option, value.strip())
    if args.nh is not None:
        cfg.set("solver", "nh", str(args.nh))
    if args.tol is not None:
        cfg.set("solver", "tol", repr(args.tol))
    if args.periods is not None:
        cfg.set("solver", "periods", str(args.periods))
        cfg.set("memristor", "periods", str(args.periods))
    return cfg


def get_float(cfg, section: str, key: str, optional: bool = False) -> Optional[float]:
    raw = cfg.get(section, key, fallback="").strip()
    if raw == "" and optional:
        return None
    try:
        value = float(raw)
    except ValueError:
        raise ConfigError(f"{section}.{key} must be a number, got {raw!r}") from None
    if not math.isfinite(value):
        raise ConfigError(f"{section}.{key} must be finite")
    return value


def get_int(cfg, section: str, key: str) -> int:
    value = get_float(cfg, section, key)
    if value != int(value) or value < 1:
        raise ConfigError(f"{section}.{key} must be a positive integer")
    return int(value)


def get_list(cfg, section: str, key: str) -> list:
    raw = cfg.get(section, key, fallback="")
    try:
        values = [float(x) for x in raw.replace(";", ",").split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"{section}.{key} must be a comma-separated list of numbers") from None
    if not values:
        raise ConfigError(f"{section}.{key} is empty")
    return values


def build_circuit(cfg) -> solver.LampCircuit:
    R = get_float(cfg, "circuit", "ballast_R")
    L = get_float(cfg, "circuit", "ballast_L")
    C = get_float(cfg, "circuit", "ballast_C", optional=True)
    ballast = BallastDescriptor.series(R=R, L=L, C=C)
    A = get_float(cfg, "circuit", "A")
    name = cfg.get("circuit", "element").strip().lower()
    if name == "hardlimiter":
        element = SignHardlimiter(A)
    elif name == "lamp":
        element = HysteresisLamp(A, get_float(cfg, "circuit", "L_prime"), L)
    else:
        raise ConfigError(f"unknown element {name!r}; use hardlimiter or lamp")
    omega = get_float(cfg, "circuit", "omega")
    wave = cfg.get("circuit", "waveform").strip()
    if wave == "sin":
        xi = "sin"
    else:
        # odd-harmonic list "b1, b3, ..." of sine amplitudes
        amps = get_list(cfg, "circuit", "waveform")
        sin = np.zeros(2 * len(amps))
        sin[1::2] = amps
        xi = FourierSeries(omega, np.zeros(sin.size), sin)
    return solver.LampCircuit(ballast, element, get_float(cfg, "circuit", "U"), omega, xi)


def solver_kwargs(cfg) -> dict:
    method = cfg.get("solver", "method").strip()
    n = get_int(cfg, "circuit", "samples")
    if method == "harmonic":
        return {"tol": get_float(cfg, "solver", "tol"), "n_harmonics": get_int(cfg, "solver", "nh"),
                "n_samples": n}
    if method == "oracle":
        return {"max_periods": get_int(cfg, "solver", "periods"), "steps_per_period": n}
    raise ConfigError(f"unknown solver method {method!r}")


def solve(c: solver.LampCircuit, cfg) -> solver.SteadyState:
    kw = solver_kwargs(cfg)
    if cfg.get("solver", "method").strip() == "oracle":
        return solver.time_domain_oracle(c, **kw)
    if c.xi.is_half_wave_symmetric():
        try:
            return solver.steady_state_two_crossing(c, **kw)
        except CircuitError as exc:
            if exc.code != "assumption-violated":
                raise
    guess = solver.linear_crossings_guess(c, kw["n_harmonics"], kw["n_samples"])
    return solver.multi_crossing_solver(c, len(guess) // 2, guess, tol=kw["tol"],
                                        n_harmonics=kw["n_harmonics"], n_samples=kw["n_samples"])


# ----------------------------------------------------------------- commands


def cmd_lamp_steady(cfg, out: Path, summary: Summary) -> None:
    c = build_circuit(cfg)
    st = solve(c, cfg)
    t = st.current.times
    write_csv(out / "waveforms.csv", ["t", "i", "v", "v_in"],
              [t, st.current.samples, st.voltage.samples, st.drive.samples])
    loop = analysis.extract_loop(st.current, st.voltage)
    write_csv(out / "loop.csv", ["i", "v"], [loop.i, loop.v])
    summary.add("method", st.method)
    summary.add("t1", st.t1 if any(d > 0 for d in st.crossings.directions) else None)
    summary.add("crossings", " ".join(fmt(x) for x in st.crossings.times))
    summary.add("P", analysis.average_power(st.current, st.drive))
    summary.add("P_element", analysis.average_power(st.current, st.voltage))
    summary.add("A1_mean_abs_i", c.A1 * analysis.mean_abs(st.current))
    if c.A1 > 0:
        summary.add("power_identity_residual",
                    analysis.lamp_power_identity_residual(st.current, c.element, st.didt))
    summary.add("loop_area", loop.signed_area)
    summary.add("loop_class", analysis.classify_loop(loop).value)
    summary.add("iterations", st.iterations)
    summary.add("residual", st.residual)


def cmd_lamp_sweep(cfg, out: Path, summary: Summary) -> None:
    c = build_circuit(cfg)
    grid = get_list(cfg, "sweep", "U_grid")
    rows = solver.power_scaling_sweep(c, grid, cfg.get("solver", "method").strip(), **solver_kwargs(cfg))
    write_csv(out / "sweep.csv", ["U", "P", "t1", "slope"],
              [[r.U for r in rows], [r.P for r in rows], [r.t1 for r in rows], [r.slope for r in rows]])
    slopes = [r.slope for r in rows if r.slope is not None]
    summary.add("rows", len(rows))
    if slopes:
        summary.add("slope_min", min(slopes))
        summary.add("slope_max", max(slopes))


def cmd_powerlaw_loop(cfg, out: Path, summary: Summary) -> None:
    s = "powerlaw"
    e = PowerLawHysteresisElement(PowerLawBranch(get_float(cfg, s, "D1"), get_float(cfg, s, "alpha1")),
                                  PowerLawBranch(get_float(cfg, s, "D2"), get_float(cfg, s, "alpha2")))
    i_r, v_r = powerlaw_return_point(e)
    omegas = get_list(cfg, s, "omegas")
    rows = analysis.frequency_dependence_study(e, get_float(cfg, s, "amplitude"), omegas,
                                               get_int(cfg, s, "samples"))
    for k, row in enumerate(rows):
        write_csv(out / f"loop_{k}.csv", ["i", "v"], [row.loop.i, row.loop.v])
    write_csv(out / "return_point.csv", ["i_r", "v_r"], [[i_r], [v_r]])
    summary.add("i_r", i_r)
    summary.add("v_r", v_r)
    for k, row in enumerate(rows):
        summary.add(f"omega_{k}", row.omega)
        summary.add(f"area_{k}", row.area)
        summary.add(f"class_{k}", row.classification.value)
    lo, hi = analysis.dvdi_range(rows[0].loop)
    summary.add("dvdi_min", lo)
    summary.add("dvdi_max", hi)


def cmd_memristor_demo(cfg, out: Path, summary: Summary) -> None:
    s = "memristor"
    m = ChargeControlledInstance(get_float(cfg, s, "R0"), get_float(cfg, s, "k"), get_float(cfg, s, "q0"))
    amp, omega = get_float(cfg, s, "amplitude"), get_float(cfg, s, "omega")
    n, periods = get_int(cfg, s, "samples"), get_int(cfg, s, "periods")
    T = TWO_PI / omega
    t, i, v, xs = drive_memristive(m, lambda tt: amp * math.sin(omega * tt), T, n, periods)
    iw = PeriodicWaveform(T, i[-n:], "ampere")
    vw = PeriodicWaveform(T, v[-n:], "volt")
    loop = analysis.extract_loop(iw, vw)
    write_csv(out / "loop.csv", ["i", "v"], [loop.i, loop.v])
    fc = analysis.flux_charge(iw, vw, periods)
    psi_model = m.flux_of_charge(fc.q)
    write_csv(out / "psi_q.csv", ["t", "q", "psi", "psi_model"], [fc.t, fc.q, fc.psi, psi_model])
    scale = float(np.max(np.abs(fc.psi))) or 1.0
    summary.add("pinched", analysis.pinch_test(loop, 1e-9 * float(np.max(np.abs(v))), allow_jump=False))
    summary.add("psi_q_max_rel_error", float(np.max(np.abs(fc.psi - psi_model))) / scale)
    summary.add("loop_area", loop.signed_area)
    summary.add("loop_class", analysis.classify_loop(loop).value)


def _switched_fixture(name: str):
    """(system, x0, dt, t_end, horizon) for the named demonstration system."""
    if name == "chaos":
        sys_, x0, fx = switched.chaos_fixture()
        return sys_, x0, fx["dt"], fx["horizon"], fx["horizon"], fx["transient"]
    if name == "stable":
        return (switched.SwitchedLinearSystem((([[0, 1], [-1, -0.2]], [[0], [1]]),)),
                [1.0, 0.0], 0.01, 50.0, 50.0, 0.0)
    if name == "lossless":
        return (switched.SwitchedLinearSystem((([[0, 1], [-1, 0]], [[0], [1]]),)),
                [1.0, 0.0], 0.01, 50.0, 50.0, 0.0)
    if name == "ltv":
        return ltv_fixture() + (0.01, 20.0, 20.0, 0.0)
    if name == "level":
        return level_fixture() + (0.01, 20.0, 20.0, 0.0)
    raise ConfigError(f"unknown switched fixture {name!r}; use chaos, stable, lossless, ltv or level")


def ltv_fixture():
    modes = (([[0, 1], [-1, -0.1]], [[0], [1]]), ([[0, 1], [-4, -0.1]], [[0], [1]]))
    rule = switched.TimeSchedule((0.7, 1.9), (0, 1, 0), period=2.5)
    return switched.SwitchedLinearSystem(modes, rule, switched.Drive(offset=(0.5,), amplitude=(1.0,), omega=1.3)), [0.0, 0.0]


def level_fixture():
    modes = (([[0, 1], [-1, -0.1]], [[0], [1]]), ([[0, 1], [-4, -0.1]], [[0], [1]]))
    rule = switched.LevelRule(0, 0.3, 0, 1)
    return switched.SwitchedLinearSystem(modes, rule, switched.Drive(offset=(0.5,), amplitude=(1.0,), omega=1.3)), [0.0, 0.0]


def cmd_switched_chaos(cfg, out: Path, summary: Summary) -> None:
    s = "switched"
    name = cfg.get(s, "fixture").strip()
    sys_, x0, dt, t_end, horizon, transient = _switched_fixture(name)
    dt = get_float(cfg, s, "dt", optional=True) or dt
    t_end = get_float(cfg, s, "t_end", optional=True) or t_end
    horizon = get_float(cfg, s, "horizon", optional=True) or horizon
    traj = switched.simulate_switched(sys_, x0, t_end, dt)
    header = ["t"] + [f"x{k + 1}" for k in range(sys_.dim)] + ["mode"]
    write_csv(out / "trajectory.csv", header,
              [traj.times] + [traj.states[:, k] for k in range(sys_.dim)] + [traj.modes])
    verdict = switched.classify_switching(sys_, traj)
    lam = switched.largest_lyapunov(sys_, x0, horizon, get_float(cfg, s, "renorm_interval"), dt,
                                    transient=transient)
    summary.add("fixture", name)
    summary.add("classification", verdict.kind.value)
    summary.add("instant_shift", verdict.instant_shift)
    summary.add("switches", traj.n_switches)
    summary.add("lambda", lam)


def cmd_poynting(cfg, out: Path, summary: Summary) -> None:
    s = "poynting"
    flow, vi = analysis.poynting_balance(get_float(cfg, s, "l"), get_float(cfg, s, "r"),
                                         get_float(cfg, s, "v"), get_float(cfg, s, "i"))
    summary.add("surface_flow", flow)
    summary.add("vi", vi)
    summary.add("identical", flow == vi)


def cmd_decompose(cfg, out: Path, summary: Summary) -> None:
    c = build_circuit(cfg)
    st = solve(c, cfg)
    L = c.total_inductance() if c.A1 > 0 else solver.asymptotic_inductance(c.ballast)
    i1, i2 = solver.smooth_rough_decompose(st, c.A1, L)
    write_csv(out / "decompose.csv", ["t", "i", "i1", "i2", "i1_plus_i2"],
              [st.current.times, st.current.samples, i1.samples, i2.samples, i1.samples + i2.samples])
    nh = min(get_int(cfg, "solver", "nh"), st.current.n // 2 - 1)
    for label, w in (("i", st.current), ("i1", i1), ("i2", i2)):
        order = coefficient_decay_order(to_fourier(w, nh), 3, nh) if np.any(w.samples) else SUPER_POLYNOMIAL
        summary.add(f"decay_order_{label}", order.value if order is SUPER_POLYNOMIAL else order)
    summary.add("L", L)
    summary.add("A_eff", c.A1)


COMMANDS: dict[str, tuple[Callable, str]] = {
    "lamp-steady": (cmd_lamp_steady, "periodic steady state of the lamp circuit"),
    "lamp-sweep": (cmd_lamp_sweep, "input power against drive amplitude"),
    "powerlaw-loop": (cmd_powerlaw_loop, "power-law hysteresis loops and return point"),
    "memristor-demo": (cmd_memristor_demo, "charge-controlled memristor loop and flux-charge curve"),
    "switched-chaos": (cmd_switched_chaos, "switched linear system trajectory and Lyapunov exponent"),
    "poynting": (cmd_poynting, "surface power flow of a straight conductor"),
    "decompose": (cmd_decompose, "smooth/rough split of the steady-state current"),
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="singular-circuits", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--config", help="INI file with [circuit], [solver], ... sections")
        sp.add_argument("--out", default=".", help="output directory (created if missing)")
        sp.add_argument("--nh", type=int, help="number of harmonics")
        sp.add_argument("--tol", type=float, help="solver tolerance")
        sp.add_argument("--periods", type=int, help="period cap for the oracle / periods to simulate")
        sp.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE", help="override one setting")
        if name == "poynting":
            for flag in ("l", "r", "v", "i"):
                sp.add_argument(f"--{flag}", type=float, dest=f"p_{flag}")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    fn = COMMANDS[args.command][0]
    summary = None
    try:
        cfg = load_config(args.config, args.set, args)
        if args.command == "poynting":
            for flag in ("l", "r", "v", "i"):
                value = getattr(args, f"p_{flag}")
                if value is not None:
                    cfg.set("poynting", flag, repr(value))
        summary = Summary(args.command, cfg)
        fn(cfg, out, summary)
    except (CircuitError, ValueError, ZeroDivisionError) as exc:
        code = getattr(exc, "code", "invalid-input")
        if summary is None:
            summary = Summary(args.command, configparser.ConfigParser())
        summary.add("status", "error")
        summary.add("error", code)
        summary.add("error_message", str(exc))
        (out / "summary.txt").write_text(summary.text())
        print(f"error: {code}: {exc}", file=sys.stderr)
        return 2
    summary.add("status", "ok")
    (out / "summary.txt").write_text(summary.text())
    print(summary.text(), end="")
    return 0


if __name__ == "__main__":
    sys.exit(main())
