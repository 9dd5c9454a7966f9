"""Command-line surface: run simulations and emit CSV/JSON artifacts.

Subcommands
-----------
simulate        time series or heatmap for one chain
phase-diagram   decay/trapping verdict on a parameter grid
block           lowest-level occupation for every initial level of a block model
lindblad        Markovian baseline trajectories
example         preset scenarios 1-4 (reset, mixing, decay comparison, selective reset)

Exit codes: 0 ok, 2 configuration error, 3 numerical failure.  A JSON
config file (--config) supplies defaults; command-line flags win.  The
SPECDIS_THREADS environment variable is the fallback for --threads.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .chain import BlockSpec, ChainSpec, decompose_block
from .errors import InvalidSpecError, NumericsError
from .io import write_csv, write_density_matrix_json
from .lindblad import decay_model, integrate
from .propagate import (
    LIGHT_CONE_MARGIN,
    basis_state,
    occupation_heatmap,
    propagate,
    simulate_observables,
    sites_for_time,
    time_grid,
)
from .reduced import (
    TargetMap,
    reduce_trajectory,
    run_example1,
    run_example2,
    run_example4,
    trace_distance,
)
from .spectral import decay_verdict, phase_diagram
from . import chain as _chain

_EXAMPLE3_MUS = (0.0, 0.7, 1.4, 2.1)


def _val(args, name, default):
    value = getattr(args, name, None)
    return default if value is None else value


def resolve_threads(args) -> int:
    threads = getattr(args, "threads", None)
    if threads is None:
        env = os.environ.get("SPECDIS_THREADS")
        if env is not None:
            try:
                threads = int(env)
            except ValueError as exc:
                raise InvalidSpecError(
                    f"SPECDIS_THREADS must be a positive integer, got {env!r}"
                ) from exc
        else:
            threads = min(4, os.cpu_count() or 1)
    if threads < 1:
        raise InvalidSpecError(f"thread count must be >= 1, got {threads}")
    return threads


def parse_range(text: str) -> np.ndarray:
    parts = text.split(":")
    if len(parts) != 3:
        raise InvalidSpecError(f"range must be lo:hi:step, got {text!r}")
    try:
        lo, hi, step = (float(x) for x in parts)
    except ValueError as exc:
        raise InvalidSpecError(f"range components must be numbers, got {text!r}") from exc
    if not all(math.isfinite(v) for v in (lo, hi, step)):
        raise InvalidSpecError(f"range components must be finite, got {text!r}")
    if step <= 0:
        raise InvalidSpecError(f"range step must be > 0, got {step}")
    if hi < lo:
        raise InvalidSpecError(f"range end {hi} below start {lo}")
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(n)


def parse_float_list(text: str, flag: str) -> tuple[float, ...]:
    try:
        values = tuple(float(x) for x in text.split(","))
    except ValueError as exc:
        raise InvalidSpecError(f"{flag} must be a comma-separated number list") from exc
    if not values:
        raise InvalidSpecError(f"{flag} must not be empty")
    return values


def _chain_spec_from(args, t_max: float) -> tuple[ChainSpec, list[str]]:
    B = float(_val(args, "B", 1.0))
    C = float(_val(args, "C", 1.0))
    mu = float(_val(args, "mu", 0.0))
    notes: list[str] = []
    sites = getattr(args, "sites", None)
    if sites is None:
        sites = sites_for_time(t_max, B)
    spec = ChainSpec(B=B, C=C, mu=mu, n_sites=int(sites))
    if t_max > spec.valid_horizon / LIGHT_CONE_MARGIN:
        note = (
            f"WARNING t_max={t_max:g} exceeds the safe horizon "
            f"{spec.valid_horizon / LIGHT_CONE_MARGIN:g} = n_sites/(2B)/{LIGHT_CONE_MARGIN}; "
            "boundary reflections may contaminate late times"
        )
        print(note, file=sys.stderr)
        notes.append(note)
    return spec, notes


def _verdict_comments(spec: ChainSpec) -> list[str]:
    if spec.C == 0:
        return ["verdict: decoupled boundary (C=0), site 0 never decays, trapped_weight=1"]
    v = decay_verdict(spec.mu_B, spec.C_B)
    tw = sum(s.overlap_sq**2 for s in v.bound_states)
    return [
        f"verdict: decays={int(v.decays)} branch={v.criterion_branch} "
        f"n_bound={len(v.bound_states)} trapped_weight={tw:.12g}"
    ]


def cmd_simulate(args) -> int:
    t_max = getattr(args, "t_max", None)
    if t_max is None:
        raise InvalidSpecError("simulate requires --t-max")
    t_max = float(t_max)
    spec, notes = _chain_spec_from(args, t_max)
    dt = getattr(args, "dt", None)
    psi0_site = int(_val(args, "psi0_site", 0))
    psi0 = basis_state(spec.n_sites, psi0_site)

    comments = [
        "specdis simulate",
        f"params: B={spec.B:g} C={spec.C:g} mu={spec.mu:g} n_sites={spec.n_sites} "
        f"t_max={t_max:g} dt={dt if dt is not None else 0.1 / spec.B:g} psi0_site={psi0_site}",
        *_verdict_comments(spec),
        f"valid_horizon: {spec.valid_horizon:.12g}",
        *notes,
    ]

    if getattr(args, "heatmap", False):
        result = occupation_heatmap(spec, t_max, dt, psi0=psi0)
        comments.append(
            "boundary_time: "
            + ("none" if result.boundary_time is None else f"{result.boundary_time:.12g}")
        )
        rows = (
            (t, j, result.occupations[i, j])
            for i, t in enumerate(result.times)
            for j in range(spec.n_sites)
        )
        out = Path(_val(args, "out", "heatmap.csv"))
        write_csv(out, ["t", "j", "n"], rows, comments, timestamp=not args.no_timestamp)
    else:
        obs = list(_val(args, "obs", None) or ["n0"])
        result = simulate_observables(spec, t_max, dt, observables=obs, psi0=psi0)
        comments.append(
            "boundary_time: "
            + ("none" if result.boundary_time is None else f"{result.boundary_time:.12g}")
        )
        times = result.series[obs[0]].times
        columns = [result.series[name].values for name in obs]
        rows = zip(times, *columns)
        out = Path(_val(args, "out", "simulate.csv"))
        write_csv(out, ["t", *obs], rows, comments, timestamp=not args.no_timestamp)
    print(out)
    return 0


def cmd_phase_diagram(args) -> int:
    mu_values = parse_range(_val(args, "mu_range", "-3:3:0.02"))
    c_values = parse_range(_val(args, "c_range", "0.02:3:0.02"))
    grid = phase_diagram(mu_values, c_values)
    comments = [
        "specdis phase-diagram",
        f"params: mu_range={_val(args, 'mu_range', '-3:3:0.02')} "
        f"c_range={_val(args, 'c_range', '0.02:3:0.02')}",
        "layout: row-major, mu_B outer loop, C_B inner loop",
    ]
    out = Path(_val(args, "out", "phase_diagram.csv"))
    write_csv(
        out,
        ["mu_B", "C_B", "decays", "n_bound", "trapped_weight"],
        grid.rows(),
        comments,
        timestamp=not args.no_timestamp,
    )
    print(out)
    return 0


def _block_series(block: BlockSpec, t_max: float, dt, threads: int):
    def one(m):
        return run_example4(block, m, t_max, dt)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, range(block.block_dim)))
    return [one(m) for m in range(block.block_dim)]


def cmd_block(args) -> int:
    energies = parse_float_list(_val(args, "energies", "0,1,2,3"), "--energies")
    B = float(_val(args, "B", 1.0))
    C = float(_val(args, "C", 0.5))
    t_max = float(_val(args, "t_max", 160.0))
    sites = getattr(args, "sites", None)
    if sites is None:
        sites = sites_for_time(t_max, B)
    block = BlockSpec(B=B, C=C, energies=energies, n_sites=int(sites))
    dt = getattr(args, "dt", None)
    threads = resolve_threads(args)

    initial_m = getattr(args, "initial_m", None)
    if initial_m is not None:
        ms = [int(initial_m)]
        series = [run_example4(block, ms[0], t_max, dt)]
    else:
        ms = list(range(block.block_dim))
        series = _block_series(block, t_max, dt, threads)

    comments = [
        "specdis block",
        f"params: B={B:g} C={C:g} energies={','.join(f'{e:g}' for e in energies)} "
        f"n_sites={block.n_sites} t_max={t_max:g}",
    ]
    for m, spec in enumerate(decompose_block(block)):
        if m in ms:
            comments.extend(
                c.replace("verdict:", f"level m={m} E={spec.mu:g}:")
                for c in _verdict_comments(spec)
            )
    header = ["t"] + [f"occ_E0_m{m}" for m in ms]
    rows = zip(series[0].times, *[s.values for s in series])
    out = Path(_val(args, "out", "block.csv"))
    write_csv(out, header, rows, comments, timestamp=not args.no_timestamp)
    print(out)
    return 0


def cmd_lindblad(args) -> int:
    E0 = float(_val(args, "E0", 0.0))
    E1 = float(_val(args, "E1", 1.0))
    gamma = float(_val(args, "gamma", 1.0))
    t_max = float(_val(args, "t_max", 6.0))
    dt = _val(args, "dt", 0.01)
    entries = [e.strip() for e in str(_val(args, "entries", "00,11")).split(",") if e.strip()]

    model = decay_model(E0, E1, gamma)
    times = time_grid(t_max, float(dt))
    rho0 = np.zeros((2, 2), dtype=complex)
    rho0[1, 1] = 1.0
    traj = integrate(model, rho0, times)

    header = ["t"]
    columns = []
    for entry in entries:
        if len(entry) != 2 or not entry.isdigit():
            raise InvalidSpecError(f"--entries items must be two digits like 01, got {entry!r}")
        i, j = int(entry[0]), int(entry[1])
        if not (0 <= i < 2 and 0 <= j < 2):
            raise InvalidSpecError(f"entry {entry!r} outside the 2x2 density matrix")
        if i == j:
            header.append(f"rho{entry}")
            columns.append(traj[:, i, j].real)
        else:
            header.extend([f"re_rho{entry}", f"im_rho{entry}"])
            columns.extend([traj[:, i, j].real, traj[:, i, j].imag])

    comments = [
        "specdis lindblad",
        f"params: E0={E0:g} E1={E1:g} gamma={gamma:g} t_max={t_max:g} dt={float(dt):g}",
        "populations relax at the jump rate alone; the level energies only rotate coherences",
    ]
    out = Path(_val(args, "out", "lindblad.csv"))
    write_csv(out, header, zip(times, *columns), comments, timestamp=not args.no_timestamp)
    print(out)
    return 0


def _example1(args, outdir: Path) -> list[Path]:
    sites = int(_val(args, "sites", 400))
    t_max = float(_val(args, "t_max", 160.0))
    dt = getattr(args, "dt", None)
    spec = ChainSpec(B=1.0, C=1.0, mu=0.0, n_sites=sites)
    traj = run_example1(spec, t_max, dt)
    reset = np.zeros((2, 2))
    reset[0, 0] = 1.0
    dist = np.array([trace_distance(rho, reset) for rho in traj.rhos])
    comments = [
        "specdis example 1 (state reset)",
        f"params: B={spec.B:g} C={spec.C:g} mu={spec.mu:g} n_sites={spec.n_sites} t_max={t_max:g}",
        *_verdict_comments(spec),
        "columns: target density matrix diagonal, purity, trace distance to the reset state",
    ]
    csv_path = write_csv(
        outdir / "example1.csv",
        ["t", "rho00", "rho11", "purity", "dist_to_reset"],
        zip(traj.times, traj.diagonal(0), traj.diagonal(1), traj.purities(), dist),
        comments,
        timestamp=not args.no_timestamp,
    )
    json_path = write_density_matrix_json(outdir / "example1_rho_final.json", traj.rhos[-1])
    return [csv_path, json_path]


def _example2(args, outdir: Path) -> list[Path]:
    sites = int(_val(args, "sites", 400))
    t_max = float(_val(args, "t_max", 160.0))
    dt = getattr(args, "dt", None)
    overlap = float(_val(args, "overlap", 0.6))
    spec = ChainSpec(B=1.0, C=1.0, mu=0.0, n_sites=sites)

    times = time_grid(t_max, dt, spec.B)
    states = propagate(_chain.build_chain(spec), basis_state(spec.n_sites), times)
    occ = np.abs(states) ** 2
    parity_vals = occ[:, 0::2].sum(axis=1) - occ[:, 1::2].sum(axis=1)

    paths = []
    for tag, g in (("example2", 0.0), ("example2_nonorthogonal", overlap)):
        a = np.array([1.0, 0.0], dtype=complex)
        b = np.array([g, math.sqrt(1.0 - g * g)], dtype=complex)
        tmap = TargetMap.alternating(even_state=a, odd_state=b)
        rhos = reduce_trajectory(states, tmap)
        eigs = np.linalg.eigvalsh(rhos)
        purities = np.einsum("tij,tji->t", rhos, rhos).real
        comments = [
            f"specdis example 2 (state mixing, target overlap {g:g})",
            f"params: B={spec.B:g} C={spec.C:g} mu={spec.mu:g} n_sites={spec.n_sites} "
            f"t_max={t_max:g} overlap={g:g}",
            "columns: even-odd difference, target eigenvalues, purity",
        ]
        paths.append(
            write_csv(
                outdir / f"{tag}.csv",
                ["t", "parity", "eig_lo", "eig_hi", "purity"],
                zip(times, parity_vals, eigs[:, 0], eigs[:, 1], purities),
                comments,
                timestamp=not args.no_timestamp,
            )
        )
        paths.append(
            write_density_matrix_json(outdir / f"{tag}_rho_final.json", rhos[-1])
        )
    return paths


def _example3(args, outdir: Path) -> list[Path]:
    sites = int(_val(args, "sites", 400))
    t_max = float(_val(args, "t_max", 60.0))
    dt = _val(args, "dt", 0.1)
    gamma = float(_val(args, "gamma", 1.0))
    threads = resolve_threads(args)

    times = time_grid(t_max, float(dt))
    model = decay_model(0.0, 1.0, gamma)
    rho0 = np.zeros((2, 2), dtype=complex)
    rho0[1, 1] = 1.0
    lind = integrate(model, rho0, times)[:, 1, 1].real

    def one(mu):
        spec = ChainSpec(B=1.0, C=1.0, mu=mu, n_sites=sites)
        res = simulate_observables(spec, t_max, float(dt), observables=("n0",))
        return res.series["n0"].values

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            curves = list(pool.map(one, _EXAMPLE3_MUS))
    else:
        curves = [one(mu) for mu in _EXAMPLE3_MUS]

    comments = [
        "specdis example 3 (two descriptions of spontaneous decay)",
        f"params: B=1 C=1 mu={','.join(f'{m:g}' for m in _EXAMPLE3_MUS)} n_sites={sites} "
        f"t_max={t_max:g} dt={float(dt):g} gamma={gamma:g}",
        "lindblad_rho11 integrates the master equation (populations exp(-gamma t));",
        "ref_exp_minus_2gamma_t is the stated exp(-2 gamma t) reference curve, kept for comparison",
    ]
    header = ["t", "lindblad_rho11", "ref_exp_minus_gamma_t", "ref_exp_minus_2gamma_t"]
    header += [f"chain_n0_mu{mu:g}" for mu in _EXAMPLE3_MUS]
    rows = zip(times, lind, np.exp(-gamma * times), np.exp(-2.0 * gamma * times), *curves)
    return [
        write_csv(outdir / "example3.csv", header, rows, comments, timestamp=not args.no_timestamp)
    ]


def _example4(args, outdir: Path) -> list[Path]:
    sites = int(_val(args, "sites", 400))
    t_max = float(_val(args, "t_max", 160.0))
    dt = getattr(args, "dt", None)
    energies = parse_float_list(str(_val(args, "energies", "0,1,2,3")), "--energies")
    block = BlockSpec(B=1.0, C=0.5, energies=energies, n_sites=sites)
    threads = resolve_threads(args)
    series = _block_series(block, t_max, dt, threads)
    comments = [
        "specdis example 4 (spectrally selective reset)",
        f"params: B={block.B:g} C={block.C:g} energies="
        f"{','.join(f'{e:g}' for e in energies)} n_sites={sites} t_max={t_max:g}",
    ]
    for m, spec in enumerate(decompose_block(block)):
        comments.extend(
            c.replace("verdict:", f"level m={m} E={spec.mu:g}:")
            for c in _verdict_comments(spec)
        )
    header = ["t"] + [f"occ_E0_m{m}" for m in range(block.block_dim)]
    rows = zip(series[0].times, *[s.values for s in series])
    return [
        write_csv(outdir / "example4.csv", header, rows, comments, timestamp=not args.no_timestamp)
    ]


def cmd_example(args) -> int:
    outdir = Path(_val(args, "outdir", "."))
    outdir.mkdir(parents=True, exist_ok=True)
    runners = {1: _example1, 2: _example2, 3: _example3, 4: _example4}
    runner = runners.get(args.number)
    if runner is None:
        raise InvalidSpecError(f"example number must be 1..4, got {args.number}")
    for path in runner(args, outdir):
        print(path)
    return 0


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", type=str, default=None, help="JSON file with flag defaults")
    sub.add_argument("--threads", type=int, default=None, help="worker cap (env SPECDIS_THREADS)")
    sub.add_argument(
        "--no-timestamp",
        action="store_true",
        help="omit the timestamp comment for bit-identical output",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="specdis",
        description="Spectrally controlled dissipation on an ancilla chain",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="time series or heatmap for one chain")
    p.add_argument("--B", type=float, default=None, help="bulk hopping (default 1)")
    p.add_argument("--C", type=float, default=None, help="boundary hopping (default 1)")
    p.add_argument("--mu", type=float, default=None, help="impurity energy (default 0)")
    p.add_argument("--sites", type=int, default=None, help="truncation length (default: from t-max)")
    p.add_argument("--t-max", dest="t_max", type=float, default=None, required=False)
    p.add_argument("--dt", type=float, default=None, help="sampling step (default 0.1/B)")
    p.add_argument("--obs", action="append", default=None, help="n<site> or parity; repeatable")
    p.add_argument("--heatmap", action="store_true", help="emit (t, j, n) rows instead")
    p.add_argument("--psi0-site", dest="psi0_site", type=int, default=None)
    p.add_argument("--out", type=str, default=None)
    _add_common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("phase-diagram", help="decay verdicts on a parameter grid")
    p.add_argument("--mu-range", dest="mu_range", type=str, default=None, help="lo:hi:step")
    p.add_argument("--c-range", dest="c_range", type=str, default=None, help="lo:hi:step, lo > 0")
    p.add_argument("--out", type=str, default=None)
    _add_common(p)
    p.set_defaults(func=cmd_phase_diagram)

    p = sub.add_parser("block", help="block model: lowest-level occupation per initial level")
    p.add_argument("--B", type=float, default=None)
    p.add_argument("--C", type=float, default=None, help="default 0.5")
    p.add_argument("--energies", type=str, default=None, help="comma list, default 0,1,2,3")
    p.add_argument("--sites", type=int, default=None)
    p.add_argument("--t-max", dest="t_max", type=float, default=None)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--initial-m", dest="initial_m", type=int, default=None, help="one level only")
    p.add_argument("--out", type=str, default=None)
    _add_common(p)
    p.set_defaults(func=cmd_block)

    p = sub.add_parser("lindblad", help="Markovian baseline for the two-level decay model")
    p.add_argument("--E0", type=float, default=None)
    p.add_argument("--E1", type=float, default=None)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--t-max", dest="t_max", type=float, default=None)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--entries", type=str, default=None, help="matrix entries, e.g. 00,11,01")
    p.add_argument("--out", type=str, default=None)
    _add_common(p)
    p.set_defaults(func=cmd_lindblad)

    p = sub.add_parser("example", help="preset scenarios reproducing the worked examples")
    p.add_argument("number", type=int, choices=(1, 2, 3, 4))
    p.add_argument("--outdir", type=str, default=None)
    p.add_argument("--sites", type=int, default=None)
    p.add_argument("--t-max", dest="t_max", type=float, default=None)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--overlap", type=float, default=None, help="example 2 target overlap")
    p.add_argument("--energies", type=str, default=None, help="example 4 level energies")
    p.add_argument("--gamma", type=float, default=None, help="example 3 jump rate")
    _add_common(p)
    p.set_defaults(func=cmd_example)

    return parser


def _apply_config(args) -> None:
    if getattr(args, "config", None) is None:
        return
    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidSpecError(f"cannot read config {args.config!r}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise InvalidSpecError("config file must hold a JSON object of flag defaults")
    for key, value in cfg.items():
        current = getattr(args, key, "__absent__")
        if current is None or current is False:
            setattr(args, key, value)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    try:
        _apply_config(args)
        return args.func(args)
    except InvalidSpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericsError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
