"""Batch front end: every analyzer as a subcommand emitting CSV/JSON plot data.

Usage: ``symplectiq <subcommand> --config cfg.json --out out.csv [--format csv]
[--seed N] [--tol X]``.  Exit codes: 0 success, 1 usage error, 2 domain error.
Outputs are deterministic for identical config and seed; floats are printed
with 17 significant digits and JSON keys are sorted.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from symplectiq import channels, control, core, discrete, scattering, sensing, transduction
from symplectiq.core import SymplecticError


def _log(msg: str) -> None:
    if os.environ.get("SYMPL_LOG"):
        print(msg, file=sys.stderr)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _load_config(path: str, allowed: set) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        cfg = json.load(fh)
    unknown = set(cfg) - allowed
    if unknown:
        raise SymplecticError(f"unknown config keys: {sorted(unknown)}")
    return cfg


def _write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        tmp = path + ".tmp"
        with open(tmp, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)


def _json_dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_fidelity_sweep(cfg: dict, args) -> str:
    """Adaptive vs direct average fidelity over a (mu, nu) grid."""
    model = cfg.get("model", "passive")
    if model not in ("passive", "active"):
        raise SymplecticError("model must be 'passive' or 'active'")
    if "t_sq" in cfg:
        t_sq = float(cfg["t_sq"])
        if model == "passive":
            # t^2 = 4C/(C+1)^2  ->  C = (2 - t^2 - 2 sqrt(1-t^2))/t^2, branch C<1
            root = (2 - t_sq - 2 * np.sqrt(max(0.0, 1 - t_sq))) / t_sq
            C = root
        else:
            # t'^2 = 4C/(C-1)^2 -> C = (2 + t_sq + 2 sqrt(1+t_sq))/t_sq
            C = (2 + t_sq + 2 * np.sqrt(1 + t_sq)) / t_sq
    else:
        C = float(cfg["C"])
    mus = [float(v) for v in cfg["mu"]]
    nus = [float(v) for v in cfg["nu"]]
    if not mus or not nus:
        raise SymplecticError("mu and nu grids must be nonempty")
    S = transduction.passive_example(C) if model == "passive" else transduction.active_example(C)
    part = transduction.default_partition(2)
    if model == "passive":
        _, t = transduction.passive_coefficients(C)
        t_sq_eff = t * t
    else:
        _, tp = transduction.active_coefficients(C)
        t_sq_eff = tp * tp
    direct = transduction.direct_channel(S, part, post=True)
    f_direct = transduction.average_fidelity(direct)
    lines = ["model,t_sq,mu,nu,fidelity_adaptive,fidelity_direct,threshold"]
    for mu in mus:
        for nu in nus:
            ch = transduction.adaptive_channel(
                S, part, transduction.ImperfectionCoefficients(nu=nu, mu=mu))
            f_ad = transduction.average_fidelity(ch)
            lines.append(",".join([
                model, _fmt(t_sq_eff), _fmt(mu), _fmt(nu),
                _fmt(f_ad), _fmt(f_direct), _fmt(0.5),
            ]))
    return "\n".join(lines) + "\n"


def cmd_ep_fisher(cfg: dict, args) -> str:
    """Fisher components on a theta grid plus the fitted log-log slope."""
    kappa = float(cfg.get("kappa", 1.0))
    g = float(cfg.get("g", 1.3))
    model_kind = cfg.get("model", "ep")
    grid = cfg.get("theta_grid")
    if grid is None:
        lo, hi, num = cfg.get("theta_min", 1e-3), cfg.get("theta_max", 1e-2), cfg.get("points", 13)
        grid = np.geomspace(float(lo), float(hi), int(num))
    else:
        grid = np.asarray([float(t) for t in grid])
    if model_kind == "ep":
        model = sensing.ep_two_mode_model(kappa, g)
    elif model_kind == "conventional":
        model = sensing.conventional_model()
    else:
        raise SymplecticError("model must be 'ep' or 'conventional'")
    rows = ["theta,I_mu,I_sigma,QFI_xbar,QFI_V"]
    for th in grid:
        res = sensing.fisher_point(model, float(th))
        rows.append(",".join(_fmt(v) for v in
                             (res.theta, res.I_mu, res.I_sigma, res.qfi_xbar, res.qfi_V)))
    slope, stderr, _ = sensing.scaling_exponent(model, grid, "qfi_xbar")
    summary = _json_dump({"slope": slope, "stderr": stderr,
                          "quantity": "qfi_xbar", "points": int(grid.size)})
    if args.format == "json":
        return summary
    return "\n".join(rows) + "\n# slope summary: " + json.dumps(
        {"slope": slope, "stderr": stderr}, sort_keys=True) + "\n"


def cmd_permute_plan(cfg: dict, args) -> str:
    """Local-symplectic schedule swapping two modes of a given coupler."""
    S, n, _ = core.matrix_from_json(json.dumps(cfg["S"]))
    seed = int(args.seed if args.seed is not None else cfg.get("seed", 0))
    target = cfg.get("target", "swap_first_last")
    if target != "swap_first_last":
        raise SymplecticError("only the first/last swap plan is implemented")
    copies = [S for _ in range(16)]
    locals_seq, total = control.sandwich_swap(copies, n)
    report = {
        "n_modes": n,
        "seed": seed,
        "off_pattern_norm": control.swap_pattern_residual(total, n),
        "symplectic_residual": core.symplectic_residual(total),
        "locals": [L.reshape(-1).tolist() for L in locals_seq],
        "result": total.reshape(-1).tolist(),
    }
    return _json_dump(report)


def cmd_scatter(cfg: dict, args) -> str:
    """Scattering matrix from Hamiltonian plus coupling data, with report."""
    kind = cfg.get("kind", "passive")
    if kind == "passive":
        Y = np.asarray(cfg["Y"], dtype=float)
        B = np.asarray(cfg["B"], dtype=float)
        C = np.asarray(cfg["C"], dtype=float)
        D = np.asarray(cfg["D"], dtype=float)
        w = float(cfg.get("omega", 0.0))
        S = scattering.passive_scattering(Y, B, C, D, w)
        n = Y.shape[0]
        resid = core.symplectic_residual(S, core.ModeOrdering.GROUPED)
    elif kind == "active":
        Y = np.asarray(cfg["Y"], dtype=complex)
        W = np.asarray(cfg["W"], dtype=complex)
        Theta = np.asarray(cfg["Theta"], dtype=float)
        Gamma = np.asarray(cfg["Gamma"], dtype=float)
        S = scattering.active_scattering(Y, W, Theta, Gamma)
        n = Y.shape[0]
        Om = scattering.sideband_form(n)
        resid = float(np.max(np.abs(S @ Om @ S.T - Om)))
    else:
        raise SymplecticError("kind must be 'passive' or 'active'")
    return _json_dump({
        "kind": kind,
        "n_modes": n,
        "S": S.reshape(-1).tolist(),
        "shape": list(S.shape),
        "symplectic_residual": resid,
        "symplectic": bool(resid < float(args.tol or 1e-9)),
    })


def cmd_dv_teleport(cfg: dict, args) -> str:
    """Compose a mod-2 circuit and report the teleportation transform."""
    gates = [tuple(g) for g in cfg["gates"]]
    n_qubits = int(cfg["n_qubits"])
    S = discrete.circuit_compose(gates, n_qubits)
    part_name = cfg.get("partition", "teleport")
    if part_name == "teleport":
        part = discrete.teleport_partition(n_qubits)
    elif part_name == "gate_teleport":
        part = discrete.gate_teleport_partition()
    else:
        raise SymplecticError("partition must be 'teleport' or 'gate_teleport'")
    S_tilde, F_star = discrete.dv_teleport_transform(S, part)
    table = []
    m = F_star.shape[1]
    for bits in range(2 ** m):
        syndrome = [(bits >> k) & 1 for k in range(m)]
        corr = discrete.feedforward_correction(F_star, syndrome)
        table.append({"syndrome": syndrome, "correction": corr.tolist(),
                      "pauli": _pauli_name(corr)})
    return _json_dump({
        "n_qubits": n_qubits,
        "S": S.tolist(),
        "S_tilde": S_tilde.tolist(),
        "F_star": F_star.tolist(),
        "feedforward_table": table,
    })


def _pauli_name(label) -> str:
    names = []
    label = list(label)
    for j in range(len(label) // 2):
        z, x = label[2 * j], label[2 * j + 1]
        names.append({(0, 0): "I", (1, 0): "Z", (0, 1): "X", (1, 1): "Y"}[(z, x)])
    return "".join(names)


def cmd_dilate(cfg: dict, args) -> str:
    """Dilate a Gaussian channel and report the round-trip residual."""
    T = np.asarray(cfg["T"], dtype=float)
    N = np.asarray(cfg["N"], dtype=float)
    ch = channels.GaussianChannel(T, N)
    result = channels.dilate(ch)
    back = channels.from_dilation(result.S, result.n_sys, result.env_cov)
    resid = max(float(np.max(np.abs(back.T - T))), float(np.max(np.abs(back.N - N))))
    ntot = result.n_sys + result.n_env
    return _json_dump({
        "n_sys": result.n_sys,
        "n_env": result.n_env,
        "S": result.S.reshape(-1).tolist(),
        "env_cov": result.env_cov.reshape(-1).tolist(),
        "roundtrip_residual": resid,
        "symplectic_residual": core.symplectic_residual(result.S) if result.n_env else 0.0,
        "audit": json.loads(result.to_json()),
    })


_COMMANDS = {
    "fidelity-sweep": (cmd_fidelity_sweep,
                       {"model", "C", "t_sq", "mu", "nu", "seed"}),
    "ep-fisher": (cmd_ep_fisher,
                  {"model", "kappa", "g", "theta_grid", "theta_min", "theta_max",
                   "points", "seed"}),
    "permute-plan": (cmd_permute_plan, {"S", "seed", "target"}),
    "scatter": (cmd_scatter,
                {"kind", "Y", "W", "B", "C", "D", "Theta", "Gamma", "omega", "seed"}),
    "dv-teleport": (cmd_dv_teleport, {"gates", "n_qubits", "partition", "seed"}),
    "dilate": (cmd_dilate, {"T", "N", "seed"}),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="symplectiq",
                                     description="Gaussian-process analyzers")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="input JSON path")
        sp.add_argument("--out", default=None, help="output path (default stdout)")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--tol", type=float, default=None)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    fn, allowed = _COMMANDS[args.command]
    try:
        cfg = _load_config(args.config, allowed)
        if "seed" in allowed and args.seed is None and "seed" not in cfg \
                and args.command in ("permute-plan",):
            raise SymplecticError("randomized runs require an explicit seed")
        _log(f"running {args.command}")
        text = fn(cfg, args)
    except (SymplecticError, KeyError, FileNotFoundError, json.JSONDecodeError) as exc:
        err = _json_dump({"error": type(exc).__name__, "message": str(exc)})
        sys.stderr.write(err)
        return 2
    _write_text(args.out, text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
