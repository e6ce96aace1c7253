import json

import numpy as np
import pytest

from symplectiq import cli, core


def run_cli(tmp_path, command, cfg, fmt="csv", seed=None, out_name="out.txt"):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    out_path = tmp_path / out_name
    argv = [command, "--config", str(cfg_path), "--out", str(out_path),
            "--format", fmt]
    if seed is not None:
        argv += ["--seed", str(seed)]
    code = cli.main(argv)
    text = out_path.read_text() if out_path.exists() else None
    return code, text


def test_fidelity_sweep_passive(tmp_path):
    cfg = {"model": "passive", "t_sq": 0.8,
           "mu": [0.0, 0.01], "nu": [0.0, 0.01, 0.1]}
    code, text = run_cli(tmp_path, "fidelity-sweep", cfg)
    assert code == 0
    lines = text.strip().split("\n")
    assert lines[0] == "model,t_sq,mu,nu,fidelity_adaptive,fidelity_direct,threshold"
    assert len(lines) == 1 + 2 * 3
    first = lines[1].split(",")
    # mu = nu = 0 row: perfect adaptive fidelity
    assert float(first[4]) == pytest.approx(1.0, abs=1e-12)
    # direct fidelity equals the transmittance
    assert float(first[5]) == pytest.approx(0.8, abs=1e-10)
    assert float(first[6]) == 0.5


def test_fidelity_sweep_active_below_threshold(tmp_path):
    cfg = {"model": "active", "t_sq": 1.25, "mu": [0.01], "nu": [0.01]}
    code, text = run_cli(tmp_path, "fidelity-sweep", cfg)
    assert code == 0
    row = text.strip().split("\n")[1].split(",")
    assert float(row[5]) < 0.5       # direct transduction is classical
    assert float(row[4]) > 0.5       # adaptive beats the threshold


def test_fidelity_sweep_determinism(tmp_path):
    cfg = {"model": "passive", "C": 2.0, "mu": [0.0, 0.3], "nu": [0.1]}
    _, text1 = run_cli(tmp_path, "fidelity-sweep", cfg, out_name="a.csv")
    _, text2 = run_cli(tmp_path, "fidelity-sweep", cfg, out_name="b.csv")
    assert text1 == text2


def test_fidelity_sweep_rejects_unknown_keys(tmp_path):
    code, _ = run_cli(tmp_path, "fidelity-sweep",
                      {"model": "passive", "C": 2.0, "mu": [0], "nu": [0],
                       "bogus": 1})
    assert code == 2


def test_ep_fisher_slope(tmp_path):
    cfg = {"model": "ep", "kappa": 1.0, "g": 1.3,
           "theta_min": 1e-3, "theta_max": 1e-2, "points": 9}
    code, text = run_cli(tmp_path, "ep-fisher", cfg, fmt="json")
    assert code == 0
    obj = json.loads(text)
    assert abs(obj["slope"] + 4.0) < 0.1


def test_ep_fisher_csv_output(tmp_path):
    cfg = {"model": "conventional", "theta_min": 1e-3, "theta_max": 1e-2,
           "points": 8}
    code, text = run_cli(tmp_path, "ep-fisher", cfg)
    assert code == 0
    lines = text.strip().split("\n")
    assert lines[0] == "theta,I_mu,I_sigma,QFI_xbar,QFI_V"
    assert len([l for l in lines if not l.startswith("#")]) == 9
    summary = json.loads(lines[-1].split("summary: ")[1])
    assert abs(summary["slope"] + 2.0) < 0.1


def test_permute_plan(tmp_path):
    S = core.random_symplectic(3, seed=3, squeeze_bound=2.0)
    cfg = {"S": json.loads(core.matrix_to_json(S, 3)), "seed": 0}
    code, text = run_cli(tmp_path, "permute-plan", cfg, fmt="json")
    assert code == 0
    obj = json.loads(text)
    assert obj["off_pattern_norm"] < 1e-8
    assert len(obj["locals"]) == 15


def test_permute_plan_requires_seed(tmp_path):
    S = core.random_symplectic(3, seed=3)
    cfg = {"S": json.loads(core.matrix_to_json(S, 3))}
    code, _ = run_cli(tmp_path, "permute-plan", cfg, fmt="json")
    assert code == 2


def test_scatter_passive(tmp_path):
    g, k1, k2 = 0.8, 1.0, 1.5
    cfg = {
        "kind": "passive",
        "Y": [[0.0, -g], [-g, 0.0]],
        "B": [[2 * k1, 0.0], [0.0, 2 * k2]],
        "C": [[-np.sqrt(2 * k1), 0.0], [0.0, -np.sqrt(2 * k2)]],
        "D": [[np.sqrt(2 * k1), 0.0], [0.0, np.sqrt(2 * k2)]],
        "omega": 0.0,
    }
    code, text = run_cli(tmp_path, "scatter", cfg, fmt="json")
    assert code == 0
    obj = json.loads(text)
    assert obj["symplectic"]
    assert obj["symplectic_residual"] < 1e-9


def test_scatter_perfect_transmission(tmp_path):
    # chi = 1: r = 0, t = 1
    g = 1.0
    cfg = {
        "kind": "passive",
        "Y": [[0.0, -g], [-g, 0.0]],
        "B": [[2.0, 0.0], [0.0, 2.0]],
        "C": [[-np.sqrt(2.0), 0.0], [0.0, -np.sqrt(2.0)]],
        "D": [[np.sqrt(2.0), 0.0], [0.0, np.sqrt(2.0)]],
    }
    code, text = run_cli(tmp_path, "scatter", cfg, fmt="json")
    obj = json.loads(text)
    S = np.asarray(obj["S"]).reshape(4, 4)
    S_inter = core.to_interleaved(S, 2)
    # perfect transmitter: |offdiagonal mode coupling| = 1
    assert abs(abs(S_inter[0, 3]) - 1.0) < 1e-12 or abs(abs(S_inter[0, 2]) - 1.0) < 1e-12


def test_dv_teleport_cli(tmp_path):
    cfg = {"gates": [["H", 1], ["CNOT", 2, 1], ["CNOT", 1, 0], ["H", 0]],
           "n_qubits": 3, "partition": "teleport"}
    code, text = run_cli(tmp_path, "dv-teleport", cfg, fmt="json")
    assert code == 0
    obj = json.loads(text)
    assert obj["F_star"] == [[0, 1], [1, 0]]
    assert obj["S_tilde"] == [[1, 0], [0, 1]]
    # syndrome (0, 1) -> Z correction
    table = {tuple(row["syndrome"]): row["pauli"] for row in obj["feedforward_table"]}
    assert table[(0, 1)] == "Z"


def test_dilate_cli_roundtrip(tmp_path):
    rng = np.random.default_rng(5)
    T = rng.normal(size=(2, 2)) * 0.5
    Om = core.omega(1)
    gap = 1j * (Om - T @ Om @ T.T)
    floor = max(0.0, -float(np.min(np.linalg.eigvalsh(gap))))
    N = (floor + 0.3) * np.eye(2)
    cfg = {"T": T.tolist(), "N": N.tolist()}
    code, text = run_cli(tmp_path, "dilate", cfg, fmt="json")
    assert code == 0
    obj = json.loads(text)
    assert obj["roundtrip_residual"] < 1e-8
    assert obj["symplectic_residual"] < 1e-9


def test_cli_domain_error_exit_code(tmp_path):
    cfg = {"model": "nonsense", "mu": [0], "nu": [0]}
    code, _ = run_cli(tmp_path, "fidelity-sweep", cfg)
    assert code == 2


def test_cli_usage_error():
    assert cli.main(["no-such-command"]) == 1


def test_cli_byte_identical_json(tmp_path):
    S = core.random_symplectic(3, seed=9, squeeze_bound=2.0)
    cfg = {"S": json.loads(core.matrix_to_json(S, 3)), "seed": 4}
    _, t1 = run_cli(tmp_path, "permute-plan", cfg, fmt="json", out_name="x.json")
    _, t2 = run_cli(tmp_path, "permute-plan", cfg, fmt="json", out_name="y.json")
    assert t1 == t2
