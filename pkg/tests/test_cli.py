import csv
import json
import math

import numpy as np
import pytest

from oracles import bessel_k
from vortexblob.cli import main


def write_config(tmp_path, data, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data, indent=2) + "\n")
    return str(path)


def pair_config(out, **extra):
    g = (1.0 - bessel_k(1.0)[1]) / (2 * math.pi)
    period = 2 * math.pi / (2 * g)
    data = {"kernel": "bessel-blob", "alpha": 1.0,
            "initial": {"particles": "equal-pair(1, 1)"},
            "t_end": period, "dt": period / 400, "record_every": 100,
            "output_dir": str(out)}
    data.update(extra)
    return data


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_run_pair_one_period(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["run", "--config", write_config(tmp_path, pair_config(out))]) == 0
    rows = read_csv(out / "trajectory.csv")
    assert rows[0] == ["t", "particle", "x", "y", "gamma"]
    body = np.array(rows[1:], dtype=float)
    assert sorted(set(body[:, 0].tolist())) == pytest.approx(
        [k * body[-1, 0] / 4 for k in range(5)])
    last = body[body[:, 0] == body[-1, 0]]
    np.testing.assert_allclose(last[:, 2:4], [[-0.5, 0.0], [0.5, 0.0]], atol=1e-9)
    inv = read_csv(out / "invariants.csv")
    assert inv[0] == ["t", "circulation", "Px", "Py", "I", "H", "min_sep"]
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "run" and manifest["n_particles"] == 2
    assert not [p for p in out.iterdir() if p.name.startswith(".")]
    assert "wrote 5 records" in capsys.readouterr().out


def test_run_is_deterministic(tmp_path):
    data = {"kernel": "bessel-blob", "alpha": 0.1,
            "initial": {"particles": "random(50, 1)"}, "t_end": 0.2, "dt": 0.05,
            "rhs": "fast", "seed": 3}
    texts = []
    for k in range(2):
        out = tmp_path / f"out{k}"
        cfg = write_config(tmp_path, dict(data, output_dir=str(out)))
        assert main(["run", "--config", cfg, "--single-worker"]) == 0
        texts.append((out / "trajectory.csv").read_bytes())
    assert texts[0] == texts[1]
    # --seed overrides the configured seed
    out = tmp_path / "other"
    assert main(["run", "--config", cfg, "--seed", "4", "--output", str(out)]) == 0
    assert (out / "trajectory.csv").read_bytes() != texts[0]


def test_run_field_initial(tmp_path):
    out = tmp_path / "field"
    data = {"kernel": "bessel-blob", "alpha": 0.2, "initial": {"field": "rankine(1, 1)", "h": 0.25},
            "t_end": 0.1, "dt": 0.05, "output_dir": str(out)}
    assert main(["run", "--config", write_config(tmp_path, data)]) == 0
    rows = read_csv(out / "trajectory.csv")[1:]
    gam = sum(float(r[4]) for r in rows if float(r[0]) == 0.0)
    assert gam == pytest.approx(math.pi, rel=0.05)


def test_missing_dt_is_usage_error(tmp_path, capsys):
    data = pair_config(tmp_path / "o")
    del data["dt"]
    assert main(["run", "--config", write_config(tmp_path, data)]) == 2
    assert "missing required field 'dt'" in capsys.readouterr().err


def test_bad_json_reports_line(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "kernel": "bessel-blob",\n  "alpha": 0.1,,\n}\n')
    assert main(["run", "--config", str(path)]) == 2
    assert f"{path}:3" in capsys.readouterr().err


def test_negative_alpha_reports_line(tmp_path, capsys):
    data = pair_config(tmp_path / "o", alpha=-0.1)
    assert main(["run", "--config", write_config(tmp_path, data)]) == 2
    err = capsys.readouterr().err
    assert ":3:" in err and "alpha" in err


def test_euler_collision_exits_one(tmp_path, capsys):
    data = {"kernel": "euler-point", "initial": {"particles": [[0, 0, 1], [0, 0, 1]]},
            "t_end": 1.0, "dt": 0.1, "output_dir": str(tmp_path / "o")}
    assert main(["run", "--config", write_config(tmp_path, data)]) == 1
    err = capsys.readouterr().err
    assert "particles 0 and 1" in err and "t = 0.0" in err
    assert not (tmp_path / "o" / "trajectory.csv").exists()


def test_unknown_suite_is_usage_error():
    with pytest.raises(SystemExit) as info:
        main(["verify", "nonsense"])
    assert info.value.code == 2


def test_verify_picard(tmp_path, capsys):
    out = tmp_path / "v"
    assert main(["verify", "picard", "--output", str(out)]) == 0
    rows = read_csv(out / "report.csv")
    assert rows[0] == ["criterion", "check", "value", "threshold", "status", "detail"]
    assert all(r[4] == "pass" for r in rows[1:])
    assert "suite picard: PASS" in capsys.readouterr().out


def test_verify_collapse_writes_series(tmp_path):
    out = tmp_path / "c"
    main(["verify", "collapse", "--output", str(out)])
    for name in ("collapse_point.csv", "collapse_blob.csv"):
        rows = read_csv(out / name)
        assert rows[0] == ["t", "min_distance"] and len(rows) > 10
    manifest = json.loads((out / "manifest.json").read_text())
    assert "collapse_blob.csv" in manifest["files"]


def test_converge_small(tmp_path, capsys):
    out = tmp_path / "conv"
    data = {"alphas": [0.4, 0.2], "t_end": 0.3, "dt": 0.1, "rhs": "direct",
            "output_dir": str(out)}
    main(["converge", "--config", write_config(tmp_path, data)])
    printed = capsys.readouterr().out
    assert "fitted_order=" in printed
    rows = read_csv(out / "rate_table.csv")
    assert rows[0] == ["alpha", "h", "N", "sup_error", "runtime_seconds"]
    assert [float(r[0]) for r in rows[1:3]] == [0.4, 0.2]
    assert rows[-1][0] == "fitted_order"
    assert f"fitted_order={float(rows[-1][1])!r}" in printed


def test_converge_single_alpha_is_usage_error(tmp_path, capsys):
    assert main(["converge", "--config", write_config(tmp_path, {"alphas": [0.1]})]) == 2
    assert "at least two" in capsys.readouterr().err
