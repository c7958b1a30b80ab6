"""Command line front end, exercised in-process through ``run``."""

import json
import subprocess
import sys

import pytest

import hvconic as hv
from hvconic.cli import run


def invoke(capsys, *argv):
    code = run(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# ---------------------------------------------------------------------------
# happy paths


def test_enum_counts(capsys):
    code, out, err = invoke(capsys, "enum", "--dims", "1x2")
    assert code == 0 and out.strip() == "3" and err == ""
    code, out, _ = invoke(capsys, "enum", "--dims", "2x2", "--full-box")
    assert code == 0 and out.strip() == "7"


def test_enum_dump(tmp_path, capsys):
    code, out, _ = invoke(
        capsys, "enum", "--dims", "1x2", "--dump", str(tmp_path / "sets")
    )
    assert code == 0
    files = sorted((tmp_path / "sets").iterdir())
    assert [f.name for f in files] == ["set000000.hvset", "set000001.hvset", "set000002.hvset"]
    parsed = [hv.parse_hvset(f.read_text(encoding="utf-8")) for f in files]
    assert len(set(parsed)) == 3


def test_gen_round_trip(tmp_path, capsys):
    out_file = tmp_path / "L.hvset"
    code, _, _ = invoke(
        capsys, "gen", "--dims", "6x5", "--box", "0,3,0,2.5", "--seed", "11",
        "--out", str(out_file),
    )
    assert code == 0
    L = hv.parse_hvset(out_file.read_text(encoding="utf-8"))
    assert L.geometry.m == 6 and L.geometry.n == 5
    assert L.geometry.box == hv.Box(0.0, 3.0, 0.0, 2.5)
    assert hv.is_hv_convex(L) and hv.is_connected(L)
    # same seed, same set
    again = tmp_path / "M.hvset"
    invoke(capsys, "gen", "--dims", "6x5", "--box", "0,3,0,2.5", "--seed", "11",
           "--out", str(again))
    assert again.read_text(encoding="utf-8") == out_file.read_text(encoding="utf-8")


def test_gen_full_box_to_stdout(capsys):
    code, out, _ = invoke(
        capsys, "gen", "--dims", "4x4", "--box", "0,4,0,4", "--full-box"
    )
    assert code == 0
    L = hv.parse_hvset(out)
    assert hv.in_level_set(L, hv.Box(0, 4, 0, 4))


def test_xray_writes_profiles(tmp_path, capsys):
    src = tmp_path / "L.hvset"
    invoke(capsys, "gen", "--dims", "4x4", "--box", "0,4,0,4", "--out", str(src))
    capsys.readouterr()
    code, out, _ = invoke(capsys, "xray", str(src))
    assert code == 0
    vpath, hpath = out.strip().splitlines()
    assert vpath.endswith("L_vertical.csv") and hpath.endswith("L_horizontal.csv")
    L = hv.parse_hvset(src.read_text(encoding="utf-8"))
    with open(vpath, encoding="utf-8") as fh:
        assert hv.parse_profile_csv(fh.read(), "vertical") == hv.xray_v(L)
    with open(hpath, encoding="utf-8") as fh:
        assert hv.parse_profile_csv(fh.read(), "horizontal") == hv.xray_h(L)


def test_conic_csv_and_pgm(tmp_path, capsys):
    src = tmp_path / "L.hvset"
    invoke(capsys, "gen", "--dims", "3x3", "--box", "0,3,0,3", "--out", str(src))
    csv_path = tmp_path / "f.csv"
    pgm_path = tmp_path / "f.pgm"
    code, _, _ = invoke(
        capsys, "conic", str(src), "--samples", "9x7",
        "--out", str(csv_path), "--pgm", str(pgm_path),
    )
    assert code == 0
    lines = csv_path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "x,y,f" and len(lines) == 1 + 9 * 7
    pgm = pgm_path.read_text(encoding="utf-8").splitlines()
    assert pgm[0] == "P2" and pgm[1] == "9 7" and pgm[2] == "65535"


def test_dist_equal_sets(tmp_path, capsys):
    src = tmp_path / "L.hvset"
    invoke(capsys, "gen", "--dims", "4x4", "--box", "0,4,0,4", "--out", str(src))
    code, out, _ = invoke(capsys, "dist", str(src), str(src))
    assert code == 0 and out.strip() == "0.0 0.0"


def test_dist_known_pair(tmp_path, capsys):
    a = tmp_path / "a.hvset"
    b = tmp_path / "b.hvset"
    geo = hv.GridGeometry(hv.Box(0, 2, 0, 2), 2, 2)
    a.write_text(hv.format_hvset(hv.GridSet.from_cells(geo, [(0, 0), (1, 1)])), "utf-8")
    b.write_text(hv.format_hvset(hv.GridSet.from_cells(geo, [(0, 1), (1, 0)])), "utf-8")
    code, out, _ = invoke(capsys, "dist", str(a), str(b), "--subsamples", "6")
    assert code == 0
    lower, upper = (float(v) for v in out.split())
    assert lower <= 1.0 <= upper


# ---------------------------------------------------------------------------
# verify batches


def test_verify_remark2(tmp_path, capsys):
    out_file = tmp_path / "r.jsonl"
    code, _, _ = invoke(capsys, "verify", "remark2", "--out", str(out_file))
    assert code == 0  # failing counterexample is the expected outcome
    rec = json.loads(out_file.read_text(encoding="utf-8"))
    assert rec["name"] == "remark2" and rec["holds"] is False


@pytest.mark.parametrize(
    "mode,extra",
    [
        ("concavity", ["--seeds", "3"]),
        ("superadd", ["--seeds", "5"]),
        ("dilation", ["--seeds", "3", "--eps", "0.5", "--refine", "4"]),
        ("stability", ["--seeds", "3"]),
        ("convergence", ["--seeds", "2"]),
        ("convergence", ["--seeds", "2", "--resolutions", "2x2,4x4,8x8"]),
        ("polyline", ["--seeds", "4", "--eps", "0.3", "--segments", "4"]),
    ],
)
def test_verify_batches_pass(mode, extra, capsys):
    code, out, err = invoke(capsys, "verify", mode, *extra)
    assert code == 0, (mode, err)
    reports = [json.loads(line) for line in out.strip().splitlines()]
    assert reports and all(r["holds"] for r in reports)
    assert all(r["name"] for r in reports)


def test_verify_writes_jsonl(tmp_path, capsys):
    out_file = tmp_path / "batch.jsonl"
    code, out, _ = invoke(
        capsys, "verify", "concavity", "--seeds", "2", "--t", "1/3",
        "--out", str(out_file),
    )
    assert code == 0 and out == ""
    lines = out_file.read_text(encoding="utf-8").strip().splitlines()
    assert len(lines) == 2
    assert all(json.loads(ln)["witness"]["t"] == "1/3" for ln in lines)


# ---------------------------------------------------------------------------
# reconstruct


def test_reconstruct_end_to_end(tmp_path, capsys):
    gen = tmp_path / "gen.hvset"
    invoke(capsys, "gen", "--dims", "4x4", "--box", "0,4,0,4", "--seed", "8",
           "--out", str(gen))
    problem = tmp_path / "problem.json"
    problem.write_text(
        json.dumps(
            {
                "target": {"hvset": str(gen)},
                "box": [0, 4, 0, 4],
                "dims": [4, 4],
                "budget": {"steps": 20000, "restarts": 2,
                           "initial_temperature": 4.0, "cooling": 0.9997},
                "seed": 1,
                "out_prefix": str(tmp_path / "rec"),
            }
        ),
        encoding="utf-8",
    )
    code, out, _ = invoke(capsys, "reconstruct", str(problem))
    assert code == 0
    summary = json.loads(out)
    assert summary["objective"] == 0.0
    best = hv.parse_hvset((tmp_path / "rec.hvset").read_text(encoding="utf-8"))
    L = hv.parse_hvset(gen.read_text(encoding="utf-8"))
    assert hv.xrays_equal_ae(best, L)


def test_reconstruct_oracle_reports_optima(tmp_path, capsys):
    geo = hv.GridGeometry(hv.Box(0, 2, 0, 2), 2, 2)
    gen = tmp_path / "diag.hvset"
    gen.write_text(hv.format_hvset(hv.GridSet.from_cells(geo, [(0, 0), (1, 1)])), "utf-8")
    problem = tmp_path / "problem.json"
    problem.write_text(
        json.dumps(
            {
                "target": {"hvset": str(gen)},
                "box": [0, 2, 0, 2],
                "dims": [2, 2],
                "out_prefix": str(tmp_path / "rec"),
            }
        ),
        encoding="utf-8",
    )
    code, out, _ = invoke(capsys, "reconstruct", str(problem), "--oracle")
    assert code == 0
    summary = json.loads(out)
    assert summary["objective"] == 0.0 and summary["optima"] == 2
    assert summary["thin_contact"] is True


# ---------------------------------------------------------------------------
# failure modes


def test_missing_file_is_io_error(capsys):
    code, out, err = invoke(capsys, "xray", "absent.hvset")
    assert code == 1
    assert err.startswith("ERROR IOError:")


def test_domain_error_reports_class(tmp_path, capsys):
    bad = tmp_path / "bad.hvset"
    bad.write_text("HVSET v9\n", encoding="utf-8")
    code, _, err = invoke(capsys, "xray", str(bad))
    assert code == 1
    assert err.startswith("ERROR FormatError:")
    good = tmp_path / "good.hvset"
    geo = hv.GridGeometry(hv.Box(0, 2, 0, 2), 2, 2)
    good.write_text(hv.format_hvset(hv.GridSet.full(geo)), encoding="utf-8")
    code, _, err = invoke(capsys, "conic", str(good), "--samples", "1x5")
    assert code == 1
    assert err.startswith("ERROR InvalidParameter:")


def test_verify_failure_exits_one(tmp_path, capsys):
    # an eps far above the dilation slack makes the bound fail honestly:
    # no such eps exists (the bound scales with eps), so force a failing
    # batch through a precondition instead
    code, _, err = invoke(capsys, "verify", "dilation", "--eps", "-1")
    assert code == 1
    assert err.startswith("ERROR PreconditionViolated:")


def test_usage_errors_exit_two(capsys):
    assert invoke(capsys, "gen", "--dims", "4x4")[0] == 2  # missing --box
    assert invoke(capsys, "gen", "--dims", "axb", "--box", "0,1,0,1")[0] == 2
    assert invoke(capsys, "nosuchcommand")[0] == 2
    assert invoke(capsys, "verify", "nosuchmode")[0] == 2
    assert invoke(capsys)[0] == 2


def test_console_entry_subprocess():
    proc = subprocess.run(
        [sys.executable, "-m", "hvconic.cli", "enum", "--dims", "1x2"],
        capture_output=True,
        text=True,
        timeout=120,
    )
    assert proc.returncode == 0
    assert proc.stdout.strip() == "3"
