import json
import os
import re
import shutil

import pytest

from netcov import fattree
from netcov.cli import EXIT_ERROR, EXIT_OK, EXIT_TESTS_FAILED, RunConfig, build_parser, main
from oracles import FIXTURES

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
TWO_ROUTER = os.path.join("tests", "fixtures", "two_router")


def two_router_args(*extra):
    return ["--configs", TWO_ROUTER, "--topology", f"{TWO_ROUTER}/topology.json", *extra]


@pytest.fixture
def at_root(monkeypatch):
    monkeypatch.chdir(ROOT)


def read(path):
    with open(path, "rb") as fh:
        return fh.read()


@pytest.mark.parametrize("k", [2, 4, 6])
def test_gen_fattree_device_count(k, tmp_path, capsys):
    assert main(["gen-fattree", "-k", str(k), "--out", str(tmp_path)]) == EXIT_OK
    cfgs = sorted(os.listdir(tmp_path / "configs"))
    assert len(cfgs) == k * k * 5 // 4 == fattree.device_count(k)
    roles = [re.match(r"[a-z]+", c).group() for c in cfgs]
    assert roles.count("leaf") == roles.count("agg") == k * k // 2
    assert roles.count("spine") == k * k // 4
    assert f"wrote {len(cfgs)} devices" in capsys.readouterr().out


def test_gen_fattree_rejects_odd_k(tmp_path, capsys):
    assert main(["gen-fattree", "-k", "3", "--out", str(tmp_path)]) == EXIT_ERROR
    assert "even" in capsys.readouterr().err


def test_cover_two_router_matches_golden(at_root, tmp_path, capsys):
    out = tmp_path / "out"
    rc = main(["cover", *two_router_args("--suite", f"{TWO_ROUTER}/suite.json", "--out", str(out))])
    assert rc == EXIT_OK
    golden = os.path.join(FIXTURES, "golden")
    assert read(out / "coverage.strong.lcov") == read(f"{golden}/two_router.strong.lcov")
    assert read(out / "coverage.weak.lcov") == read(f"{golden}/two_router.weak.lcov")
    text = capsys.readouterr().out
    assert "PASS  r1-learns-r2-lan" in text and "data plane coverage 25.0%" in text


def test_failing_suite_exits_one_and_still_writes(at_root, tmp_path, capsys):
    suite = tmp_path / "suite.json"
    suite.write_text(json.dumps({"tests": [
        {"kind": "RoutePresent", "name": "ok", "host": "R1", "prefix": "10.10.1.0/24"},
        {"kind": "RoutePresent", "name": "nope", "host": "R1", "prefix": "10.99.0.0/24"}]}))
    out = tmp_path / "out"
    assert main(["cover", *two_router_args("--suite", str(suite), "--out", str(out))]) == \
        EXIT_TESTS_FAILED
    assert (out / "coverage.json").exists()
    assert "FAIL  nope" in capsys.readouterr().out


def test_config_error_reports_file_and_line(tmp_path, capsys):
    d = tmp_path / "net"
    shutil.copytree(os.path.join(FIXTURES, "two_router"), d)
    text = (d / "R2.cfg").read_text().replace("import-policy R1-to-R2", "import-policy MISSING")
    (d / "R2.cfg").write_text(text)
    rc = main(["cover", "--configs", str(d), "--topology", str(d / "topology.json"),
               "--out", str(tmp_path / "o")])
    assert rc == EXIT_ERROR
    err = capsys.readouterr().err
    assert err.startswith("error: ") and "R2.cfg:13" in err and "MISSING" in err


def test_missing_input_is_a_pipeline_error(tmp_path, capsys):
    assert main(["simulate", "--configs", str(tmp_path / "nothing")]) == EXIT_ERROR
    assert capsys.readouterr().err.startswith("error: ")


@pytest.mark.parametrize("argv", [
    ["cover", "--configs", "x", "--snapshot-in", "s", "--topology", "t"],
    ["cover", "--configs", "x", "--snapshot-in", "s", "--environment", "e"],
    ["cover", "--configs", "x", "--workers", "0"],
    ["frobnicate"],
])
def test_bad_flags_exit_two(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2


def test_run_config_from_args():
    ns = build_parser().parse_args(["cover", "--configs", "c", "--no-weak-labeling",
                                    "--workers", "3", "--bdd-cap", "50"])
    run = RunConfig.from_args(ns)
    assert (run.config_dir, run.weak_labeling, run.workers, run.bdd_cap, run.out_dir) == \
        ("c", False, 3, 50, "netcov-out")


def test_snapshot_path_equivalence(at_root, tmp_path):
    snap = tmp_path / "state.json"
    assert main(["simulate", *two_router_args("--snapshot-out", str(snap))]) == EXIT_OK
    direct, reused = tmp_path / "a", tmp_path / "b"
    main(["cover", *two_router_args("--suite", f"{TWO_ROUTER}/suite.json", "--out", str(direct))])
    main(["cover", "--configs", TWO_ROUTER, "--snapshot-in", str(snap),
          "--suite", f"{TWO_ROUTER}/suite.json", "--out", str(reused)])
    for name in ("coverage.strong.lcov", "coverage.weak.lcov", "coverage.json"):
        assert read(direct / name) == read(reused / name)


def test_simulate_prints_state(at_root, capsys):
    assert main(["simulate", *two_router_args()]) == EXIT_OK
    state = json.loads(capsys.readouterr().out)
    assert state


def test_empty_suite_is_zero_everywhere(at_root, tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["cover", *two_router_args("--out", str(out))]) == EXIT_OK
    report = json.loads((out / "coverage.json").read_text())
    assert report["summary"]["covered"] == 0 and report["dataplane_coverage"] == 0
    assert all(b["covered_pct"] == 0.0 for b in report["buckets"])
    assert "total" in capsys.readouterr().out


def test_diff_command(at_root, tmp_path, capsys):
    empty, full = tmp_path / "e", tmp_path / "f"
    main(["cover", *two_router_args("--out", str(empty))])
    main(["cover", *two_router_args("--suite", f"{TWO_ROUTER}/suite.json", "--out", str(full))])
    capsys.readouterr()
    assert main(["diff", str(empty / "coverage.json"), str(full / "coverage.json")]) == EXIT_OK
    text = capsys.readouterr().out
    assert text.startswith("covered 0.0% -> 70.4% (+70.4)")
    assert f"+ {TWO_ROUTER}/R1.cfg:1" in text
    main(["diff", "--json", str(full / "coverage.json"), str(empty / "coverage.json")])
    d = json.loads(capsys.readouterr().out)
    assert d["covered_pct_delta"] == -70.4 and len(d["lost"]) == 19


def test_dump_ifg(at_root, tmp_path, capsys):
    path = tmp_path / "ifg.json"
    main(["dump-ifg", *two_router_args("--suite", f"{TWO_ROUTER}/suite.json", "--out", str(path))])
    g = json.loads(path.read_text())
    assert sum(n["seed"] for n in g["nodes"]) == 1
    assert {n["kind"] for n in g["nodes"]} >= {"main", "config", "msg"}
    out = tmp_path / "o"
    main(["cover", *two_router_args("--suite", f"{TWO_ROUTER}/suite.json", "--out", str(out),
                              "--dump-ifg", str(tmp_path / "again.json"))])
    assert read(path) == read(tmp_path / "again.json")


def test_no_weak_labeling_flag(tmp_path, capsys):
    configs, topo, _, suite = (os.path.join(FIXTURES, "aggregation", p) for p in
                               ("", "topology.json", "", "suite.json"))
    base = ["cover", "--configs", configs, "--topology", topo, "--suite", suite]
    main([*base, "--out", str(tmp_path / "w")])
    main([*base, "--out", str(tmp_path / "s"), "--no-weak-labeling"])
    w = json.loads((tmp_path / "w" / "coverage.json").read_text())["summary"]
    s = json.loads((tmp_path / "s" / "coverage.json").read_text())["summary"]
    assert w["weak"] > 0 and s["weak"] == 0
    assert w["covered"] == s["covered"]


def test_bdd_cap_overflow_is_reported(tmp_path, capsys):
    configs = os.path.join(FIXTURES, "aggregation")
    rc = main(["cover", "--configs", configs, "--topology", f"{configs}/topology.json",
               "--suite", f"{configs}/suite.json", "--out", str(tmp_path), "--bdd-cap", "2"])
    assert rc == EXIT_ERROR
    assert "BddCapacityError" in capsys.readouterr().err
