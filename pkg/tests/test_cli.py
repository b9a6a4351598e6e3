import json
import sys
from pathlib import Path

from spacebound.cli import main

MINI_SOLVER = f"{sys.executable} {Path(__file__).parent / 'mini_solver.py'}"


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def gen(tmp_path, capsys, name, *flags):
    path = tmp_path / f"{name}.besd"
    code, _, err = run(capsys, "gen", name, "-o", str(path), *flags)
    assert code == 0, err
    return path


def test_gen_then_parse_round_trip(tmp_path, capsys):
    path = gen(tmp_path, capsys, "forklift")
    code, out, _ = run(capsys, "parse", str(path))
    assert code == 0
    assert "(def-term" in out and "fl2" in out


def test_parse_reports_invalid_terms(tmp_path, capsys):
    bad = tmp_path / "bad.besd"
    bad.write_text("(def-term broken (box2d 5 0 0 5))\n", encoding="utf-8")
    code, _, err = run(capsys, "parse", str(bad))
    assert code == 3
    assert "BoxUnordered" in err


def test_parse_syntax_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.besd"
    bad.write_text("(def-term x (box2d 1 2", encoding="utf-8")
    code, _, err = run(capsys, "parse", str(bad))
    assert code == 3
    assert "expected" in err


def test_check_disjoint_benchmark_passes(tmp_path, capsys):
    path = gen(tmp_path, capsys, "benchmark", "--timepoints", "30", "--seed", "3")
    code, out, _ = run(capsys, "check", str(path), "--backend", "boxes")
    assert code == 0
    assert "[PASS]" in out


def test_check_planted_overlap_fails_with_witness(tmp_path, capsys):
    path = gen(
        tmp_path, capsys, "benchmark",
        "--timepoints", "30", "--seed", "3", "--force-overlap",
    )
    code, out, _ = run(capsys, "check", str(path), "--backend", "points")
    assert code == 1
    assert "[FAIL]" in out
    assert "point (" in out


def test_check_writes_json_report(tmp_path, capsys):
    path = gen(tmp_path, capsys, "benchmark", "--timepoints", "10", "--seed", "3")
    report_path = tmp_path / "report.json"
    code, _, _ = run(capsys, "check", str(path), "--json", str(report_path))
    assert code == 0
    doc = json.loads(report_path.read_text(encoding="utf-8"))
    assert doc["overall"] == "pass"
    assert doc["reports"][0]["stats"]["backend"] == "boxes"


def test_check_smt_without_solver_emits_scripts_and_exits_2(tmp_path, capsys, monkeypatch):
    monkeypatch.delenv("SPACEBOUND_SOLVER", raising=False)
    path = gen(tmp_path, capsys, "benchmark", "--timepoints", "5", "--seed", "3")
    out_dir = tmp_path / "vcs"
    code, out, _ = run(
        capsys, "check", str(path), "--backend", "smt-mono", "--out", str(out_dir)
    )
    assert code == 2
    assert "INCONCLUSIVE" in out
    assert (out_dir / "vc_c0-c1_all.smt2").exists()


def test_check_smt_with_solver_command(tmp_path, capsys):
    path = gen(
        tmp_path, capsys, "benchmark",
        "--timepoints", "5", "--seed", "3", "--force-overlap",
    )
    out_dir = tmp_path / "vcs"
    code, out, _ = run(
        capsys, "check", str(path), "--backend", "smt-per-t",
        "--solver-cmd", MINI_SOLVER, "--out", str(out_dir),
    )
    assert code == 1
    assert "[FAIL]" in out
    assert (out_dir / "vc_c0-c1_t0.smt2").exists()


def test_check_smt_solver_from_environment(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("SPACEBOUND_SOLVER", MINI_SOLVER)
    path = gen(tmp_path, capsys, "benchmark", "--timepoints", "5", "--seed", "3")
    code, out, _ = run(
        capsys, "check", str(path), "--backend", "smt-mono", "--out", str(tmp_path / "v")
    )
    assert code == 0
    assert "[PASS]" in out


def test_check_resolves_event_relative_time_with_trace(tmp_path, capsys):
    doc = """
(def-term mover (implies (time (after go 1)) (box2d 0 0 3 3)))
(def-term blocker (implies (time t2) (box2d 2 2 5 5)))
(def-timeorder order (points t0 t1 t2 t3) (edges (t0 t1) (t1 t2) (t2 t3)))
(def-trace sched (occurs go t1))
"""
    path = tmp_path / "ertp.besd"
    path.write_text(doc, encoding="utf-8")
    code, out, _ = run(capsys, "check", str(path))
    assert code == 1  # the mover lands on the blocker one step after "go"
    assert "t2" in out

    # without the trace the event-relative label cannot be resolved
    no_trace = "\n".join(l for l in doc.splitlines() if "def-trace" not in l)
    path.write_text(no_trace, encoding="utf-8")
    code, _, err = run(capsys, "check", str(path))
    assert code == 3
    assert "trace" in err


def test_check_coverage_flow(tmp_path, capsys):
    doc = """
(def-term robot (implies (time t0) (box2d 2 2 3 3)))
(def-term antenna (implies (time t0) (box2d 0 0 10 10)))
(def-timeorder order (points t0) (edges))
"""
    path = tmp_path / "cov.besd"
    path.write_text(doc, encoding="utf-8")
    code, out, _ = run(
        capsys, "check", str(path), "--property", "coverage",
        "--inner", "robot", "--outer", "antenna",
    )
    assert code == 0
    assert "coverage robot vs antenna" in out

    doc2 = doc.replace("(box2d 2 2 3 3)", "(box2d 9 9 12 12)")
    path.write_text(doc2, encoding="utf-8")
    code, out, _ = run(
        capsys, "check", str(path), "--property", "coverage",
        "--inner", "robot", "--outer", "antenna",
    )
    assert code == 1


def two_forklifts(tmp_path, with_geometry=True):
    """Two forklifts on the same schedule; they must collide."""
    from spacebound import dsl
    from spacebound.scenarios import forklift_document

    base = forklift_document()
    fl2 = base.terms["fl2"]
    defs = [dsl.Definition(dsl.TERM, "fl2", fl2), dsl.Definition(dsl.TERM, "fl8", fl2)]
    defs += [
        d for d in base.definitions
        if d.kind == dsl.TIMEORDER or (with_geometry and d.kind == dsl.GEOMETRY)
    ]
    path = tmp_path / "pair.besd"
    path.write_text(dsl.print_document(dsl.SourceDocument(tuple(defs))), encoding="utf-8")
    return path


def test_check_forklift_with_geometry_collides_with_itself(tmp_path, capsys):
    merged = two_forklifts(tmp_path)
    code, out, _ = run(capsys, "check", str(merged), "--backend", "boxes")
    assert code == 1
    assert "fl2 vs fl8" in out


def test_emit_smt_writes_per_timepoint_files(tmp_path, capsys):
    path = gen(tmp_path, capsys, "benchmark", "--timepoints", "3", "--seed", "1")
    out_dir = tmp_path / "vcs"
    code, out, _ = run(capsys, "emit-smt", str(path), "--out", str(out_dir))
    assert code == 0
    files = sorted(p.name for p in out_dir.glob("*.smt2"))
    assert files == ["vc_c0-c1_t0.smt2", "vc_c0-c1_t1.smt2", "vc_c0-c1_t2.smt2"]


def test_render_svg_from_forklift(tmp_path, capsys):
    path = gen(tmp_path, capsys, "forklift")
    out = tmp_path / "plot.svg"
    code, _, _ = run(capsys, "render-svg", str(path), "--out", str(out))
    assert code == 0
    assert out.read_text(encoding="utf-8").startswith("<?xml")


def test_render_svg_rejects_symbolic_input(tmp_path, capsys):
    path = tmp_path / "sym.besd"
    path.write_text(
        "(def-term s (implies (time t0) (boxsym x 0 (+ x 1) 5)))\n"
        "(def-timeorder order (points t0) (edges))\n",
        encoding="utf-8",
    )
    code, _, err = run(capsys, "render-svg", str(path), "--out", str(tmp_path / "o.svg"))
    assert code == 3
    assert "symbolic" in err


def test_pipeline_geometrize_then_check(tmp_path, capsys):
    path = two_forklifts(tmp_path)
    pipeline = tmp_path / "passes.txt"
    pipeline.write_text("geometrize\ncheck-boxes\n", encoding="utf-8")
    code, out, _ = run(capsys, "pipeline", str(path), "--pipeline", str(pipeline))
    assert code == 1  # the two schedules overlap
    assert "fl2 vs fl8" in out


def test_pipeline_empty_file_echoes_input(tmp_path, capsys):
    path = gen(tmp_path, capsys, "forklift")
    pipeline = tmp_path / "empty.txt"
    pipeline.write_text("; nothing here\n\n", encoding="utf-8")
    code, out, _ = run(capsys, "pipeline", str(path), "--pipeline", str(pipeline))
    assert code == 0
    assert "(def-term" in out and "fl2" in out


def test_pipeline_pair_count_errors_carry_stage_tag(tmp_path, capsys):
    path = gen(tmp_path, capsys, "forklift")  # a single component
    pipeline = tmp_path / "bad.txt"
    pipeline.write_text("geometrize\ncheck-boxes\n", encoding="utf-8")
    code, _, err = run(capsys, "pipeline", str(path), "--pipeline", str(pipeline))
    assert code == 3
    assert "stage 2" in err and "check-boxes" in err


def test_pipeline_unknown_pass(tmp_path, capsys):
    path = gen(tmp_path, capsys, "forklift")
    pipeline = tmp_path / "bad.txt"
    pipeline.write_text("frobnicate\n", encoding="utf-8")
    code, _, err = run(capsys, "pipeline", str(path), "--pipeline", str(pipeline))
    assert code == 3
    assert "frobnicate" in err


def test_pipeline_dumps_intermediates(tmp_path, capsys):
    path = gen(tmp_path, capsys, "forklift")
    pipeline = tmp_path / "passes.txt"
    pipeline.write_text("geometrize\nbox-abstract\n", encoding="utf-8")
    dump = tmp_path / "stages"
    code, out, _ = run(
        capsys, "pipeline", str(path), "--pipeline", str(pipeline),
        "--dump-dir", str(dump), "--out", str(tmp_path / "final.besd"),
    )
    assert code == 0
    assert sorted(p.name for p in dump.glob("*.besd")) == [
        "01-geometrize.besd", "02-box-abstract.besd",
    ]


def test_transform_normalize(tmp_path, capsys):
    src = tmp_path / "t.besd"
    src.write_text(
        "(def-term x (implies (time t0) (and (and (box2d 0 0 1 1) (box2d 2 2 3 3)) (true))))\n"
        "(def-timeorder order (points t0) (edges))\n",
        encoding="utf-8",
    )
    code, out, _ = run(capsys, "transform", str(src), "--pass", "normalize")
    assert code == 0
    assert "(bigand (box2d 0 0 1 1) (box2d 2 2 3 3))" in out


def test_usage_errors_exit_3(tmp_path, capsys):
    code, _, err = run(capsys, "check")
    assert code == 3
    code, _, err = run(capsys, "nonsense")
    assert code == 3
    code, _, err = run(capsys, "check", str(tmp_path / "missing.besd"))
    assert code == 3


def test_misordered_check_before_geometrize(tmp_path, capsys):
    # node atoms reach the checker before any geometrize stage ran
    path = two_forklifts(tmp_path)
    pipeline = tmp_path / "passes.txt"
    pipeline.write_text("check-boxes\n", encoding="utf-8")
    code, _, err = run(capsys, "pipeline", str(path), "--pipeline", str(pipeline))
    assert code == 3
    assert "stage 1" in err and "check-boxes" in err
    assert "geometry" in err
