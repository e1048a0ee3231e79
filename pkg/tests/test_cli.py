"""Command-line entry point, artifacts, and suite tables."""

import json

import pytest

from pansampler.bitblast import parse_dimacs
from pansampler.cli import (DEFAULT_TARGETS, RECORD_FIELDS, BenchRecord,
                            _parse_targets, aggregate, aggregate_csv,
                            build_arg_parser, infer_logic, main, records_csv,
                            run_file, sampler_config)
from pansampler.evaluate import satisfies
from pansampler.parser import parse_file, parse_formula
from pansampler.printer import parse_model_blocks
from pansampler.sampler import Mode, SamplerConfig

FREE3 = "(declare-const x (_ BitVec 3))(assert (bvule x x))\n"
TAUT = "(declare-const x Bool)(assert (or x (not x)))\n"
UNSAT = "(declare-const x Bool)(assert x)(assert (not x))\n"


def test_defaults():
    args = build_arg_parser().parse_args(["f.smt2"])
    assert args.target_coverage == 0.995
    assert args.lam == 50
    assert args.max_solutions == 1000
    assert args.time_budget == 3600.0
    assert args.mode == "pansampler"
    assert args.seed == 0
    assert args.bias_p == 0.85
    assert not args.emit_dimacs and not args.oracle_check
    assert not args.deterministic_timing
    assert args.targets == "" and args.out_dir == ""


def test_environment_presets_and_flag_precedence(monkeypatch):
    monkeypatch.setenv("PANSAMPLER_LAMBDA", "7")
    monkeypatch.setenv("PANSAMPLER_MODE", "alt2")
    monkeypatch.setenv("PANSAMPLER_EMIT_DIMACS", "yes")
    monkeypatch.setenv("PANSAMPLER_BIAS_P", "0.6")
    args = build_arg_parser().parse_args(["f.smt2"])
    assert args.lam == 7
    assert args.mode == "alt2"
    assert args.emit_dimacs
    assert args.bias_p == 0.6
    # Explicit flags beat the environment.
    args = build_arg_parser().parse_args(
        ["f.smt2", "--lambda", "9", "--mode", "alt3"])
    assert args.lam == 9
    assert args.mode == "alt3"


def test_falsy_environment_flag(monkeypatch):
    monkeypatch.setenv("PANSAMPLER_ORACLE_CHECK", "0")
    assert not build_arg_parser().parse_args(["f.smt2"]).oracle_check


def test_invalid_mode_is_rejected():
    with pytest.raises(SystemExit):
        build_arg_parser().parse_args(["f.smt2", "--mode", "fast"])


def test_sampler_config_from_args():
    args = build_arg_parser().parse_args(
        ["f.smt2", "--target-coverage", "0.9", "--seed", "5"])
    cfg = sampler_config(args)
    assert cfg.target_coverage == 0.9
    assert cfg.seed == 5
    assert cfg.mode is Mode.PANSAMPLER
    assert sampler_config(args, r=0.8).target_coverage == 0.8


def test_parse_targets():
    assert _parse_targets("") == DEFAULT_TARGETS
    assert _parse_targets("  ") == DEFAULT_TARGETS
    assert _parse_targets("0.5,0.9") == [0.5, 0.9]
    assert _parse_targets("0.8,") == [0.8]


def test_infer_logic():
    assert infer_logic(parse_formula(FREE3)) == "QF_BV"
    assert infer_logic(parse_formula(
        "(declare-const a (Array (_ BitVec 2) (_ BitVec 2)))"
        "(assert (= a a))")) == "QF_ABV"
    assert infer_logic(parse_formula(
        "(declare-fun g ((_ BitVec 2)) (_ BitVec 2))"
        "(assert (= (g #b00) #b00))")) == "QF_AUFBV"
    assert infer_logic(parse_formula(
        "(set-logic QF_AUFBV)" + FREE3)) == "QF_AUFBV"


def test_run_file_reaches_target_and_writes_artifacts(tmp_path):
    src = tmp_path / "demo.smt2"
    src.write_text(FREE3)
    cfg = SamplerConfig(target_coverage=0.5, lam=3, seed=0)
    rec, code = run_file(src, cfg)
    assert code == 0
    assert rec.benchmark == str(src)
    assert rec.logic == "QF_BV"
    assert rec.achieved and rec.reason == "target"
    assert rec.r == 0.5

    report = json.loads((tmp_path / "demo.report.json").read_text())
    assert report["reason"] == "target"
    assert report["num_solutions"] == rec.num_solutions
    assert report["coverage"]["coverage_star"] == rec.coverage_star
    assert len(report["coverage_star_trace"]) == rec.num_solutions
    assert "parse_time_s" in report

    f = parse_file(str(src))
    loaded = parse_model_blocks((tmp_path / "demo.samples.smt2").read_text(), f)
    assert len(loaded) == rec.num_solutions
    assert all(satisfies(f, a) for a in loaded)


def test_run_file_exit_codes(tmp_path):
    cases = [
        ("unsat.smt2", UNSAT, SamplerConfig(lam=2), 2, "unsat"),
        ("taut.smt2", TAUT, SamplerConfig(lam=2), 5, "stall"),
        ("free.smt2", FREE3, SamplerConfig(lam=2, max_solutions=1), 6,
         "max_solutions"),
        ("slow.smt2", FREE3, SamplerConfig(lam=2, time_budget=0.0), 3,
         "timeout"),
    ]
    for name, text, cfg, want_code, want_reason in cases:
        src = tmp_path / name
        src.write_text(text)
        rec, code = run_file(src, cfg)
        assert code == want_code, name
        assert rec.reason == want_reason, name


def test_run_file_handles_parse_errors(tmp_path):
    src = tmp_path / "broken.smt2"
    src.write_text("(assert (bvadd x)")
    rec, code = run_file(src, SamplerConfig(lam=2))
    assert code == 4
    assert rec.reason == "error"
    assert rec.logic == "unknown"
    assert not (tmp_path / "broken.report.json").exists()


def test_run_file_unsat_still_writes_artifacts(tmp_path):
    src = tmp_path / "unsat.smt2"
    src.write_text(UNSAT)
    run_file(src, SamplerConfig(lam=2))
    report = json.loads((tmp_path / "unsat.report.json").read_text())
    assert report["reason"] == "unsat"
    assert report["num_solutions"] == 0
    f = parse_file(str(src))
    text = (tmp_path / "unsat.samples.smt2").read_text()
    assert parse_model_blocks(text, f) == []


def test_emit_dimacs(tmp_path):
    src = tmp_path / "demo.smt2"
    src.write_text(FREE3)
    run_file(src, SamplerConfig(target_coverage=0.5, lam=2), emit_dimacs=True)
    text = (tmp_path / "demo.dimacs").read_text()
    assert text.startswith("p cnf ")
    assert parse_dimacs(text).num_vars >= 3


def test_oracle_check_annotates_the_report(tmp_path):
    src = tmp_path / "demo.smt2"
    src.write_text(FREE3)
    run_file(src, SamplerConfig(target_coverage=0.5, lam=2), oracle_check=True)
    chk = json.loads((tmp_path / "demo.report.json").read_text())["oracle_check"]
    assert chk["all_samples_valid"] is True
    assert chk["num_solutions_exhaustive"] == 8
    assert chk["exact_coverage"] > 0.0

    big = tmp_path / "big.smt2"
    big.write_text("(declare-const m (_ BitVec 32))(assert (= m #x00000003))")
    run_file(big, SamplerConfig(lam=2), oracle_check=True)
    chk = json.loads((tmp_path / "big.report.json").read_text())["oracle_check"]
    assert "error" in chk


def test_deterministic_timing_zeroes_every_clock(tmp_path):
    src = tmp_path / "demo.smt2"
    src.write_text(FREE3)
    cfg = SamplerConfig(target_coverage=0.5, lam=2, seed=1)
    rec, _ = run_file(src, cfg, deterministic_timing=True)
    assert rec.time_s == 0.0
    report = json.loads((tmp_path / "demo.report.json").read_text())
    assert report["time_s"] == 0.0
    assert report["parse_time_s"] == 0.0
    assert all(v == 0.0 for v in report["phase_times_s"].values())
    first = (tmp_path / "demo.report.json").read_bytes()
    run_file(src, cfg, deterministic_timing=True)
    assert (tmp_path / "demo.report.json").read_bytes() == first


def test_out_dir_redirects_artifacts(tmp_path):
    src = tmp_path / "demo.smt2"
    src.write_text(FREE3)
    out = tmp_path / "artifacts"
    out.mkdir()
    run_file(src, SamplerConfig(target_coverage=0.5, lam=2), out_dir=str(out))
    assert (out / "demo.samples.smt2").exists()
    assert (out / "demo.report.json").exists()
    assert not (tmp_path / "demo.report.json").exists()


def test_record_csv_rendering():
    rec = BenchRecord("a.smt2", "QF_BV", "pansampler", 0.8, True, 3,
                      0.25, 0.875, "target")
    assert rec.csv_row() == ["a.smt2", "QF_BV", "pansampler", "0.8", "true",
                             "3", "0.250000", "0.875000", "target"]
    assert records_csv([]) == ",".join(RECORD_FIELDS) + "\n"


def test_aggregate_means_cover_achieved_runs_only():
    recs = [
        BenchRecord("a", "QF_BV", "pansampler", 0.8, True, 2, 0.5, 0.9, "target"),
        BenchRecord("b", "QF_BV", "pansampler", 0.8, True, 4, 1.5, 0.85, "target"),
        BenchRecord("c", "QF_BV", "pansampler", 0.8, False, 9, 9.0, 0.1, "stall"),
        BenchRecord("a", "QF_BV", "pansampler", 0.9, False, 1, 1.0, 0.2, "stall"),
    ]
    agg = aggregate(recs, [0.8, 0.9])
    row8, row9 = agg["targets"]
    assert row8 == {"r": 0.8, "num_benchmarks": 3, "suc": 2,
                    "mean_solutions": 3.0, "mean_time_s": 1.0}
    assert row9["suc"] == 0
    assert row9["mean_solutions"] is None
    csv = aggregate_csv(agg)
    lines = csv.splitlines()
    assert lines[0] == "r,num_benchmarks,suc,mean_solutions,mean_time_s"
    assert lines[1] == "0.8,3,2,3.000,1.000000"
    assert lines[2] == "0.9,1,0,-,-"


def test_main_single_file_prints_one_record(tmp_path, capsys):
    src = tmp_path / "demo.smt2"
    src.write_text(FREE3)
    code = main([str(src), "--target-coverage", "0.5", "--lambda", "2"])
    assert code == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == ",".join(RECORD_FIELDS)
    assert out[1].startswith(f"{src},QF_BV,pansampler,0.5,true,")


def test_main_suite_writes_tables_and_skips_artifacts(tmp_path, capsys):
    (tmp_path / "demo.smt2").write_text(FREE3)
    (tmp_path / "taut.smt2").write_text(TAUT)
    (tmp_path / "unsat.smt2").write_text(UNSAT)
    argv = [str(tmp_path), "--targets", "0.8,0.9", "--lambda", "3",
            "--deterministic-timing"]
    assert main(argv) == 0
    out = capsys.readouterr().out
    assert out.startswith("r,num_benchmarks,suc,")

    records = (tmp_path / "suite_records.csv").read_text().splitlines()
    assert records[0] == ",".join(RECORD_FIELDS)
    assert len(records) == 1 + 6  # 2 targets x 3 benchmarks

    agg = json.loads((tmp_path / "suite_aggregate.json").read_text())
    row8, row9 = agg["targets"]
    # demo tops out at 7/8 and the tautology at 5/6: both clear 0.8,
    # neither clears 0.9, and the unsat file never counts as achieved.
    assert row8["num_benchmarks"] == 3 and row8["suc"] == 2
    assert row9["suc"] == 0 and row9["mean_time_s"] is None
    assert "-,-" in (tmp_path / "suite_aggregate.csv").read_text()

    # Artifacts from the first pass must not be picked up as inputs.
    first = (tmp_path / "suite_records.csv").read_bytes()
    assert main(argv) == 0
    assert (tmp_path / "suite_records.csv").read_bytes() == first


def test_main_suite_on_empty_directory(tmp_path):
    sub = tmp_path / "empty"
    sub.mkdir()
    assert main([str(sub), "--targets", "0.9"]) == 0
    records = (tmp_path / "empty" / "suite_records.csv").read_text()
    assert records == ",".join(RECORD_FIELDS) + "\n"
    agg = json.loads((sub / "suite_aggregate.json").read_text())
    assert agg["targets"][0]["num_benchmarks"] == 0
