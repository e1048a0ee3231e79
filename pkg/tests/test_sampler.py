"""Diversity solving and the coverage-guided sampling loop."""

import random

import pytest

from pansampler.coverage import CoverState, build_universe, cover_set
from pansampler.evaluate import satisfies
from pansampler.parser import parse_formula
from pansampler.sampler import (DiversitySmtEngine, FormulaUnsatError, Mode,
                                SampleResult, SamplerConfig, diversity_smt,
                                post_opt, sample)
from pansampler.values import Assignment, BoolVal, BvVal

TAUT = "(declare-const x Bool)(assert (or x (not x)))"
UNIQUE = "(declare-const m (_ BitVec 8))(assert (= m #x03))"
FREE3 = "(declare-const x (_ BitVec 3))(assert (bvule x x))"


def test_config_validation():
    with pytest.raises(ValueError):
        SamplerConfig(target_coverage=0.0)
    with pytest.raises(ValueError):
        SamplerConfig(target_coverage=1.5)
    with pytest.raises(ValueError):
        SamplerConfig(lam=0)
    with pytest.raises(ValueError):
        SamplerConfig(max_solutions=0)
    assert SamplerConfig(mode="alt2").mode is Mode.ALT2


def test_diversity_solve_finds_the_only_solution():
    f = parse_formula("(declare-const x Bool)(assert x)")
    got = diversity_smt(f, [], seed=0)
    assert got is not None
    assert got["x"] == BoolVal(True)


def test_diversity_solve_reports_unsat():
    f = parse_formula("(declare-const x Bool)(assert x)(assert (not x))")
    assert diversity_smt(f, [], seed=0) is None


def test_full_bias_flips_every_free_bit():
    f = parse_formula("(declare-const x (_ BitVec 4))(assert (bvule x x))")
    prior = [Assignment({"x": BvVal(4, 0)})]
    got = diversity_smt(f, prior, seed=3, bias_p=1.0)
    assert got is not None
    assert got["x"].as_int() == 0b1111


def test_extra_constraints_steer_the_solve():
    f = parse_formula(FREE3)
    engine = DiversitySmtEngine(f)
    x = f.table.mk_var("x", f.decls["x"])
    zero = f.table.mk_bv_const(3, 0)
    got = engine.solve_once([], seed=1, extra=(f.table.mk_distinct(x, zero),))
    assert got is not None
    assert got["x"].as_int() != 0


def test_engine_keeps_lemmas_within_the_static_bound():
    f = parse_formula(
        "(declare-const a (Array (_ BitVec 4) (_ BitVec 4)))"
        "(declare-const i (_ BitVec 4))(declare-const j (_ BitVec 4))"
        "(assert (= (select (store a i #x5) j) #x7))")
    engine = DiversitySmtEngine(f)
    sols = []
    for k in range(5):
        got = engine.solve_once(sols, seed=k)
        assert got is not None
        assert satisfies(f, got)
        sols.append(got)
    assert engine.lemma_rounds <= engine.lemma_bound
    assert len(engine.lemmas) == len(set(engine.lemmas))


def test_tautology_saturates_then_stalls():
    f = parse_formula(TAUT)
    res = sample(f, SamplerConfig(lam=4, seed=0))
    assert res.reason == "stall"
    assert not res.achieved
    assert len(res.solutions) == 2
    # Both values of x appear; the disjunction itself is stuck at true.
    assert {s["x"].as_int() for s in res.solutions} == {0, 1}
    assert res.coverage["coverage_star"] == pytest.approx(5 / 6)


def test_unique_solution_covers_half():
    f = parse_formula(UNIQUE)
    res = sample(f, SamplerConfig(lam=3, seed=0))
    assert res.reason == "stall"
    assert len(res.solutions) == 1
    assert res.solutions[0]["m"].as_int() == 3
    assert res.coverage["coverage_star"] == pytest.approx(0.5)


def test_unsat_formula_raises():
    f = parse_formula("(declare-const x Bool)(assert x)(assert (not x))")
    with pytest.raises(FormulaUnsatError):
        sample(f, SamplerConfig(lam=2, seed=0))
    with pytest.raises(FormulaUnsatError):
        sample(f, SamplerConfig(lam=2, seed=0, mode=Mode.ALT1))


def test_constant_only_formula_is_vacuously_covered():
    f = parse_formula("(assert true)")
    res = sample(f, SamplerConfig(seed=0))
    assert res.achieved
    assert res.reason == "target"
    assert len(res.solutions) == 1
    assert res.coverage["coverage_star"] == 1.0


def test_target_reason_and_achieved_flag():
    f = parse_formula(FREE3)
    res = sample(f, SamplerConfig(target_coverage=0.5, lam=2, seed=1))
    assert res.achieved and res.reason == "target"
    assert res.coverage["coverage_star"] >= 0.5


def test_max_solutions_reason():
    f = parse_formula(FREE3)
    res = sample(f, SamplerConfig(max_solutions=1, lam=2, seed=1))
    assert res.reason == "max_solutions"
    assert not res.achieved
    assert len(res.solutions) == 1


def test_timeout_reason():
    f = parse_formula(FREE3)
    res = sample(f, SamplerConfig(time_budget=0.0, lam=2, seed=1))
    assert res.reason == "timeout"
    assert res.solutions == []


def test_trace_is_increasing_and_consistent():
    f = parse_formula(
        "(declare-const x (_ BitVec 4))(declare-const y (_ BitVec 4))"
        "(assert (bvult x y))")
    res = sample(f, SamplerConfig(lam=4, seed=2))
    assert len(res.coverage_star_trace) == len(res.solutions)
    assert all(a < b for a, b in
               zip(res.coverage_star_trace, res.coverage_star_trace[1:]))
    assert res.coverage_star_trace[-1] == res.coverage["coverage_star"]
    keys = [s.key() for s in res.solutions]
    assert len(keys) == len(set(keys))
    assert all(satisfies(f, s) for s in res.solutions)
    assert set(res.phase_times) == {"sampling", "evaluation", "optimization"}


def test_same_seed_reproduces_the_run():
    f = parse_formula(
        "(declare-const x (_ BitVec 4))(declare-const y (_ BitVec 4))"
        "(assert (bvult x y))")
    cfg = SamplerConfig(lam=3, seed=9)
    r1 = sample(f, cfg)
    r2 = sample(f, SamplerConfig(lam=3, seed=9))
    assert [s.key() for s in r1.solutions] == [s.key() for s in r2.solutions]
    assert r1.coverage_star_trace == r2.coverage_star_trace
    assert r1.reason == r2.reason


def test_every_mode_completes():
    f = parse_formula(
        "(declare-const a (Array (_ BitVec 2) (_ BitVec 2)))"
        "(declare-const i (_ BitVec 2))"
        "(assert (= (select a i) #b01))")
    for mode in Mode:
        res = sample(f, SamplerConfig(lam=3, seed=4, mode=mode,
                                      target_coverage=0.9))
        assert res.reason in ("target", "stall"), mode
        assert res.solutions, mode
        assert all(satisfies(f, s) for s in res.solutions), mode
        keys = [s.key() for s in res.solutions]
        assert len(keys) == len(set(keys)), mode


def test_blocking_mode_enumerates_both_solutions():
    f = parse_formula(TAUT)
    res = sample(f, SamplerConfig(lam=3, seed=0, mode=Mode.ALT1))
    assert {s["x"].as_int() for s in res.solutions} == {0, 1}
    assert res.reason == "stall"
    assert res.coverage["coverage_star"] == pytest.approx(5 / 6)


def test_post_opt_returns_alpha_when_nothing_deviates():
    f = parse_formula(UNIQUE)
    engine = DiversitySmtEngine(f)
    universe = build_universe(f)
    state = CoverState(universe)
    alpha = Assignment({"m": BvVal(8, 3)})
    got = post_opt(engine, universe, state, [], alpha, SamplerConfig(),
                   random.Random(0))
    assert got is alpha


def test_post_opt_keeps_alpha_on_ties():
    f = parse_formula(TAUT)
    engine = DiversitySmtEngine(f)
    universe = build_universe(f)
    state = CoverState(universe)
    # Either value of x newly covers all three entries; a tie must not
    # replace the incumbent.
    alpha = Assignment({"x": BoolVal(True)})
    got = post_opt(engine, universe, state, [], alpha, SamplerConfig(),
                   random.Random(1))
    assert got is alpha


def test_post_opt_never_scores_below_alpha():
    f = parse_formula(
        "(declare-const x (_ BitVec 3))(declare-const y (_ BitVec 3))"
        "(assert (bvule x y))")
    universe = build_universe(f)
    for seed in range(6):
        engine = DiversitySmtEngine(f)
        rng = random.Random(seed)
        state = CoverState(universe)
        sols = []
        for _ in range(2):
            got = engine.solve_once(sols, rng.randrange(1 << 32))
            state.absorb(cover_set(f, universe, got))
            sols.append(got)
        alpha = engine.solve_once(sols, rng.randrange(1 << 32))
        refined = post_opt(engine, universe, state, sols, alpha,
                           SamplerConfig(), rng)
        before = state.gain(cover_set(f, universe, alpha))
        after = state.gain(cover_set(f, universe, refined))
        assert after >= before
        assert satisfies(f, refined)


def test_no_refinement_mode_is_a_plain_greedy_loop():
    # With a batch of one, refinement off, and an unbiased coin the loop
    # degenerates to solve, absorb on gain, stop at the first dud.
    src = FREE3
    for seed in (0, 1, 7):
        cfg = SamplerConfig(lam=1, seed=seed, bias_p=0.5, mode=Mode.ALT3,
                            target_coverage=0.9)
        res = sample(parse_formula(src), cfg)

        f = parse_formula(src)
        universe = build_universe(f)
        state = CoverState(universe)
        engine = DiversitySmtEngine(f)
        master = random.Random(seed)
        sols = []
        while True:
            if state.coverage_star() >= cfg.target_coverage:
                break
            cand = engine.solve_once(sols, master.randrange(1 << 32),
                                     bias_p=0.5)
            slots = cover_set(f, universe, cand)
            if state.gain(slots) == 0:
                break  # a single zero-gain candidate is the stall bound
            sols.append(cand)
            state.absorb(slots)
        assert [s.key() for s in res.solutions] == [s.key() for s in sols]
