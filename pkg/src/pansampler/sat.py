"""CDCL SAT solving with a diversity-steered branching phase.

Standard machinery (two watched literals, VSIDS, Luby restarts, first-UIP
learning) with one twist: decision phases prefer the minority value of a
bit distribution with probability bias_p. Propagation and learning are
untouched, so completeness is unaffected.
"""

from __future__ import annotations

import heapq
import random
from dataclasses import dataclass

from .bitblast import BlastMap, Cnf
from .values import Assignment


class ConflictBudgetExceeded(Exception):
    """Resource-limit abort; distinct from an UNSAT answer."""


@dataclass
class SolverConfig:
    seed: int = 0
    bias_p: float = 0.85
    first_decision_only: bool = False
    conflict_budget: int = 1_000_000
    restart_base: int = 64
    decay: float = 0.95

    def __post_init__(self) -> None:
        if not (0.5 <= self.bias_p <= 1.0):
            raise ValueError(f"bias_p must lie in [0.5, 1], got {self.bias_p}")


class BitDistribution:
    """Per-SAT-variable 0/1 counts over a solution set."""

    def __init__(self, counts: dict[int, tuple[int, int]] | None = None) -> None:
        self.counts = counts or {}

    def preferred_phase(self, var: int) -> bool | None:
        """Minority phase, or None on a tie or an untracked variable."""
        got = self.counts.get(var)
        if got is None:
            return None
        c0, c1 = got
        if c0 == c1:
            return None
        return c1 < c0  # ones seen less often -> prefer True


def distribution_from(assignments: list[Assignment],
                      blast_map: BlastMap) -> BitDistribution:
    counts: dict[int, list[int]] = {}
    for a in assignments:
        for name, bit, v in a.scalar_bits():
            var = blast_map.forward.get((name, bit))
            if var is None:
                continue
            slot = counts.setdefault(var, [0, 0])
            slot[v] += 1
    return BitDistribution({k: (v[0], v[1]) for k, v in counts.items()})


def _luby(i: int) -> int:
    """i-th element (1-based) of the Luby restart sequence."""
    k = 1
    while (1 << k) - 1 < i:
        k += 1
    while (1 << k) - 1 != i:
        i -= (1 << (k - 1)) - 1
        k = 1
        while (1 << k) - 1 < i:
            k += 1
    return 1 << (k - 1)


_RESCALE = 1e100


class CdclSolver:
    def __init__(self, cnf: Cnf, dist: BitDistribution | None = None,
                 cfg: SolverConfig | None = None) -> None:
        self.cfg = cfg or SolverConfig()
        self.dist = dist or BitDistribution()
        self.rng = random.Random(self.cfg.seed)
        n = cnf.num_vars
        self.num_vars = n
        self.assign: list[int] = [0] * (n + 1)  # +1 true, -1 false, 0 free
        self.level: list[int] = [0] * (n + 1)
        self.reason: list[list[int] | None] = [None] * (n + 1)
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.activity: list[float] = [0.0] * (n + 1)
        self.var_inc = 1.0
        self.heap: list[tuple[float, int]] = [(0.0, v) for v in range(1, n + 1)]
        heapq.heapify(self.heap)
        self.watches: dict[int, list[list[int]]] = {}
        self.saved_phase: list[bool] = [False] * (n + 1)
        self.phase_known: list[bool] = [False] * (n + 1)
        self.conflicts = 0
        self._unsat = False
        for clause in cnf.clauses:
            self._add_clause(list(clause))

    # -- bookkeeping ----------------------------------------------------

    def _lit_value(self, lit: int) -> int:
        v = self.assign[abs(lit)]
        return v if lit > 0 else -v

    def _add_clause(self, lits: list[int]) -> None:
        seen: dict[int, None] = {}
        for l in lits:
            if -l in seen:
                return
            seen[l] = None
        lits = list(seen)
        if not lits:
            self._unsat = True
            return
        if len(lits) == 1:
            if self._lit_value(lits[0]) == -1:
                self._unsat = True
            elif self._lit_value(lits[0]) == 0:
                self._enqueue(lits[0], None)
            return
        self._watch(lits)

    def _watch(self, clause: list[int]) -> None:
        self.watches.setdefault(clause[0], []).append(clause)
        self.watches.setdefault(clause[1], []).append(clause)

    def _enqueue(self, lit: int, reason: list[int] | None) -> None:
        var = abs(lit)
        self.assign[var] = 1 if lit > 0 else -1
        self.level[var] = len(self.trail_lim)
        self.reason[var] = reason
        self.saved_phase[var] = lit > 0
        self.phase_known[var] = True
        self.trail.append(lit)

    def _propagate(self) -> list[int] | None:
        while self.qhead < len(self.trail):
            p = self.trail[self.qhead]
            self.qhead += 1
            false_lit = -p
            old = self.watches.get(false_lit)
            if not old:
                continue
            kept: list[list[int]] = []
            idx = 0
            while idx < len(old):
                clause = old[idx]
                idx += 1
                if clause[0] == false_lit:
                    clause[0], clause[1] = clause[1], clause[0]
                first = clause[0]
                if self._lit_value(first) == 1:
                    kept.append(clause)
                    continue
                moved = False
                for k in range(2, len(clause)):
                    if self._lit_value(clause[k]) != -1:
                        clause[1], clause[k] = clause[k], clause[1]
                        self.watches.setdefault(clause[1], []).append(clause)
                        moved = True
                        break
                if moved:
                    continue
                kept.append(clause)
                if self._lit_value(first) == -1:
                    kept.extend(old[idx:])
                    self.watches[false_lit] = kept
                    return clause
                self._enqueue(first, clause)
            self.watches[false_lit] = kept
        return None

    def _bump(self, var: int) -> None:
        self.activity[var] += self.var_inc
        if self.activity[var] > _RESCALE:
            for v in range(1, self.num_vars + 1):
                self.activity[v] *= 1.0 / _RESCALE
            self.var_inc *= 1.0 / _RESCALE
            self.heap = [(-self.activity[v], v)
                         for v in range(1, self.num_vars + 1)
                         if self.assign[v] == 0]
            heapq.heapify(self.heap)
            return
        heapq.heappush(self.heap, (-self.activity[var], var))

    def _analyze(self, conflict: list[int]) -> tuple[list[int], int]:
        learnt: list[int] = [0]  # slot for the asserting literal
        seen = [False] * (self.num_vars + 1)
        counter = 0
        p: int | None = None
        reason = conflict
        index = len(self.trail) - 1
        cur_level = len(self.trail_lim)
        while True:
            for q in reason:
                if p is not None and q == p:
                    continue
                var = abs(q)
                if not seen[var] and self.level[var] > 0:
                    seen[var] = True
                    self._bump(var)
                    if self.level[var] >= cur_level:
                        counter += 1
                    else:
                        learnt.append(q)
            while not seen[abs(self.trail[index])]:
                index -= 1
            p = self.trail[index]
            index -= 1
            seen[abs(p)] = False
            counter -= 1
            if counter == 0:
                break
            reason = self.reason[abs(p)] or []
        learnt[0] = -p
        if len(learnt) == 1:
            return learnt, 0
        back = max(self.level[abs(q)] for q in learnt[1:])
        return learnt, back

    def _cancel_until(self, target: int) -> None:
        while len(self.trail_lim) > target:
            bound = self.trail_lim.pop()
            while len(self.trail) > bound:
                lit = self.trail.pop()
                var = abs(lit)
                self.assign[var] = 0
                self.reason[var] = None
                heapq.heappush(self.heap, (-self.activity[var], var))
        self.qhead = len(self.trail)

    def _pick_var(self) -> int | None:
        while self.heap:
            neg_act, var = heapq.heappop(self.heap)
            if self.assign[var] != 0:
                continue
            if -neg_act != self.activity[var]:
                continue  # stale entry; a fresher one exists
            return var
        return None

    def _pick_phase(self, var: int) -> bool:
        if self.cfg.first_decision_only and self.phase_known[var]:
            return self.saved_phase[var]
        pref = self.dist.preferred_phase(var)
        if pref is None:
            return self.rng.random() < 0.5
        if self.rng.random() < self.cfg.bias_p:
            return pref
        return not pref

    def solve(self) -> list[bool] | None:
        """A model as bools indexed 1..num_vars, or None when UNSAT."""
        if self._unsat:
            return None
        if self._propagate() is not None:
            return None
        restart_num = 0
        budget_mark = self.cfg.restart_base * _luby(restart_num + 1)
        conflicts_here = 0
        while True:
            conflict = self._propagate()
            if conflict is not None:
                self.conflicts += 1
                conflicts_here += 1
                if self.conflicts > self.cfg.conflict_budget:
                    raise ConflictBudgetExceeded(
                        f"no answer within {self.cfg.conflict_budget} conflicts")
                if not self.trail_lim:
                    return None
                learnt, back = self._analyze(conflict)
                self._cancel_until(back)
                if len(learnt) == 1:
                    self._enqueue(learnt[0], None)
                else:
                    self._watch(learnt)
                    self._enqueue(learnt[0], learnt)
                self.var_inc /= self.cfg.decay
                continue
            if conflicts_here >= budget_mark:
                restart_num += 1
                budget_mark = self.cfg.restart_base * _luby(restart_num + 1)
                conflicts_here = 0
                self._cancel_until(0)
                continue
            var = self._pick_var()
            if var is None:
                model = [False] + [self.assign[v] == 1
                                   for v in range(1, self.num_vars + 1)]
                return model
            phase = self._pick_phase(var)
            self.trail_lim.append(len(self.trail))
            self._enqueue(var if phase else -var, None)


def solve(cnf: Cnf, dist: BitDistribution | None = None,
          cfg: SolverConfig | None = None) -> list[bool] | None:
    """Solve a CNF; model indexed 1..num_vars at positions 1.., or None."""
    model = CdclSolver(cnf, dist, cfg).solve()
    if model is not None:
        for clause in cnf.clauses:
            if not any(model[abs(l)] == (l > 0) for l in clause):
                raise AssertionError("solver produced a falsifying model")
    return model


def model_line(model: list[bool]) -> str:
    """SAT-competition style signed-literal line ('v 1 -2 ... 0')."""
    lits = [str(v if model[v] else -v) for v in range(1, len(model))]
    return "v " + " ".join(lits + ["0"])
