"""Array and uninterpreted-function reasoning over candidate models.

Candidates assign the purified atoms of an abstraction. The checkers
either complete the candidate into a full model (concrete array tables
and function tables) or report conflict lemmas: Bool terms valid in the
theory that the candidate falsifies. Lemmas are stated over existing
terms only, so the space of distinct lemmas is statically bounded; the
one exception is extensionality, which introduces a single fresh witness
index variable per disequality atom.
"""

from __future__ import annotations

from dataclasses import dataclass

from .abstraction import Abstraction, complete_assignment
from .evaluate import Evaluator
from .terms import Formula, Op, TermTable
from .values import ArrayVal, Assignment, FunVal


@dataclass
class Consistent:
    assignment: Assignment


@dataclass
class Conflict:
    lemmas: list[int]


TheoryVerdict = Consistent | Conflict


@dataclass
class _Read:
    """Justified base-array cell: conds entail (select base idx_term) = vterm."""
    value: int
    vterm: int
    idx_term: int
    conds: tuple[int, ...]


class _Walk:
    """Store-chain walk outcome at one concrete index value."""

    __slots__ = ("kind", "passed", "hit_idx", "hit_val", "base")

    def __init__(self, kind: str, passed: list[tuple[int, int]],
                 hit_idx: int = -1, hit_val: int = -1, base: str = "") -> None:
        self.kind = kind  # "hit" | "base"
        self.passed = passed  # (store index term, store value term) missed
        self.hit_idx = hit_idx
        self.hit_val = hit_val
        self.base = base


class _TheoryState:
    def __init__(self, f: Formula, abs_: Abstraction, assignment: Assignment,
                 all_violations: bool) -> None:
        self.f = f
        self.abs = abs_
        self.a = assignment
        self.table: TermTable = f.table
        self.ev = Evaluator(f.table, assignment)
        self.all_violations = all_violations
        self.lemmas: list[int] = []
        self._lemma_seen: set[int] = set()
        # Snapshot: atoms registered after this point belong to new lemmas
        # and have no candidate value yet.
        self.select_atoms = list(abs_.select_atoms())
        self.eq_atoms = list(abs_.array_eq_atoms())
        self.apply_atoms = list(abs_.apply_atoms())
        self.base_reads: dict[str, dict[int, _Read]] = {}
        self.fun_tables: dict[str, dict[tuple[int, ...], int]] = {}

    # -- shared helpers -------------------------------------------------

    def atom_value(self, name: str) -> int:
        return self.a[name].as_int()

    def emit(self, lemma: int, check_false: bool = True) -> bool:
        """Record a conflict lemma; returns True when the caller should
        stop (first-violation mode)."""
        if check_false:
            img = self.abs.rewrite(lemma)
            if Evaluator(self.table, self.a).value(img).as_int() != 0:
                raise AssertionError("conflict lemma holds under the candidate")
        if lemma not in self._lemma_seen:
            self._lemma_seen.add(lemma)
            self.lemmas.append(lemma)
        return not self.all_violations

    def walk(self, array_term: int, d: int) -> _Walk:
        passed: list[tuple[int, int]] = []
        cur = array_term
        while True:
            term = self.table[cur]
            if term.op is Op.STORE:
                idx_t, val_t = term.children[1], term.children[2]
                if self.ev.value(idx_t).as_int() == d:
                    return _Walk("hit", passed, hit_idx=idx_t, hit_val=val_t)
                passed.append((idx_t, val_t))
                cur = term.children[0]
            elif term.op is Op.VAR:
                return _Walk("base", passed, base=term.name)
            else:
                raise AssertionError("array chain holds a non-store, non-var node")

    def determined(self, array_term: int, d: int) -> _Read | None:
        """The justified cell this chain reads at index value d, or None
        when it bottoms out in an unconstrained base cell."""
        t = self.table
        w = self.walk(array_term, d)
        if w.kind == "hit":
            conds = tuple(t.mk_distinct(w.hit_idx, it) for it, _ in w.passed)
            return _Read(self.ev.value(w.hit_val).as_int(), w.hit_val,
                         w.hit_idx, conds)
        rec = self.base_reads.get(w.base, {}).get(d)
        if rec is None:
            return None
        conds = tuple(t.mk_distinct(rec.idx_term, it) for it, _ in w.passed)
        return _Read(rec.value, rec.vterm, rec.idx_term, conds + rec.conds)


# -- arrays -------------------------------------------------------------


def _touched_indices(st: _TheoryState) -> list[int]:
    seen: set[int] = set()
    for _, atom in st.select_atoms:
        seen.add(st.ev.value(st.table[atom].children[1]).as_int())
        seen.update(_store_index_values(st, st.table[atom].children[0]))
    for _, atom in st.eq_atoms:
        for side in st.table[atom].children:
            seen.update(_store_index_values(st, side))
    return sorted(seen)


def _store_index_values(st: _TheoryState, array_term: int) -> list[int]:
    vals = []
    cur = array_term
    while st.table[cur].op is Op.STORE:
        vals.append(st.ev.value(st.table[cur].children[1]).as_int())
        cur = st.table[cur].children[0]
    return vals


def _check_selects(st: _TheoryState) -> bool:
    """Row consistency and base-read congruence. True = stop now."""
    t = st.table
    for name, atom in st.select_atoms:
        term = t[atom]
        arr, idx_t = term.children
        d = st.ev.value(idx_t).as_int()
        result = st.atom_value(name)
        w = st.walk(arr, d)
        if w.kind == "hit":
            want = st.ev.value(w.hit_val).as_int()
            if want != result:
                ante = [t.mk_distinct(idx_t, it) for it, _ in w.passed]
                ante.append(t.mk_eq(idx_t, w.hit_idx))
                lemma = t.mk_implies(t.mk_and(*ante), t.mk_eq(atom, w.hit_val))
                if st.emit(lemma):
                    return True
            continue
        conds = tuple(t.mk_distinct(idx_t, it) for it, _ in w.passed)
        cell = st.base_reads.setdefault(w.base, {})
        rec = cell.get(d)
        if rec is None:
            cell[d] = _Read(result, atom, idx_t, conds)
        elif rec.value != result:
            ante = list(rec.conds) + list(conds) + [t.mk_eq(rec.idx_term, idx_t)]
            lemma = t.mk_implies(t.mk_and(*ante), t.mk_eq(rec.vterm, atom))
            if st.emit(lemma):
                return True
    return False


def _check_equalities(st: _TheoryState, touched: list[int]) -> bool:
    t = st.table
    # Fixpoint: true equalities propagate determined cells across sides.
    changed = True
    while changed:
        changed = False
        for name, atom in st.eq_atoms:
            if st.atom_value(name) != 1:
                continue
            lhs, rhs = t[atom].children
            for d in touched:
                dl = st.determined(lhs, d)
                dr = st.determined(rhs, d)
                if dl is not None and dr is not None:
                    if dl.value != dr.value:
                        ante = ([atom] + list(dl.conds) + list(dr.conds)
                                + [t.mk_eq(dl.idx_term, dr.idx_term)])
                        lemma = t.mk_implies(t.mk_and(*ante),
                                             t.mk_eq(dl.vterm, dr.vterm))
                        if st.emit(lemma):
                            return True
                elif dl is not None or dr is not None:
                    src, dst = (dl, rhs) if dl is not None else (dr, lhs)
                    wd = st.walk(dst, d)
                    if wd.kind != "base":
                        raise AssertionError("undetermined read hit a store")
                    conds = ((atom,)
                             + tuple(t.mk_distinct(src.idx_term, it)
                                     for it, _ in wd.passed)
                             + src.conds)
                    st.base_reads.setdefault(wd.base, {})[d] = _Read(
                        src.value, src.vterm, src.idx_term, conds)
                    changed = True
    # Disequalities need a differing cell, or a fresh witness index.
    for name, atom in st.eq_atoms:
        if st.atom_value(name) != 0:
            continue
        lhs, rhs = t[atom].children
        justified = False
        for d in touched:
            dl = st.determined(lhs, d)
            dr = st.determined(rhs, d)
            if dl is not None and dr is not None and dl.value != dr.value:
                justified = True
                break
        if justified:
            continue
        if atom in st.abs.witness_of:
            raise AssertionError(
                "disequality unjustified although its witness lemma exists")
        idx_sort = t[lhs].sort.index
        wname = st.abs.fresh_witness(atom, idx_sort)
        wvar = t.mk_var(wname, idx_sort)
        lemma = t.mk_implies(
            t.mk_not(atom),
            t.mk_distinct(t.mk_select(lhs, wvar), t.mk_select(rhs, wvar)))
        if st.emit(lemma, check_false=False):
            return True
    return False


def _array_values(st: _TheoryState) -> dict[str, ArrayVal]:
    out: dict[str, ArrayVal] = {}
    for name, sort in st.f.decls.items():
        if not sort.is_array:
            continue
        cells = st.base_reads.get(name, {})
        out[name] = ArrayVal.make(sort.index, sort.element, 0,
                                  {d: r.value for d, r in cells.items()})
    return out


# -- uninterpreted functions -------------------------------------------


def _check_applies(st: _TheoryState) -> bool:
    t = st.table
    groups: dict[str, list[tuple[str, int, tuple[int, ...], int]]] = {}
    for name, atom in st.apply_atoms:
        term = t[atom]
        args = tuple(st.ev.value(c).as_int() for c in term.children)
        groups.setdefault(term.name, []).append((name, atom, args, st.atom_value(name)))
    for fname, rows in groups.items():
        table: dict[tuple[int, ...], int] = {}
        for i in range(len(rows)):
            for j in range(i + 1, len(rows)):
                _, atom_i, args_i, res_i = rows[i]
                _, atom_j, args_j, res_j = rows[j]
                if args_i == args_j and res_i != res_j:
                    ante = [t.mk_eq(ci, cj) for ci, cj in
                            zip(t[atom_i].children, t[atom_j].children)]
                    lemma = t.mk_implies(t.mk_and(*ante),
                                         t.mk_eq(atom_i, atom_j))
                    if st.emit(lemma):
                        return True
        for _, _, args, res in rows:
            table.setdefault(args, res)
        st.fun_tables[fname] = table
    return False


def _fun_values(st: _TheoryState) -> dict[str, FunVal]:
    out: dict[str, FunVal] = {}
    for name, sort in st.f.decls.items():
        if sort.is_fun:
            out[name] = FunVal.make(sort.args, sort.ret, 0,
                                    st.fun_tables.get(name, {}))
    return out


# -- entry points -------------------------------------------------------


def check_arrays(f: Formula, abs_: Abstraction, assignment: Assignment,
                 all_violations: bool = False) -> TheoryVerdict:
    """Array-theory verdict for a candidate over the abstraction.

    Consistent carries a full model whose array tables are justified;
    function tables are the raw candidate rows (first row wins) and are
    only meaningful once check_functions also passes."""
    st = _TheoryState(f, abs_, assignment, all_violations)
    stop = _check_selects(st)
    if not stop:
        _check_equalities(st, _touched_indices(st))
    if st.lemmas:
        return Conflict(st.lemmas)
    _collect_naive_funs(st)
    return Consistent(complete_assignment(abs_, assignment,
                                          _array_values(st), _fun_values(st)))


def check_functions(f: Formula, abs_: Abstraction, assignment: Assignment,
                    all_violations: bool = False) -> TheoryVerdict:
    """Function-congruence verdict; array tables in a Consistent result
    are raw base reads and only meaningful once check_arrays passes."""
    st = _TheoryState(f, abs_, assignment, all_violations)
    _check_applies(st)
    if st.lemmas:
        return Conflict(st.lemmas)
    _collect_naive_reads(st)
    return Consistent(complete_assignment(abs_, assignment,
                                          _array_values(st), _fun_values(st)))


def theory_check(f: Formula, abs_: Abstraction, assignment: Assignment,
                 all_violations: bool = False) -> TheoryVerdict:
    """Arrays first, then functions; Consistent means both passed and the
    returned assignment satisfies every assertion of f."""
    st = _TheoryState(f, abs_, assignment, all_violations)
    stop = _check_selects(st)
    if not stop:
        stop = _check_equalities(st, _touched_indices(st))
    if not stop:
        _check_applies(st)
    if st.lemmas:
        return Conflict(st.lemmas)
    return Consistent(complete_assignment(abs_, assignment,
                                          _array_values(st), _fun_values(st)))


def _collect_naive_funs(st: _TheoryState) -> None:
    for name, atom in st.apply_atoms:
        term = st.table[atom]
        args = tuple(st.ev.value(c).as_int() for c in term.children)
        st.fun_tables.setdefault(term.name, {}).setdefault(args, st.atom_value(name))


def _collect_naive_reads(st: _TheoryState) -> None:
    for name, atom in st.select_atoms:
        term = st.table[atom]
        arr, idx_t = term.children
        d = st.ev.value(idx_t).as_int()
        w = st.walk(arr, d)
        if w.kind == "base":
            st.base_reads.setdefault(w.base, {}).setdefault(
                d, _Read(st.atom_value(name), atom, idx_t, ()))


def axiom_instance_bound(f: Formula, abs_: Abstraction) -> int:
    """Static cap on distinct lemma instances, hence on lemma-loop rounds.

    Counts select/equality/apply atoms of the current abstraction plus
    the growth extensionality can cause (two selects and one witness
    index variable per disequality atom). Lemmas are terms over this
    finite vocabulary, so each family below over-approximates its
    member count."""
    t = f.table
    s0 = len(abs_.select_atoms())
    e = len(abs_.array_eq_atoms())
    depth = 1
    index_terms: set[int] = set()
    for _, atom in abs_.select_atoms() + abs_.array_eq_atoms():
        term = t[atom]
        arrays = [term.children[0]] if term.op is Op.SELECT else list(term.children)
        if term.op is Op.SELECT:
            index_terms.add(term.children[1])
        for cur in arrays:
            k = 0
            while t[cur].op is Op.STORE:
                index_terms.add(t[cur].children[1])
                k += 1
                cur = t[cur].children[0]
            depth = max(depth, k)
    s = s0 + 2 * e
    touched = len(index_terms) + e
    uf_pairs = 0
    counts: dict[str, int] = {}
    for _, atom in abs_.apply_atoms():
        fname = t[atom].name
        counts[fname] = counts.get(fname, 0) + 1
    for n in counts.values():
        uf_pairs += n * (n - 1) // 2
    return (s * depth + s * s * (depth + 1) ** 2
            + e * (touched + 1) * (s + depth + 2) ** 2
            + e + uf_pairs + 1)
