"""State machine over (variables, polynomial store, pattern store).

Each ``step_*`` method verifies the side conditions of one rule and then
updates the state; a failed condition raises a ``CheckError`` and leaves the
state untouched.  ``run_check`` drives a whole proof and turns the first
failure into a ``Verdict``.
"""

from __future__ import annotations

import enum
import logging
import time
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from . import errors as E
from .errors import CheckError, Span
from .format import (
    BODY_STEPS,
    Axiom,
    Deletion,
    Ext,
    LinComb,
    PatternApply,
    PatternNew,
    ProofDocument,
)
from .polyalg import (
    Polynomial,
    format_polynomial,
    is_boolean_valued,
    linear_combination,
    substitute,
)
from .stats import StatsReport, peak_rss_mb

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Pattern:
    pid: str
    inputs: tuple
    outputs: tuple
    ext_vars: frozenset
    variables: frozenset  # all variables of inputs and outputs
    # retained only when checking in debug mode
    input_indices: tuple = ()
    output_indices: tuple = ()
    body: tuple | None = None


@dataclass
class ProofState:
    variables: set = field(default_factory=set)
    polys: dict = field(default_factory=dict)
    patterns: dict = field(default_factory=dict)
    target_hit: str | None = None


class Status(enum.Enum):
    ACCEPTED = "accepted"
    REJECTED = "rejected"
    TARGET_NOT_FOUND = "no-target"


@dataclass(frozen=True)
class FailedStep:
    index: str
    code: str
    reason: str
    span: Span | None = None
    inner_span: Span | None = None
    inner_code: str | None = None

    @property
    def line(self) -> int | None:
        return self.span.line if self.span else None


@dataclass
class Verdict:
    status: Status
    failed_step: FailedStep | None
    stats: StatsReport
    target_hit: str | None = None
    warnings: list = field(default_factory=list)
    state: ProofState | None = field(default=None, repr=False, compare=False)

    @property
    def accepted(self) -> bool:
        return self.status is Status.ACCEPTED

    def summary_line(self) -> str:
        f = self.failed_step
        step = f.index if f else "-"
        line = f.line if f and f.line is not None else "-"
        return f"STATUS={self.status.value} STEP={step} LINE={line}"


def _fmt(p: Polynomial) -> str:
    return format_polynomial(p)


class Checker:
    """Checks steps one at a time against a mutable ``ProofState``.

    ``debug`` keeps pattern bodies and replays them at every application as a
    cross-check.  ``allow_input_outputs`` lets a pattern output name one of
    its inputs rather than a body conclusion.
    """

    def __init__(
        self,
        target: Polynomial | None = None,
        *,
        debug: bool = False,
        allow_input_outputs: bool = False,
    ):
        self.state = ProofState()
        self.target = target
        self.debug = debug
        self.allow_input_outputs = allow_input_outputs
        self.warnings: list[str] = []
        self._synthetic = 0

    # -- helpers --------------------------------------------------------------

    def _free(self, i: str) -> None:
        if i in self.state.polys:
            raise E.IndexInUse(f"index {i} is already in use")

    def _scope(self, p: Polynomial, what: str, allowed=None) -> None:
        allowed = self.state.variables if allowed is None else allowed
        extra = p.variables() - allowed
        if extra:
            raise E.UnknownVariable(
                f"{what} mentions unknown variable(s) {', '.join(sorted(extra))}"
            )

    def _store(self, i: str, p: Polynomial) -> None:
        self.state.polys[i] = p
        if (
            self.target is not None
            and self.state.target_hit is None
            and p == self.target
        ):
            self.state.target_hit = i

    # -- rules without patterns ---------------------------------------------

    def step_axiom(self, i: str, p: Polynomial) -> None:
        self._free(i)
        self.state.variables |= p.variables()
        self._store(i, p)

    def step_deletion(self, i: str) -> None:
        if self.state.polys.pop(i, None) is None:
            msg = f"deletion of unknown index {i}"
            log.warning(msg)
            self.warnings.append(msg)

    def step_lincomb(
        self,
        i: str,
        operands: Sequence[str],
        coeffs: Sequence[Polynomial],
        conclusion: Polynomial,
    ) -> None:
        if len(operands) != len(coeffs) or not operands:
            raise E.ConclusionMismatch("operand and coefficient lists differ in length")
        polys = self.state.polys
        for j in operands:
            if j not in polys:
                raise E.MissingOperand(f"operand {j} is not in the store")
        self._free(i)
        for q in coeffs:
            self._scope(q, "coefficient")
        self._scope(conclusion, "conclusion")
        got = linear_combination(zip(coeffs, (polys[j] for j in operands)))
        if got != conclusion:
            raise E.ConclusionMismatch(
                f"combination gives {_fmt(got)}, conclusion is {_fmt(conclusion)}"
            )
        self._store(i, conclusion)

    def step_ext(self, i: str, v: str, q: Polynomial) -> None:
        self._free(i)
        if v in self.state.variables:
            raise E.VariableNotFresh(f"extension variable {v} is already in use")
        self._scope(q, "extension polynomial")
        if not is_boolean_valued(q):
            raise E.NotBooleanValued(f"{_fmt(q)} is not Boolean-valued")
        self.state.variables.add(v)
        self._store(i, q - Polynomial.var(v))

    # -- pattern rules -----------------------------------------------------------

    def step_pattern_new(
        self,
        pid: str,
        inputs: Sequence[tuple[str, Polynomial]],
        body: Sequence,
        outputs: Sequence[str],
    ) -> None:
        if pid in self.state.patterns:
            raise E.PatternIdInUse(f"pattern {pid} already exists")
        self.state.patterns[pid] = check_pattern_body(
            inputs,
            body,
            outputs,
            pid=pid,
            keep_body=self.debug,
            allow_input_outputs=self.allow_input_outputs,
        )

    def step_pattern_apply(
        self,
        pid: str,
        fresh: Iterable[str],
        phi: Mapping[str, Polynomial],
        inputs: Sequence[str],
        outputs: Sequence[tuple[str, Polynomial]],
    ) -> None:
        st = self.state
        pat = st.patterns.get(pid)
        if pat is None:
            raise E.UnknownPattern(f"pattern {pid} does not exist")

        fresh = set(fresh)
        stale = fresh & st.variables
        if stale:
            raise E.FreshVarNotFresh(
                f"fresh variable(s) {', '.join(sorted(stale))} already in use"
            )

        images = {}
        for v in sorted(pat.variables):
            if v not in phi:
                raise E.UnmappedPatternVariable(f"pattern variable {v} has no image")
            images[v] = phi[v]

        taken: dict = {}
        for v in sorted(pat.ext_vars):
            w = images[v].as_variable()
            if w is None or w not in fresh:
                raise E.PhiExtImageNotFresh(
                    f"extension variable {v} must map to a fresh variable, "
                    f"got {_fmt(images[v])}"
                )
            if w in taken:
                raise E.PhiNotInjectiveOnExt(
                    f"extension variables {taken[w]} and {v} both map to {w}"
                )
            taken[w] = v

        for v in sorted(pat.variables - pat.ext_vars):
            img_vars = images[v].variables()
            if img_vars & fresh:
                raise E.PhiImageNotInScope(
                    f"image of non-extension variable {v} mentions fresh variable(s)"
                )
            if not img_vars <= st.variables:
                self._scope(images[v], f"image of {v}")

        for v in sorted(pat.variables):
            if not is_boolean_valued(images[v]):
                raise E.PhiNotBooleanValued(
                    f"image of {v}, {_fmt(images[v])}, is not Boolean-valued"
                )

        if len(inputs) != len(pat.inputs):
            raise E.InputArityMismatch(
                f"pattern {pid} takes {len(pat.inputs)} inputs, got {len(inputs)}"
            )
        for r, (j, p) in enumerate(zip(inputs, pat.inputs), 1):
            have = st.polys.get(j)
            if have is None:
                raise E.MissingOperand(f"input {j} is not in the store")
            want = substitute(p, images)
            if have != want:
                raise E.InputMismatch(
                    f"input {r} ({j}): pattern expects {_fmt(want)}, store has {_fmt(have)}"
                )

        if len(outputs) != len(pat.outputs):
            raise E.OutputArityMismatch(
                f"pattern {pid} has {len(pat.outputs)} outputs, got {len(outputs)}"
            )
        allowed = st.variables | fresh
        seen: set = set()
        for r, ((k, p), o) in enumerate(zip(outputs, pat.outputs), 1):
            if k in st.polys or k in seen:
                raise E.OutputIndexInUse(f"output index {k} is already in use")
            seen.add(k)
            self._scope(p, f"output {r}", allowed)
            want = substitute(o, images)
            if p != want:
                raise E.OutputMismatch(
                    f"output {r} ({k}): pattern gives {_fmt(want)}, claimed {_fmt(p)}"
                )

        if self.debug and pat.body is not None:
            self._replay(pat, fresh, images, inputs, outputs)

        st.variables |= fresh
        for k, p in outputs:
            self._store(k, p)

    def _replay(self, pat: Pattern, fresh, images, inputs, outputs) -> None:
        """Re-derive the outputs by running the body under the substitution."""
        ext_images = {images[v].as_variable() for v in pat.ext_vars}
        sub = Checker()
        sub.state.variables = set(self.state.variables) | (fresh - ext_images)
        for lidx, j in zip(pat.input_indices, inputs):
            sub.state.polys[lidx] = self.state.polys[j]
        psi = dict(images)
        concl = {}
        for s in pat.body:
            try:
                if isinstance(s, Ext):
                    if s.var in pat.ext_vars:
                        w = images[s.var].as_variable()
                    else:
                        w = self._synthetic_name(sub.state.variables)
                    psi[s.var] = Polynomial.var(w)
                    sub.step_ext(s.index, w, substitute(s.poly, psi))
                elif isinstance(s, LinComb):
                    sub.step_lincomb(
                        s.index,
                        s.operands,
                        [substitute(q, psi) for q in s.coeffs],
                        substitute(s.conclusion, psi),
                    )
                else:
                    sub.step_deletion(s.index)
            except CheckError as exc:
                raise E.ReplayMismatch(f"replay failed at body step {s.index}: {exc}")
            if not isinstance(s, Deletion):
                concl[s.index] = sub.state.polys[s.index]
        for lidx in pat.input_indices:
            concl.setdefault(lidx, sub.state.polys.get(lidx))
        for r, (lidx, (k, p)) in enumerate(zip(pat.output_indices, outputs), 1):
            if concl.get(lidx) != p:
                raise E.ReplayMismatch(
                    f"replayed output {r} is {_fmt(concl.get(lidx))}, claimed {_fmt(p)}"
                )

    def _synthetic_name(self, taken) -> str:
        while True:
            self._synthetic += 1
            name = f"_r{self._synthetic}"
            if name not in taken and name not in self.state.variables:
                return name

    # -- dispatch -----------------------------------------------------------------

    def apply(self, step) -> None:
        if isinstance(step, LinComb):
            self.step_lincomb(step.index, step.operands, step.coeffs, step.conclusion)
        elif isinstance(step, Axiom):
            self.step_axiom(step.index, step.poly)
        elif isinstance(step, Ext):
            self.step_ext(step.index, step.var, step.poly)
        elif isinstance(step, Deletion):
            self.step_deletion(step.index)
        elif isinstance(step, PatternNew):
            self.step_pattern_new(step.pid, step.inputs, step.body, step.outputs)
        elif isinstance(step, PatternApply):
            self.step_pattern_apply(
                step.pid, step.fresh, step.phi_map, step.inputs, step.outputs
            )
        else:
            raise TypeError(f"not a step: {step!r}")


def check_pattern_body(
    inputs: Sequence[tuple[str, Polynomial]],
    body: Sequence,
    outputs: Sequence[str],
    *,
    pid: str = "",
    keep_body: bool = False,
    allow_input_outputs: bool = False,
) -> Pattern:
    """Check a pattern as a standalone proof from its inputs.

    Returns the stored form: inputs, outputs, and the extension variables
    occurring in the outputs.  The body is kept only if ``keep_body``.
    """
    sub = Checker()
    for lidx, p in inputs:
        if lidx in sub.state.polys:
            raise E.IndexInUse(f"pattern input index {lidx} given twice")
        sub.step_axiom(lidx, p)

    conclusions: dict = {}
    ext_vars: set = set()
    for s in body:
        if not isinstance(s, BODY_STEPS):
            raise E.PatternBodyError(
                E.IllegalPatternStep(f"{type(s).__name__} is not allowed in a pattern body"),
                s.index,
                s.span,
            )
        try:
            sub.apply(s)
        except CheckError as exc:
            raise E.PatternBodyError(exc, s.index, s.span) from None
        if isinstance(s, Ext):
            ext_vars.add(s.var)
        if not isinstance(s, Deletion):
            conclusions[s.index] = sub.state.polys[s.index]

    given = dict(inputs)
    outs = []
    for o in outputs:
        if o in conclusions:
            outs.append(conclusions[o])
        elif allow_input_outputs and o in given:
            outs.append(given[o])
        else:
            raise E.OutputNotAConclusion(f"output {o} is not the conclusion of a body step")

    out_vars: set = set()
    for p in outs:
        out_vars |= p.variables()
    in_vars: set = set()
    for _, p in inputs:
        in_vars |= p.variables()
    return Pattern(
        pid=pid,
        inputs=tuple(p for _, p in inputs),
        outputs=tuple(outs),
        ext_vars=frozenset(out_vars & ext_vars),
        variables=frozenset(in_vars | out_vars),
        input_indices=tuple(i for i, _ in inputs) if keep_body else (),
        output_indices=tuple(outputs) if keep_body else (),
        body=tuple(body) if keep_body else None,
    )


def _step_label(step) -> str:
    # an application is named by the first index it defines
    if isinstance(step, PatternApply) and step.outputs:
        return step.outputs[0][0]
    return step.index


def run_check(
    axioms: ProofDocument | Iterable | None,
    proof: ProofDocument | Iterable,
    target: Polynomial | None = None,
    mode: str = "strict",
    *,
    allow_input_outputs: bool = False,
) -> Verdict:
    """Check axioms then proof steps in order, stopping at the first failure.

    Steps are consumed lazily, so a generator from ``format.iter_steps`` is
    checked while it is being parsed; parse errors propagate unchanged.
    """
    if mode not in ("strict", "debug"):
        raise ValueError(f"unknown mode {mode!r}")
    checker = Checker(target, debug=mode == "debug", allow_input_outputs=allow_input_outputs)
    stats = StatsReport()
    started = time.perf_counter()
    failed = None

    def steps():
        if axioms is not None:
            yield from axioms
        yield from proof

    for step in steps():
        stats.add(step)
        try:
            checker.apply(step)
        except CheckError as exc:
            label = _step_label(step)
            if isinstance(exc, E.PatternBodyError):
                failed = FailedStep(
                    label, exc.code, exc.message, step.span, exc.span, exc.inner.code
                )
            else:
                failed = FailedStep(label, exc.code, exc.message, step.span)
            break

    stats.wall_time_ms = (time.perf_counter() - started) * 1000.0
    stats.peak_rss_mb = peak_rss_mb()
    hit = checker.state.target_hit
    if failed is not None:
        status = Status.REJECTED
    elif target is not None and hit is None:
        status = Status.TARGET_NOT_FOUND
    else:
        status = Status.ACCEPTED
    return Verdict(status, failed, stats, hit, list(checker.warnings), checker.state)
