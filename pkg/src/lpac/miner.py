"""Find repeated proof fragments and rewrite them as patterns.

A fragment is a contiguous run of LinComb/Ext steps.  Its variables are
renamed to ``v1, v2, ...`` in order of first occurrence and its local
indices to ``p1, p2, ...``; fragments with identical renamed text share a
pattern.  Only renamings are discovered, never general substitutions.
"""

from __future__ import annotations

import bisect
import json
import logging
from collections import defaultdict
from dataclasses import dataclass, field

from .checker import check_pattern_body
from .errors import CheckError, IllFormedFragment
from .format import (
    Axiom,
    Deletion,
    Ext,
    LinComb,
    PatternApply,
    PatternNew,
    ProofDocument,
    format_step,
)
from .polyalg import Polynomial, rename

log = logging.getLogger(__name__)


class AlreadyCompressed(ValueError):
    """The input already contains pattern steps."""


@dataclass(frozen=True)
class FragmentationConfig:
    min_repeats: int = 2
    window: int = 8
    # "auto" uses frag-begin/frag-end markers when the document has any
    mode: str = "auto"


@dataclass
class Fragment:
    start: int
    stop: int
    steps: tuple
    inputs: tuple = ()
    outputs: tuple = ()  # indices of output definitions, in definition order
    hoisted: tuple = ()  # deletions of external indices, re-emitted after the apply


@dataclass(frozen=True)
class CanonicalKey:
    text: str
    renaming: dict = field(compare=False, hash=False)  # original var -> canonical var
    pattern: PatternNew = field(compare=False, hash=False)


@dataclass
class CompressionReport:
    fragments: int = 0
    hits: int = 0
    patterns: list = field(default_factory=list)
    lincombs_before: int = 0
    lincombs_after: int = 0
    steps_before: int = 0
    steps_after: int = 0

    @property
    def hit_rate(self) -> float:
        return self.hits / self.fragments if self.fragments else 0.0

    @property
    def pattern_new_count(self) -> int:
        return len(self.patterns)

    @property
    def pattern_apply_count(self) -> int:
        return sum(p["occurrences"] for p in self.patterns)

    def to_jsonl(self) -> str:
        lines = [json.dumps(p, sort_keys=True) for p in self.patterns]
        lines.append(
            json.dumps(
                {
                    "fragments": self.fragments,
                    "hits": self.hits,
                    "hit_rate": round(self.hit_rate, 6),
                    "patterns": self.pattern_new_count,
                    "applies": self.pattern_apply_count,
                    "lincombs_before": self.lincombs_before,
                    "lincombs_after": self.lincombs_after,
                    "step_delta": self.steps_after - self.steps_before,
                },
                sort_keys=True,
            )
        )
        return "\n".join(lines) + "\n"


# -- segmentation ---------------------------------------------------------------


def _window_fragments(steps, window: int) -> list:
    """Group LinComb/Ext steps that build only on the fragment being grown."""
    out: list = []
    current: list | None = None  # [start, stop]
    frag_of: dict = {}  # index -> fragment number of its defining step
    for pos, s in enumerate(steps):
        if not isinstance(s, (LinComb, Ext)):
            current = None
            if isinstance(s, (Axiom, Deletion)):
                frag_of.pop(s.index, None)
            continue
        deps = {frag_of[j] for j in getattr(s, "operands", ()) if j in frag_of}
        if (
            current is not None
            and deps == {len(out) - 1}
            and pos - current[0] < window
        ):
            current[1] = pos + 1
        else:
            current = [pos, pos + 1]
            out.append(current)
        frag_of[s.index] = len(out) - 1
    return [tuple(f) for f in out]


def _marker_fragments(doc: ProofDocument) -> list:
    for a, b in doc.fragments:
        for s in doc.steps[a:b]:
            if not isinstance(s, (LinComb, Ext, Deletion)):
                raise IllFormedFragment(
                    f"fragment at step {a + 1} contains a {type(s).__name__} step"
                )
    return list(doc.fragments)


# -- boundaries -------------------------------------------------------------------


class _Events:
    """Per-index timeline of uses, definitions and deletions."""

    def __init__(self, steps):
        self.pos: dict = defaultdict(list)
        self.kind: dict = defaultdict(list)
        for p, s in enumerate(steps):
            for j in _uses(s):
                self._add(j, p, "use")
            if isinstance(s, Deletion):
                self._add(s.index, p, "del")
            elif isinstance(s, (Axiom, LinComb, Ext)):
                self._add(s.index, p, "def")
            elif isinstance(s, PatternApply):
                for k, _ in s.outputs:
                    self._add(k, p, "def")

    def _add(self, idx, p, kind):
        self.pos[idx].append(p)
        self.kind[idx].append(kind)

    def next_event(self, idx: str, after: int) -> str | None:
        """Kind of the first event for ``idx`` at position >= ``after``."""
        positions = self.pos.get(idx)
        if not positions:
            return None
        k = bisect.bisect_left(positions, after)
        if k == len(positions):
            return None
        # a step both using and redefining an index uses it first
        return self.kind[idx][k]


def _uses(s) -> tuple:
    if isinstance(s, LinComb):
        return s.operands
    if isinstance(s, PatternApply):
        return s.inputs
    return ()


def _boundary(frag: Fragment, events: _Events, target, keep_survivors: bool) -> None:
    defined: dict = {}  # index -> position of its latest local definition
    inputs: list = []
    hoisted: list = []
    for p, s in enumerate(frag.steps, frag.start):
        for j in _uses(s):
            if j not in defined and j not in inputs:
                inputs.append(j)
        if isinstance(s, Deletion):
            if s.index in defined:
                del defined[s.index]
            else:
                hoisted.append(s)
        else:
            defined[s.index] = (p, s)
    outputs = []
    for idx, (p, s) in sorted(defined.items(), key=lambda kv: kv[1][0]):
        nxt = events.next_event(idx, frag.stop)
        concl = s.conclusion if isinstance(s, LinComb) else None
        if nxt == "use":
            outputs.append(idx)
        elif target is not None and concl is not None and concl == target:
            outputs.append(idx)
        elif nxt is None and keep_survivors:
            outputs.append(idx)
    frag.inputs = tuple(inputs)
    frag.outputs = tuple(outputs)
    frag.hoisted = tuple(hoisted)


# -- canonical form -------------------------------------------------------------------


def canonicalize_fragment(frag: Fragment, store: dict) -> CanonicalKey:
    """Rename variables and indices by first occurrence and render the result.

    ``store`` maps every input index of the fragment to its polynomial.
    """
    missing = [j for j in frag.inputs if j not in store]
    if missing:
        raise IllFormedFragment(
            f"fragment at step {frag.start + 1}: no polynomial known for input(s) "
            + ", ".join(missing)
        )
    ren: dict = {}

    def see(p: Polynomial):
        for _, mono in p.terms:
            for v in mono:
                if v not in ren:
                    ren[v] = f"v{len(ren) + 1}"

    def see_var(v: str):
        if v not in ren:
            ren[v] = f"v{len(ren) + 1}"

    local: dict = {}
    counter = 0

    def fresh_local(idx: str) -> str:
        nonlocal counter
        counter += 1
        local[idx] = f"p{counter}"
        return local[idx]

    inputs = []
    for j in frag.inputs:
        see(store[j])
        inputs.append((fresh_local(j), store[j]))
    body_raw = []
    out_local: dict = {}
    for s in frag.steps:
        if isinstance(s, LinComb):
            see(s.conclusion)
            for q in s.coeffs:
                see(q)
            ops = tuple(local[j] for j in s.operands)
            body_raw.append(("L", fresh_local(s.index), ops, s.coeffs, s.conclusion))
            out_local[s.index] = local[s.index]
        elif isinstance(s, Ext):
            see_var(s.var)
            see(s.poly)
            body_raw.append(("E", fresh_local(s.index), s.var, s.poly))
            out_local[s.index] = local[s.index]
        elif s.index in local:
            body_raw.append(("D", local.pop(s.index)))

    body = []
    for item in body_raw:
        if item[0] == "L":
            _, i, ops, coeffs, concl = item
            body.append(LinComb(i, ops, tuple(rename(q, ren) for q in coeffs), rename(concl, ren)))
        elif item[0] == "E":
            _, i, v, q = item
            body.append(Ext(i, ren[v], rename(q, ren)))
        else:
            body.append(Deletion(item[1]))
    pattern = PatternNew(
        "_",
        tuple((i, rename(p, ren)) for i, p in inputs),
        tuple(body),
        tuple(out_local[o] for o in frag.outputs),
    )
    return CanonicalKey(format_step(pattern), ren, pattern)


# -- driver ---------------------------------------------------------------------------


def _later_vars_overlap(steps, start: int, names: set) -> bool:
    for s in steps[start:]:
        polys = []
        if isinstance(s, (Axiom,)):
            polys = [s.poly]
        elif isinstance(s, LinComb):
            polys = [s.conclusion, *s.coeffs]
        elif isinstance(s, Ext):
            if s.var in names:
                return True
            polys = [s.poly]
        for p in polys:
            if p.variables() & names:
                return True
    return False


def compress_with_report(
    flat: ProofDocument,
    config: FragmentationConfig = FragmentationConfig(),
    *,
    axioms: ProofDocument | None = None,
    target: Polynomial | None = None,
) -> tuple[ProofDocument, CompressionReport]:
    steps = flat.steps
    for s in steps:
        if isinstance(s, (PatternNew, PatternApply)):
            raise AlreadyCompressed("input already contains pattern steps")

    use_markers = config.mode == "markers" or (config.mode == "auto" and flat.fragments)
    ranges = _marker_fragments(flat) if use_markers else _window_fragments(steps, config.window)
    events = _Events(steps)
    frags = [Fragment(a, b, steps[a:b]) for a, b in ranges]
    for f in frags:
        _boundary(f, events, target, keep_survivors=target is None)

    # replay the store so fragment inputs have polynomials
    store: dict = {}
    if axioms is not None:
        for s in axioms.steps:
            store[s.index] = s.poly
    keys: list = []
    by_start = {f.start: f for f in frags}
    key_at: dict = {}
    for pos, s in enumerate(steps):
        f = by_start.get(pos)
        if f is not None:
            key_at[pos] = canonicalize_fragment(f, store)
            keys.append(key_at[pos])
        if isinstance(s, Axiom):
            store[s.index] = s.poly
        elif isinstance(s, LinComb):
            store[s.index] = s.conclusion
        elif isinstance(s, Ext):
            store[s.index] = s.poly - Polynomial.var(s.var)
        elif isinstance(s, Deletion):
            store.pop(s.index, None)

    report = CompressionReport(fragments=len(frags))
    occurrences: dict = defaultdict(list)
    for f, key in zip(frags, keys):
        if key.text in occurrences:
            report.hits += 1
        occurrences[key.text].append((f, key))

    chosen: dict = {}  # key text -> pattern id
    checked: dict = {}
    for f, key in zip(frags, keys):
        text = key.text
        if text in chosen or text in checked:
            continue
        if len(occurrences[text]) < config.min_repeats:
            checked[text] = None
            continue
        try:
            pat = check_pattern_body(key.pattern.inputs, key.pattern.body, key.pattern.outputs)
        except CheckError as exc:
            log.info("fragment at step %d not reusable: %s", f.start + 1, exc)
            checked[text] = None
            continue
        internal = _ext_vars(key.pattern) - pat.ext_vars
        if internal and any(
            _later_vars_overlap(steps, g.stop, {_orig(k, v) for v in internal})
            for g, k in occurrences[text]
        ):
            checked[text] = None
            continue
        chosen[text] = str(len(chosen) + 1)
        checked[text] = pat

    out: list = []
    emitted: set = set()
    skip_until = 0
    for pos, s in enumerate(steps):
        if pos < skip_until:
            continue
        f = by_start.get(pos)
        if f is not None:
            key = key_at[pos]
            pid = chosen.get(key.text)
            if pid is not None:
                pat = checked[key.text]
                if key.text not in emitted:
                    emitted.add(key.text)
                    out.append(_with_pid(key.pattern, pid))
                    report.patterns.append(
                        {
                            "pattern": pid,
                            "key": key.text,
                            "occurrences": len(occurrences[key.text]),
                            "body_steps": len(key.pattern.body),
                        }
                    )
                out.append(_apply_step(pid, f, key, pat))
                out.extend(f.hoisted)
                skip_until = f.stop
                continue
        out.append(s)

    result = ProofDocument(tuple(out))
    report.lincombs_before = _count_lincombs(steps)
    report.lincombs_after = _count_lincombs(result.steps)
    report.steps_before = len(steps)
    report.steps_after = len(result.steps)
    return result, report


def compress_proof(
    flat: ProofDocument,
    fragmentation: FragmentationConfig = FragmentationConfig(),
    *,
    axioms: ProofDocument | None = None,
    target: Polynomial | None = None,
) -> ProofDocument:
    return compress_with_report(flat, fragmentation, axioms=axioms, target=target)[0]


def _ext_vars(p: PatternNew) -> set:
    return {s.var for s in p.body if isinstance(s, Ext)}


def _orig(key: CanonicalKey, canon: str) -> str:
    for v, c in key.renaming.items():
        if c == canon:
            return v
    raise KeyError(canon)


def _with_pid(p: PatternNew, pid: str) -> PatternNew:
    return PatternNew(pid, p.inputs, p.body, p.outputs)


def _apply_step(pid: str, frag: Fragment, key: CanonicalKey, pat) -> PatternApply:
    inverse = {c: v for v, c in key.renaming.items()}
    phi = tuple((c, Polynomial.var(inverse[c])) for c in sorted(pat.variables, key=_vnum))
    fresh = tuple(sorted(inverse[c] for c in pat.ext_vars))
    concl = {}
    for s in frag.steps:
        if isinstance(s, LinComb):
            concl[s.index] = s.conclusion
        elif isinstance(s, Ext):
            concl[s.index] = s.poly - Polynomial.var(s.var)
    outs = tuple((k, concl[k]) for k in frag.outputs)
    return PatternApply(pid, fresh, phi, frag.inputs, outs)


def _vnum(name: str) -> int:
    return int(name[1:])


def _count_lincombs(steps) -> int:
    n = 0
    for s in steps:
        if isinstance(s, LinComb):
            n += 1
        elif isinstance(s, PatternNew):
            n += sum(isinstance(b, LinComb) for b in s.body)
    return n
