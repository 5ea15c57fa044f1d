"""Synthetic chains of identical proof blocks, in flat and pattern form.

Each block has ``arity`` input axioms over its own ``x``/``y`` variables and
a carry ``z`` shared with its neighbour block; it derives ``x - 2*z``.  For
arity 2 the block is::

    x + 2*y - 2,  -y - z + 1   ==>   x - 2*z          (1*first + 2*second)

Larger arities stretch the middle into a chain of ``y`` variables, so the
block derivation takes ``arity - 1`` linear combinations.  A single linking
axiom combined with the alternating sum of all block conclusions yields 1.
"""

from __future__ import annotations

import os
import random
from dataclasses import dataclass

from .format import (
    Axiom,
    LinComb,
    PatternApply,
    PatternNew,
    ProofDocument,
    format_target,
    serialize,
)
from .polyalg import ONE, Polynomial, substitute

FLAVORS = ("flat", "pattern")


@dataclass(frozen=True)
class ChainSpec:
    blocks: int
    block_arity: int = 2
    seed: int = 0

    def __post_init__(self):
        if self.blocks < 1:
            raise ValueError("a chain needs at least one block")
        if self.block_arity < 2:
            raise ValueError("block arity must be at least 2")


@dataclass(frozen=True)
class ChainFiles:
    axioms: str
    target: str
    proof: str

    def write(self, directory: str, name: str) -> dict:
        os.makedirs(directory, exist_ok=True)
        paths = {}
        for ext in ("axioms", "target", "proof"):
            path = os.path.join(directory, f"{name}.{ext}")
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(getattr(self, ext))
            paths[ext] = path
        return paths


def _var(name: str) -> Polynomial:
    return Polynomial.var(name)


def _template(k: int) -> PatternNew:
    """The block as a pattern over v1..v{k+1}."""
    v = [None] + [_var(f"v{r}") for r in range(1, k + 2)]
    inputs = [("p1", v[1] - 2 * v[2])]
    inputs += [(f"p{r}", v[r] - v[r + 1]) for r in range(2, k + 1)]
    body = []
    prev = "p1"
    for r in range(2, k + 1):
        idx = f"p{k + r - 1}"
        body.append(LinComb(idx, (prev, f"p{r}"), (ONE, Polynomial.const(2)), v[1] - 2 * v[r + 1]))
        prev = idx
    return PatternNew("1", tuple(inputs), tuple(body), (prev,))


def _block_images(label: int, carry: int, k: int) -> list:
    """Images of v1..v{k+1} for one block."""
    ys = [f"y{label}"] if k == 2 else [f"y{label}_{r}" for r in range(2, k + 1)]
    return [_var(f"x{label}")] + [ONE - _var(y) for y in ys] + [_var(f"z{carry}")]


def build_chain(spec: ChainSpec, flavor: str):
    """Return ``(axioms, target, proof)`` as parsed objects."""
    if flavor not in FLAVORS:
        raise ValueError(f"flavor must be one of {FLAVORS}")
    n, k = spec.blocks, spec.block_arity
    labels = list(range(1, n + 1))
    if spec.seed:
        random.Random(spec.seed).shuffle(labels)
    template = _template(k)
    signs = [1 if i % 2 == 0 else -1 for i in range(n)]

    axioms = []
    blocks = []
    for i, label in enumerate(labels):
        images = _block_images(label, i // 2 + 1, k)
        phi = {f"v{r}": img for r, img in enumerate(images, 1)}
        in_idx = [f"l{i * k + r}" for r in range(1, k + 1)]
        for idx, (_, p) in zip(in_idx, template.inputs):
            axioms.append(Axiom(idx, substitute(p, phi)))
        blocks.append((label, phi, in_idx))

    link = ONE
    for (_, phi, _), c in zip(blocks, signs):
        link = link - c * phi["v1"]
    if n % 2:
        link = link + 2 * blocks[-1][1][f"v{k + 1}"]
    link_idx = f"l{n * k + 1}"
    axioms.append(Axiom(link_idx, link))

    steps: list = []
    out_idx = [f"l{n * k + 1 + i}" for i in range(1, n + 1)]
    if flavor == "pattern":
        steps.append(template)
    for (label, phi, in_idx), out in zip(blocks, out_idx):
        result = substitute(template.body[-1].conclusion, phi)
        if flavor == "pattern":
            steps.append(
                PatternApply(
                    "1", (), tuple(phi.items()), tuple(in_idx), ((out, result),)
                )
            )
            continue
        local = {f"p{r}": idx for r, idx in enumerate(in_idx, 1)}
        for r, s in enumerate(template.body, 2):
            idx = out if s is template.body[-1] else f"m{label}_{r}"
            local[s.index] = idx
            steps.append(
                LinComb(
                    idx,
                    tuple(local[j] for j in s.operands),
                    s.coeffs,
                    substitute(s.conclusion, phi),
                )
            )

    closing = LinComb(
        f"l{n * k + n + 2}",
        (link_idx, *out_idx),
        (ONE, *(Polynomial.const(c) for c in signs)),
        ONE,
    )
    steps.append(closing)
    return ProofDocument(tuple(axioms)), ONE, ProofDocument(tuple(steps))


def generate_chain(spec: ChainSpec, flavor: str) -> ChainFiles:
    axioms, target, proof = build_chain(spec, flavor)
    return ChainFiles(serialize(axioms), format_target(target), serialize(proof))
