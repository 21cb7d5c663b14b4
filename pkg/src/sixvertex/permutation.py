"""Symmetric-group arithmetic on site positions.

Permutations act on positions: applying ``sigma`` to a sequence ``s``
gives ``s'[i] = s[sigma(i)]``, so ``sigma`` applied to ``(1..L)`` is its
image tuple. Products ``sigma * tau`` act on sequences with ``tau``
first, and adjacent words ``(a_p, ..., a_1)`` stand for
``s_{a_p} ... s_{a_1}`` with the rightmost letter acting first.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import DimensionMismatch, IndexOutOfRange, LengthMismatch
from .report import VerificationReport


@dataclass(frozen=True)
class Permutation:
    images: tuple[int, ...]

    def __post_init__(self) -> None:
        imgs = tuple(int(i) for i in self.images)
        if sorted(imgs) != list(range(1, len(imgs) + 1)):
            raise ValueError(f"not a permutation of 1..{len(imgs)}: {imgs}")
        object.__setattr__(self, "images", imgs)

    @property
    def size(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        return self.images[i - 1]

    def __mul__(self, other: "Permutation") -> "Permutation":
        return compose(self, other)

    def __pow__(self, n: int) -> "Permutation":
        base = self if n >= 0 else inverse(self)
        out = identity(self.size)
        for _ in range(abs(n)):
            out = compose(out, base)
        return out

    def to_json(self) -> list[int]:
        return list(self.images)

    def __str__(self) -> str:
        return "(" + " ".join(map(str, self.images)) + ")"


@dataclass(frozen=True)
class AdjacentWord:
    """Letters ``(a_p, ..., a_1)``; letter ``a`` is the swap of positions ``a, a+1``."""

    letters: tuple[int, ...]
    size: int

    def evaluate(self) -> Permutation:
        out = identity(self.size)
        for a in self.letters:
            out = compose(out, adjacent_transposition(a, self.size))
        return out

    def __len__(self) -> int:
        return len(self.letters)


def identity(size: int) -> Permutation:
    return Permutation(tuple(range(1, size + 1)))


def adjacent_transposition(alpha: int, size: int) -> Permutation:
    if not 1 <= alpha <= size - 1:
        raise IndexOutOfRange(f"adjacent index {alpha} outside 1..{size - 1}")
    imgs = list(range(1, size + 1))
    imgs[alpha - 1], imgs[alpha] = imgs[alpha], imgs[alpha - 1]
    return Permutation(tuple(imgs))


def permute_sequence(sigma: Permutation, items: Sequence) -> list:
    if len(items) != sigma.size:
        raise LengthMismatch(f"{len(items)} items for a permutation of {sigma.size}")
    return [items[j - 1] for j in sigma.images]


def compose(sigma: Permutation, tau: Permutation) -> Permutation:
    """``sigma * tau``: act with ``tau`` first, then ``sigma``."""
    if sigma.size != tau.size:
        raise LengthMismatch(f"sizes {sigma.size} and {tau.size}")
    return Permutation(tuple(tau.images[j - 1] for j in sigma.images))


def inverse(sigma: Permutation) -> Permutation:
    inv = [0] * sigma.size
    for i, j in enumerate(sigma.images, start=1):
        inv[j - 1] = i
    return Permutation(tuple(inv))


def inversion_count(sigma: Permutation) -> int:
    imgs = sigma.images
    return sum(1 for i in range(len(imgs)) for j in range(i + 1, len(imgs)) if imgs[i] > imgs[j])


def adjacent_decomposition(sigma: Permutation) -> AdjacentWord:
    """Minimal word via bubble sort.

    The swaps that sort ``sigma(1..L)`` back to ``(1..L)``, in the order
    they are performed, are exactly the written letters of ``sigma``.
    """
    seq = list(sigma.images)
    letters: list[int] = []
    changed = True
    while changed:
        changed = False
        for k in range(len(seq) - 1):
            if seq[k] > seq[k + 1]:
                seq[k], seq[k + 1] = seq[k + 1], seq[k]
                letters.append(k + 1)
                changed = True
    return AdjacentWord(tuple(letters), sigma.size)


def cyclic_permutation(size: int) -> Permutation:
    if size < 1:
        raise ValueError("size must be at least 1")
    return Permutation(tuple(list(range(2, size + 1)) + [1]))


def adjacent_from_cyclic(alpha: int, size: int) -> Permutation:
    """``s_alpha`` generated from ``s_1`` by conjugation with the cyclic shift."""
    if not 1 <= alpha <= size - 1:
        raise IndexOutOfRange(f"adjacent index {alpha} outside 1..{size - 1}")
    shift = cyclic_permutation(size) ** (alpha - 1)
    out = compose(compose(inverse(shift), adjacent_transposition(1, size)), shift)
    assert out == adjacent_transposition(alpha, size)
    return out


def random_permutation(rng: np.random.Generator, size: int) -> Permutation:
    return Permutation(tuple(int(i) + 1 for i in rng.permutation(size)))


# A label-dependent representation: ``rep(alpha, labels)`` is the operator for
# ``s_alpha`` when position ``k`` currently carries site label ``labels[k-1]``.
LabelledRep = Callable[[int, tuple[int, ...]], object]


def as_labelled(rep) -> LabelledRep:
    if callable(rep):
        return rep
    if isinstance(rep, Mapping):
        return lambda alpha, labels: rep[alpha]
    raise TypeError("rep must be a mapping alpha -> operator or a callable (alpha, labels)")


def word_operator(rep, letters: Sequence[int], labels: Sequence[int]):
    """Product ``rep(a_p) ... rep(a_1)`` tracking site labels as letters act.

    Returns ``(operator, final_labels)``; ``None`` stands for the identity
    when the word is empty.
    """
    rep = as_labelled(rep)
    labels = tuple(labels)
    op = None
    for a in reversed(letters):
        factor = rep(a, labels)
        op = factor if op is None else factor @ op
        lab = list(labels)
        lab[a - 1], lab[a] = lab[a], lab[a - 1]
        labels = tuple(lab)
    return op, labels


def _dense(op) -> np.ndarray:
    return op.to_dense() if hasattr(op, "to_dense") else np.asarray(op)


def verify_group_relations(rep, size: int, tol: float = 1e-11,
                           label_states: Sequence[Sequence[int]] | None = None) -> VerificationReport:
    """Involution, braid and far-commutation relations for a candidate representation.

    ``rep`` is a mapping ``alpha -> operator`` or a callable
    ``(alpha, labels) -> operator``; the latter is evaluated at each
    label arrangement in ``label_states`` (default: the identity).
    """
    from .tensor_space import relative_residual

    rep = as_labelled(rep)
    states = [tuple(range(1, size + 1))] if label_states is None else [tuple(s) for s in label_states]
    report = VerificationReport("group-relations")
    dims = {_dense(rep(a, states[0])).shape for a in range(1, size)}
    if len(dims) > 1:
        raise DimensionMismatch(f"operators of different shapes: {dims}")
    for labels in states:
        ident = None
        for a in range(1, size):
            sq, _ = word_operator(rep, (a, a), labels)
            sq = _dense(sq)
            ident = np.eye(sq.shape[0]) if ident is None else ident
            report.add(f"rel1[{a}]", relative_residual(sq, ident), tol, labels=labels)
        for a in range(1, size - 1):
            lhs, _ = word_operator(rep, (a, a + 1, a), labels)
            rhs, _ = word_operator(rep, (a + 1, a, a + 1), labels)
            report.add(f"rel2[{a},{a + 1},{a}]", relative_residual(lhs, rhs), tol, labels=labels)
        for a in range(1, size):
            for b in range(a + 2, size):
                lhs, _ = word_operator(rep, (a, b), labels)
                rhs, _ = word_operator(rep, (b, a), labels)
                report.add(f"rel3[{a},{b}]", relative_residual(lhs, rhs), tol, labels=labels)
    return report
