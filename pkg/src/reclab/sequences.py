"""Generation and membership testing for the explicit integer sets.

Three families: the order-k set ("sk", fractional part of n^k*alpha confined
to [1/4, 3/4]), its dyadic-block variant ("skprime", alternating target
intervals [1/10, 2/10] / [5/10, 6/10] on blocks [2^j, 2^(j+1)]), and k-th
power images of an existing stream.  Membership is certified: boundary cases
the error radius cannot decide are excluded and counted, never guessed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import kernels
from .fixedpoint import AlphaSpec, MAX_WIDE_BITS, Precision, PrecisionError, realize

SK_INTERVAL = (Fraction(1, 4), Fraction(3, 4))
SKPRIME_EVEN = (Fraction(1, 10), Fraction(2, 10))
SKPRIME_ODD = (Fraction(5, 10), Fraction(6, 10))


def block_interval(j: int) -> tuple[Fraction, Fraction]:
    return SKPRIME_EVEN if j % 2 == 0 else SKPRIME_ODD


def block_span(j: int) -> tuple[int, int]:
    """Integer span [lo, hi) of dyadic block j.

    Blocks are the closed ranges [2^j, 2^(j+1)]; the shared endpoint integer
    belongs to the lower block, so block j effectively starts at 2^j + 1 for
    j >= 2 and ends at 2^(j+1) inclusive.
    """
    if j < 1:
        raise ValueError("blocks are indexed from 1")
    lo = 2**j + (1 if j > 1 else 0)
    return lo, 2 ** (j + 1) + 1


@dataclass(frozen=True, slots=True)
class Block:
    j: int
    start_index: int
    count: int


@dataclass
class SetStream:
    """Materialized ascending enumeration of a generated set."""

    kind: str
    k: int
    alpha: AlphaSpec | None
    elements: np.ndarray
    uncertain_count: int = 0
    blocks: list[Block] = field(default_factory=list)
    bits: int | None = None

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, n) -> bool:
        i = np.searchsorted(self.elements, n)
        return i < len(self.elements) and self.elements[i] == n

    def count_upto(self, n: int) -> int:
        return int(np.searchsorted(self.elements, n, side="right"))

    def density(self, n: int) -> Fraction:
        """|stream intersect [1, n]| / n, exact."""
        if n < 1:
            raise ValueError("n must be positive")
        return Fraction(self.count_upto(n), n)

    def block_elements(self, j: int) -> np.ndarray:
        for b in self.blocks:
            if b.j == j:
                return self.elements[b.start_index : b.start_index + b.count]
        raise KeyError(f"no block {j} in this stream")

    def save(self, path: str | Path) -> None:
        path = Path(path)
        with path.open("w") as fh:
            fh.write(
                f"# reclab-set kind={self.kind} k={self.k}"
                f" alpha={self.alpha.to_text() if self.alpha else '-'}"
                f" bits={self.bits or 0} uncertain={self.uncertain_count}\n"
            )
            for b in self.blocks:
                fh.write(f"# block j={b.j} start={b.start_index} count={b.count}\n")
            for n in self.elements:
                fh.write(f"{int(n)}\n")

    @classmethod
    def load(cls, path: str | Path) -> "SetStream":
        kind, k, alpha, bits, uncertain = "file", 0, None, None, 0
        blocks: list[Block] = []
        elems: list[int] = []
        with Path(path).open() as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                if line.startswith("#"):
                    fields = dict(
                        kv.split("=", 1) for kv in line[1:].split() if "=" in kv
                    )
                    if "kind" in fields:
                        kind = fields["kind"]
                        k = int(fields.get("k", 0))
                        bits = int(fields.get("bits", 0)) or None
                        uncertain = int(fields.get("uncertain", 0))
                        if fields.get("alpha", "-") != "-":
                            alpha = AlphaSpec.parse(fields["alpha"])
                    elif "j" in fields:
                        blocks.append(
                            Block(int(fields["j"]), int(fields["start"]), int(fields["count"]))
                        )
                    continue
                elems.append(int(line))
        return cls(kind, k, alpha, np.asarray(elems, dtype=np.int64),
                   uncertain, blocks, bits)


def _collect(spans, parts):
    members = []
    uncertain = 0
    for (lo, _hi), cls in zip(spans, parts):
        hits = np.nonzero(cls == kernels.INSIDE)[0]
        members.append(hits.astype(np.int64) + lo)
        uncertain += int(np.count_nonzero(cls == kernels.UNCERTAIN))
    if members:
        return np.concatenate(members), uncertain
    return np.empty(0, dtype=np.int64), uncertain


def gen_Sk(
    k: int,
    alpha: AlphaSpec,
    n_max: int,
    bits: int | None = None,
    workers: int = 1,
) -> SetStream:
    """All n <= n_max whose {n^k alpha} is certified inside [1/4, 3/4]."""
    prec = Precision.for_run(k, n_max, bits)
    a = realize(alpha, prec)
    spans = kernels.chunk_spans(1, n_max + 1)
    parts = kernels.classify_spans(
        a.mantissa, a.err, prec.bits, k, spans, *SK_INTERVAL, workers=workers
    )
    elements, uncertain = _collect(spans, parts)
    return SetStream("sk", k, alpha, elements, uncertain, bits=prec.bits)


def gen_SkPrime(
    k: int,
    alpha: AlphaSpec,
    j_max: int,
    bits: int | None = None,
    workers: int = 1,
) -> SetStream:
    """Union of filtered dyadic blocks I_1..I_jmax, with block boundaries kept."""
    if j_max < 0:
        raise ValueError("j_max must be >= 0")
    if j_max == 0:
        return SetStream("skprime", k, alpha, np.empty(0, dtype=np.int64), bits=bits)
    n_top = 2 ** (j_max + 1)
    prec = Precision.for_run(k, n_top, bits)
    a = realize(alpha, prec)
    pieces: list[np.ndarray] = []
    blocks: list[Block] = []
    uncertain = 0
    offset = 0
    for j in range(1, j_max + 1):
        lo, hi = block_span(j)
        spans = kernels.chunk_spans(lo, hi)
        parts = kernels.classify_spans(
            a.mantissa, a.err, prec.bits, k, spans, *block_interval(j), workers=workers
        )
        elems, unc = _collect(spans, parts)
        pieces.append(elems)
        blocks.append(Block(j, offset, len(elems)))
        offset += len(elems)
        uncertain += unc
    elements = np.concatenate(pieces) if pieces else np.empty(0, dtype=np.int64)
    return SetStream("skprime", k, alpha, elements, uncertain, blocks, prec.bits)


def power_set(s: SetStream, k: int) -> SetStream:
    """The stream of a^k over the input elements, in the same order."""
    if k < 1:
        raise ValueError("k must be positive")
    if len(s.elements) == 0:
        return SetStream("power", k, s.alpha, np.empty(0, dtype=np.int64))
    top = int(s.elements[-1])
    if k * top.bit_length() > MAX_WIDE_BITS:
        raise PrecisionError(
            f"a_max^{k} needs ~{k * top.bit_length()} bits, "
            f"beyond the {MAX_WIDE_BITS}-bit cap"
        )
    powered = [int(a) ** k for a in s.elements]
    if powered[-1] < 2**63:
        arr = np.asarray(powered, dtype=np.int64)
    else:
        arr = np.asarray(powered, dtype=object)
    return SetStream("power", k, s.alpha, arr)


def density(s: SetStream, n: int) -> Fraction:
    return s.density(n)
