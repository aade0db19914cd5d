"""Truncated tensor algebra over R^d with shuffle and concatenation products.

Elements live in the direct sum of tensor levels 0..N and are stored as one
dense complex coefficient vector in level-major order.  Words (multi-indices)
over the alphabet {1, ..., d} index the coefficients: within a level, words
are ordered lexicographically, so the rank of a word I = (i_1, ..., i_n) is

    offset(n) + sum_j (i_j - 1) * d^(n - j).

Both products, the shuffle/concatenation exponentials and logarithms, the
one- and two-letter right shifts, dilation, pairing and the seminorm family
operate on this flat layout.
"""

from __future__ import annotations

import math
import threading
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache

import numpy as np

Word = tuple[int, ...]

EMPTY_WORD: Word = ()


def n_words(d: int, N: int) -> int:
    """Number of words of length <= N over a d-letter alphabet."""
    if d == 1:
        return N + 1
    return (d ** (N + 1) - 1) // (d - 1)


def level_offsets(d: int, N: int) -> list[int]:
    """offsets[n] = rank of the first word of length n; has N+2 entries."""
    offs = [0]
    for n in range(N + 1):
        offs.append(offs[-1] + d**n)
    return offs


def word_index(word: Word, d: int) -> int:
    n = len(word)
    idx = n_words(d, n - 1) if n else 0
    for j, letter in enumerate(word):
        if not 1 <= letter <= d:
            raise ValueError(f"letter {letter} outside alphabet 1..{d}")
        idx += (letter - 1) * d ** (n - 1 - j)
    return idx


def index_word(idx: int, d: int) -> Word:
    n = 0
    while idx >= d**n:
        idx -= d**n
        n += 1
    letters = []
    for j in range(n):
        letters.append(idx // d ** (n - 1 - j) + 1)
        idx %= d ** (n - 1 - j)
    return tuple(letters)


def words_of_level(d: int, n: int):
    """Yield all words of length n in rank order."""
    if n == 0:
        yield EMPTY_WORD
        return
    idx = [1] * n
    while True:
        yield tuple(idx)
        j = n - 1
        while j >= 0 and idx[j] == d:
            idx[j] = 1
            j -= 1
        if j < 0:
            return
        idx[j] += 1


def all_words(d: int, N: int):
    for n in range(N + 1):
        yield from words_of_level(d, n)


def word_factorial(word: Word) -> int:
    """Product of factorials of the letter multiplicities."""
    out = 1
    for c in Counter(word).values():
        out *= math.factorial(c)
    return out


@lru_cache(maxsize=None)
def shuffle_word_pair(left: Word, right: Word) -> tuple[tuple[Word, int], ...]:
    """All words arising from shuffling two words, with multiplicities."""
    if not left:
        return ((right, 1),)
    if not right:
        return ((left, 1),)
    acc: Counter[Word] = Counter()
    for w, c in shuffle_word_pair(left[:-1], right):
        acc[w + (left[-1],)] += c
    for w, c in shuffle_word_pair(left, right[:-1]):
        acc[w + (right[-1],)] += c
    return tuple(sorted(acc.items()))


class _Tables:
    """Precomputed sparse index tables for one (d, N) pair."""

    def __init__(self, d: int, N: int):
        self.d = d
        self.N = N
        self.size = n_words(d, N)
        self.offsets = level_offsets(d, N)
        words = list(all_words(d, N))
        self.words = words
        self.level = np.array([len(w) for w in words], dtype=np.int64)

        # shuffle triplets, grouped contiguously per word pair
        tri_i, tri_j, tri_k, tri_c = [], [], [], []
        pr_i, pr_j, pr_start = [], [], []
        for i, wi in enumerate(words):
            for j, wj in enumerate(words):
                if len(wi) + len(wj) > N:
                    continue
                pr_i.append(i)
                pr_j.append(j)
                pr_start.append(len(tri_i))
                for w, c in shuffle_word_pair(wi, wj):
                    tri_i.append(i)
                    tri_j.append(j)
                    tri_k.append(word_index(w, d))
                    tri_c.append(c)
        self.sh_i = np.array(tri_i, dtype=np.int64)
        self.sh_j = np.array(tri_j, dtype=np.int64)
        self.sh_k = np.array(tri_k, dtype=np.int64)
        self.sh_c = np.array(tri_c, dtype=np.float64)
        self.pair_i = np.array(pr_i, dtype=np.int64)
        self.pair_j = np.array(pr_j, dtype=np.int64)
        self.pair_start = np.array(pr_start, dtype=np.int64)

        # concatenation triplets: every split of every word
        ci, cj, ck = [], [], []
        for k, w in enumerate(words):
            for cut in range(len(w) + 1):
                ci.append(word_index(w[:cut], d))
                cj.append(word_index(w[cut:], d))
                ck.append(k)
        self.cc_i = np.array(ci, dtype=np.int64)
        self.cc_j = np.array(cj, dtype=np.int64)
        self.cc_k = np.array(ck, dtype=np.int64)

        # right shifts: parent word index and last letter(s)
        self.last = np.array([w[-1] if w else 0 for w in words], dtype=np.int64)
        self.parent = np.array(
            [word_index(w[:-1], d) if w else 0 for w in words], dtype=np.int64
        )


_table_cache: dict[tuple[int, int], _Tables] = {}
_table_lock = threading.Lock()


def tables(d: int, N: int) -> _Tables:
    key = (d, N)
    tab = _table_cache.get(key)
    if tab is None:
        with _table_lock:
            tab = _table_cache.get(key)
            if tab is None:
                tab = _Tables(d, N)
                _table_cache[key] = tab
    return tab


class Partition(Enum):
    """Ways of grouping words when evaluating the coefficient seminorm."""

    SINGLETON = "singleton"
    ORDERED = "ordered"
    BY_LEVEL = "by_level"

    @property
    def shuffle_compatible(self) -> bool:
        return self is not Partition.SINGLETON


@dataclass
class TensorCoeffs:
    """Coefficient vector in the tensor algebra truncated at level N."""

    d: int
    N: int
    coeffs: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("alphabet size must be >= 1")
        if self.N < 0:
            raise ValueError("truncation level must be >= 0")
        size = n_words(self.d, self.N)
        if self.coeffs is None:
            self.coeffs = np.zeros(size, dtype=np.complex128)
        else:
            self.coeffs = np.asarray(self.coeffs, dtype=np.complex128)
            if self.coeffs.shape != (size,):
                raise ValueError(
                    f"expected {size} coefficients for d={self.d}, N={self.N}, "
                    f"got shape {self.coeffs.shape}"
                )

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls, d: int, N: int) -> "TensorCoeffs":
        return cls(d, N)

    @classmethod
    def unit(cls, d: int, N: int) -> "TensorCoeffs":
        out = cls(d, N)
        out.coeffs[0] = 1.0
        return out

    @classmethod
    def basis(cls, d: int, N: int, word: Word) -> "TensorCoeffs":
        if len(word) > N:
            raise ValueError(f"word {word} longer than truncation {N}")
        out = cls(d, N)
        out.coeffs[word_index(word, d)] = 1.0
        return out

    def copy(self) -> "TensorCoeffs":
        return TensorCoeffs(self.d, self.N, self.coeffs.copy())

    # -- access -------------------------------------------------------

    def __getitem__(self, word: Word) -> complex:
        return complex(self.coeffs[word_index(word, self.d)])

    def __setitem__(self, word: Word, value: complex):
        self.coeffs[word_index(word, self.d)] = value

    def level_slice(self, n: int) -> np.ndarray:
        offs = tables(self.d, self.N).offsets
        return self.coeffs[offs[n] : offs[n + 1]]

    def nonzero_words(self) -> list[Word]:
        tab = tables(self.d, self.N)
        return [tab.words[k] for k in np.nonzero(self.coeffs)[0]]

    def max_support_level(self) -> int:
        nz = np.nonzero(self.coeffs)[0]
        if len(nz) == 0:
            return 0
        return int(tables(self.d, self.N).level[nz[-1]])

    def with_truncation(self, N: int) -> "TensorCoeffs":
        """Pad with zeros or drop top levels to reach truncation N."""
        if N == self.N:
            return self.copy()
        out = TensorCoeffs(self.d, N)
        m = min(len(out.coeffs), len(self.coeffs))
        out.coeffs[:m] = self.coeffs[:m]
        return out

    # -- linear structure ----------------------------------------------

    def _check_match(self, other: "TensorCoeffs"):
        if self.d != other.d or self.N != other.N:
            raise ValueError(
                f"mismatched algebras: (d={self.d}, N={self.N}) vs "
                f"(d={other.d}, N={other.N})"
            )

    def __add__(self, other: "TensorCoeffs") -> "TensorCoeffs":
        self._check_match(other)
        return TensorCoeffs(self.d, self.N, self.coeffs + other.coeffs)

    def __sub__(self, other: "TensorCoeffs") -> "TensorCoeffs":
        self._check_match(other)
        return TensorCoeffs(self.d, self.N, self.coeffs - other.coeffs)

    def __mul__(self, scalar) -> "TensorCoeffs":
        return TensorCoeffs(self.d, self.N, self.coeffs * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> "TensorCoeffs":
        return TensorCoeffs(self.d, self.N, -self.coeffs)

    # -- products -------------------------------------------------------

    def shuffle(self, other: "TensorCoeffs") -> "TensorCoeffs":
        self._check_match(other)
        tab = tables(self.d, self.N)
        out = np.zeros_like(self.coeffs)
        np.add.at(
            out, tab.sh_k, self.coeffs[tab.sh_i] * other.coeffs[tab.sh_j] * tab.sh_c
        )
        return TensorCoeffs(self.d, self.N, out)

    def concat(self, other: "TensorCoeffs") -> "TensorCoeffs":
        self._check_match(other)
        tab = tables(self.d, self.N)
        out = np.zeros_like(self.coeffs)
        np.add.at(out, tab.cc_k, self.coeffs[tab.cc_i] * other.coeffs[tab.cc_j])
        return TensorCoeffs(self.d, self.N, out)

    def shuffle_power(self, k: int) -> "TensorCoeffs":
        out = TensorCoeffs.unit(self.d, self.N)
        for _ in range(k):
            out = out.shuffle(self)
        return out

    def shuffle_exp(self) -> "TensorCoeffs":
        """exp of this element under the shuffle product."""
        bar = self.copy()
        scalar = bar.coeffs[0]
        bar.coeffs[0] = 0.0
        acc = TensorCoeffs.unit(self.d, self.N)
        term = TensorCoeffs.unit(self.d, self.N)
        for k in range(1, self.N + 1):
            term = term.shuffle(bar) * (1.0 / k)
            acc = acc + term
        return acc * np.exp(scalar)

    def shuffle_log(self) -> "TensorCoeffs":
        """Inverse of shuffle_exp; requires a nonzero scalar part."""
        scalar = self.coeffs[0]
        if scalar == 0:
            raise ValueError("shuffle logarithm needs a nonzero scalar part")
        bar = self * (1.0 / scalar)
        bar.coeffs[0] = 0.0
        acc = TensorCoeffs.zero(self.d, self.N)
        term = TensorCoeffs.unit(self.d, self.N)
        for k in range(1, self.N + 1):
            term = term.shuffle(bar)
            acc = acc + term * ((-1.0) ** (k - 1) / k)
        acc.coeffs[0] = np.log(scalar)
        return acc

    def concat_exp(self) -> "TensorCoeffs":
        """exp under the concatenation product; scalar part must be 0."""
        if self.coeffs[0] != 0:
            raise ValueError("concatenation exponential needs zero scalar part")
        acc = TensorCoeffs.unit(self.d, self.N)
        term = TensorCoeffs.unit(self.d, self.N)
        for k in range(1, self.N + 1):
            term = term.concat(self) * (1.0 / k)
            acc = acc + term
        return acc

    # -- shifts, dilation, pairing ---------------------------------------

    def shift1(self) -> list["TensorCoeffs"]:
        """Right one-letter shifts: component k collects words ending in k.

        Returns d elements truncated at N-1.
        """
        if self.N < 1:
            raise ValueError("shift needs truncation level >= 1")
        tab = tables(self.d, self.N)
        out = [TensorCoeffs(self.d, self.N - 1) for _ in range(self.d)]
        for k in range(1, self.d + 1):
            mask = tab.last == k
            np.add.at(out[k - 1].coeffs, tab.parent[mask], self.coeffs[mask])
        return out

    def shift2(self) -> list[list["TensorCoeffs"]]:
        """Right two-letter shifts: entry [k][l] strips suffix (k+1, l+1)."""
        if self.N < 2:
            raise ValueError("second shift needs truncation level >= 2")
        first = self.shift1()
        return [c.shift1() for c in first]

    def dilate(self, lam: complex) -> "TensorCoeffs":
        tab = tables(self.d, self.N)
        return TensorCoeffs(self.d, self.N, self.coeffs * lam**tab.level)

    def pair(self, other: "TensorCoeffs") -> complex:
        """Bilinear pairing sum_I a_I b_I over common levels (no conjugation)."""
        if self.d != other.d:
            raise ValueError("pairing needs matching alphabet size")
        m = min(len(self.coeffs), len(other.coeffs))
        return complex(np.sum(self.coeffs[:m] * other.coeffs[:m]))

    # -- seminorms ---------------------------------------------------------

    def _partition_blocks(self, partition: Partition, include_level0: bool):
        tab = tables(self.d, self.N)
        blocks: dict = {}
        for k, w in enumerate(tab.words):
            if not include_level0 and len(w) == 0:
                continue
            if partition is Partition.SINGLETON:
                key = k
            elif partition is Partition.ORDERED:
                key = tuple(sorted(w))
            else:
                key = len(w)
            blocks.setdefault(key, []).append(k)
        return blocks

    def seminorm(
        self,
        state: "TensorCoeffs",
        partition: Partition = Partition.BY_LEVEL,
        include_level0: bool = False,
    ) -> float:
        """sum over blocks of |sum_{I in block} u_I x_I| at state x."""
        if self.d != state.d:
            raise ValueError("seminorm needs matching alphabet size")
        x = state.with_truncation(self.N) if state.N != self.N else state
        total = 0.0
        for idxs in self._partition_blocks(partition, include_level0).values():
            idxs = np.asarray(idxs)
            total += abs(np.sum(self.coeffs[idxs] * x.coeffs[idxs]))
        return float(total)

    def l1_norm(
        self,
        partition: Partition = Partition.BY_LEVEL,
        include_level0: bool = False,
    ) -> float:
        """sum over blocks of |sum_{I in block} x_I|."""
        total = 0.0
        for idxs in self._partition_blocks(partition, include_level0).values():
            total += abs(np.sum(self.coeffs[np.asarray(idxs)]))
        return float(total)

    # -- text round trip -----------------------------------------------------

    def to_text(self) -> str:
        tab = tables(self.d, self.N)
        lines = []
        for k in np.nonzero(self.coeffs)[0]:
            word = ",".join(str(l) for l in tab.words[k])
            c = self.coeffs[k]
            lines.append(f"word={word} re={float(c.real)!r} im={float(c.imag)!r}")
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def from_text(
        cls, text: str, d: int | None = None, N: int | None = None
    ) -> "TensorCoeffs":
        entries: list[tuple[Word, complex]] = []
        for raw in text.splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 3 or not parts[0].startswith("word="):
                raise ValueError(f"malformed coefficient line: {line!r}")
            wtxt = parts[0][len("word=") :]
            word = tuple(int(t) for t in wtxt.split(",")) if wtxt else EMPTY_WORD
            re_ = float(parts[1].split("=", 1)[1])
            im_ = float(parts[2].split("=", 1)[1])
            entries.append((word, complex(re_, im_)))
        if d is None:
            d = max((max(w) for w, _ in entries if w), default=1)
        if N is None:
            N = max((len(w) for w, _ in entries), default=0)
        out = cls(d, N)
        for word, c in entries:
            out.coeffs[word_index(word, d)] += c
        return out

    def allclose(self, other: "TensorCoeffs", tol: float = 1e-12) -> bool:
        self._check_match(other)
        return bool(np.max(np.abs(self.coeffs - other.coeffs), initial=0.0) <= tol)


def symmetrized_basis(d: int, N: int, word: Word) -> TensorCoeffs:
    """Sum of basis words sharing the multiset of letters of the given word."""
    out = TensorCoeffs(d, N)
    target = tuple(sorted(word))
    for w in words_of_level(d, len(word)):
        if tuple(sorted(w)) == target:
            out.coeffs[word_index(w, d)] = 1.0
    return out
