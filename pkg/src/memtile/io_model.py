"""Closed-form external-IO accounting and loop-order selection for blocked MM.

The multiplication C = C + A*B (A is M x K, B is K x N) is partitioned
into m x k x n computation blocks. Blocks can be visited in six loop
orders, written outer->middle->inner; the innermost dimension alone
determines which operand's tile can stay resident across consecutive
blocks, and with it the total external IO:

    N innermost, A tiles stationary:  MKN*(1/m + 2/k) + MK
    M innermost, B tiles stationary:  MKN*(2/k + 1/n) + KN
    K innermost, C tiles stationary:  MKN*(1/m + 1/n) + 2MN

Each total is (number of blocks) * (streamed elements per block) plus the
one-time cost of the stationary operand. The factor 2 on mn terms counts
partial C tiles being both read and written; for K-first the 2MN is the
stationary C loaded once and stored once. The closed forms are exact
integer counts only when the tile divides the problem evenly; ragged
problems belong to the simulator (see memtile.sim).

Everything here is pure and exact: totals are integers, and the selection
condition is evaluated in rational arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

from .tiling import TileShape


class DivisibilityError(ValueError):
    """Raised when a closed-form IO count is requested for a non-divisible tiling."""


class InnerClass(Enum):
    """IO class of a block loop order, keyed on the innermost dimension."""

    M_FIRST = "M-first"
    N_FIRST = "N-first"
    K_FIRST = "K-first"

    @property
    def stationary(self) -> str:
        """Operand held in local memory across the inner loop."""
        return {InnerClass.M_FIRST: "B", InnerClass.N_FIRST: "A", InnerClass.K_FIRST: "C"}[self]


class LoopOrder(Enum):
    """The six block-scheduling schemes, written outer->middle->inner."""

    MNK = "M->N->K"
    NMK = "N->M->K"
    MKN = "M->K->N"
    NKM = "N->K->M"
    KMN = "K->M->N"
    KNM = "K->N->M"

    @property
    def dims(self) -> tuple[str, str, str]:
        """(outer, middle, inner) dimension names."""
        name = self.name
        return (name[0], name[1], name[2])

    @property
    def inner_dim(self) -> str:
        return self.name[2]

    @property
    def inner_class(self) -> InnerClass:
        return {"M": InnerClass.M_FIRST, "N": InnerClass.N_FIRST,
                "K": InnerClass.K_FIRST}[self.inner_dim]

    @classmethod
    def parse(cls, text: str) -> "LoopOrder":
        """Accept either 'M->N->K' or the compact 'MNK' spelling."""
        compact = text.replace("->", "").replace(" ", "").upper()
        try:
            return cls[compact]
        except KeyError:
            raise ValueError(
                f"unknown loop order {text!r}; expected one of "
                f"{[o.value for o in cls]}") from None


# Deterministic preferences: class tie-break order, and the canonical
# scheme representing each class (first of its class in the enumeration).
CLASS_PRIORITY = (InnerClass.K_FIRST, InnerClass.M_FIRST, InnerClass.N_FIRST)
CANONICAL_ORDER = {
    InnerClass.K_FIRST: LoopOrder.MNK,
    InnerClass.N_FIRST: LoopOrder.MKN,
    InnerClass.M_FIRST: LoopOrder.NKM,
}


@dataclass(frozen=True)
class MMProblem:
    """One M x K x N multiplication instance (A: M x K, B: K x N, C: M x N)."""

    M: int
    K: int
    N: int
    element_bytes: int = 4

    def __post_init__(self) -> None:
        if min(self.M, self.K, self.N) < 1:
            raise ValueError("matrix dims must be >= 1")
        if self.element_bytes < 1:
            raise ValueError("element_bytes must be >= 1")

    @property
    def macs(self) -> int:
        return self.M * self.K * self.N


@dataclass(frozen=True)
class Schedule:
    """A loop order plus tile shape; the stationary operand follows from the order."""

    order: LoopOrder
    tile: TileShape

    @property
    def inner_class(self) -> InnerClass:
        return self.order.inner_class

    @property
    def stationary(self) -> str:
        return self.inner_class.stationary


@dataclass(frozen=True)
class IOReport:
    """External element traffic split into streamed and stationary parts."""

    streaming_elems: int
    stationary_elems: int
    element_bytes: int = 4

    @property
    def total_elems(self) -> int:
        return self.streaming_elems + self.stationary_elems

    @property
    def total_bytes(self) -> int:
        return self.total_elems * self.element_bytes


def _block_count(problem: MMProblem, tile: TileShape) -> int:
    if problem.M % tile.m or problem.K % tile.k or problem.N % tile.n:
        raise DivisibilityError(
            f"closed-form IO requires divisible tiling: {tile.key()} does not divide "
            f"{problem.M}x{problem.K}x{problem.N} (pad the problem or use the simulator)")
    return (problem.M // tile.m) * (problem.K // tile.k) * (problem.N // tile.n)


def io_n_first(problem: MMProblem, tile: TileShape, *, c_zero: bool = False) -> IOReport:
    """IO with N innermost: A tiles stationary, B and partial-C tiles streamed.

    Per block the streamed traffic is nk (B in) + 2mn (C in and out); the
    stationary A costs MK once. With c_zero the first touch of each C tile
    skips its read, removing MN loads.
    """
    blocks = _block_count(problem, tile)
    streaming = blocks * (2 * tile.m * tile.n + tile.n * tile.k)
    if c_zero:
        streaming -= problem.M * problem.N
    return IOReport(streaming, problem.M * problem.K, problem.element_bytes)


def io_m_first(problem: MMProblem, tile: TileShape, *, c_zero: bool = False) -> IOReport:
    """IO with M innermost: B tiles stationary, A and partial-C tiles streamed."""
    blocks = _block_count(problem, tile)
    streaming = blocks * (tile.m * tile.k + 2 * tile.m * tile.n)
    if c_zero:
        streaming -= problem.M * problem.N
    return IOReport(streaming, problem.K * problem.N, problem.element_bytes)


def io_k_first(problem: MMProblem, tile: TileShape, *, c_zero: bool = False) -> IOReport:
    """IO with K innermost: C tiles stationary (read once, written once).

    With c_zero the initial MN loads of C are dropped, leaving MN stores.
    """
    blocks = _block_count(problem, tile)
    streaming = blocks * (tile.m * tile.k + tile.k * tile.n)
    stationary = problem.M * problem.N if c_zero else 2 * problem.M * problem.N
    return IOReport(streaming, stationary, problem.element_bytes)


_IO_BY_CLASS = {
    InnerClass.N_FIRST: io_n_first,
    InnerClass.M_FIRST: io_m_first,
    InnerClass.K_FIRST: io_k_first,
}


def io_for_class(problem: MMProblem, tile: TileShape, inner_class: InnerClass,
                 *, c_zero: bool = False) -> IOReport:
    return _IO_BY_CLASS[inner_class](problem, tile, c_zero=c_zero)


def all_class_io(problem: MMProblem, tile: TileShape,
                 *, c_zero: bool = False) -> dict[InnerClass, IOReport]:
    return {cls: io_for_class(problem, tile, cls, c_zero=c_zero) for cls in CLASS_PRIORITY}


def select_schedule(problem: MMProblem, tile: TileShape, *, c_zero: bool = False) -> Schedule:
    """Schedule whose class minimizes total IO.

    Ties break K-first, then M-first, then N-first; the returned scheme is
    the canonical representative of the winning class.
    """
    reports = all_class_io(problem, tile, c_zero=c_zero)
    winner = min(CLASS_PRIORITY, key=lambda cls: reports[cls].total_elems)
    return Schedule(order=CANONICAL_ORDER[winner], tile=tile)


def formula_total(M: int, K: int, N: int, m: int, k: int, n: int,
                  inner_class: InnerClass) -> Fraction:
    """Closed-form total evaluated in rational arithmetic at arbitrary dims.

    No divisibility requirement; the result is an exact element count only
    when the tile divides the problem. Used by the selection condition and
    for comparing class totals without committing to integer block counts.
    """
    mkn = Fraction(M * K * N)
    if inner_class is InnerClass.N_FIRST:
        return mkn * (Fraction(1, m) + Fraction(2, k)) + M * K
    if inner_class is InnerClass.M_FIRST:
        return mkn * (Fraction(2, k) + Fraction(1, n)) + K * N
    return mkn * (Fraction(1, m) + Fraction(1, n)) + 2 * M * N


def m_first_condition(problem: MMProblem, tile: TileShape) -> bool:
    """True iff an M-first schedule is no worse than both K-first and N-first.

    Evaluates the pair of inequalities

        K <= 2M / (1 + M*(2/k - 1/m))      (M-first vs K-first)
        N <=  M / (1 + M*(1/n - 1/m))      (M-first vs N-first)

    in exact rationals. When a denominator is not positive the division form
    is degenerate (the corresponding inequality then holds for every K or N),
    so the comparison falls back to the class totals directly; either path is
    algebraically equivalent to io_m_first <= io_k_first and <= io_n_first.
    """
    M, K, N = problem.M, problem.K, problem.N
    m, k, n = tile.m, tile.k, tile.n
    den_k = 1 + M * (Fraction(2, k) - Fraction(1, m))
    den_n = 1 + M * (Fraction(1, n) - Fraction(1, m))
    if den_k > 0 and den_n > 0:
        return K <= Fraction(2 * M) / den_k and N <= Fraction(M) / den_n
    m_total = formula_total(M, K, N, m, k, n, InnerClass.M_FIRST)
    return (m_total <= formula_total(M, K, N, m, k, n, InnerClass.K_FIRST)
            and m_total <= formula_total(M, K, N, m, k, n, InnerClass.N_FIRST))


def pad_to_tiles(problem: MMProblem, tile: TileShape) -> MMProblem:
    """Round every problem dim up to the next tile multiple."""
    def up(x: int, t: int) -> int:
        return ((x + t - 1) // t) * t

    return MMProblem(up(problem.M, tile.m), up(problem.K, tile.k),
                     up(problem.N, tile.n), problem.element_bytes)
