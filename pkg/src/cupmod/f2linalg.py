"""
Linear algebra over the two-element field on bit-packed columns.

A column is a Python ``int`` whose bit ``i`` is set when simplex index ``i``
is in the support (bit 0 is never used since indices start at 1). The pivot
of a nonzero column is its maximum index.
"""

import dataclasses
import enum
import heapq
import logging
import operator
from collections.abc import Iterable, Iterator

from typing_extensions import Self


logger = logging.getLogger(__name__)


class ColumnMatrixError(Exception):
    pass


class ZeroColumnRejected(ColumnMatrixError):
    pass


class MatrixNotReduced(ColumnMatrixError):
    pass


class DegreeMismatch(ColumnMatrixError):
    pass


def iter_bits(bits: int) -> Iterator[int]:
    """
    Yield the indices of the set bits of ``bits`` in ascending order.
    """
    while bits:
        low = bits & -bits
        yield low.bit_length() - 1
        bits ^= low


def pivot_of(bits: int) -> int:
    return bits.bit_length() - 1


def prefix_mask(k: int) -> int:
    # Bits 1..k inclusive.
    return (1 << (k + 1)) - 2 if k > 0 else 0


@dataclasses.dataclass(frozen=True)
class Cochain:
    """
    A cochain over Z/2: a degree plus the set of simplex indices it takes
    the value 1 on.
    """

    degree: int
    bits: int = 0

    @classmethod
    def from_indices(cls, degree: int, indices: Iterable[int]) -> Self:
        bits = 0
        for i in map(operator.index, indices):
            if i < 1:
                raise ValueError(f"Simplex indices start at 1, got {i}.")
            bits ^= 1 << i
        return cls(degree=degree, bits=bits)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(iter_bits(self.bits))

    @property
    def pivot(self) -> int:
        return pivot_of(self.bits)

    def is_zero(self) -> bool:
        return self.bits == 0

    def restrict(self, k: int) -> Self:
        return dataclasses.replace(self, bits=self.bits & prefix_mask(k))

    def __add__(self, other: "Cochain") -> "Cochain":
        if other.degree != self.degree and self.bits and other.bits:
            raise DegreeMismatch(
                f"Cannot add a degree {self.degree} cochain to a degree "
                f"{other.degree} cochain."
            )
        return Cochain(degree=self.degree, bits=self.bits ^ other.bits)

    def __contains__(self, index: object) -> bool:
        return isinstance(index, int) and index > 0 and bool(self.bits >> index & 1)

    def __len__(self) -> int:
        return self.bits.bit_count()


class ColumnOrigin(enum.Enum):
    COBOUNDARY = "coboundary"
    PRODUCT = "product"


@dataclasses.dataclass(eq=False)
class Column:
    bits: int
    degree: int
    origin: ColumnOrigin
    # Left-to-right position. Coboundary columns always sort before
    # product columns whatever their insertion time.
    key: tuple[int, int]
    birth: int | None = None
    rep_at_birth: Cochain | None = None

    @property
    def pivot(self) -> int:
        return pivot_of(self.bits)

    def as_cochain(self) -> Cochain:
        return Cochain(degree=self.degree, bits=self.bits)


class ColumnMatrix:
    """
    An ordered sequence of Z/2 columns reduced with left-to-right additions.

    The matrix is either *reduced* (nonzero columns have pairwise distinct
    pivots) or holds a set of dirty columns waiting for ``reduce``. Columns
    that reduce to zero are removed from the matrix and reported to the
    caller, which decides what a zeroed column means (a coboundary column
    vanishing is silent, a product column vanishing is a death).
    """

    def __init__(self, *, record_additions: bool = False) -> None:
        self._columns: dict[tuple[int, int], Column] = {}
        self._pivot_owner: dict[int, Column] = {}
        self._dirty: list[tuple[tuple[int, int], Column]] = []
        self._dirty_keys: set[tuple[int, int]] = set()
        self._sequence = 0
        self._max_row: int | None = None
        self.additions: list[tuple[tuple[int, int], tuple[int, int]]] | None = (
            [] if record_additions else None
        )

    def __len__(self) -> int:
        return len(self._columns)

    @property
    def columns(self) -> list[Column]:
        return [self._columns[key] for key in sorted(self._columns)]

    @property
    def product_columns(self) -> list[Column]:
        return [c for c in self.columns if c.origin is ColumnOrigin.PRODUCT]

    @property
    def is_reduced(self) -> bool:
        return not self._dirty

    def rank(self) -> int:
        """
        Number of nonzero columns; equal to the rank once reduced.
        """
        if self._dirty:
            raise MatrixNotReduced("Reduce the matrix before asking for its rank.")
        return len(self._columns)

    def add_coboundary_column(self, bits: int, *, degree: int) -> Column:
        column = Column(
            bits=bits,
            degree=degree,
            origin=ColumnOrigin.COBOUNDARY,
            key=(0, self._next_sequence()),
        )
        self._insert(column)
        return column

    def append(
        self, cochain: Cochain, *, birth: int, rep: Cochain | None = None
    ) -> Column:
        """
        Append ``cochain`` as the rightmost column, annotated with its birth
        index and an untouched copy of the representative at birth.
        """
        if cochain.is_zero():
            raise ZeroColumnRejected("Only nonzero cochains can be appended.")
        column = Column(
            bits=cochain.bits,
            degree=cochain.degree,
            origin=ColumnOrigin.PRODUCT,
            key=(1, self._next_sequence()),
            birth=birth,
            rep_at_birth=rep if rep is not None else cochain,
        )
        self._insert(column)
        return column

    def zero_row(self, i: int) -> None:
        """
        Remove index ``i`` from every column. Columns whose pivot was ``i``
        become dirty and are re-reduced by the next ``reduce`` call.
        """
        bit = 1 << i
        for column in self._columns.values():
            if not column.bits & bit:
                continue
            was_pivot = column.pivot == i
            column.bits ^= bit
            if was_pivot and self._pivot_owner.get(i) is column:
                del self._pivot_owner[i]
                self._mark_dirty(column)

    def restrict_to(self, k: int) -> None:
        """
        Zero every row above ``k``.

        Only pivot owners above ``k`` and dirty columns can carry such rows
        in a matrix that has been kept reduced, so repeated calls with a
        decreasing ``k`` touch a handful of columns each time.
        """
        mask = prefix_mask(k)
        upper = self._max_row
        if upper is None:
            upper = max((c.pivot for c in self._columns.values()), default=0)
        for row in range(k + 1, upper + 1):
            owner = self._pivot_owner.pop(row, None)
            if owner is not None:
                owner.bits &= mask
                self._mark_dirty(owner)
        for _, column in self._dirty:
            column.bits &= mask
        self._max_row = k

    def reduce(self) -> list[Column]:
        """
        Bring the matrix to reduced state using only additions of a column
        into a column to its right. Returns the columns that became zero
        during this call; they are no longer part of the matrix.
        """
        zeroed: list[Column] = []
        while self._dirty:
            key, column = heapq.heappop(self._dirty)
            self._dirty_keys.discard(key)
            if key not in self._columns:
                continue
            while column.bits:
                pivot = column.pivot
                owner = self._pivot_owner.get(pivot)
                if owner is None:
                    self._pivot_owner[pivot] = column
                    break
                if owner.key < column.key:
                    column.bits ^= owner.bits
                    if self.additions is not None:
                        self.additions.append((owner.key, column.key))
                    continue
                # The current owner sits to the right: it gives up the pivot
                # and gets reduced against this column later on.
                self._pivot_owner[pivot] = column
                self._mark_dirty(owner)
                break
            if not column.bits:
                del self._columns[key]
                zeroed.append(column)
        if zeroed:
            logger.debug("Reduction zeroed %d column(s).", len(zeroed))
        return zeroed

    def is_independent(self, cochain: Cochain) -> bool:
        """
        Whether ``cochain`` lies outside the span of the columns. The matrix
        is left untouched.
        """
        if self._dirty:
            raise MatrixNotReduced(
                "Independence can only be tested against a reduced matrix."
            )
        bits = cochain.bits
        while bits:
            owner = self._pivot_owner.get(pivot_of(bits))
            if owner is None:
                return True
            bits ^= owner.bits
        return False

    def _insert(self, column: Column) -> None:
        self._columns[column.key] = column
        if column.bits and self._max_row is not None:
            self._max_row = max(self._max_row, column.pivot)
        self._mark_dirty(column)

    def _mark_dirty(self, column: Column) -> None:
        if column.key in self._dirty_keys:
            return
        self._dirty_keys.add(column.key)
        heapq.heappush(self._dirty, (column.key, column))

    def _next_sequence(self) -> int:
        self._sequence += 1
        return self._sequence
