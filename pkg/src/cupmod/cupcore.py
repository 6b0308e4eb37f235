"""
Cup products of cochains and the drivers computing barcodes of persistent
cup modules.

Every driver walks the filtration from the last index down to the first,
keeping one matrix ``S`` whose left block spans the coboundaries and whose
right block holds products of representatives. A product is appended when
it is born and independent of ``S``; it dies at the index where reduction
turns its column to zero.
"""

import collections
import dataclasses
import logging
from collections.abc import Callable, Iterator, Mapping, Sequence
from typing import Protocol

import numpy as np
import numpy.typing as npt

from cupmod import barcodes, complex, f2linalg, persistence


logger = logging.getLogger(__name__)


class CupModuleError(Exception):
    pass


class InvalidOrder(CupModuleError):
    pass


class InvalidInterval(CupModuleError):
    pass


@dataclasses.dataclass(frozen=True)
class CupBarcode:
    k: int
    bars: tuple[barcodes.Bar, ...]
    relative: bool = False

    def __iter__(self) -> Iterator[barcodes.Bar]:
        return iter(self.bars)

    def __len__(self) -> int:
        return len(self.bars)


class BirthOrder(Protocol):
    """
    Reorders representatives sharing a birth index before they enter the
    driver. The barcode does not depend on the order.
    """

    def __call__(
        self, bars: Sequence[barcodes.Bar], /
    ) -> Sequence[barcodes.Bar]: ...  # pragma: no cover


PairFilter = Callable[[int, int], bool]


def cup_product(
    filtration: complex.Filtration,
    xi: f2linalg.Cochain,
    zeta: f2linalg.Cochain,
    active_prefix: int | None = None,
) -> f2linalg.Cochain:
    """
    Evaluate ``xi ⌣ zeta`` on every ``(p + q)``-simplex of the prefix
    ``K_active_prefix``: the product is 1 on ``[v0, ..., v(p+q)]`` exactly
    when ``xi`` is 1 on the front face ``[v0, ..., vp]`` and ``zeta`` is 1 on
    the back face ``[vp, ..., v(p+q)]``.
    """
    degree = xi.degree + zeta.degree
    if xi.is_zero() or zeta.is_zero():
        return f2linalg.Cochain(degree=degree)
    limit = filtration.n if active_prefix is None else active_prefix
    table = filtration.cup_table(xi.degree, zeta.degree)
    back_bits = zeta.bits
    bits = 0
    for front in f2linalg.iter_bits(xi.bits & f2linalg.prefix_mask(limit)):
        for tau, back in table.get(front, ()):
            if tau <= limit and back_bits >> back & 1:
                bits ^= 1 << tau
    return f2linalg.Cochain(degree=degree, bits=bits)


def _pairable(
    bars: Sequence[barcodes.Bar], partners: Sequence[barcodes.Bar], top: int
) -> list[barcodes.Bar]:
    lowest = min((bar.degree for bar in partners), default=0)
    return [bar for bar in bars if bar.degree + lowest <= top]


def _group(
    bars: Sequence[barcodes.Bar], key: Callable[[barcodes.Bar], int]
) -> dict[int, list[barcodes.Bar]]:
    grouped: dict[int, list[barcodes.Bar]] = collections.defaultdict(list)
    for bar in bars:
        grouped[key(bar)].append(bar)
    return grouped


class CupModuleDriver:
    """
    One pass of the product-matrix algorithm.

    ``left`` holds the representatives multiplied on the right of each
    product; ``right`` the ones multiplied on the left. When ``right`` is
    None both factors come from ``left`` and every pair (including a class
    with itself) is formed once, when its younger factor is born.

    Absolute runs restrict ``S`` to ``K_k`` at loop index ``k``. Relative runs
    never restrict; they add the coboundary of the simplex at ``k + 1`` to
    the left block instead, since that simplex joins the relative cochains.
    """

    def __init__(
        self,
        basis: persistence.PersistentBasis,
        *,
        left: Sequence[barcodes.Bar],
        right: Sequence[barcodes.Bar] | None = None,
        accept: PairFilter | None = None,
        birth_order: BirthOrder | None = None,
        lazy_restriction: bool = False,
        partition: tuple[int, ...] | None = None,
    ) -> None:
        self.basis = basis
        self.filtration = basis.filtration
        self.relative = basis.relative
        self.accept = accept
        self.birth_order = birth_order
        self.lazy_restriction = lazy_restriction
        self.partition = partition
        # Products above the top dimension vanish, so factors that cannot
        # pair with anything never enter the alive lists.
        self._top = self.filtration.dimension
        left = _pairable(left, left if right is None else right, self._top)
        self._left_births = _group(left, lambda bar: bar.birth_index)
        self._right_births = (
            None
            if right is None
            else _group(
                _pairable(right, left, self._top), lambda bar: bar.birth_index
            )
        )
        self._deaths = basis.death_indices
        self._events = basis.death_indices | basis.birth_indices
        self._left_alive: list[barcodes.Bar] = []
        self._right_alive: list[barcodes.Bar] = []
        self._bars: list[barcodes.Bar] = []
        self._products = 0
        if self.relative:
            self.matrix = f2linalg.ColumnMatrix()
        else:
            self.matrix = self.filtration.coboundary_matrix()

    def run(self) -> list[barcodes.Bar]:
        n = self.filtration.n
        if self.relative:
            indices = range(n - 1, -1, -1)
            final_death = -1
        else:
            indices = range(n, 0, -1)
            final_death = 0
        k = n
        for k in indices:
            self._step(k)
        self._emit(self.matrix.reduce(), k)
        for column in self.matrix.product_columns:
            self._emit([column], final_death)
        logger.debug(
            "Formed %d products, emitted %d bars.", self._products, len(self._bars)
        )
        return barcodes.sort_bars(self._bars)

    def _step(self, k: int) -> None:
        n = self.filtration.n
        if self.relative:
            if k < n:
                self.matrix.add_coboundary_column(
                    self.filtration.coboundary_bits(k + 1),
                    degree=self.filtration.dim(k + 1) + 1,
                )
        elif not self.lazy_restriction or k in self._events:
            self.matrix.restrict_to(k)

        left_born = self._ordered(self._left_births.get(k, []))
        if self._right_births is None:
            for bar in left_born:
                self._left_alive.append(bar)
                for other in self._left_alive:
                    self._try_product(bar, other, k)
        else:
            for bar in left_born:
                self._left_alive.append(bar)
                for other in self._right_alive:
                    self._try_product(other, bar, k)
            for bar in self._ordered(self._right_births.get(k, [])):
                self._right_alive.append(bar)
                for other in self._left_alive:
                    self._try_product(bar, other, k)

        if k in self._deaths:
            self._emit(self.matrix.reduce(), k)
            self._left_alive = [b for b in self._left_alive if b.death_index != k]
            self._right_alive = [b for b in self._right_alive if b.death_index != k]

    def _ordered(self, bars: list[barcodes.Bar]) -> Sequence[barcodes.Bar]:
        if self.birth_order is None or len(bars) < 2:
            return bars
        return self.birth_order(bars)

    def _try_product(self, first: barcodes.Bar, second: barcodes.Bar, k: int) -> None:
        if first.degree + second.degree > self._top:
            return
        if self.accept is not None and not self.accept(first.degree, second.degree):
            return
        assert first.representative is not None
        assert second.representative is not None
        product = cup_product(
            self.filtration,
            first.representative,
            second.representative,
            active_prefix=None if self.relative else k,
        )
        self._products += 1
        if product.is_zero():
            return
        if not self.matrix.is_reduced:
            self._emit(self.matrix.reduce(), k)
        if self.matrix.is_independent(product):
            self.matrix.append(product, birth=k, rep=product)
            self.matrix.reduce()
            logger.debug(
                "Appended a degree %d product born at %d.", product.degree, k
            )

    def _emit(self, columns: Sequence[f2linalg.Column], death: int) -> None:
        for column in columns:
            if column.origin is not f2linalg.ColumnOrigin.PRODUCT:
                continue
            assert column.birth is not None
            self._bars.append(
                barcodes.Bar(
                    degree=column.degree,
                    death_index=death,
                    birth_index=column.birth,
                    essential=(
                        death == -1
                        if self.relative
                        else column.birth == self.filtration.n
                    ),
                    partition=self.partition,
                    representative=column.rep_at_birth,
                )
            )
            logger.debug(
                "Bar (%d, %d] in degree %d.", death, column.birth, column.degree
            )


def check_bars(
    bars: Sequence[barcodes.Bar], basis: persistence.PersistentBasis, what: str
) -> None:
    # Relative classes alive in the whole complex all share death index -1.
    barcodes.check_structure(
        [bar for bar in bars if not (basis.relative and bar.death_index == -1)],
        basis.bars,
        what=what,
    )


def _positive(basis: persistence.PersistentBasis) -> list[barcodes.Bar]:
    return [bar for bar in basis.bars if bar.degree > 0]


def cup_pers(
    filtration: complex.Filtration,
    *,
    basis: persistence.PersistentBasis | None = None,
    birth_order: BirthOrder | None = None,
    lazy_restriction: bool = False,
) -> CupBarcode:
    """
    Barcode of the persistent 2-cup module, the image of the cup product on
    positive-degree classes.
    """
    if basis is None:
        basis = persistence.persistent_cohomology(filtration)
    driver = CupModuleDriver(
        basis,
        left=_positive(basis),
        birth_order=birth_order,
        lazy_restriction=lazy_restriction,
    )
    bars = driver.run()
    check_bars(bars, basis, "2-cup barcode")
    return CupBarcode(k=2, bars=tuple(bars), relative=basis.relative)


def order_k_cup_pers(
    filtration: complex.Filtration,
    k: int,
    *,
    basis: persistence.PersistentBasis | None = None,
    previous: CupBarcode | None = None,
    birth_order: BirthOrder | None = None,
    lazy_restriction: bool = False,
) -> CupBarcode:
    """
    Barcode of the persistent k-cup module, built from the representatives
    of the (k-1)-cup module times ordinary positive-degree representatives.

    ``previous`` may hold an already computed (k-1)-cup barcode.
    """
    if k < 2:
        raise InvalidOrder(f"The order of a cup module is at least 2, got {k}.")
    if basis is None:
        basis = persistence.persistent_cohomology(filtration)
    if k == 2:
        return cup_pers(
            filtration,
            basis=basis,
            birth_order=birth_order,
            lazy_restriction=lazy_restriction,
        )
    if previous is None:
        previous = order_k_cup_pers(
            filtration,
            k - 1,
            basis=basis,
            birth_order=birth_order,
            lazy_restriction=lazy_restriction,
        )
    elif previous.k != k - 1:
        raise InvalidOrder(
            f"An order {k} module extends the order {k - 1} module, got order "
            f"{previous.k}."
        )
    driver = CupModuleDriver(
        basis,
        left=_positive(basis),
        right=previous.bars,
        birth_order=birth_order,
        lazy_restriction=lazy_restriction,
    )
    bars = driver.run()
    check_bars(bars, basis, f"{k}-cup barcode")
    return CupBarcode(k=k, bars=tuple(bars), relative=basis.relative)


def cup_barcodes_up_to(
    filtration: complex.Filtration,
    max_k: int | None = None,
    *,
    basis: persistence.PersistentBasis | None = None,
) -> dict[int, CupBarcode]:
    """
    The k-cup barcodes for every k from 2 up to ``max_k`` (by default the
    dimension of the complex, beyond which every product vanishes).
    """
    if max_k is None:
        max_k = filtration.dimension
    if basis is None:
        basis = persistence.persistent_cohomology(filtration)
    result: dict[int, CupBarcode] = {}
    previous: CupBarcode | None = None
    for k in range(2, max_k + 1):
        previous = order_k_cup_pers(filtration, k, basis=basis, previous=previous)
        result[k] = previous
    return result


def cup_length(
    cup_barcodes: Mapping[int, CupBarcode],
    a: int,
    b: int,
    *,
    ordinary: Sequence[barcodes.Bar] = (),
) -> int:
    """
    The largest k whose k-cup barcode has a bar covering ``[a, b]``.

    Falls back to 1 when only ``ordinary`` has a positive-degree bar
    covering the interval, and to 0 when nothing does.
    """
    if a > b:
        raise InvalidInterval(f"Interval [{a}, {b}] is empty.")
    for k in sorted(cup_barcodes, reverse=True):
        if barcodes.rank_at(cup_barcodes[k].bars, a, b):
            return k
    if barcodes.rank_at([bar for bar in ordinary if bar.degree > 0], a, b):
        return 1
    return 0


def cup_length_table(
    cup_barcodes: Mapping[int, CupBarcode],
    n: int,
    *,
    ordinary: Sequence[barcodes.Bar] = (),
) -> npt.NDArray[np.int64]:
    """
    Persistent cup-length of every interval: entry ``[a, b]`` of the
    returned ``(n + 1) x (n + 1)`` array is ``cup_length(..., a, b)`` for
    ``1 <= a <= b <= n`` and zero elsewhere.
    """
    table = np.zeros((n + 1, n + 1), dtype=np.int64)
    levels: list[tuple[int, Sequence[barcodes.Bar]]] = [
        (1, [bar for bar in ordinary if bar.degree > 0])
    ]
    levels.extend((k, cup_barcodes[k].bars) for k in sorted(cup_barcodes))
    for k, bars in levels:
        for bar in bars:
            low = max(bar.death_index + 1, 1)
            high = min(bar.birth_index, n)
            if low > high:
                continue
            block = table[low : high + 1, low : high + 1]
            np.maximum(block, k, out=block)
    return np.triu(table)
