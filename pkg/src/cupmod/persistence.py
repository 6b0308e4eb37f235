"""
Persistent cohomology barcodes with representative cocycles.

Absolute cohomology is computed with the forward cocycle algorithm: live
cocycles are evaluated on the boundary of each new simplex and the
youngest one that stops being a cocycle dies. Relative cohomology of
``(K, K_j)`` is computed by reducing the coboundary matrix from the last
column to the first with lowest-index pivots, which is the standard
reduction of the anti-transposed boundary matrix.
"""

import collections
import dataclasses
import functools
import logging
from collections.abc import Iterator

from cupmod import barcodes, complex, f2linalg


logger = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True)
class PersistentBasis:
    """
    A barcode whose bars each carry a representative cocycle taken at the
    bar's birth index. Restricting the representatives of the bars alive at
    index ``j`` gives a basis of the cohomology at ``j``.
    """

    filtration: complex.Filtration
    bars: tuple[barcodes.Bar, ...]
    relative: bool = False

    def __iter__(self) -> Iterator[barcodes.Bar]:
        return iter(self.bars)

    def __len__(self) -> int:
        return len(self.bars)

    @property
    def birth_indices(self) -> frozenset[int]:
        return frozenset(bar.birth_index for bar in self.bars)

    @property
    def death_indices(self) -> frozenset[int]:
        return frozenset(bar.death_index for bar in self.bars)

    def born_at(
        self, index: int, *, positive_degree: bool = True
    ) -> list[barcodes.Bar]:
        """
        Bars born at ``index``, ordered by degree then death index.
        """
        born = self._by_birth.get(index, ())
        return [bar for bar in born if bar.degree > 0 or not positive_degree]

    def of_degree(self, degree: int) -> list[barcodes.Bar]:
        return [bar for bar in self.bars if bar.degree == degree]

    @functools.cached_property
    def _by_birth(self) -> dict[int, tuple[barcodes.Bar, ...]]:
        grouped: dict[int, list[barcodes.Bar]] = collections.defaultdict(list)
        for bar in self.bars:
            grouped[bar.birth_index].append(bar)
        return {
            index: tuple(sorted(bars, key=lambda bar: (bar.degree, bar.death_index)))
            for index, bars in grouped.items()
        }


def persistent_cohomology(filtration: complex.Filtration) -> PersistentBasis:
    n = filtration.n
    # Live cocycles per degree as creation index -> support bits.
    live: dict[int, dict[int, int]] = collections.defaultdict(dict)
    bars: list[barcodes.Bar] = []
    for i in range(1, n + 1):
        p = filtration.dim(i)
        boundary = 0
        for facet in filtration.facet_indices(i):
            boundary |= 1 << facet
        candidates = live[p - 1] if p > 0 else {}
        hit = [c for c, bits in candidates.items() if (bits & boundary).bit_count() & 1]
        if not hit:
            live[p][i] = 1 << i
            continue
        youngest = max(hit)
        dying = candidates.pop(youngest)
        for creation in hit:
            if creation != youngest:
                candidates[creation] ^= dying
        bars.append(
            barcodes.Bar(
                degree=p - 1,
                death_index=youngest - 1,
                birth_index=i - 1,
                representative=f2linalg.Cochain(degree=p - 1, bits=dying),
            )
        )
    for degree, cocycles in live.items():
        for creation, bits in cocycles.items():
            bars.append(
                barcodes.Bar(
                    degree=degree,
                    death_index=creation - 1,
                    birth_index=n,
                    essential=True,
                    representative=f2linalg.Cochain(degree=degree, bits=bits),
                )
            )
    logger.debug("Absolute barcode of %d simplices has %d bars.", n, len(bars))
    return PersistentBasis(
        filtration=filtration, bars=tuple(barcodes.sort_bars(bars))
    )


def _lowest(bits: int) -> int:
    return (bits & -bits).bit_length() - 1


def relative_persistent_cohomology(filtration: complex.Filtration) -> PersistentBasis:
    """
    Barcode of ``H*(K, K_j)``.

    A class born at index ``b`` is carried by cochains supported on the
    simplices after ``b``. Classes that survive down to the empty subcomplex
    get death index ``-1``.
    """
    n = filtration.n
    reduced: dict[int, int] = {}
    chains: dict[int, int] = {}
    pivot_owner: dict[int, int] = {}
    bars: list[barcodes.Bar] = []
    killed: set[int] = set()
    for j in range(n, 0, -1):
        bits = filtration.coboundary_bits(j)
        chain = 1 << j
        while bits:
            owner = pivot_owner.get(_lowest(bits))
            if owner is None:
                break
            bits ^= reduced[owner]
            chain ^= chains[owner]
        reduced[j] = bits
        chains[j] = chain
        if not bits:
            continue
        m = _lowest(bits)
        pivot_owner[m] = j
        killed.add(m)
        degree = filtration.dim(m)
        bars.append(
            barcodes.Bar(
                degree=degree,
                death_index=j - 1,
                birth_index=m - 1,
                representative=f2linalg.Cochain(degree=degree, bits=bits),
            )
        )
    for m in range(1, n + 1):
        if reduced[m] or m in killed:
            continue
        degree = filtration.dim(m)
        bars.append(
            barcodes.Bar(
                degree=degree,
                death_index=-1,
                birth_index=m - 1,
                essential=True,
                representative=f2linalg.Cochain(degree=degree, bits=chains[m]),
            )
        )
    logger.debug("Relative barcode of %d simplices has %d bars.", n, len(bars))
    return PersistentBasis(
        filtration=filtration, bars=tuple(barcodes.sort_bars(bars)), relative=True
    )
