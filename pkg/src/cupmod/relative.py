"""
Cup modules of the relative cohomology ``H*(K, K_k)``.

A relative cochain at index ``k`` is a cochain of ``K`` vanishing on
``K_k``. The product of two such cochains vanishes on ``K_k`` too, so the
absolute cup product serves unchanged; only the matrix of coboundaries
changes, growing by one column per step instead of losing rows.
"""

import collections
import dataclasses
from collections.abc import Sequence

from cupmod import barcodes, complex, cupcore, persistence


class NotRelative(cupcore.CupModuleError):
    pass


@dataclasses.dataclass(frozen=True)
class RelCupBarcode(cupcore.CupBarcode):
    relative: bool = True


def rel_cup_pers(
    filtration: complex.Filtration,
    *,
    basis: persistence.PersistentBasis | None = None,
    birth_order: cupcore.BirthOrder | None = None,
) -> RelCupBarcode:
    if basis is None:
        basis = persistence.relative_persistent_cohomology(filtration)
    _require_relative(basis)
    barcode = cupcore.cup_pers(filtration, basis=basis, birth_order=birth_order)
    return RelCupBarcode(k=2, bars=barcode.bars)


def rel_order_k_cup_pers(
    filtration: complex.Filtration,
    k: int,
    *,
    basis: persistence.PersistentBasis | None = None,
    previous: cupcore.CupBarcode | None = None,
    birth_order: cupcore.BirthOrder | None = None,
) -> RelCupBarcode:
    if basis is None:
        basis = persistence.relative_persistent_cohomology(filtration)
    _require_relative(basis)
    if previous is not None and not previous.relative:
        raise NotRelative("A relative cup module extends a relative cup module.")
    barcode = cupcore.order_k_cup_pers(
        filtration, k, basis=basis, previous=previous, birth_order=birth_order
    )
    return RelCupBarcode(k=k, bars=barcode.bars)


def _require_relative(basis: persistence.PersistentBasis) -> None:
    if not basis.relative:
        raise NotRelative("Relative cup modules need the relative barcode.")


@dataclasses.dataclass(frozen=True)
class DualityMismatch:
    bar: barcodes.Bar
    expected: barcodes.BarKey
    reason: str


def duality_mismatches(
    absolute: Sequence[barcodes.Bar], relative: Sequence[barcodes.Bar]
) -> list[DualityMismatch]:
    """
    Bars breaking the correspondence between the two barcodes: a finite bar
    ``(d, b]`` in degree ``p`` matches the relative bar ``(d, b]`` in degree
    ``p + 1``, and an essential bar ``(d, n]`` in degree ``p`` matches the
    relative bar ``(-1, d]`` in degree ``p``.

    Relative bars left without a partner are reported too.
    """
    remaining = collections.Counter(bar.key for bar in relative)
    mismatches: list[DualityMismatch] = []
    for bar in absolute:
        if bar.essential:
            expected = (bar.degree, -1, bar.death_index)
        else:
            expected = (bar.degree + 1, bar.death_index, bar.birth_index)
        if remaining[expected] > 0:
            remaining[expected] -= 1
        else:
            mismatches.append(
                DualityMismatch(
                    bar=bar,
                    expected=expected,
                    reason="no matching relative bar",
                )
            )
    for bar in relative:
        if remaining[bar.key] > 0:
            remaining[bar.key] -= 1
            mismatches.append(
                DualityMismatch(
                    bar=bar, expected=bar.key, reason="relative bar without partner"
                )
            )
    return mismatches
