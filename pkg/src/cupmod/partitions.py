"""
Partition modules: the parts of the k-cup module generated by products whose
factor degrees form a fixed partition of the total degree.
"""

import concurrent.futures
import dataclasses
import logging
import threading
from collections.abc import Iterable, Iterator, MutableMapping

from typing_extensions import Self

from cupmod import barcodes, complex, cupcore, persistence


logger = logging.getLogger(__name__)


class PartitionError(Exception):
    pass


class InvalidPartition(PartitionError):
    pass


class SumMismatch(PartitionError):
    pass


@dataclasses.dataclass(frozen=True, order=True)
class Partition:
    parts: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.parts) < 2:
            raise InvalidPartition(
                f"A partition module needs at least two parts, got {self.parts}."
            )
        if any(part < 1 for part in self.parts):
            raise InvalidPartition(f"Parts must be positive, got {self.parts}.")
        if list(self.parts) != sorted(self.parts):
            raise InvalidPartition(
                f"Parts must be non-decreasing, got {self.parts}; use "
                f"Partition.of() to normalise."
            )

    @classmethod
    def of(cls, parts: Iterable[int]) -> Self:
        return cls(parts=tuple(sorted(parts)))

    @classmethod
    def parse(cls, text: str) -> Self:
        """
        Read ``"1+1+2"`` (commas are accepted too) in any part order.
        """
        try:
            parts = [int(token) for token in text.replace(",", "+").split("+")]
        except ValueError as exc:
            raise InvalidPartition(f"Cannot read a partition from {text!r}.") from exc
        return cls.of(parts)

    @property
    def q(self) -> int:
        return sum(self.parts)

    @property
    def length(self) -> int:
        return len(self.parts)

    @property
    def parent(self) -> "Partition | None":
        """
        The partition this one extends by its last part, or None for two
        parts.
        """
        if self.length == 2:
            return None
        return Partition(parts=self.parts[:-1])

    @property
    def last(self) -> int:
        return self.parts[-1]

    def sort_key(self) -> tuple[int, int, tuple[int, ...]]:
        return (self.q, self.length, self.parts)

    def __str__(self) -> str:
        return "+".join(map(str, self.parts))


def _partitions_of(q: int) -> list[tuple[int, ...]]:
    # Every non-decreasing partition of q, grown from those of q - 1 by
    # adding a part 1 or bumping one part where that keeps the order.
    level: set[tuple[int, ...]] = {(1,)}
    for _ in range(2, q + 1):
        grown: set[tuple[int, ...]] = set()
        for parts in level:
            grown.add((1, *parts))
            for i, part in enumerate(parts):
                if i == len(parts) - 1 or part < parts[i + 1]:
                    grown.add((*parts[:i], part + 1, *parts[i + 1 :]))
        level = grown
    return sorted(level)


def enumerate_partitions(d: int) -> list[Partition]:
    """
    Every partition with at least two parts of every ``q`` in ``2..d``,
    ordered by ``q``, then number of parts, then parts.
    """
    if d < 2:
        raise InvalidPartition(f"Partitions are enumerated from q = 2, got d = {d}.")
    found = [
        Partition(parts=parts)
        for q in range(2, d + 1)
        for parts in _partitions_of(q)
        if len(parts) >= 2
    ]
    return sorted(found, key=Partition.sort_key)


def refines(a: Partition, b: Partition) -> bool:
    """
    Whether the parts of ``a`` can be grouped so that the group sums are
    exactly the parts of ``b``.
    """
    if a.q != b.q:
        raise SumMismatch(f"{a} and {b} partition different integers.")
    pieces = sorted(a.parts, reverse=True)
    targets = list(b.parts)

    def place(i: int, remaining: list[int]) -> bool:
        if i == len(pieces):
            return all(r == 0 for r in remaining)
        tried: set[int] = set()
        for j, room in enumerate(remaining):
            if room >= pieces[i] and room not in tried:
                tried.add(room)
                remaining[j] -= pieces[i]
                if place(i + 1, remaining):
                    return True
                remaining[j] += pieces[i]
        return False

    return place(0, targets)


def extends_by_one(child: Partition, parent: Partition) -> bool:
    return (
        child.length == parent.length + 1
        and child.parts[: parent.length] == parent.parts
    )


@dataclasses.dataclass(frozen=True)
class PartitionBarcode:
    partition: Partition
    bars: tuple[barcodes.Bar, ...]

    def __iter__(self) -> Iterator[barcodes.Bar]:
        return iter(self.bars)

    def __len__(self) -> int:
        return len(self.bars)


Memo = MutableMapping[Partition, PartitionBarcode]


def _positive(basis: persistence.PersistentBasis) -> list[barcodes.Bar]:
    return [bar for bar in basis.bars if bar.degree > 0]


def cup_pers_2_parts(
    filtration: complex.Filtration,
    partition: Partition,
    *,
    basis: persistence.PersistentBasis | None = None,
) -> PartitionBarcode:
    """
    Barcode of the module generated by products of one class of degree
    ``s1`` and one of degree ``s2``.
    """
    if partition.length != 2:
        raise InvalidPartition(f"Expected a partition with two parts, got {partition}.")
    if basis is None:
        basis = persistence.persistent_cohomology(filtration)
    wanted = partition.parts

    def accept(p: int, q: int) -> bool:
        return (min(p, q), max(p, q)) == wanted

    driver = cupcore.CupModuleDriver(
        basis,
        left=[bar for bar in _positive(basis) if bar.degree in wanted],
        accept=accept,
        partition=partition.parts,
    )
    bars = driver.run()
    barcodes.check_structure(bars, basis.bars, what=f"{partition} barcode")
    return PartitionBarcode(partition=partition, bars=tuple(bars))


def extend_cup_pers_k_parts(
    filtration: complex.Filtration,
    partition: Partition,
    memo: Memo | None = None,
    *,
    basis: persistence.PersistentBasis | None = None,
) -> PartitionBarcode:
    """
    Barcode of the partition module of ``partition``, built from the module
    of its parent (the partition without its last part) times ordinary
    classes of degree equal to the last part.

    Results are stored in ``memo`` and read back from it on later calls.
    """
    if memo is not None and partition in memo:
        logger.debug("Memo hit for %s.", partition)
        return memo[partition]
    if basis is None:
        basis = persistence.persistent_cohomology(filtration)
    parent = partition.parent
    if parent is None:
        result = cup_pers_2_parts(filtration, partition, basis=basis)
    else:
        parent_barcode = extend_cup_pers_k_parts(filtration, parent, memo, basis=basis)
        driver = cupcore.CupModuleDriver(
            basis,
            left=[bar for bar in _positive(basis) if bar.degree == partition.last],
            right=parent_barcode.bars,
            partition=partition.parts,
        )
        bars = driver.run()
        barcodes.check_structure(bars, basis.bars, what=f"{partition} barcode")
        result = PartitionBarcode(partition=partition, bars=tuple(bars))
    if memo is not None:
        memo[partition] = result
    return result


class _Memo(dict[Partition, PartitionBarcode]):
    # Write-once entries; readers only see published barcodes.
    def __init__(self) -> None:
        super().__init__()
        self.lock = threading.Lock()

    def __setitem__(self, key: Partition, value: PartitionBarcode) -> None:
        with self.lock:
            if key not in self:
                super().__setitem__(key, value)


def compute_partition_barcodes(
    filtration: complex.Filtration,
    *,
    max_q: int | None = None,
    partitions: Iterable[Partition] | None = None,
    threads: int = 1,
    basis: persistence.PersistentBasis | None = None,
) -> dict[Partition, PartitionBarcode]:
    """
    Partition barcodes for every partition of every ``q`` from 2 up to the
    dimension of the complex (or ``max_q``), or only for ``partitions``.

    With ``threads > 1``, partitions are computed level by level (all
    partitions with the same number of parts at once) so that every parent
    is published before its children start.
    """
    if basis is None:
        basis = persistence.persistent_cohomology(filtration)
    if partitions is None:
        top = filtration.dimension if max_q is None else max_q
        wanted = enumerate_partitions(top) if top >= 2 else []
    else:
        wanted = sorted(set(partitions), key=Partition.sort_key)
    if not wanted and partitions is None:
        wanted = [Partition(parts=(1, 1))]
    memo = _Memo()
    if threads <= 1:
        for partition in wanted:
            extend_cup_pers_k_parts(filtration, partition, memo, basis=basis)
    else:
        closure: set[Partition] = set()
        for partition in wanted:
            current: Partition | None = partition
            while current is not None and current not in closure:
                closure.add(current)
                current = current.parent
        levels: dict[int, list[Partition]] = {}
        for partition in closure:
            levels.setdefault(partition.length, []).append(partition)
        with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
            for length in sorted(levels):
                futures = [
                    pool.submit(
                        extend_cup_pers_k_parts,
                        filtration,
                        partition,
                        memo,
                        basis=basis,
                    )
                    for partition in levels[length]
                ]
                for future in futures:
                    future.result()
    return {partition: memo[partition] for partition in wanted}
