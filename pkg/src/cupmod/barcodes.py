"""
Bars, barcode rendering and the structural checks every driver runs.

A bar ``(d, b]`` lives in reverse-indexed cohomology: the class exists at
every index ``j`` with ``d < j <= b``. In the parameter space of the
filtration it reads ``[a_{d+1}, a_{b+1})``, open-ended when ``b = n``.
"""

import collections
import dataclasses
import json
import math
from collections.abc import Iterable, Mapping, Sequence
from typing import Any

from typing_extensions import Self

from cupmod import complex, f2linalg


class BarcodeError(Exception):
    pass


class InvalidBar(BarcodeError):
    pass


class InvalidRecord(BarcodeError):
    pass


class InvariantViolation(BarcodeError):
    pass


BarKey = tuple[int, int, int]


@dataclasses.dataclass(frozen=True, kw_only=True)
class Bar:
    degree: int
    death_index: int
    birth_index: int
    essential: bool = False
    partition: tuple[int, ...] | None = None
    representative: f2linalg.Cochain | None = dataclasses.field(
        default=None, compare=False, repr=False
    )

    def __post_init__(self) -> None:
        if self.degree < 0:
            raise InvalidBar(f"Negative degree {self.degree}.")
        if self.death_index >= self.birth_index:
            raise InvalidBar(
                f"Death index {self.death_index} must be below birth index "
                f"{self.birth_index}."
            )

    @property
    def key(self) -> BarKey:
        return (self.degree, self.death_index, self.birth_index)

    def contains(self, a: int, b: int) -> bool:
        """
        Whether the bar covers every index of ``[a, b]``.
        """
        return self.death_index < a and b <= self.birth_index

    def values(self, filtration: complex.Filtration) -> tuple[float, float]:
        return (
            filtration.value_at(self.death_index + 1),
            filtration.value_at(self.birth_index + 1),
        )

    def to_record(self, filtration: complex.Filtration) -> dict[str, Any]:
        birth_value, death_value = self.values(filtration)
        return {
            "degree": self.degree,
            "birth_index": self.birth_index,
            "death_index": self.death_index,
            "birth_value": None if math.isinf(birth_value) else birth_value,
            "death_value": None if math.isinf(death_value) else death_value,
            "partition": (
                None
                if self.partition is None
                else "+".join(map(str, self.partition))
            ),
        }

    @classmethod
    def from_record(cls, record: Mapping[str, Any], *, n: int | None = None) -> Self:
        try:
            partition = record.get("partition")
            return cls(
                degree=int(record["degree"]),
                death_index=int(record["death_index"]),
                birth_index=int(record["birth_index"]),
                essential=(
                    record.get("death_value") is None
                    if n is None
                    else int(record["birth_index"]) == n
                ),
                partition=(
                    None
                    if partition is None
                    else tuple(int(part) for part in str(partition).split("+"))
                ),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidRecord(f"Malformed bar record {record!r}.") from exc


def sort_key(bar: Bar) -> tuple[int, int, int]:
    return (bar.degree, -bar.birth_index, -bar.death_index)


def sort_bars(bars: Iterable[Bar]) -> list[Bar]:
    return sorted(bars, key=sort_key)


def multiset(bars: Iterable[Bar]) -> collections.Counter[BarKey]:
    return collections.Counter(bar.key for bar in bars)


def dumps(bars: Iterable[Bar], filtration: complex.Filtration) -> str:
    return json.dumps(
        [bar.to_record(filtration) for bar in sort_bars(bars)],
        indent=2,
        allow_nan=False,
    )


def loads(text: str, *, n: int | None = None) -> list[Bar]:
    try:
        records = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidRecord(f"Barcode is not valid JSON: {exc}") from exc
    if not isinstance(records, list):
        raise InvalidRecord("A barcode is a JSON array of bar records.")
    return [Bar.from_record(record, n=n) for record in records]


def rank_at(bars: Iterable[Bar], a: int, b: int, *, degree: int | None = None) -> int:
    """
    How many bars cover ``[a, b]``: the rank of the structure map from
    index ``b`` down to index ``a``.
    """
    return sum(
        1
        for bar in bars
        if bar.contains(a, b) and (degree is None or bar.degree == degree)
    )


def diagram(
    bars: Iterable[Bar],
    filtration: complex.Filtration,
    *,
    degree: int | None = None,
) -> list[tuple[float, float]]:
    return [
        bar.values(filtration)
        for bar in bars
        if degree is None or bar.degree == degree
    ]


def check_structure(
    bars: Sequence[Bar], reference: Sequence[Bar], *, what: str = "barcode"
) -> None:
    """
    Raise ``InvariantViolation`` unless every birth (death) index of
    ``bars`` is a birth (death) index of the ``reference`` barcode and no
    two bars share a death index.
    """
    births = {bar.birth_index for bar in reference}
    deaths = {bar.death_index for bar in reference}
    seen_deaths: set[int] = set()
    for bar in bars:
        if bar.birth_index not in births:
            raise InvariantViolation(
                f"The {what} has a birth at index {bar.birth_index}, which is "
                f"not a birth index of the ordinary barcode."
            )
        if bar.death_index not in deaths:
            raise InvariantViolation(
                f"The {what} has a death at index {bar.death_index}, which is "
                f"not a death index of the ordinary barcode."
            )
        if bar.death_index in seen_deaths:
            raise InvariantViolation(
                f"The {what} has two bars dying at index {bar.death_index}."
            )
        seen_deaths.add(bar.death_index)
