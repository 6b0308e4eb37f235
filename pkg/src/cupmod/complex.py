"""
Simplicial complexes filtered one simplex at a time.

Simplices are strictly increasing tuples of vertex ids; the numeric order of
the ids is the fixed vertex order the cup product is evaluated with.
Insertion indices run from 1 to ``n``; index 0 stands for the empty complex.
"""

import dataclasses
import enum
import functools
import itertools
import logging
import math
import pathlib
from collections.abc import Callable, Iterable, Mapping, Sequence

from typing_extensions import Self

from cupmod import f2linalg


logger = logging.getLogger(__name__)

Simplex = tuple[int, ...]


class FiltrationError(Exception):
    pass


class FiltrationParseError(FiltrationError):
    def __init__(self, message: str, *, line: int) -> None:
        super().__init__(f"Line {line}: {message}")
        self.line = line


class InvalidSimplex(FiltrationError):
    pass


class MissingFace(FiltrationError):
    pass


class DuplicateSimplex(FiltrationError):
    pass


class ValuesNotMonotone(FiltrationError):
    pass


class IndexOutOfRange(FiltrationError):
    pass


class FileFormat(enum.Enum):
    TEXT = "text"
    DISTANCE_MATRIX = "distance-matrix"


def make_simplex(vertices: Iterable[int]) -> Simplex:
    simplex = tuple(sorted(vertices))
    if not simplex:
        raise InvalidSimplex("A simplex needs at least one vertex.")
    if simplex[0] < 0:
        raise InvalidSimplex(f"Vertex ids must be non-negative: {simplex}.")
    if len(set(simplex)) != len(simplex):
        raise InvalidSimplex(f"Repeated vertex in {simplex}.")
    return simplex


def facets_of(simplex: Simplex) -> list[Simplex]:
    if len(simplex) == 1:
        return []
    return [simplex[:i] + simplex[i + 1 :] for i in range(len(simplex))]


@dataclasses.dataclass(frozen=True)
class Filtration:
    """
    A simplex-wise filtration: ``simplices[i - 1]`` enters at index ``i``
    with filtration value ``values[i - 1]``.

    Construction validates that every simplex is new, that its facets were
    inserted before it and that values never decrease. Use
    ``Filtration.from_simplices`` to refine an arbitrary valued complex.
    """

    simplices: tuple[Simplex, ...]
    values: tuple[float, ...]
    index_of: Mapping[Simplex, int] = dataclasses.field(
        init=False, repr=False, compare=False
    )

    def __post_init__(self) -> None:
        if len(self.simplices) != len(self.values):
            raise FiltrationError("Every simplex needs exactly one value.")
        index_of: dict[Simplex, int] = {}
        previous = -math.inf
        for i, (simplex, value) in enumerate(
            zip(self.simplices, self.values), start=1
        ):
            if make_simplex(simplex) != simplex:
                raise InvalidSimplex(f"Simplex {simplex} is not in vertex order.")
            if simplex in index_of:
                raise DuplicateSimplex(f"Simplex {simplex} appears twice.")
            for facet in facets_of(simplex):
                if facet not in index_of:
                    raise MissingFace(
                        f"Simplex {simplex} at index {i} is missing its face {facet}."
                    )
            if value < previous:
                raise ValuesNotMonotone(
                    f"Value {value} of {simplex} at index {i} is below {previous}."
                )
            previous = value
            index_of[simplex] = i
        object.__setattr__(self, "index_of", index_of)

    @classmethod
    def from_simplices(cls, pairs: Iterable[tuple[float, Iterable[int]]]) -> Self:
        """
        Build a simplex-wise filtration from ``(value, vertices)`` pairs.

        Pairs are stably sorted on (value, dimension, vertices) so ties in
        the value get one index each; refining an already simplex-wise
        filtration leaves it unchanged.
        """
        seen: set[Simplex] = set()
        entries: list[tuple[float, Simplex]] = []
        for value, vertices in pairs:
            simplex = make_simplex(vertices)
            if simplex in seen:
                raise DuplicateSimplex(f"Simplex {simplex} appears twice.")
            seen.add(simplex)
            entries.append((float(value), simplex))
        entries.sort(key=lambda entry: (entry[0], len(entry[1]), entry[1]))
        return cls(
            simplices=tuple(simplex for _, simplex in entries),
            values=tuple(value for value, _ in entries),
        )

    @classmethod
    def closure(
        cls,
        maximal: Iterable[Iterable[int]],
        value_of: Callable[[Simplex], float] = lambda simplex: len(simplex) - 1,
    ) -> Self:
        """
        The downward closure of ``maximal`` simplices, each face valued by
        ``value_of`` (dimension by default).
        """
        faces: set[Simplex] = set()
        for vertices in maximal:
            top = make_simplex(vertices)
            for size in range(1, len(top) + 1):
                faces.update(itertools.combinations(top, size))
        return cls.from_simplices((value_of(face), face) for face in faces)

    @property
    def n(self) -> int:
        return len(self.simplices)

    @property
    def dimension(self) -> int:
        return max((len(s) - 1 for s in self.simplices), default=-1)

    def simplex(self, i: int) -> Simplex:
        self._check_index(i)
        return self.simplices[i - 1]

    def dim(self, i: int) -> int:
        return len(self.simplex(i)) - 1

    def value_at(self, i: int) -> float:
        """
        The value ``a_i``, extended with ``-inf`` below the first index and
        ``+inf`` past the last one.
        """
        if i < 1:
            return -math.inf
        if i > self.n:
            return math.inf
        return self.values[i - 1]

    def indices_of_dim(self, p: int) -> tuple[int, ...]:
        return self._indices_by_dim.get(p, ())

    def facet_indices(self, i: int) -> tuple[int, ...]:
        return tuple(self.index_of[f] for f in facets_of(self.simplex(i)))

    def coface_indices(self, i: int) -> frozenset[int]:
        """
        Indices of the simplices having the simplex at ``i`` as a
        codimension-1 face.
        """
        self._check_index(i)
        return self._cofaces[i - 1]

    def coboundary_bits(self, i: int) -> int:
        self._check_index(i)
        return self._coboundary_bits[i - 1]

    def coboundary_matrix(self) -> f2linalg.ColumnMatrix:
        """
        The transpose of the boundary matrix: column ``j`` holds the cofaces
        of the simplex at ``j`` and has degree ``dim + 1``.
        """
        matrix = f2linalg.ColumnMatrix()
        for j in range(1, self.n + 1):
            matrix.add_coboundary_column(
                self.coboundary_bits(j), degree=self.dim(j) + 1
            )
        return matrix

    def coboundary(self, cochain: f2linalg.Cochain) -> f2linalg.Cochain:
        bits = 0
        for i in f2linalg.iter_bits(cochain.bits):
            bits ^= self.coboundary_bits(i)
        return f2linalg.Cochain(degree=cochain.degree + 1, bits=bits)

    def cochain(self, degree: int, indices: Iterable[int]) -> f2linalg.Cochain:
        cochain = f2linalg.Cochain.from_indices(degree, indices)
        for i in cochain.support:
            if self.dim(i) != degree:
                raise FiltrationError(
                    f"Index {i} holds a {self.dim(i)}-simplex, not a "
                    f"{degree}-simplex."
                )
        return cochain

    def cup_table(self, p: int, q: int) -> Mapping[int, tuple[tuple[int, int], ...]]:
        """
        For every ``(p + q)``-simplex, its front ``p``-face and back
        ``q``-face, grouped by the index of the front face.

        Entries are ``front -> ((tau, back), ...)``.
        """
        key = (p, q)
        if key not in self._cup_table_cache:
            self._cup_table_cache[key] = self._build_cup_table(p, q)
        return self._cup_table_cache[key]

    def prefix(self, k: int) -> "Filtration":
        if not 0 <= k <= self.n:
            raise IndexOutOfRange(f"Prefix length {k} outside 0..{self.n}.")
        return Filtration(simplices=self.simplices[:k], values=self.values[:k])

    def _check_index(self, i: int) -> None:
        if not 1 <= i <= self.n:
            raise IndexOutOfRange(f"Index {i} outside 1..{self.n}.")

    @functools.cached_property
    def _indices_by_dim(self) -> dict[int, tuple[int, ...]]:
        grouped: dict[int, list[int]] = {}
        for i, simplex in enumerate(self.simplices, start=1):
            grouped.setdefault(len(simplex) - 1, []).append(i)
        return {p: tuple(indices) for p, indices in grouped.items()}

    @functools.cached_property
    def _cofaces(self) -> tuple[frozenset[int], ...]:
        cofaces: list[set[int]] = [set() for _ in self.simplices]
        for j, simplex in enumerate(self.simplices, start=1):
            for facet in facets_of(simplex):
                cofaces[self.index_of[facet] - 1].add(j)
        return tuple(frozenset(c) for c in cofaces)

    @functools.cached_property
    def _coboundary_bits(self) -> tuple[int, ...]:
        columns = []
        for cofaces in self._cofaces:
            bits = 0
            for j in cofaces:
                bits |= 1 << j
            columns.append(bits)
        return tuple(columns)

    @functools.cached_property
    def _cup_table_cache(
        self,
    ) -> dict[tuple[int, int], Mapping[int, tuple[tuple[int, int], ...]]]:
        return {}

    def _build_cup_table(
        self, p: int, q: int
    ) -> Mapping[int, tuple[tuple[int, int], ...]]:
        table: dict[int, list[tuple[int, int]]] = {}
        for tau in self.indices_of_dim(p + q):
            vertices = self.simplices[tau - 1]
            front = self.index_of[vertices[: p + 1]]
            back = self.index_of[vertices[p:]]
            table.setdefault(front, []).append((tau, back))
        return {front: tuple(entries) for front, entries in table.items()}


def parse_filtration(lines: Iterable[str]) -> Filtration:
    """
    Parse the text format: one simplex per line as ``<value> <v0> ... <vk>``,
    ``#`` starting a comment.
    """
    pairs: list[tuple[float, Simplex]] = []
    seen: dict[Simplex, int] = {}
    for number, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if len(tokens) < 2:
            raise FiltrationParseError(
                "Expected a value followed by at least one vertex.", line=number
            )
        try:
            value = float(tokens[0])
            vertices = [int(token) for token in tokens[1:]]
        except ValueError as exc:
            raise FiltrationParseError(str(exc), line=number) from exc
        if math.isnan(value):
            raise FiltrationParseError("NaN is not a filtration value.", line=number)
        try:
            simplex = make_simplex(vertices)
        except InvalidSimplex as exc:
            raise FiltrationParseError(str(exc), line=number) from exc
        if simplex in seen:
            raise DuplicateSimplex(
                f"Simplex {simplex} on line {number} already appeared on line "
                f"{seen[simplex]}."
            )
        seen[simplex] = number
        pairs.append((value, simplex))
    return Filtration.from_simplices(pairs)


def load_filtration(
    path: str | pathlib.Path,
    format: FileFormat = FileFormat.TEXT,
    *,
    max_dim: int = 2,
    threshold: float | None = None,
) -> Filtration:
    """
    Read a filtration from ``path``.

    With ``FileFormat.DISTANCE_MATRIX`` the file holds a symmetric distance
    matrix and the Rips filtration up to ``max_dim`` is returned.
    """
    path = pathlib.Path(path)
    if format is FileFormat.DISTANCE_MATRIX:
        # Imported here: geometry builds on this module.
        from cupmod import geometry

        cloud = geometry.PointCloud.load_distance_matrix(path)
        return geometry.rips_filtration(cloud, max_dim=max_dim, threshold=threshold)
    with path.open(encoding="utf-8") as handle:
        filtration = parse_filtration(handle)
    logger.info("Loaded %d simplices from %s.", filtration.n, path)
    return filtration


def dumps_filtration(filtration: Filtration, *, header: Sequence[str] = ()) -> str:
    lines = [f"# {line}" for line in header]
    for value, simplex in zip(filtration.values, filtration.simplices):
        lines.append(" ".join([repr(value), *map(str, simplex)]))
    return "\n".join(lines) + "\n"


def dump_filtration(
    filtration: Filtration,
    path: str | pathlib.Path,
    *,
    header: Sequence[str] = (),
) -> None:
    text = dumps_filtration(filtration, header=header)
    pathlib.Path(path).write_text(text, encoding="utf-8")
