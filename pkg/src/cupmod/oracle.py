"""
Brute-force barcodes from rank functions.

Nothing here shares code with the drivers: cohomology bases are recomputed
from scratch at every index with dense Gaussian elimination over Z/2, the
generators of a module are all products of basis cocycles following the
module's factor pattern, and the barcode is read off the ranks of the
structure maps by inclusion-exclusion. It is slow on purpose and refuses
large inputs.
"""


import collections
import dataclasses
import enum
import logging
import re
from collections.abc import Sequence

import numpy as np
import numpy.typing as npt
from typing_extensions import Self

from cupmod import barcodes, complex, config, f2linalg


logger = logging.getLogger(__name__)

Matrix = npt.NDArray[np.uint8]


class OracleError(Exception):
    pass


class OracleTooLarge(OracleError):
    pass


class NegativeMultiplicity(OracleError):
    pass


class InvalidModuleSpec(OracleError):
    pass


class ModuleKind(enum.Enum):
    ORDINARY = "ordinary"
    KCUP = "kcup"
    PARTITION = "partition"
    REL_ORDINARY = "rel-ordinary"
    REL_KCUP = "rel-kcup"


_SPEC_PATTERN = re.compile(r"^(?P<kind>[a-z-]+)(?::(?P<arg>[0-9+,]+))?$")


@dataclasses.dataclass(frozen=True)
class ModuleSpec:
    kind: ModuleKind
    k: int | None = None
    partition: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        if self.kind in (ModuleKind.KCUP, ModuleKind.REL_KCUP):
            if self.k is None or self.k < 2:
                raise InvalidModuleSpec(f"{self.kind.value} needs an order k >= 2.")
        if self.kind is ModuleKind.PARTITION:
            if self.partition is None or len(self.partition) < 2:
                raise InvalidModuleSpec("A partition module needs at least two parts.")
            if any(part < 1 for part in self.partition):
                raise InvalidModuleSpec("Partition parts must be positive.")

    @classmethod
    def parse(cls, text: str) -> Self:
        """
        Read ``ordinary``, ``rel-ordinary``, ``kcup:K``, ``rel-kcup:K`` or
        ``partition:1+1+2``.
        """
        match = _SPEC_PATTERN.match(text.strip())
        if match is None:
            raise InvalidModuleSpec(f"Cannot read a module spec from {text!r}.")
        try:
            kind = ModuleKind(match["kind"])
        except ValueError as exc:
            raise InvalidModuleSpec(f"Unknown module kind {match['kind']!r}.") from exc
        arg = match["arg"]
        if kind in (ModuleKind.ORDINARY, ModuleKind.REL_ORDINARY):
            if arg is not None:
                raise InvalidModuleSpec(f"{kind.value} takes no argument.")
            return cls(kind=kind)
        if arg is None:
            raise InvalidModuleSpec(f"{kind.value} needs an argument.")
        if kind is ModuleKind.PARTITION:
            parts = tuple(sorted(int(p) for p in re.split(r"[+,]", arg) if p))
            return cls(kind=kind, partition=parts)
        if not arg.isdigit():
            raise InvalidModuleSpec(
                f"{kind.value} needs an integer order, got {arg!r}."
            )
        return cls(kind=kind, k=int(arg))

    @property
    def relative(self) -> bool:
        return self.kind in (ModuleKind.REL_ORDINARY, ModuleKind.REL_KCUP)

    def __str__(self) -> str:
        if self.k is not None:
            return f"{self.kind.value}:{self.k}"
        if self.partition is not None:
            return f"{self.kind.value}:{'+'.join(map(str, self.partition))}"
        return self.kind.value


def _as_gf2(matrix: npt.ArrayLike) -> Matrix:
    return np.asarray(matrix, dtype=np.uint8) % 2


def row_reduce(matrix: npt.ArrayLike) -> tuple[Matrix, tuple[int, ...]]:
    """
    Reduced row echelon form over Z/2. Returns the nonzero rows and the
    pivot column of each.
    """
    mat = _as_gf2(matrix).copy()
    m, n = mat.shape
    pivots: list[int] = []
    row = 0
    for col in range(n):
        if row == m:
            break
        candidates = np.flatnonzero(mat[row:, col])
        if candidates.size == 0:
            continue
        pivot = row + int(candidates[0])
        if pivot != row:
            mat[[row, pivot]] = mat[[pivot, row]]
        others = np.flatnonzero(mat[:, col])
        others = others[others != row]
        mat[others] ^= mat[row]
        pivots.append(col)
        row += 1
    return mat[:row], tuple(pivots)


def rank(matrix: npt.ArrayLike) -> int:
    mat = _as_gf2(matrix)
    if mat.size == 0:
        return 0
    # Eliminate along the shorter side.
    if mat.shape[0] > mat.shape[1]:
        mat = mat.T
    return len(row_reduce(mat)[1])


def nullspace(matrix: npt.ArrayLike) -> Matrix:
    """
    Basis of the kernel of ``matrix`` over Z/2, one vector per row.
    """
    mat = _as_gf2(matrix)
    n = mat.shape[1]
    reduced, pivots = row_reduce(mat)
    pivot_set = set(pivots)
    basis = []
    for free in range(n):
        if free in pivot_set:
            continue
        vec = np.zeros(n, dtype=np.uint8)
        vec[free] = 1
        for row, col in enumerate(pivots):
            if reduced[row, free]:
                vec[col] = 1
        basis.append(vec)
    if not basis:
        return np.zeros((0, n), dtype=np.uint8)
    return np.vstack(basis)


def independent_columns(base: Matrix, candidates: Matrix) -> list[int]:
    """
    Greedy choice of candidate columns that are independent modulo the
    column span of ``base`` and of each other.
    """
    if candidates.shape[1] == 0:
        return []
    stacked = np.concatenate([base, candidates], axis=1)
    _, pivots = row_reduce(stacked)
    offset = base.shape[1]
    return [col - offset for col in pivots if col >= offset]


class _Complex:
    # Dense view of a filtration: positions 0..n-1 stand for indices 1..n.

    def __init__(self, filtration: complex.Filtration) -> None:
        self.filtration = filtration
        self.n = n = filtration.n
        self.dims = np.array(
            [len(simplex) - 1 for simplex in filtration.simplices], dtype=np.int64
        )
        self.coboundary = np.zeros((n, n), dtype=np.uint8)
        for i, simplex in enumerate(filtration.simplices):
            for facet in complex.facets_of(simplex):
                self.coboundary[i, filtration.index_of[facet] - 1] = 1
        self._products: dict[
            tuple[int, int], tuple[npt.NDArray[np.int64], ...]
        ] = {}

    def active(self, i: int, relative: bool) -> npt.NDArray[np.bool_]:
        positions = np.arange(self.n)
        return positions >= i if relative else positions < i

    def coboundaries(self, mask: npt.NDArray[np.bool_]) -> Matrix:
        # Columns span the coboundaries of the active cochain complex.
        return self.coboundary[:, mask] * mask[:, None].astype(np.uint8)

    def product(self, x: Matrix, y: Matrix, p: int, q: int) -> Matrix:
        """
        Front-face/back-face product of the p-cochain ``x`` and q-cochain
        ``y`` (dense vectors).
        """
        key = (p, q)
        if key not in self._products:
            taus, fronts, backs = [], [], []
            index_of = self.filtration.index_of
            for tau, simplex in enumerate(self.filtration.simplices):
                if len(simplex) - 1 != p + q:
                    continue
                taus.append(tau)
                fronts.append(index_of[simplex[: p + 1]] - 1)
                backs.append(index_of[simplex[p:]] - 1)
            self._products[key] = (
                np.array(taus, dtype=np.int64),
                np.array(fronts, dtype=np.int64),
                np.array(backs, dtype=np.int64),
            )
        taus_arr, fronts_arr, backs_arr = self._products[key]
        out = np.zeros(self.n, dtype=np.uint8)
        out[taus_arr] = x[fronts_arr] & y[backs_arr]
        return out

    def basis(self, i: int, relative: bool) -> dict[int, list[Matrix]]:
        """
        Cocycles whose classes form a basis of the cohomology at index
        ``i``, grouped by degree.
        """
        mask = self.active(i, relative)
        result: dict[int, list[Matrix]] = {}
        if not mask.any():
            return result
        boundaries = self.coboundaries(mask)
        for p in sorted(set(self.dims[mask].tolist())):
            cols = np.flatnonzero(mask & (self.dims == p))
            rows = np.flatnonzero(mask & (self.dims == p + 1))
            kernel = nullspace(self.coboundary[np.ix_(rows, cols)])
            if kernel.shape[0] == 0:
                continue
            cocycles = np.zeros((self.n, kernel.shape[0]), dtype=np.uint8)
            cocycles[cols, :] = kernel.T
            chosen = independent_columns(boundaries, cocycles)
            if chosen:
                result[p] = [cocycles[:, c] for c in chosen]
        return result


def cohomology_basis_at(
    filtration: complex.Filtration, i: int, relative: bool = False
) -> list[f2linalg.Cochain]:
    """
    Representative cocycles of a basis of ``H*(K_i)`` (or ``H*(K, K_i)``
    when ``relative``), ordered by degree.
    """
    if not 0 <= i <= filtration.n:
        raise complex.IndexOutOfRange(f"Index {i} outside 0..{filtration.n}.")
    dense = _Complex(filtration)
    return [
        _to_cochain(vector, degree)
        for degree, vectors in sorted(dense.basis(i, relative).items())
        for vector in vectors
    ]


def _to_cochain(vector: Matrix, degree: int) -> f2linalg.Cochain:
    indices = (int(p) + 1 for p in np.flatnonzero(vector))
    return f2linalg.Cochain.from_indices(degree, indices)


@dataclasses.dataclass(frozen=True)
class RankFunction:
    """
    Ranks of the structure maps from index ``b`` to index ``a`` for every
    ``first <= a <= b <= last``, per degree. ``rank(a, b)`` is zero outside
    that range.
    """

    first: int
    last: int
    ranks: dict[int, npt.NDArray[np.int64]]
    relative: bool = False

    def rank(self, a: int, b: int, degree: int | None = None) -> int:
        if a < self.first or b > self.last or a > b:
            return 0
        total = 0
        for p, table in self.ranks.items():
            if degree is None or p == degree:
                total += int(table[a - self.first, b - self.first])
        return total

    def barcode(self) -> list[barcodes.Bar]:
        """
        Bars by inclusion-exclusion: the multiplicity of ``[a, b]`` is
        ``rk[a,b] - rk[a-1,b] - rk[a,b+1] + rk[a-1,b+1]``.
        """
        bars: list[barcodes.Bar] = []
        for degree in sorted(self.ranks):
            for a in range(self.first, self.last + 1):
                for b in range(a, self.last + 1):
                    multiplicity = (
                        self.rank(a, b, degree)
                        - self.rank(a - 1, b, degree)
                        - self.rank(a, b + 1, degree)
                        + self.rank(a - 1, b + 1, degree)
                    )
                    if multiplicity < 0:
                        raise NegativeMultiplicity(
                            f"Interval [{a}, {b}] in degree {degree} has "
                            f"multiplicity {multiplicity}; the rank function "
                            f"does not come from an interval decomposition."
                        )
                    essential = a == self.first if self.relative else b == self.last
                    bars.extend(
                        barcodes.Bar(
                            degree=degree,
                            death_index=a - 1,
                            birth_index=b,
                            essential=essential,
                        )
                        for _ in range(multiplicity)
                    )
        return barcodes.sort_bars(bars)


class RankOracle:
    """
    Generators of one module at every index, and the ranks between them.
    """

    def __init__(
        self,
        filtration: complex.Filtration,
        spec: ModuleSpec,
        *,
        limit: int | None = None,
    ) -> None:
        if limit is None:
            limit = config.get_settings().oracle_limit
        if filtration.n > limit:
            raise OracleTooLarge(
                f"The oracle handles at most {limit} simplices, got {filtration.n}."
            )
        self.filtration = filtration
        self.spec = spec
        self.relative = spec.relative
        self._dense = _Complex(filtration)
        self._generators: dict[int, dict[int, Matrix]] = {}
        self._reducers: dict[int, tuple[npt.NDArray[np.int64], tuple[int, ...]]] = {}

    @property
    def first(self) -> int:
        return 0 if self.relative else 1

    @property
    def last(self) -> int:
        return self.filtration.n

    def generators(self, b: int) -> dict[int, Matrix]:
        """
        Cocycles spanning the module at index ``b`` modulo coboundaries, as
        columns grouped by degree.
        """
        if b not in self._generators:
            self._generators[b] = self._build_generators(b)
        return self._generators[b]

    def _build_generators(self, b: int) -> dict[int, Matrix]:
        dense = self._dense
        mask = dense.active(b, self.relative)
        basis = dense.basis(b, self.relative)
        kind = self.spec.kind
        if kind in (ModuleKind.ORDINARY, ModuleKind.REL_ORDINARY):
            level = [(p, v) for p, vectors in basis.items() for v in vectors]
            return self._group(level)
        if kind is ModuleKind.PARTITION:
            assert self.spec.partition is not None
            factors = [
                [(p, v) for v in basis.get(p, [])] for p in self.spec.partition
            ]
        else:
            assert self.spec.k is not None
            positive = [
                (p, v) for p, vectors in basis.items() if p > 0 for v in vectors
            ]
            factors = [positive] * self.spec.k
        boundaries = dense.coboundaries(mask)
        level = factors[0]
        for factor in factors[1:]:
            products = []
            for p, x in level:
                for q, y in factor:
                    product = dense.product(x, y, p, q)
                    if not self.relative:
                        product &= mask.astype(np.uint8)
                    if product.any():
                        products.append((p + q, product))
            level = self._independent(products, boundaries)
            if not level:
                break
        return self._group(level)

    @staticmethod
    def _independent(
        vectors: list[tuple[int, Matrix]], boundaries: Matrix
    ) -> list[tuple[int, Matrix]]:
        if not vectors:
            return []
        stacked = np.stack([v for _, v in vectors], axis=1)
        return [vectors[c] for c in independent_columns(boundaries, stacked)]

    def _group(self, level: Sequence[tuple[int, Matrix]]) -> dict[int, Matrix]:
        grouped: dict[int, list[Matrix]] = collections.defaultdict(list)
        for p, vector in level:
            grouped[p].append(vector)
        return {p: np.stack(vs, axis=1) for p, vs in grouped.items()}

    def _reducer(self, a: int) -> tuple[npt.NDArray[np.int64], tuple[int, ...]]:
        # Echelon basis of the coboundaries at ``a``: reducing a vector
        # against it is one matrix product.
        if a not in self._reducers:
            mask = self._dense.active(a, self.relative)
            boundaries = self._dense.coboundaries(mask)
            if boundaries.shape[1] == 0:
                echelon = np.zeros((0, self.filtration.n), dtype=np.uint8)
                pivots: tuple[int, ...] = ()
            else:
                echelon, pivots = row_reduce(boundaries.T)
            self._reducers[a] = (echelon.T.astype(np.int64), pivots)
        return self._reducers[a]

    def rank(self, a: int, b: int, degree: int | None = None) -> int:
        """
        Rank of the structure map of the module from index ``b`` to ``a``.
        """
        if a > b:
            raise OracleError(f"Interval [{a}, {b}] is empty.")
        if a < self.first or b > self.last:
            return 0
        generators = self.generators(b)
        echelon, pivots = self._reducer(a)
        keep = None
        if not self.relative:
            keep = self._dense.active(a, False)
        total = 0
        for p, columns in generators.items():
            if degree is not None and p != degree:
                continue
            restricted = columns.astype(np.int64)
            if keep is not None:
                restricted = restricted * keep[:, None]
            if pivots:
                restricted = restricted + echelon @ restricted[list(pivots), :]
            total += rank(restricted % 2)
        return total

    def rank_function(self) -> RankFunction:
        size = self.last - self.first + 1
        degrees: set[int] = set()
        for b in range(self.first, self.last + 1):
            degrees.update(self.generators(b))
        tables = {p: np.zeros((size, size), dtype=np.int64) for p in degrees}
        for b in range(self.first, self.last + 1):
            for a in range(self.first, b + 1):
                for p in self.generators(b):
                    tables[p][a - self.first, b - self.first] = self.rank(a, b, p)
        return RankFunction(
            first=self.first, last=self.last, ranks=tables, relative=self.relative
        )


def image_rank(
    filtration: complex.Filtration,
    spec: ModuleSpec,
    a: int,
    b: int,
    *,
    limit: int | None = None,
) -> int:
    return RankOracle(filtration, spec, limit=limit).rank(a, b)


def rank_function(
    filtration: complex.Filtration, spec: ModuleSpec, *, limit: int | None = None
) -> RankFunction:
    return RankOracle(filtration, spec, limit=limit).rank_function()


def oracle_barcode(
    filtration: complex.Filtration, spec: ModuleSpec, *, limit: int | None = None
) -> list[barcodes.Bar]:
    bars = rank_function(filtration, spec, limit=limit).barcode()
    logger.info("Oracle found %d bars for %s.", len(bars), spec)
    return bars


@dataclasses.dataclass(frozen=True)
class VerificationReport:
    spec: ModuleSpec
    missing: tuple[barcodes.BarKey, ...]
    extra: tuple[barcodes.BarKey, ...]

    @property
    def ok(self) -> bool:
        return not self.missing and not self.extra

    def __len__(self) -> int:
        return len(self.missing) + len(self.extra)

    def to_dict(self) -> dict[str, object]:
        return {
            "spec": str(self.spec),
            "ok": self.ok,
            "missing": [list(key) for key in self.missing],
            "extra": [list(key) for key in self.extra],
        }


def compare(
    spec: ModuleSpec,
    fast: Sequence[barcodes.Bar],
    expected: Sequence[barcodes.Bar],
) -> VerificationReport:
    """
    Multiset difference of ``(degree, death, birth)`` triples.
    """
    fast_keys = barcodes.multiset(fast)
    expected_keys = barcodes.multiset(expected)
    return VerificationReport(
        spec=spec,
        missing=tuple(sorted((expected_keys - fast_keys).elements())),
        extra=tuple(sorted((fast_keys - expected_keys).elements())),
    )


def verify(
    filtration: complex.Filtration,
    fast: Sequence[barcodes.Bar],
    spec: ModuleSpec,
    *,
    limit: int | None = None,
) -> VerificationReport:
    report = compare(spec, fast, oracle_barcode(filtration, spec, limit=limit))
    if not report.ok:
        logger.warning(
            "%s: %d bar(s) missing, %d extra.",
            spec,
            len(report.missing),
            len(report.extra),
        )
    return report
