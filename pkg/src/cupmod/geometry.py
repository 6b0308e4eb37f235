"""
Geometric filtrations of finite point sets and the distances used to check
their stability.
"""

import dataclasses
import enum
import itertools
import logging
import math
import pathlib
from collections.abc import Iterable, Sequence

import numpy as np
import numpy.typing as npt
import persim
from scipy.spatial import distance
from typing_extensions import Self

from cupmod import barcodes, complex, cupcore


logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]
Diagram = Sequence[tuple[float, float]]

# Relative tolerance on radius comparisons in the enclosing ball routine.
BALL_TOLERANCE = 1e-9


class GeometryError(Exception):
    pass


class EmptyPointCloud(GeometryError):
    pass


class InvalidDistanceMatrix(GeometryError):
    pass


class CoordinatesRequired(GeometryError):
    pass


class DimensionMismatch(GeometryError):
    pass


class FiltrationKind(enum.Enum):
    RIPS = "rips"
    CECH = "cech"


@dataclasses.dataclass(frozen=True, eq=False)
class PointCloud:
    """
    A finite metric space, given by coordinates or only by its distance
    matrix. Čech filtrations need coordinates.
    """

    distances: FloatArray
    points: FloatArray | None = None

    def __post_init__(self) -> None:
        d = self.distances
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise InvalidDistanceMatrix(f"Distance matrix has shape {d.shape}.")
        if d.shape[0] == 0:
            raise EmptyPointCloud("A point cloud needs at least one point.")
        if not np.allclose(d, d.T):
            raise InvalidDistanceMatrix("Distance matrix is not symmetric.")
        if np.any(np.diag(d) != 0):
            raise InvalidDistanceMatrix("Distance matrix has a nonzero diagonal.")
        if np.any(d < 0):
            raise InvalidDistanceMatrix("Distance matrix has negative entries.")

    @classmethod
    def from_points(cls, points: npt.ArrayLike) -> Self:
        coords = np.atleast_2d(np.asarray(points, dtype=np.float64))
        if coords.size == 0:
            raise EmptyPointCloud("A point cloud needs at least one point.")
        return cls(
            distances=distance.squareform(distance.pdist(coords)), points=coords
        )

    @classmethod
    def from_distance_matrix(cls, matrix: npt.ArrayLike) -> Self:
        return cls(distances=np.asarray(matrix, dtype=np.float64))

    @classmethod
    def load_points(cls, path: str | pathlib.Path) -> Self:
        """
        Read a CSV file with one point per row.
        """
        try:
            coords = np.loadtxt(path, delimiter=",", ndmin=2, comments="#")
        except ValueError as exc:
            raise GeometryError(f"Cannot read points from {path}: {exc}") from exc
        return cls.from_points(coords)

    @classmethod
    def load_distance_matrix(cls, path: str | pathlib.Path) -> Self:
        text = pathlib.Path(path).read_text(encoding="utf-8")
        delimiter = "," if "," in text else None
        try:
            matrix = np.loadtxt(
                text.splitlines(), delimiter=delimiter, ndmin=2, comments="#"
            )
        except ValueError as exc:
            raise InvalidDistanceMatrix(
                f"Cannot read a distance matrix from {path}: {exc}"
            ) from exc
        return cls.from_distance_matrix(matrix)

    @property
    def size(self) -> int:
        return int(self.distances.shape[0])

    @property
    def diameter(self) -> float:
        return float(self.distances.max())

    def dump_points(self, path: str | pathlib.Path, header: str = "") -> None:
        if self.points is None:
            raise CoordinatesRequired("This point cloud has no coordinates.")
        np.savetxt(path, self.points, delimiter=",", header=header)


def _cliques(
    size: int, max_dim: int, admissible: np.ndarray
) -> Iterable[tuple[int, ...]]:
    # Vertex sets of at most max_dim + 1 vertices, pairwise admissible.
    level: list[tuple[int, ...]] = [(v,) for v in range(size)]
    yield from level
    for _ in range(max_dim):
        grown = [
            (*simplex, v)
            for simplex in level
            for v in range(simplex[-1] + 1, size)
            if all(admissible[u, v] for u in simplex)
        ]
        yield from grown
        level = grown


def rips_filtration(
    cloud: PointCloud, *, max_dim: int = 2, threshold: float | None = None
) -> complex.Filtration:
    """
    Every simplex of at most ``max_dim`` dimensions whose diameter is at most
    ``threshold`` (all of them by default), valued by its diameter.
    """
    if max_dim < 0:
        raise GeometryError(f"max_dim must not be negative, got {max_dim}.")
    if threshold is not None and threshold < 0:
        raise GeometryError(f"threshold must not be negative, got {threshold}.")
    limit = math.inf if threshold is None else threshold
    d = cloud.distances
    pairs = []
    for simplex in _cliques(cloud.size, max_dim, d <= limit):
        value = max(
            (d[u, v] for u, v in itertools.combinations(simplex, 2)), default=0.0
        )
        pairs.append((float(value), simplex))
    filtration = complex.Filtration.from_simplices(pairs)
    logger.info("Rips filtration with %d simplices.", filtration.n)
    return filtration


def _circumsphere(points: FloatArray) -> tuple[FloatArray, float]:
    # Smallest sphere through all of ``points``, centred in their affine hull.
    origin = points[0]
    if len(points) == 1:
        return origin.copy(), 0.0
    spans = points[1:] - origin
    gram = 2.0 * spans @ spans.T
    rhs = np.sum(spans**2, axis=1)
    weights = np.linalg.lstsq(gram, rhs, rcond=None)[0]
    centre = origin + weights @ spans
    return centre, float(np.linalg.norm(points - centre, axis=1).max())


def _welzl(
    points: FloatArray, count: int, boundary: list[int], dim: int
) -> tuple[FloatArray, float]:
    if count == 0 or len(boundary) == dim + 1:
        if not boundary:
            return np.zeros(points.shape[1]), 0.0
        return _circumsphere(points[boundary])
    centre, radius = _welzl(points, count - 1, boundary, dim)
    gap = float(np.linalg.norm(points[count - 1] - centre))
    if gap <= radius * (1 + BALL_TOLERANCE) + BALL_TOLERANCE:
        return centre, radius
    return _welzl(points, count - 1, [*boundary, count - 1], dim)


def minimum_enclosing_ball(
    points: npt.ArrayLike, rng: np.random.Generator | None = None
) -> tuple[FloatArray, float]:
    """
    Centre and radius of the smallest ball containing ``points``, by
    Welzl's randomized algorithm.
    """
    coords = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if coords.shape[0] == 0:
        raise EmptyPointCloud("The enclosing ball of no points is undefined.")
    if rng is None:
        rng = np.random.default_rng(0)
    shuffled = coords[rng.permutation(coords.shape[0])]
    return _welzl(shuffled, shuffled.shape[0], [], coords.shape[1])


def cech_filtration(
    cloud: PointCloud, *, max_dim: int = 2, threshold: float | None = None
) -> complex.Filtration:
    """
    Every simplex of at most ``max_dim`` dimensions whose vertices fit in a
    ball of radius ``threshold``, valued by the radius of their smallest
    enclosing ball.
    """
    if cloud.points is None:
        raise CoordinatesRequired("Čech filtrations need point coordinates.")
    if max_dim < 0:
        raise GeometryError(f"max_dim must not be negative, got {max_dim}.")
    limit = math.inf if threshold is None else threshold
    rng = np.random.default_rng(0)
    points = cloud.points
    # Two balls of radius r meet iff the points are at most 2r apart.
    values: dict[tuple[int, ...], float] = {}
    for simplex in _cliques(cloud.size, max_dim, cloud.distances <= 2 * limit):
        if any(face not in values for face in complex.facets_of(simplex)):
            continue
        _, radius = minimum_enclosing_ball(points[list(simplex)], rng)
        if radius <= limit:
            values[simplex] = max(
                [radius, *(values[face] for face in complex.facets_of(simplex))]
            )
    filtration = complex.Filtration.from_simplices(
        (value, simplex) for simplex, value in values.items()
    )
    logger.info("Čech filtration with %d simplices.", filtration.n)
    return filtration


def hausdorff(x: PointCloud, y: PointCloud) -> float:
    if x.points is None or y.points is None:
        raise CoordinatesRequired("The Hausdorff distance needs coordinates.")
    if x.points.shape[1] != y.points.shape[1]:
        raise DimensionMismatch(
            f"Point clouds live in dimensions {x.points.shape[1]} and "
            f"{y.points.shape[1]}."
        )
    return max(
        distance.directed_hausdorff(x.points, y.points)[0],
        distance.directed_hausdorff(y.points, x.points)[0],
    )


def _essential_cost(a: list[float], b: list[float]) -> float:
    if len(a) != len(b):
        return math.inf
    return max(
        (abs(u - v) if u != v else 0.0 for u, v in zip(sorted(a), sorted(b))),
        default=0.0,
    )


def _split(diagram: Diagram) -> tuple[FloatArray, list[float], list[float]]:
    finite: list[tuple[float, float]] = []
    open_above: list[float] = []
    open_below: list[float] = []
    for birth, death in diagram:
        if math.isinf(death):
            open_above.append(birth)
        elif math.isinf(birth):
            open_below.append(death)
        else:
            finite.append((birth, death))
    return np.array(finite, dtype=np.float64).reshape(-1, 2), open_above, open_below


def bottleneck(a: Diagram, b: Diagram) -> float:
    """
    Bottleneck distance between two diagrams of ``(birth, death)`` pairs.

    Bars open on one side only match bars open on the same side, in sorted
    order of their finite end. Finite bars go to ``persim.bottleneck``, which
    may also match them to the diagonal.
    """
    fa, above_a, below_a = _split(a)
    fb, above_b, below_b = _split(b)
    cost = max(
        _essential_cost(above_a, above_b), _essential_cost(below_a, below_b)
    )
    if math.isinf(cost) or (len(fa) == 0 and len(fb) == 0):
        return cost
    return max(cost, float(persim.bottleneck(fa, fb)))


def metadata(*, max_dim: int, threshold: float | None) -> list[str]:
    """
    Header lines recording how a geometric filtration was built.
    """
    return [
        f"max_dim: {max_dim}",
        f"threshold: {'none' if threshold is None else threshold}",
        f"ball_tolerance: {BALL_TOLERANCE}",
    ]


def build_filtration(
    cloud: PointCloud,
    kind: FiltrationKind,
    *,
    max_dim: int = 2,
    threshold: float | None = None,
) -> complex.Filtration:
    if kind is FiltrationKind.RIPS:
        return rips_filtration(cloud, max_dim=max_dim, threshold=threshold)
    return cech_filtration(cloud, max_dim=max_dim, threshold=threshold)


def sample_circle(
    size: int, rng: np.random.Generator, *, radius: float = 1.0
) -> PointCloud:
    angles = rng.uniform(0.0, 2 * math.pi, size)
    return PointCloud.from_points(
        radius * np.column_stack([np.cos(angles), np.sin(angles)])
    )


def sample_flat_torus(size: int, rng: np.random.Generator) -> PointCloud:
    """
    Points on the flat torus embedded in R^4 as a product of two unit
    circles.
    """
    theta = rng.uniform(0.0, 2 * math.pi, size)
    phi = rng.uniform(0.0, 2 * math.pi, size)
    return PointCloud.from_points(
        np.column_stack([np.cos(theta), np.sin(theta), np.cos(phi), np.sin(phi)])
    )


def perturb(cloud: PointCloud, h: float, rng: np.random.Generator) -> PointCloud:
    """
    Move every point by at most ``h`` in a uniformly random direction, so
    the Hausdorff distance to the original is at most ``h``.
    """
    if cloud.points is None:
        raise CoordinatesRequired("Only point clouds with coordinates can move.")
    directions = rng.normal(size=cloud.points.shape)
    norms = np.linalg.norm(directions, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    lengths = rng.uniform(0.0, h, size=(cloud.points.shape[0], 1))
    return PointCloud.from_points(cloud.points + directions / norms * lengths)


@dataclasses.dataclass(frozen=True)
class StabilityTrial:
    hausdorff: float
    bottleneck: float

    @property
    def holds(self) -> bool:
        return self.bottleneck <= 2 * self.hausdorff + BALL_TOLERANCE


def cup_diagram(
    cloud: PointCloud, kind: FiltrationKind, k: int, *, max_dim: int = 2
) -> dict[int, list[tuple[float, float]]]:
    """
    Value-space k-cup barcode of the filtration built on ``cloud``, split by
    degree.
    """
    filtration = build_filtration(cloud, kind, max_dim=max_dim)
    bars = cupcore.order_k_cup_pers(filtration, k).bars
    return {
        p: barcodes.diagram(bars, filtration, degree=p)
        for p in sorted({bar.degree for bar in bars})
    }


def stability_trial(
    x: PointCloud,
    y: PointCloud,
    kind: FiltrationKind,
    k: int = 2,
    *,
    max_dim: int = 2,
) -> StabilityTrial:
    h = hausdorff(x, y)
    dx = cup_diagram(x, kind, k, max_dim=max_dim)
    dy = cup_diagram(y, kind, k, max_dim=max_dim)
    worst = max(
        (bottleneck(dx.get(p, []), dy.get(p, [])) for p in set(dx) | set(dy)),
        default=0.0,
    )
    logger.debug("Stability trial: hausdorff %.6f, bottleneck %.6f.", h, worst)
    return StabilityTrial(hausdorff=h, bottleneck=worst)

