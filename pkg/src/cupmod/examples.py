"""
Curated complexes with known cup products, and seeded random filtrations.

Curated filtrations are valued by dimension unless stated otherwise, so the
whole k-skeleton enters before any (k+1)-simplex.
"""

import enum
import itertools
import logging
import math
import pathlib
from collections.abc import Callable

import numpy as np

from cupmod import complex, geometry


logger = logging.getLogger(__name__)


class ExampleError(Exception):
    pass


class UnknownExample(ExampleError):
    pass


class Example(enum.Enum):
    TORUS7 = "torus7"
    RP2_6 = "rp2_6"
    RP3_11 = "rp3_11"
    KLEIN9 = "klein9"
    WEDGE_S1_S2 = "wedge_s1_s2"
    HEXAGON_POINTS = "hexagon_points"
    TORUS_MINUS_DISK = "torus_minus_disk"
    TORUS_PLUS_DISK = "torus_plus_disk"

    @classmethod
    def parse(cls, name: str) -> "Example":
        try:
            return cls(name)
        except ValueError:
            known = ", ".join(example.value for example in cls)
            raise UnknownExample(
                f"Unknown example {name!r}; expected one of {known}."
            ) from None


def _torus_triangles() -> list[complex.Simplex]:
    return [
        complex.make_simplex(((i + a) % 7 for a in offsets))
        for i in range(7)
        for offsets in ((0, 1, 3), (0, 2, 3))
    ]


def torus7() -> complex.Filtration:
    """
    The 7-vertex torus: 7 vertices, 21 edges and 14 triangles.
    """
    return complex.Filtration.closure(_torus_triangles())


def rp2_6() -> complex.Filtration:
    """
    The 6-vertex projective plane: every pair of vertices spans an edge and
    10 triangles close it up.
    """
    triangles = [
        (0, 1, 2), (0, 2, 3), (0, 3, 4), (0, 4, 5), (0, 1, 5),
        (1, 2, 4), (2, 3, 5), (1, 3, 4), (2, 4, 5), (1, 3, 5),
    ]  # fmt: skip
    return complex.Filtration.closure(triangles)


# Coordinate pairs whose square diagonals are flipped relative to the
# parity rule; complementary pairs always disagree.
_FLIPPED_PAIRS = frozenset({(0, 3), (1, 3), (2, 3)})

_CubeVertex = tuple[int, ...]
_Vertex = _CubeVertex | tuple[str, int, int]


def _square_triangles(
    varying: tuple[int, int], fixed: dict[int, int]
) -> list[tuple[_CubeVertex, ...]]:
    i, j = varying

    def corner(a: int, b: int) -> _CubeVertex:
        coords = dict(fixed)
        coords[i], coords[j] = a, b
        return tuple(coords[c] for c in range(4))

    parity = sum(fixed.values()) % 2
    flipped = parity ^ (varying in _FLIPPED_PAIRS)
    if flipped:
        # Diagonal (0,1)-(1,0).
        ends = (corner(0, 1), corner(1, 0))
        others = (corner(0, 0), corner(1, 1))
    else:
        ends = (corner(0, 0), corner(1, 1))
        others = (corner(0, 1), corner(1, 0))
    return [(*ends, other) for other in others]


def _cube_sphere_tetrahedra() -> list[tuple[_Vertex, ...]]:
    # The boundary of [0,1]^4 as a centrally symmetric 3-sphere. Facets
    # normal to the first three axes are coned from a centre vertex; the two
    # facets normal to the last axis split into five tetrahedra each.
    tetrahedra: list[tuple[_Vertex, ...]] = []
    for axis in range(3):
        free = [c for c in range(4) if c != axis]
        for side in (0, 1):
            centre = ("c", axis, side)
            for varying in itertools.combinations(free, 2):
                (other,) = [c for c in free if c not in varying]
                for value in (0, 1):
                    fixed = {axis: side, other: value}
                    for triangle in _square_triangles(varying, fixed):
                        tetrahedra.append((centre, *triangle))
    for side in (0, 1):
        facet = [(*bits, side) for bits in itertools.product((0, 1), repeat=3)]
        even = [v for v in facet if sum(v) % 2 == 0]
        tetrahedra.append(tuple(even))
        for v in facet:
            if sum(v) % 2 == 1:
                neighbours = [
                    tuple(x ^ (c == flip) for c, x in enumerate(v))
                    for flip in range(3)
                ]
                tetrahedra.append((v, *neighbours))
    return tetrahedra


def _antipodal_label(vertex: _Vertex) -> int:
    if vertex[0] == "c":
        return 8 + int(vertex[1])
    cube = tuple(int(x) for x in vertex)
    if cube[0] == 1:
        cube = tuple(1 - x for x in cube)
    return cube[1] * 4 + cube[2] * 2 + cube[3]


def rp3_11() -> complex.Filtration:
    """
    An 11-vertex projective 3-space with 41 tetrahedra: the quotient of a
    centrally symmetric subdivision of the boundary of the 4-cube by the
    antipodal map. Every antipodal pair of vertices is at least three edges
    apart, so the quotient is a simplicial complex.
    """
    quotient = {
        tuple(sorted(_antipodal_label(v) for v in tetrahedron))
        for tetrahedron in _cube_sphere_tetrahedra()
    }
    return complex.Filtration.closure(sorted(quotient))


def klein9() -> complex.Filtration:
    """
    A 9-vertex Klein bottle: the 3 by 3 grid of squares, each split along a
    diagonal, glued to a torus in one direction and with a flip in the
    other.
    """

    def vertex(x: int, y: int) -> int:
        if y == 3:
            x, y = -x, 0
        return 3 * y + x % 3

    triangles: list[tuple[int, int, int]] = []
    for x, y in itertools.product(range(3), repeat=2):
        a, b = vertex(x, y), vertex(x + 1, y)
        c, d = vertex(x, y + 1), vertex(x + 1, y + 1)
        triangles += [(a, b, d), (a, c, d)]
    return complex.Filtration.closure(triangles)


def wedge_s1_s2() -> complex.Filtration:
    """
    A circle and the boundary of a tetrahedron sharing vertex 0.
    """
    circle = [(0, 1), (1, 2), (0, 2)]
    sphere = list(itertools.combinations((0, 3, 4, 5), 3))
    return complex.Filtration.closure([*circle, *sphere])


def hexagon_points() -> geometry.PointCloud:
    """
    The six vertices of a regular hexagon of circumradius 1.
    """
    angles = np.arange(6) * math.pi / 3
    return geometry.PointCloud.from_points(
        np.column_stack([np.cos(angles), np.sin(angles)])
    )


# Index of the stage each comparison example is read at.
TRUNCATIONS = {
    Example.TORUS_MINUS_DISK: 6,
    Example.TORUS_PLUS_DISK: 42,
}


def torus_minus_disk() -> complex.Filtration:
    """
    The 7-vertex torus without the triangle (0, 1, 3), whose boundary circle
    enters first (indices 1 to 6). No stage has a nonzero product, while
    relative to the circle the pair is a torus.
    """
    removed = (0, 1, 3)
    circle = set(
        itertools.chain.from_iterable(
            itertools.combinations(removed, size) for size in (1, 2)
        )
    )
    triangles = [t for t in _torus_triangles() if t != removed]
    return complex.Filtration.closure(
        triangles, lambda simplex: 0.0 if simplex in circle else 1.0
    )


def torus_plus_disk() -> complex.Filtration:
    """
    The 7-vertex torus (complete at index 42), then a cone from vertex 7
    over the essential loop 0-1-2-3-4-5-6.
    """
    cone = [(i, (i + 1) % 7, 7) for i in range(7)]

    def value_of(simplex: complex.Simplex) -> float:
        return 3.0 if 7 in simplex else float(len(simplex) - 1)

    return complex.Filtration.closure([*_torus_triangles(), *cone], value_of)


def torus_grid(m: int) -> complex.Filtration:
    """
    The ``m`` by ``m`` grid torus, each square cut along a diagonal, swept in
    vertex order: a simplex enters with its largest vertex. It has ``6 m^2``
    simplices and closes up into a torus at the last index.
    """
    if m < 3:
        raise ExampleError(f"A grid torus needs m >= 3, got {m}.")

    def vertex(i: int, j: int) -> int:
        return (i % m) * m + j % m

    triangles: list[tuple[int, int, int]] = []
    for i, j in itertools.product(range(m), repeat=2):
        a, b = vertex(i, j), vertex(i + 1, j)
        c, d = vertex(i, j + 1), vertex(i + 1, j + 1)
        triangles += [(a, b, d), (a, c, d)]
    return complex.Filtration.closure(triangles, lambda simplex: float(simplex[-1]))


Built = complex.Filtration | geometry.PointCloud

_BUILDERS: dict[Example, Callable[[], Built]] = {
    Example.TORUS7: torus7,
    Example.RP2_6: rp2_6,
    Example.RP3_11: rp3_11,
    Example.KLEIN9: klein9,
    Example.WEDGE_S1_S2: wedge_s1_s2,
    Example.HEXAGON_POINTS: hexagon_points,
    Example.TORUS_MINUS_DISK: torus_minus_disk,
    Example.TORUS_PLUS_DISK: torus_plus_disk,
}


def build(example: Example) -> Built:
    return _BUILDERS[example]()


def provenance(example: Example, built: Built) -> list[str]:
    lines = [f"cupmod example {example.value}"]
    doc = _BUILDERS[example].__doc__
    if doc:
        lines += [line.strip() for line in doc.strip().splitlines()]
    if isinstance(built, complex.Filtration):
        lines.append(f"{built.n} simplices, dimension {built.dimension}")
    else:
        lines.append(f"{built.size} points")
    if example in TRUNCATIONS:
        lines.append(f"read at index {TRUNCATIONS[example]}")
    return lines


def generate_example(name: str | Example, path: str | pathlib.Path) -> Built:
    """
    Write the curated example ``name`` to ``path``: a filtration file, or a
    CSV of points for ``hexagon_points``.
    """
    example = name if isinstance(name, Example) else Example.parse(name)
    built = build(example)
    header = provenance(example, built)
    if isinstance(built, complex.Filtration):
        complex.dump_filtration(built, path, header=header)
    else:
        built.dump_points(path, header="\n".join(header))
    logger.info("Wrote example %s to %s.", example.value, path)
    return built


def random_filtration(
    seed: int,
    n_vertices: int = 6,
    max_dim: int = 2,
    density: float = 0.5,
) -> complex.Filtration:
    """
    A seeded random simplex-wise filtration of a random flag-like complex.

    Every vertex is kept, each candidate edge with probability ``density``,
    and each higher simplex whose facets are all present with probability
    ``density`` as well. Every simplex enters strictly after its facets, at
    a random offset.
    """
    if n_vertices < 1:
        raise ExampleError(f"Need at least one vertex, got {n_vertices}.")
    if not 0.0 <= density <= 1.0:
        raise ExampleError(f"density must lie in [0, 1], got {density}.")
    rng = np.random.default_rng(seed)
    values: dict[complex.Simplex, float] = {
        (v,): float(rng.random()) for v in range(n_vertices)
    }
    level = list(values)
    for _ in range(max_dim):
        grown: list[complex.Simplex] = []
        for simplex in level:
            for v in range(simplex[-1] + 1, n_vertices):
                candidate = (*simplex, v)
                facets = complex.facets_of(candidate)
                if any(face not in values for face in facets):
                    continue
                if rng.random() < density:
                    offset = float(rng.random())
                    values[candidate] = max(values[f] for f in facets) + offset
                    grown.append(candidate)
        level = grown
    return complex.Filtration.from_simplices(
        (value, simplex) for simplex, value in values.items()
    )
