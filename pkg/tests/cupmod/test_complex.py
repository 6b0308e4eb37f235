import math

import pytest

from cupmod import complex, f2linalg


class TestMakeSimplex:
    def test_sorts_vertices(self):
        assert complex.make_simplex([2, 0, 1]) == (0, 1, 2)

    @pytest.mark.parametrize("vertices", [[], [0, 0], [-1, 2]])
    def test_rejects_invalid_vertex_sets(self, vertices):
        with pytest.raises(complex.InvalidSimplex):
            complex.make_simplex(vertices)

    def test_facets_of_a_vertex_is_empty(self):
        assert complex.facets_of((3,)) == []

    def test_facets_of_a_triangle(self):
        assert complex.facets_of((0, 1, 2)) == [(1, 2), (0, 2), (0, 1)]


class TestFiltration:
    def test_rejects_a_missing_face(self):
        with pytest.raises(complex.MissingFace):
            complex.Filtration(simplices=((0,), (0, 1)), values=(0.0, 1.0))

    def test_rejects_a_duplicate(self):
        with pytest.raises(complex.DuplicateSimplex):
            complex.Filtration(simplices=((0,), (0,)), values=(0.0, 0.0))

    def test_rejects_decreasing_values(self):
        with pytest.raises(complex.ValuesNotMonotone):
            complex.Filtration(
                simplices=((0,), (1,), (0, 1)), values=(0.0, 2.0, 1.0)
            )

    def test_rejects_unordered_vertices(self):
        with pytest.raises(complex.InvalidSimplex):
            complex.Filtration(
                simplices=((0,), (1,), (1, 0)), values=(0.0, 0.0, 1.0)
            )

    def test_from_simplices_refines_ties(self):
        filtration = complex.Filtration.from_simplices(
            [(1.0, (1, 2)), (0.0, (2,)), (1.0, (0, 1)), (0.0, (0,)), (0.0, (1,))]
        )

        assert filtration.simplices == ((0,), (1,), (2,), (0, 1), (1, 2))
        assert filtration.values == (0.0, 0.0, 0.0, 1.0, 1.0)

    def test_refinement_is_idempotent(self, torus7):
        refined = complex.Filtration.from_simplices(
            zip(torus7.values, torus7.simplices)
        )

        assert refined == torus7

    def test_refinement_puts_faces_first_on_ties(self):
        filtration = complex.Filtration.from_simplices(
            [(0.0, (0, 1)), (0.0, (0,)), (0.0, (1,))]
        )

        assert filtration.simplex(3) == (0, 1)

    def test_closure_values_by_dimension(self, hollow_triangle):
        assert hollow_triangle.n == 6
        assert hollow_triangle.values == (0, 0, 0, 1, 1, 1)
        assert hollow_triangle.dimension == 1

    def test_value_at_is_extended_past_both_ends(self, hollow_triangle):
        assert hollow_triangle.value_at(0) == -math.inf
        assert hollow_triangle.value_at(4) == 1
        assert hollow_triangle.value_at(7) == math.inf

    @pytest.mark.parametrize("index", [0, 7])
    def test_index_out_of_range(self, hollow_triangle, index):
        with pytest.raises(complex.IndexOutOfRange):
            hollow_triangle.simplex(index)

    def test_prefix(self, full_triangle):
        prefix = full_triangle.prefix(6)

        assert prefix.n == 6
        assert prefix.dimension == 1
        with pytest.raises(complex.IndexOutOfRange):
            full_triangle.prefix(8)

    def test_cochain_checks_degrees(self, full_triangle):
        assert full_triangle.cochain(1, [4, 5]).support == (4, 5)
        with pytest.raises(complex.FiltrationError):
            full_triangle.cochain(1, [1])

    def test_torus_counts(self, torus7):
        assert torus7.n == 42
        assert len(torus7.indices_of_dim(0)) == 7
        assert len(torus7.indices_of_dim(1)) == 21
        assert len(torus7.indices_of_dim(2)) == 14


class TestCofaceIndices:
    def test_vertex_of_an_edge(self):
        edge = complex.Filtration.closure([(0, 1)])

        assert edge.coface_indices(edge.index_of[(0,)]) == {edge.index_of[(0, 1)]}

    def test_edge_of_a_triangle(self, full_triangle):
        index = full_triangle.index_of[(0, 1)]

        assert full_triangle.coface_indices(index) == {full_triangle.index_of[(0, 1, 2)]}

    def test_every_torus_edge_has_two_triangles(self, torus7):
        for i in torus7.indices_of_dim(1):
            cofaces = torus7.coface_indices(i)
            assert len(cofaces) == 2
            assert all(torus7.dim(j) == 2 for j in cofaces)

    def test_out_of_range(self, full_triangle):
        with pytest.raises(complex.IndexOutOfRange):
            full_triangle.coface_indices(8)


class TestCoboundaryMatrix:
    def test_single_vertex_has_one_zero_column(self):
        matrix = complex.Filtration.closure([(0,)]).coboundary_matrix()

        assert len(matrix) == 1
        assert matrix.columns[0].bits == 0

    def test_single_edge(self):
        edge = complex.Filtration.closure([(0, 1)])
        columns = edge.coboundary_matrix().columns

        assert [c.as_cochain().support for c in columns] == [(3,), (3,), ()]
        assert [c.degree for c in columns] == [1, 1, 2]

    def test_torus_edge_columns_have_two_entries(self, torus7):
        for column in torus7.coboundary_matrix().columns:
            if column.degree == 2:
                assert len(column.as_cochain()) == 2

    def test_cofaces_enter_later(self, torus7):
        for j, column in enumerate(torus7.coboundary_matrix().columns, start=1):
            assert all(i > j for i in column.as_cochain().support)

    @pytest.mark.parametrize("k", [7, 20, 28, 35, 42])
    def test_restriction_matches_the_prefix(self, torus7, k):
        full = torus7.coboundary_matrix()
        full.restrict_to(k)
        full.reduce()
        prefix = torus7.prefix(k).coboundary_matrix()
        prefix.reduce()

        assert full.rank() == prefix.rank()

    def test_coboundary_of_a_cochain(self, full_triangle):
        vertex = full_triangle.cochain(0, [full_triangle.index_of[(0,)]])

        assert full_triangle.coboundary(vertex) == f2linalg.Cochain.from_indices(
            1, [full_triangle.index_of[(0, 1)], full_triangle.index_of[(0, 2)]]
        )


class TestLoadFiltration:
    def test_single_edge(self, tmp_path):
        path = tmp_path / "edge.flt"
        path.write_text("0.0 0\n0.0 1\n1.0 0 1\n")

        filtration = complex.load_filtration(path)

        assert filtration.n == 3
        assert filtration.simplices == ((0,), (1,), (0, 1))

    def test_comments_and_blank_lines(self, tmp_path):
        path = tmp_path / "edge.flt"
        path.write_text("# an edge\n\n0 1\n0 0  # first vertex\n1 1 0\n")

        assert complex.load_filtration(path).simplices == ((0,), (1,), (0, 1))

    def test_hollow_triangle_is_refined(self, tmp_path):
        path = tmp_path / "triangle.flt"
        path.write_text("1 1 2\n1 0 1\n0 0\n0 1\n0 2\n1 0 2\n")

        filtration = complex.load_filtration(path)

        assert filtration.n == 6
        assert filtration.values == (0, 0, 0, 1, 1, 1)

    @pytest.mark.parametrize(
        "text, line",
        [
            ("0 0\nfoo 1\n", 2),
            ("0 0\n1\n", 2),
            ("0 0\n0 1 1\n", 2),
            ("nan 0\n", 1),
            ("0 0\n0 1\n1 0 x\n", 3),
        ],
    )
    def test_parse_errors_carry_the_line(self, tmp_path, text, line):
        path = tmp_path / "bad.flt"
        path.write_text(text)

        with pytest.raises(complex.FiltrationParseError) as excinfo:
            complex.load_filtration(path)

        assert excinfo.value.line == line

    def test_missing_face_names_the_simplex(self, tmp_path):
        path = tmp_path / "bad.flt"
        path.write_text("0 0\n1 0 1\n")

        with pytest.raises(complex.MissingFace, match=r"\(0, 1\)"):
            complex.load_filtration(path)

    def test_duplicate_simplex(self, tmp_path):
        path = tmp_path / "bad.flt"
        path.write_text("0 0\n0 1\n1 0 1\n2 1 0\n")

        with pytest.raises(complex.DuplicateSimplex):
            complex.load_filtration(path)

    def test_distance_matrix_gives_its_rips_filtration(self, tmp_path):
        path = tmp_path / "d.txt"
        path.write_text("0 1 1\n1 0 1\n1 1 0\n")

        filtration = complex.load_filtration(
            path, complex.FileFormat.DISTANCE_MATRIX, max_dim=2
        )

        assert filtration.n == 7
        assert filtration.value_at(7) == 1.0

    def test_dump_round_trip(self, tmp_path, torus7):
        path = tmp_path / "torus.flt"
        complex.dump_filtration(torus7, path, header=["the torus"])

        assert path.read_text().startswith("# the torus\n")
        assert complex.load_filtration(path) == torus7
