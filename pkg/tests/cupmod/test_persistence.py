import collections

import pytest

from cupmod import barcodes, complex, examples, oracle, persistence, relative


ORDINARY = oracle.ModuleSpec(kind=oracle.ModuleKind.ORDINARY)
REL_ORDINARY = oracle.ModuleSpec(kind=oracle.ModuleKind.REL_ORDINARY)


def _essential_degrees(basis: persistence.PersistentBasis) -> dict[int, int]:
    return dict(collections.Counter(bar.degree for bar in basis.bars if bar.essential))


def _simplex_count(bars) -> int:
    # Finite bars pair two simplices, essential ones own one.
    return sum(1 if bar.essential else 2 for bar in bars)


class TestPersistentCohomology:
    def test_single_vertex(self):
        basis = persistence.persistent_cohomology(complex.Filtration.closure([(0,)]))

        assert [bar.key for bar in basis] == [(0, 0, 1)]
        assert basis.bars[0].essential

    def test_hollow_triangle(self, hollow_triangle):
        basis = persistence.persistent_cohomology(hollow_triangle)

        assert barcodes.multiset(basis.bars) == {
            (0, 1, 3): 1,
            (0, 2, 4): 1,
            (0, 0, 6): 1,
            (1, 5, 6): 1,
        }
        assert _essential_degrees(basis) == {0: 1, 1: 1}

    @pytest.mark.parametrize(
        "builder, expected",
        [
            (examples.torus7, {0: 1, 1: 2, 2: 1}),
            (examples.rp2_6, {0: 1, 1: 1, 2: 1}),
            (examples.klein9, {0: 1, 1: 2, 2: 1}),
            (examples.wedge_s1_s2, {0: 1, 1: 1, 2: 1}),
            (examples.rp3_11, {0: 1, 1: 1, 2: 1, 3: 1}),
        ],
    )
    def test_essential_bars_of_closed_examples(self, builder, expected):
        assert _essential_degrees(persistence.persistent_cohomology(builder())) == expected

    def test_every_simplex_is_used_once(self, torus7):
        assert _simplex_count(persistence.persistent_cohomology(torus7)) == torus7.n

    def test_representatives_die_where_the_bar_ends(self, torus7):
        for bar in persistence.persistent_cohomology(torus7):
            assert bar.representative is not None
            coboundary = torus7.coboundary(bar.representative)
            assert coboundary.restrict(bar.birth_index).is_zero()
            if bar.birth_index < torus7.n:
                assert not coboundary.restrict(bar.birth_index + 1).is_zero()

    @pytest.mark.parametrize("seed", range(20))
    def test_matches_the_oracle(self, seed):
        filtration = examples.random_filtration(seed, n_vertices=6, max_dim=3)
        basis = persistence.persistent_cohomology(filtration)

        assert oracle.verify(filtration, basis.bars, ORDINARY).ok

    def test_born_at(self, torus7):
        basis = persistence.persistent_cohomology(torus7)

        assert [bar.degree for bar in basis.born_at(torus7.n)] == [1, 1, 2]
        assert [
            bar.degree for bar in basis.born_at(torus7.n, positive_degree=False)
        ] == [0, 1, 1, 2]
        assert basis.born_at(0) == []

    def test_indices_and_degrees(self, hollow_triangle):
        basis = persistence.persistent_cohomology(hollow_triangle)

        assert basis.birth_indices == {3, 4, 6}
        assert basis.death_indices == {0, 1, 2, 5}
        assert len(basis.of_degree(0)) == 3
        assert not basis.relative


class TestRelativePersistentCohomology:
    def test_single_vertex(self):
        basis = persistence.relative_persistent_cohomology(
            complex.Filtration.closure([(0,)])
        )

        assert [bar.key for bar in basis] == [(0, -1, 0)]
        assert basis.relative

    def test_every_simplex_is_used_once(self, klein9):
        basis = persistence.relative_persistent_cohomology(klein9)

        assert _simplex_count(basis) == klein9.n

    @pytest.mark.parametrize(
        "builder",
        [
            examples.torus7,
            examples.rp2_6,
            examples.klein9,
            examples.wedge_s1_s2,
            examples.torus_minus_disk,
            examples.torus_plus_disk,
        ],
    )
    def test_duality_with_the_absolute_barcode(self, builder):
        filtration = builder()
        mismatches = relative.duality_mismatches(
            persistence.persistent_cohomology(filtration).bars,
            persistence.relative_persistent_cohomology(filtration).bars,
        )

        assert mismatches == []

    def test_hollow_triangle_duality(self, hollow_triangle):
        basis = persistence.relative_persistent_cohomology(hollow_triangle)

        assert barcodes.multiset(basis.bars) == {
            (1, 1, 3): 1,
            (1, 2, 4): 1,
            (0, -1, 0): 1,
            (1, -1, 5): 1,
        }

    @pytest.mark.parametrize("seed", range(20))
    def test_matches_the_oracle(self, seed):
        filtration = examples.random_filtration(seed, n_vertices=6, max_dim=2)
        basis = persistence.relative_persistent_cohomology(filtration)

        assert oracle.verify(filtration, basis.bars, REL_ORDINARY).ok

    def test_representatives_vanish_on_the_subcomplex(self, torus7):
        for bar in persistence.relative_persistent_cohomology(torus7):
            assert bar.representative is not None
            assert bar.representative.restrict(bar.birth_index).is_zero()


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(200))
def test_ordinary_barcodes_match_the_oracle_at_full_size(seed):
    filtration = examples.random_filtration(
        2000 + seed, n_vertices=7, max_dim=3, density=0.5
    )
    basis = persistence.persistent_cohomology(filtration)

    assert oracle.verify(filtration, basis.bars, ORDINARY).ok
