import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from sentinet.domains import (
    DomainMatrix,
    cluster_scores,
    domain_frequency_matrix,
    first_principal_component,
    read_matrix_csv,
    write_matrix_csv,
)
from sentinet.errors import (
    DegenerateClusteringError,
    ParameterError,
    ZeroVarianceError,
)


def matrix_from(values, communities=None, domains=None):
    array = np.asarray(values, dtype=float)
    communities = communities or tuple(f"c{i}" for i in range(array.shape[0]))
    domains = domains or tuple(f"d{j}.com" for j in range(array.shape[1]))
    return DomainMatrix(
        communities=tuple(communities),
        domains=tuple(domains),
        values=array,
        retained_totals=tuple([100] * array.shape[0]),
        zero_link_communities=(),
        unparseable_urls=0,
    )


class TestDomainFrequencyMatrix:
    def test_single_community_single_domain(self, record_factory):
        records = {
            "A": [
                record_factory(str(i), "u", urls=("https://a.com/x",))
                for i in range(20)
            ]
        }
        matrix = domain_frequency_matrix(records, min_count=10)
        assert matrix.domains == ("a.com",)
        assert matrix.values[0, 0] == 1.0

    def test_hand_counted_two_communities(self, record_factory):
        def bundle(urls):
            return [
                record_factory(f"{i}-{hash(tuple(urls)) % 99}", "u", urls=(u,))
                for i, u in enumerate(urls)
            ]

        records = {
            "A": bundle(["https://x.com/a"] * 12 + ["https://y.com/b"] * 8),
            "B": bundle(["https://y.com/c"] * 11 + ["https://z.com/d"] * 5),
        }
        matrix = domain_frequency_matrix(records, min_count=10)
        assert matrix.domains == ("x.com", "y.com")
        assert matrix.retained_totals == (20, 16)
        np.testing.assert_allclose(matrix.values[0], [0.6, 0.4])
        np.testing.assert_allclose(matrix.values[1], [0.0, 0.6875])

    def test_exclusions_and_unparseable(self, record_factory):
        records = {
            "A": [
                record_factory(
                    "1",
                    "u",
                    urls=(
                        "https://twitter.com/s/1",
                        "http://bit.ly/x",
                        ":::not a url",
                    )
                    + tuple(f"https://keep.com/{i}" for i in range(11)),
                )
            ]
        }
        matrix = domain_frequency_matrix(
            records, shorteners=frozenset({"bit.ly"}), min_count=10
        )
        assert matrix.domains == ("keep.com",)
        assert matrix.retained_totals == (11,)
        assert matrix.unparseable_urls == 1

    def test_zero_link_community_flagged(self, record_factory):
        records = {
            "A": [record_factory("1", "u", urls=tuple(f"https://a.com/{i}" for i in range(11)))],
            "B": [record_factory("2", "v", urls=())],
        }
        matrix = domain_frequency_matrix(records, min_count=10)
        assert matrix.zero_link_communities == ("B",)
        assert np.all(matrix.values[list(matrix.communities).index("B")] == 0)

    def test_csv_roundtrip(self, tmp_path, record_factory):
        records = {
            "A": [record_factory("1", "u", urls=tuple(f"https://a.com/{i}" for i in range(12)))],
        }
        matrix = domain_frequency_matrix(records, min_count=10)
        path = tmp_path / "matrix.csv"
        write_matrix_csv(matrix, path)
        loaded = read_matrix_csv(path)
        assert loaded.domains == matrix.domains
        np.testing.assert_allclose(loaded.values, matrix.values)


class TestFirstPrincipalComponent:
    def test_symmetric_2x2(self):
        score = first_principal_component(matrix_from([[1, 0], [0, 1]]))
        values = sorted(score.scores.values())
        assert values[0] == pytest.approx(-np.sqrt(2) / 2)
        assert values[1] == pytest.approx(np.sqrt(2) / 2)

    def test_matches_eigendecomposition_oracle(self):
        rng = np.random.default_rng(5)
        values = rng.random((6, 10))
        score = first_principal_component(matrix_from(values))
        mine = np.array([score.scores[f"c{i}"] for i in range(6)])
        reference = oracles.pca_scores_eigh(values)
        agreement = min(
            np.abs(mine - reference).max(), np.abs(mine + reference).max()
        )
        assert agreement < 1e-8

    def test_zero_variance_raises(self):
        with pytest.raises(ZeroVarianceError):
            first_principal_component(matrix_from([[0.5, 0.5], [0.5, 0.5]]))

    def test_unit_norm_and_centered_scores(self):
        rng = np.random.default_rng(9)
        score = first_principal_component(matrix_from(rng.random((5, 7))))
        assert np.linalg.norm(score.loadings) == pytest.approx(1.0)
        assert sum(score.scores.values()) == pytest.approx(0.0, abs=1e-12)

    def test_translation_invariance(self):
        rng = np.random.default_rng(3)
        values = rng.random((5, 6))
        base = first_principal_component(matrix_from(values))
        shifted = first_principal_component(matrix_from(values + 0.25))
        for community in base.scores:
            assert base.scores[community] == pytest.approx(
                shifted.scores[community], abs=1e-9
            )

    def test_scaling_scales_scores(self):
        rng = np.random.default_rng(4)
        values = rng.random((5, 6))
        base = first_principal_component(matrix_from(values))
        doubled = first_principal_component(matrix_from(values * 2.0))
        for community in base.scores:
            assert doubled.scores[community] == pytest.approx(
                2 * base.scores[community], abs=1e-9
            )

    def test_anchor_domain_orients_sign(self):
        rng = np.random.default_rng(6)
        values = rng.random((5, 4))
        base = first_principal_component(matrix_from(values))
        anchor = base.domains[int(np.argmax(np.abs(base.loadings)))]
        flipped = first_principal_component(matrix_from(values), anchor_domain=anchor)
        np.testing.assert_allclose(flipped.loadings, base.loadings)

    def test_too_small_raises(self):
        with pytest.raises(ParameterError):
            first_principal_component(matrix_from([[1.0, 0.0]]))


class TestClusterScores:
    def test_three_obvious_groups(self):
        scores = {"a": -10.0, "b": -9.0, "c": 0.0, "d": 1.0, "e": 9.0, "f": 10.0}
        result = cluster_scores(scores, k=3)
        assert result.assignment == {"a": 0, "b": 0, "c": 1, "d": 1, "e": 2, "f": 2}
        oracle = oracles.best_contiguous_three_split(list(scores.values()))
        assert oracle == [[-10.0, -9.0], [0.0, 1.0], [9.0, 10.0]]

    def test_single_cluster(self):
        result = cluster_scores({"a": 1.0, "b": 1.0, "c": 1.0}, k=1)
        assert set(result.assignment.values()) == {0}

    def test_singletons(self):
        result = cluster_scores({"a": 1.0, "b": 2.0, "c": 3.0}, k=3)
        assert sorted(result.assignment.values()) == [0, 1, 2]
        assert result.assignment["a"] == 0 and result.assignment["c"] == 2

    def test_degenerate_raises(self):
        with pytest.raises(DegenerateClusteringError):
            cluster_scores({"a": 1.0, "b": 1.0, "c": 2.0}, k=3)

    def test_too_few_communities(self):
        with pytest.raises(ParameterError):
            cluster_scores({"a": 1.0, "b": 2.0}, k=3)

    # two-decimal score grids keep merge distances well separated; adjacent
    # representable doubles could otherwise reorder merges through rounding
    @given(
        st.lists(
            st.integers(min_value=-10_000, max_value=10_000).map(lambda v: v / 100),
            min_size=5,
            max_size=12,
            unique=True,
        )
    )
    @settings(max_examples=60)
    def test_clusters_are_contiguous_intervals(self, values):
        scores = {f"c{i}": v for i, v in enumerate(values)}
        result = cluster_scores(scores, k=3)
        by_cluster = {}
        for label, cluster in result.assignment.items():
            by_cluster.setdefault(cluster, []).append(scores[label])
        spans = sorted(
            (min(group), max(group)) for group in by_cluster.values()
        )
        for (_, high), (low, _) in zip(spans, spans[1:]):
            assert high < low

    @given(
        st.lists(
            st.integers(min_value=-5_000, max_value=5_000).map(lambda v: v / 100),
            min_size=5,
            max_size=10,
            unique=True,
        )
    )
    @settings(max_examples=60)
    def test_centroid_and_average_linkage_agree_in_1d(self, values):
        # for disjoint 1-D intervals both linkages reduce to the same
        # centroid distances, so the k=3 assignments should coincide
        scores = {f"c{i}": v for i, v in enumerate(values)}
        centroid = cluster_scores(scores, k=3, method="centroid")
        average = cluster_scores(scores, k=3, method="average")
        assert centroid.assignment == average.assignment

    def test_scaling_preserves_assignment(self):
        scores = {"a": -4.0, "b": -3.5, "c": 0.5, "d": 1.0, "e": 6.0, "f": 7.0}
        base = cluster_scores(scores, k=3)
        scaled = cluster_scores({k: v * 3.0 for k, v in scores.items()}, k=3)
        assert base.assignment == scaled.assignment

    def test_members_helper(self):
        result = cluster_scores({"a": 0.0, "b": 0.1, "c": 5.0, "d": 9.0}, k=2)
        assert result.members(0) == frozenset({"a", "b"})
