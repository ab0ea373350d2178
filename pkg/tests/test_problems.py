"""
Tests for benchmark problem definitions and sampling.
"""

import numpy as np
import pytest
from scipy.stats import kstest, uniform

from src.diffusion_sr.bench.problems import SamplingSpec, load_benchmark, load_problems
from src.diffusion_sr.errors import UnknownSuiteError
from src.diffusion_sr.symbolic.expression import max_variable_index


class TestProblemTable:
    """Suites, names and parsed ground truths."""

    def test_suite_sizes(self):
        assert len(load_problems("all")) == 48
        sizes = {suite: len(load_problems(suite)) for suite in ("nguyen", "livermore", "constant", "jin")}
        assert sizes == {"nguyen": 12, "livermore": 22, "constant": 8, "jin": 6}

    def test_suite_names_are_case_insensitive(self):
        assert [p.name for p in load_problems(" Nguyen ")][:2] == ["Nguyen-1", "Nguyen-2"]

    def test_unknown_suite_and_problem(self):
        with pytest.raises(UnknownSuiteError):
            load_problems("feynman")
        with pytest.raises(UnknownSuiteError):
            load_problems("nguyen", ["Nguyen-99"])

    def test_every_ground_truth_parses(self):
        for problem in load_problems("all"):
            assert max_variable_index(problem.ground_truth) <= problem.variables, problem.name

    def test_reference_rows(self):
        [nguyen8] = load_problems("nguyen", ["Nguyen-8"])
        assert str(nguyen8.sampling) == "U(0,4,200)"
        [constant4] = load_problems("constant", ["constant-4"])
        assert constant4.variables == 2


class TestSampling:
    def test_every_problem_samples(self):
        for problem in load_problems("all"):
            points = problem.sample(0)
            assert points.dims == problem.variables
            assert points.n_points <= problem.sampling.count

    def test_nguyen8_split(self):
        [(problem, split)] = load_benchmark("nguyen", seed=0, names=["Nguyen-8"])
        assert split.train.n_points == 150
        assert split.test.n_points == 50
        assert (split.train.Z >= 0).all() and (split.train.Z <= 4).all()
        np.testing.assert_allclose(split.train.y, np.sqrt(split.train.Z[:, 0]))

    def test_livermore11_shape(self):
        [problem] = load_problems("livermore", ["Livermore-11"])
        points = problem.sample(1)
        assert points.n_points == 500
        assert points.dims == 2

    def test_sampling_is_deterministic_per_problem(self):
        a, b = load_problems("nguyen")[:2]
        np.testing.assert_array_equal(a.sample(3).Z, a.sample(3).Z)
        assert not np.array_equal(a.sample(3).Z, b.sample(3).Z)
        assert not np.array_equal(a.sample(3).Z, a.sample(4).Z)

    def test_uniform_sampler_distribution(self):
        Z = SamplingSpec("U", 0.0, 4.0, 2000).sample(np.random.default_rng(0), 1)
        assert kstest(Z[:, 0], uniform(loc=0.0, scale=4.0).cdf).pvalue > 1e-3

    def test_equal_spacing_sampler(self):
        spec = SamplingSpec("E", -1.0, 1.0, 21)
        Z = spec.sample(np.random.default_rng(0), 2)
        grid = np.linspace(-1.0, 1.0, 21)
        for column in Z.T:
            np.testing.assert_array_equal(np.sort(column), grid)

    def test_sampler_override(self):
        [problem] = load_problems("nguyen", ["Nguyen-1"])
        points = problem.sample(0, sampler="E")
        np.testing.assert_allclose(np.sort(points.Z[:, 0]), np.linspace(-1, 1, 200))
