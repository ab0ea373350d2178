"""
Tests for skeleton sampling, constant substitution, point sampling and corpora.
"""

import gzip
import json

import numpy as np
import pytest

from src.diffusion_sr.config.run_config import DataConfig
from src.diffusion_sr.data.corpus import (
    CORPUS_FORMAT,
    build_corpus,
    generate_record,
    load_corpus,
    read_corpus_header,
    record_expression,
)
from src.diffusion_sr.data.generator import sample_points, sample_skeleton, substitute_constants
from src.diffusion_sr.data.points import (
    PointSet,
    load_points_file,
    split_points,
    write_points_csv,
)
from src.diffusion_sr.errors import DataError, DegenerateExpressionError
from src.diffusion_sr.symbolic.expression import (
    Limits,
    NodeKind,
    complexity,
    evaluate_batch,
    has_placeholders,
    height,
    internal_nodes,
    max_variable_index,
    preorder,
)
from src.diffusion_sr.symbolic.parser import parse_infix
from src.diffusion_sr.symbolic.tokenizer import quantize_constant


class TestSkeletons:
    """Random skeletons respect limits and the variable count."""

    def test_limits_hold(self):
        rng = np.random.default_rng(0)
        limits = Limits(max_length=12, max_internal_nodes=4, max_height=4)
        for _ in range(200):
            tree = sample_skeleton(rng, limits, dims=2)
            assert complexity(tree) <= 12
            assert internal_nodes(tree) <= 4
            assert height(tree) <= 4
            assert max_variable_index(tree) <= 2

    def test_no_numeric_constants_before_substitution(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            tree = sample_skeleton(rng, dims=1, simplify=False)
            assert all(n.kind != NodeKind.CONSTANT for n in preorder(tree))

    def test_deterministic_for_seed(self):
        a = [sample_skeleton(np.random.default_rng(5), dims=3) for _ in range(3)]
        b = [sample_skeleton(np.random.default_rng(5), dims=3) for _ in range(3)]
        assert a == b

    def test_rejects_bad_dims(self):
        with pytest.raises(ValueError):
            sample_skeleton(np.random.default_rng(0), dims=4)


class TestConstantSubstitution:
    def test_ranges(self):
        rng = np.random.default_rng(2)
        skeleton = parse_infix("c * x_1 + c")
        for _ in range(100):
            full = substitute_constants(skeleton, rng)
            multiplicative = full.children[0].children[0].value
            additive = full.children[1].value
            assert 0.05 <= multiplicative <= 10.0
            assert -10.0 <= additive <= 10.0
            assert not has_placeholders(full)

    def test_quantized(self):
        rng = np.random.default_rng(3)
        full = substitute_constants(parse_infix("c + x_1"), rng, mantissa_digits=4)
        value = full.children[0].value
        assert quantize_constant(value, 4) == value


class TestPointSampling:
    def test_valid_and_bounded(self):
        rng = np.random.default_rng(4)
        expr = parse_infix("sqrt(x_1) + ln(x_2)")
        points = sample_points(expr, rng, n_max=80, n_min=60, dims=2)
        assert 60 <= points.n_points <= 80
        assert np.isfinite(evaluate_batch(expr, points.Z)).all()
        assert (points.Z[:, 0] >= 0).all() and (points.Z[:, 1] > 0).all()

    def test_degenerate_expression(self):
        rng = np.random.default_rng(5)
        with pytest.raises(DegenerateExpressionError):
            sample_points(parse_infix("asin(x_1 * 100)"), rng, n_max=100, n_min=100)

    def test_placeholders_rejected(self):
        with pytest.raises(DataError):
            sample_points(parse_infix("c * x"), np.random.default_rng(0))


class TestPointSets:
    """Validation, splitting and file formats."""

    def test_rejects_non_finite(self):
        with pytest.raises(DataError):
            PointSet(np.array([[0.0], [1.0]]), np.array([1.0, np.nan]))

    def test_split_is_deterministic_and_disjoint(self, quadratic_points):
        a = split_points(quadratic_points, seed=3)
        b = split_points(quadratic_points, seed=3)
        assert a.train.n_points == 30 and a.test.n_points == 10
        np.testing.assert_array_equal(a.train.Z, b.train.Z)
        train_rows = {tuple(r) for r in a.train.Z}
        assert not train_rows & {tuple(r) for r in a.test.Z}

    def test_csv_round_trip(self, tmp_path, planar_points):
        path = write_points_csv(planar_points, tmp_path / "points.csv")
        loaded = load_points_file(path)
        np.testing.assert_array_equal(loaded.Z, planar_points.Z)
        np.testing.assert_array_equal(loaded.y, planar_points.y)

    def test_json_record(self, tmp_path):
        path = tmp_path / "points.json"
        path.write_text(json.dumps({"points": {"Z": [[1.0], [2.0]], "y": [3.0, 4.0]}}))
        assert load_points_file(path).n_points == 2

    def test_bad_csv_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(DataError):
            load_points_file(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_points_file(tmp_path / "none.csv")


class TestCorpus:
    """Record generation and the JSON-lines corpus format."""

    @pytest.fixture
    def data_config(self) -> DataConfig:
        return DataConfig(count=8, n_min=20, n_max=30, max_internal_nodes=3, shard_size=3)

    def test_record_is_consistent(self, data_config):
        record = generate_record(0, 42, data_config)
        expr = record_expression(record, data_config)
        np.testing.assert_allclose(evaluate_batch(expr, record.points.Z), record.points.y)
        assert record_expression(record, data_config, full=False) is not None

    def test_record_depends_only_on_seed_and_index(self, data_config):
        assert generate_record(3, 42, data_config).to_json() == generate_record(3, 42, data_config).to_json()
        assert generate_record(3, 42, data_config).seed != generate_record(4, 42, data_config).seed

    def test_worker_count_does_not_change_output(self, tmp_path, data_config):
        one = build_corpus(8, 9, data_config, tmp_path / "one.jsonl", workers=1)
        two = build_corpus(8, 9, data_config, tmp_path / "two.jsonl", workers=2)
        assert one["records"] == two["records"] == 8
        assert (tmp_path / "one.jsonl").read_text() == (tmp_path / "two.jsonl").read_text()

    def test_gzip_and_header(self, tmp_path, data_config):
        path = tmp_path / "corpus.jsonl.gz"
        build_corpus(5, 1, data_config, path)
        with gzip.open(path, "rt") as handle:
            assert json.loads(handle.readline())["format"] == CORPUS_FORMAT
        assert read_corpus_header(path)["requested"] == 5
        assert len(load_corpus(path)) == 5
        assert len(load_corpus(path, limit=2)) == 2

    def test_dedup(self, tmp_path, data_config):
        config = data_config.model_copy(update={"dedup": True})
        summary = build_corpus(6, 2, config, tmp_path / "dedup.jsonl")
        records = load_corpus(tmp_path / "dedup.jsonl")
        assert summary["records"] == len(records)
        skeletons = [tuple(r.skeleton) for r in records]
        assert len(set(skeletons)) == len(skeletons)

    def test_rejects_foreign_file(self, tmp_path):
        path = tmp_path / "other.jsonl"
        path.write_text('{"format": "something-else"}\n')
        with pytest.raises(DataError):
            read_corpus_header(path)
