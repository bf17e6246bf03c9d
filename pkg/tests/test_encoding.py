import math

import numpy as np
import pytest
import scipy.sparse as sp
from sklearn.base import clone
from sklearn.pipeline import make_pipeline

from tunable_gmm.encoding import EncodedFeatures, GCWSEncoder, dot_estimate, encode, encode_dataset
from tunable_gmm.exceptions import EmptyVectorError, ProvenanceError
from tunable_gmm.gcws import HashSketch, Mode, estimate_pgmm, sketch
from tunable_gmm.linear import OneVsRestLogisticRegression
from tunable_gmm.vectors import LabeledDataset, SparseVector, parse_dataset, transform, write_dataset

from _oracles import related_pair


def tv(dense):
    return transform(SparseVector.from_dense(dense))


def test_hand_example():
    s = HashSketch([5, 2], [0, 0], 1, 1.0, 2, 10)
    f = encode(s, 2)
    assert f.positions.tolist() == [2, 7]
    assert f.length == 8 and f.k == 2
    assert f.to_sparse_vector().to_dense().tolist() == [0, 1, 0, 0, 0, 0, 1, 0]


def test_block_locality_and_count():
    rng = np.random.default_rng(0)
    x = tv(rng.normal(size=40))
    for b in (1, 3, 8):
        f = encode(sketch(x, 1.0, 2, 64), b)
        blocks = (f.positions - 1) // (1 << b)
        assert blocks.tolist() == list(range(64))
        assert f.to_sparse_vector().nnz == 64


def test_b_bounds():
    s = sketch(tv([1.0]), 1.0, 0, 2)
    for bad in (0, 33, 2.5):
        with pytest.raises(ValueError):
            encode(s, bad)
    assert encode(s, 32).length == 2 * 2**32


def test_identical_inputs():
    fu = encode(sketch(tv([3, -1, 2]), 1.0, 5, 50), 4)
    fv = encode(sketch(tv([3, -1, 2]), 1.0, 5, 50), 4)
    assert fu.positions.tolist() == fv.positions.tolist()
    assert dot_estimate(fu, fv) == 1.0


def test_disjoint_lossless_is_zero():
    su, sv = sketch(tv([1, 0, 2]), 1.0, 1, 100), sketch(tv([0, -4, 0]), 1.0, 1, 100)
    fu, fv = encode(su, 3), encode(sv, 3)
    assert dot_estimate(fu, fv) == 0.0 == estimate_pgmm(su, sv, Mode.INDEX_ONLY)


def test_lossless_equals_index_only():
    rng = np.random.default_rng(1)
    for n in range(30):
        u, v = related_pair(rng, 20)
        su, sv = sketch(tv(u), 0.5, n, 200), sketch(tv(v), 0.5, n, 200)
        b = math.ceil(math.log2(su.dim + 1))
        assert dot_estimate(encode(su, b), encode(sv, b)) == estimate_pgmm(su, sv, Mode.INDEX_ONLY)


def test_dot_matches_direct_low_bit_comparison():
    rng = np.random.default_rng(2)
    u, v = related_pair(rng, 300)
    su, sv = sketch(tv(u), 1.0, 3, 500), sketch(tv(v), 1.0, 3, 500)
    for b in (2, 4, 8):
        mask = (1 << b) - 1
        direct = np.mean((su.i_star & mask) == (sv.i_star & mask))
        fu, fv = encode(su, b), encode(sv, b)
        shared = fu.to_sparse_vector().to_dense() @ fv.to_sparse_vector().to_dense()
        assert shared == 500 * direct == 500 * dot_estimate(fu, fv)


def test_collision_bias_b8_vs_b12():
    rng = np.random.default_rng(3)
    k = 4096
    u, v = related_pair(rng, 2000, density=0.3)
    su, sv = sketch(tv(u), 1.0, 11, k), sketch(tv(v), 1.0, 11, k)
    assert su.dim > 2**8  # b = 8 cannot be lossless here
    q = estimate_pgmm(su, sv, Mode.INDEX_ONLY)
    e8 = dot_estimate(encode(su, 8), encode(sv, 8))
    e12 = dot_estimate(encode(su, 12), encode(sv, 12))
    sigma = math.sqrt(q * (1 - q) / k)
    assert e8 >= e12 - 3 * sigma
    assert e8 >= q and e12 >= q
    for b, e in ((8, e8), (12, e12)):
        assert abs(e - q) <= 4 * sigma + 2.0**-b


def test_mismatch():
    x = tv([1, 2])
    with pytest.raises(ProvenanceError):
        dot_estimate(encode(sketch(x, 1.0, 1, 10), 4), encode(sketch(x, 1.0, 1, 10), 5))
    with pytest.raises(ProvenanceError):
        dot_estimate(encode(sketch(x, 1.0, 1, 10), 4), encode(sketch(x, 1.0, 2, 10), 4))


def test_encoded_features_read_only():
    f = EncodedFeatures([1, 5], 2, (0, 1.0, 2, 4))
    with pytest.raises(ValueError):
        f.positions[0] = 3


class TestEncodeDataset:
    def test_single_record(self):
        ds = parse_dataset("3 1:-4 2:6\n")
        out = encode_dataset(ds, 1.0, 0, 16, 4)
        assert len(out) == 1 and out.labels.tolist() == [3]
        assert out[0][1].nnz == 16 and set(out[0][1].values.tolist()) == {1.0}

    def test_matches_per_record_pipeline(self):
        ds = parse_dataset("1 1:-4 2:6\n2 1:3 2:2\n")
        out = encode_dataset(ds, 0.5, 9, 32, 3)
        for (_, raw), (_, enc) in zip(ds, out):
            f = encode(sketch(transform(raw), 0.5, 9, 32), 3)
            assert enc.indices.tolist() == f.positions.tolist()

    def test_parses_back(self):
        ds = parse_dataset("1 1:-4 2:6\n2 1:3 2:2\n-1 2:0.5\n")
        out = encode_dataset(ds, 1.0, 4, 20, 5)
        back = parse_dataset(write_dataset(out))
        assert back.dim <= 2**5 * 20
        assert parse_dataset(write_dataset(out), dim=out.dim) == out

    def test_all_zero_record(self):
        ds = LabeledDataset(((1, SparseVector(3, [1], [2.0])), (2, SparseVector(3))), 3)
        with pytest.raises(EmptyVectorError, match="record 2"):
            encode_dataset(ds, 1.0, 0, 4, 2)

    def test_large_shape(self):
        rng = np.random.default_rng(5)
        records = []
        for n in range(3):
            x = rng.normal(size=784) * (rng.random(784) < 0.2)
            records.append((n, SparseVector.from_dense(x)))
        out = encode_dataset(LabeledDataset(tuple(records), 784), 1.0, 0, 1024, 8)
        assert out.dim == 262144
        assert all(v.nnz == 1024 for v in out.vectors)

    def test_threads_do_not_change_output(self):
        rng = np.random.default_rng(6)
        records = tuple((n % 2, SparseVector.from_dense(rng.normal(size=10))) for n in range(20))
        ds = LabeledDataset(records, 10)
        assert write_dataset(encode_dataset(ds, 1.0, 3, 64, 6, n_jobs=1)) == write_dataset(
            encode_dataset(ds, 1.0, 3, 64, 6, n_jobs=8)
        )


class TestEstimator:
    X = np.array([[-4.0, 6.0], [3.0, 2.0], [0.5, -1.0]])

    def test_matches_functional_api(self):
        enc = GCWSEncoder(p=0.5, n_hashes=32, b=3, seed=9).fit(self.X)
        Z = enc.transform(self.X)
        assert sp.issparse(Z) and Z.shape == (3, 8 * 32)
        ds = LabeledDataset(tuple((0, SparseVector.from_dense(r)) for r in self.X), 2)
        expected = encode_dataset(ds, 0.5, 9, 32, 3).to_csr()
        assert (Z != expected).nnz == 0

    def test_params_and_clone(self):
        enc = GCWSEncoder(p=2.0, n_hashes=8, b=2, seed=1)
        assert enc.get_params() == {"p": 2.0, "n_hashes": 8, "b": 2, "seed": 1, "n_jobs": 1}
        other = clone(enc).set_params(seed=2)
        assert enc.seed == 1 and other.seed == 2

    def test_sparse_input_and_width_check(self):
        enc = GCWSEncoder(n_hashes=8, b=2).fit(sp.csr_matrix(self.X))
        assert enc.transform(sp.csr_matrix(self.X)).shape == (3, 32)
        with pytest.raises(ValueError):
            enc.transform(np.ones((1, 3)))
        with pytest.raises(ValueError):
            enc.transform(np.zeros((1, 2)))

    def test_pipeline(self):
        rng = np.random.default_rng(0)
        X = rng.normal(size=(60, 4))
        y = (X[:, 0] * X[:, 1] > 0).astype(int)
        pipe = make_pipeline(GCWSEncoder(n_hashes=64, b=4, seed=2), OneVsRestLogisticRegression(C=1.0, epochs=50))
        pipe.fit(X, y)
        assert pipe.predict(X).shape == (60,)
        assert pipe.score(X, y) > 0.5
