import math
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cheney_sharma import abel
from cheney_sharma.abel import (abel_factor, bivariate_weight_matrix, bivariate_weights,
                                choose_method, log_abel_factor, log_factorials,
                                univariate_weights)
from cheney_sharma.core import MultiIndex, OperatorParams, SimplexPoint


def exact_bivariate_weight(n, beta, x1, x2, k1, k2):
    """Exact rational weight; beta, x1, x2 are Fractions."""
    def factor(u, k):
        return Fraction(1) if k == 0 else u * (u + k * beta) ** (k - 1)
    rest = 1 - x1 - x2
    mult = math.factorial(n) // (math.factorial(k1) * math.factorial(k2)
                                 * math.factorial(n - k1 - k2))
    return (mult * factor(x1, k1) * factor(x2, k2) * factor(rest, n - k1 - k2)
            / (1 + n * beta) ** (n - 1))


class TestAbelFactor:
    def test_examples(self):
        assert abel_factor(0.3, 0, 0.1) == 1.0
        assert abel_factor(0.5, 1, 0.7) == 0.5
        assert abel_factor(0.5, 2, 0.1) == pytest.approx(0.35, rel=1e-15)

    def test_zero_base(self):
        assert abel_factor(0.0, 0, 0.2) == 1.0
        assert abel_factor(0.0, 3, 0.2) == 0.0
        assert abel_factor(0.0, 1, 0.0) == 0.0

    @pytest.mark.parametrize("args", [(-0.1, 2, 0.1), (0.1, 2, -0.1), (0.1, -1, 0.1)])
    def test_rejects(self, args):
        with pytest.raises(ValueError):
            abel_factor(*args)

    def test_overflow_signalled(self):
        with pytest.raises(OverflowError):
            abel_factor(1.0, 400, 10.0)
        assert math.isfinite(log_abel_factor(1.0, 400, 10.0))

    def test_log_examples(self):
        assert log_abel_factor(0.3, 0, 5.0) == 0.0
        assert log_abel_factor(0.0, 3, 0.1) == -math.inf
        assert log_abel_factor(0.5, 2, 0.1) == pytest.approx(math.log(0.35), rel=1e-15)

    @given(st.floats(1e-6, 1.0), st.integers(0, 60), st.floats(0.0, 3.0))
    def test_log_matches_linear(self, u, k, beta):
        assert math.exp(log_abel_factor(u, k, beta)) == pytest.approx(
            abel_factor(u, k, beta), rel=1e-13)


class TestLogFactorials:
    def test_against_exact(self):
        lf = log_factorials()
        assert lf.size >= 4097
        for k in (0, 1, 5, 170, 1000, 4096):
            assert lf[k] == pytest.approx(math.log(math.factorial(k)), rel=1e-15, abs=0)

    def test_grows_beyond_default(self):
        assert log_factorials(5000)[5000] == pytest.approx(math.lgamma(5001), rel=1e-14)

    def test_concurrent_first_use(self, monkeypatch):
        monkeypatch.setattr(abel, "_lf_table", None)
        with ThreadPoolExecutor(8) as pool:
            tables = list(pool.map(lambda _: log_factorials(100), range(32)))
        assert all(np.array_equal(t[:101], tables[0][:101]) for t in tables)


class TestUnivariateWeights:
    @pytest.mark.parametrize("beta", [0.0, 0.7, 12.0])
    def test_degree_one(self, beta):
        w = univariate_weights(OperatorParams(1, beta), 0.25).weights
        np.testing.assert_allclose(w, [0.75, 0.25], rtol=0, atol=1e-15)

    @pytest.mark.parametrize("method", ["direct", "log"])
    def test_beta_zero_is_binomial(self, method):
        w = univariate_weights(OperatorParams(5, 0.0), 0.4, method).weights
        ref = [math.comb(5, k) * 0.4 ** k * 0.6 ** (5 - k) for k in range(6)]
        np.testing.assert_allclose(w, ref, rtol=1e-13)

    @pytest.mark.parametrize("n,beta", [(3, 0.2), (40, 1.5), (200, 10.0)])
    def test_left_endpoint(self, n, beta):
        w = univariate_weights(OperatorParams(n, beta), 0.0).weights
        assert w[0] == pytest.approx(1.0, abs=1e-15)
        assert np.all(w[1:] == 0.0)

    @pytest.mark.parametrize("x", [-0.01, 1.01, math.nan])
    def test_rejects_outside(self, x):
        with pytest.raises(ValueError):
            univariate_weights(OperatorParams(3, 0.1), x)

    def test_exact_rational(self):
        n, beta, x = 7, Fraction(3, 10), Fraction(2, 5)
        for method in ("direct", "log"):
            w = univariate_weights(OperatorParams(n, float(beta)), float(x), method).weights
            for k in range(n + 1):
                exact = (math.comb(n, k) * x * (x + k * beta) ** (k - 1) * (1 - x)
                         * (1 - x + (n - k) * beta) ** (n - k - 1) / (1 + n * beta) ** (n - 1))
                assert w[k] == pytest.approx(float(exact), rel=1e-13)

    def test_csv(self):
        table = univariate_weights(OperatorParams(1, 0.7), 0.25)
        assert table.to_csv() == "k,weight\n0,0.75\n1,0.25\n"


class TestBivariateWeights:
    @pytest.mark.parametrize("beta", [0.0, 0.7, 5.0])
    def test_degree_one(self, beta):
        e = bivariate_weights(OperatorParams(1, beta), SimplexPoint(0.3, 0.2)).entries
        assert e[MultiIndex(0, 0)] == pytest.approx(0.5, abs=1e-16)
        assert e[MultiIndex(1, 0)] == 0.3
        assert e[MultiIndex(0, 1)] == 0.2

    @pytest.mark.parametrize("method", ["direct", "log"])
    def test_degree_two_bernstein(self, method):
        e = bivariate_weights(OperatorParams(2, 0.0), SimplexPoint(0.3, 0.2), method).entries
        expected = {(0, 0): 0.25, (1, 0): 0.30, (0, 1): 0.20,
                    (2, 0): 0.09, (1, 1): 0.12, (0, 2): 0.04}
        assert set(e) == set(expected)
        for k, v in expected.items():
            assert e[k] == pytest.approx(v, rel=1e-14)

    @pytest.mark.parametrize("method", ["direct", "log"])
    @pytest.mark.parametrize("n,beta,x", [(6, "1/4", ("1/5", "3/10")), (12, "2/5", ("1/8", "5/8")),
                                          (20, "1/10", ("1/3", "1/3"))])
    def test_exact_rational(self, method, n, beta, x):
        beta, x1, x2 = Fraction(beta), Fraction(x[0]), Fraction(x[1])
        table = bivariate_weights(OperatorParams(n, float(beta)),
                                  SimplexPoint(float(x1), float(x2)), method)
        for k, w in table.entries.items():
            exact = exact_bivariate_weight(n, beta, x1, x2, *k)
            assert w == pytest.approx(float(exact), rel=1e-12)

    @pytest.mark.parametrize("n,beta", [(1, 0.0), (7, 0.5), (60, 3.0), (300, 10.0)])
    @pytest.mark.parametrize("vertex", [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)])
    def test_vertex_interpolation(self, n, beta, vertex):
        table = bivariate_weights(OperatorParams(n, beta), SimplexPoint(*vertex))
        target = MultiIndex(round(n * vertex[0]), round(n * vertex[1]))
        e = table.entries
        assert e[target] == pytest.approx(1.0, abs=1e-12)
        assert sum(abs(w) for k, w in e.items() if k != target) <= 1e-12

    def test_rejects_outside(self):
        with pytest.raises(ValueError):
            bivariate_weights(OperatorParams(3, 0.1), (0.7, 0.7))

    @pytest.mark.parametrize("n", [1, 2, 5, 11, 20])
    @pytest.mark.parametrize("beta", [0.0, 0.05, 0.25])
    def test_log_matches_direct(self, n, beta):
        rng = np.random.default_rng(n)
        pts = rng.random((40, 2))
        pts[pts.sum(1) > 1] = 1 - pts[pts.sum(1) > 1]
        p = OperatorParams(n, beta)
        d = bivariate_weight_matrix(p, pts[:, 0], pts[:, 1], "direct")
        lg = bivariate_weight_matrix(p, pts[:, 0], pts[:, 1], "log")
        keep = d > 1e-290
        np.testing.assert_allclose(lg[keep], d[keep], rtol=1e-10)
        assert np.all(lg[~keep] <= 1e-280)

    def test_direct_overflow_is_reported(self):
        with pytest.raises(OverflowError):
            bivariate_weights(OperatorParams(400, 10.0), SimplexPoint(0.3, 0.3), "direct")

    def test_method_choice(self):
        assert choose_method(OperatorParams(20, 0.25)) == "direct"
        assert choose_method(OperatorParams(21, 0.0)) == "log"
        assert choose_method(OperatorParams(10, 0.6)) == "log"
        with pytest.raises(ValueError):
            choose_method(OperatorParams(10, 0.6), "fast")

    @settings(max_examples=60, deadline=None)
    @given(st.integers(1, 120), st.sampled_from([0.0, 0.01, 0.1, 1.0, 10.0]),
           st.floats(0, 1), st.floats(0, 1))
    def test_partition_and_sign(self, n, beta, a, b):
        if a + b > 1:
            a, b = 1 - a, 1 - b
        table = bivariate_weights(OperatorParams(n, beta), SimplexPoint(a, b))
        assert abs(table.total() - 1.0) <= 1e-12
        assert table.weights.min() >= 0.0
        assert len(table.weights) == (n + 1) * (n + 2) // 2

    def test_serialisation(self):
        table = bivariate_weights(OperatorParams(2, 0.0), SimplexPoint(0.3, 0.2))
        lines = table.to_csv().splitlines()
        assert lines[0] == "k1,k2,weight"
        assert [ln.split(",")[:2] for ln in lines[1:]] == [
            ["0", "0"], ["0", "1"], ["0", "2"], ["1", "0"], ["1", "1"], ["2", "0"]]
        for ln, w in zip(lines[1:], table.weights):
            assert float(ln.split(",")[2]) == w
        d = table.to_dict()
        assert d["n"] == 2 and d["x"] == [0.3, 0.2] and len(d["weights"]) == 6
