#include <doctest.h>

#include <random>

#include "fctn/tensor.hpp"
#include "oracles.hpp"

using namespace fctn;

namespace {

TensorD make_tensor(const Shape& shape, std::vector<double> vals) {
    TensorD::Vector v(static_cast<Index>(vals.size()));
    for (std::size_t i = 0; i < vals.size(); ++i) v[static_cast<Index>(i)] = vals[i];
    return TensorD(shape, std::move(v));
}

} // namespace

TEST_CASE("DenseTensor construction validates shape and length") {
    CHECK_THROWS_AS(TensorD(Shape{2, 0}), ShapeMismatch);
    CHECK_THROWS_AS(make_tensor({2, 3}, {1, 2, 3}), ShapeMismatch);
    const TensorD t(Shape{2, 3});
    CHECK(t.size() == 6);
    CHECK(t.order() == 2);
    // order-0 scalar tensors are legal
    const TensorD s = TensorD::from_scalar(4.0);
    CHECK(s.order() == 0);
    CHECK(s.size() == 1);
}

TEST_CASE("unfold: mode 1 of a matrix is the matrix itself") {
    const TensorD m = make_tensor({2, 3}, {1, 2, 3, 4, 5, 6});
    const TensorD u = unfold(m, 1);
    CHECK(u.shape() == Shape{2, 3});
    CHECK(u.data() == m.data());
}

TEST_CASE("unfold: mode 2 of a matrix is its transpose") {
    const TensorD m = make_tensor({2, 3}, {1, 2, 3, 4, 5, 6});
    const TensorD u = unfold(m, 2);
    CHECK(u.shape() == Shape{3, 2});
    for (Index i = 0; i < 2; ++i)
        for (Index j = 0; j < 3; ++j) CHECK(u.at({j, i}) == m.at({i, j}));
}

TEST_CASE("unfold mode 2 of a 2x2x2 tensor matches the nested-loop oracle") {
    TensorD t(Shape{2, 2, 2});
    for (Index i = 0; i < 2; ++i)
        for (Index j = 0; j < 2; ++j)
            for (Index k = 0; k < 2; ++k)
                t.at({i, j, k}) = 100.0 * static_cast<double>(i + 1) +
                                  10.0 * static_cast<double>(j + 1) + static_cast<double>(k + 1);
    const TensorD got = unfold(t, 2);
    const TensorD want = oracle::unfold_bruteforce(t, 2);
    CHECK(got.shape() == want.shape());
    CHECK(oracle::max_abs_diff(got, want) == 0.0);
    // spot check: entry (j, col) with col = i + 2*k, i fastest
    CHECK(got.at({1, 0}) == t.at({0, 1, 0}));
    CHECK(got.at({0, 1}) == t.at({1, 0, 0}));
    CHECK(got.at({0, 2}) == t.at({0, 0, 1}));
}

TEST_CASE("unfold rejects out-of-range modes") {
    const TensorD t(Shape{2, 2});
    CHECK_THROWS_AS(unfold(t, 0), InvalidMode);
    CHECK_THROWS_AS(unfold(t, 3), InvalidMode);
}

TEST_CASE("refold is the inverse of unfold for every mode") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> order_dist(1, 5), size_dist(1, 4);
    for (int trial = 0; trial < 50; ++trial) {
        Shape shape(static_cast<std::size_t>(order_dist(rng)));
        for (auto& d : shape) d = size_dist(rng);
        const TensorD t = oracle::random_tensor(shape, rng);
        for (int mode = 1; mode <= t.order(); ++mode) {
            const TensorD back = refold(unfold(t, mode), mode, shape);
            CHECK(back.shape() == shape);
            CHECK(oracle::max_abs_diff(back, t) == 0.0);
        }
    }
}

TEST_CASE("contract: matrix product case") {
    const TensorD a = make_tensor({2, 3}, {1, 4, 2, 5, 3, 6});
    const TensorD b = make_tensor({3, 4}, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12});
    const TensorD c = contract(a, {2}, b, {1});
    CHECK(c.shape() == Shape{2, 4});
    const TensorD want = oracle::contract_bruteforce(a, {2}, b, {1});
    CHECK(oracle::max_abs_diff(c, want) < 1e-14);
    CHECK(c.at({0, 0}) == doctest::Approx(1 * 1 + 2 * 2 + 3 * 3));
}

TEST_CASE("contract: dot product gives an order-0 tensor") {
    const TensorD u = make_tensor({3}, {1, 2, 3});
    const TensorD v = make_tensor({3}, {4, 5, 6});
    const TensorD d = contract(u, {1}, v, {1});
    CHECK(d.order() == 0);
    CHECK(d[0] == doctest::Approx(32.0));
}

TEST_CASE("contract: two matched axes against the quintuple-loop oracle") {
    std::mt19937_64 rng(3);
    const TensorD a = oracle::random_tensor({2, 3, 4}, rng);
    const TensorD b = oracle::random_tensor({3, 4, 5}, rng);
    const TensorD got = contract(a, {2, 3}, b, {1, 2});
    CHECK(got.shape() == Shape{2, 5});
    CHECK(oracle::max_abs_diff(got, oracle::contract_bruteforce(a, {2, 3}, b, {1, 2})) < 1e-12);
}

TEST_CASE("contract validates axes") {
    const TensorD a(Shape{2, 3});
    const TensorD b(Shape{4, 2});
    CHECK_THROWS_AS(contract(a, {1}, b, {1}), ShapeMismatch);
    CHECK_THROWS_AS(contract(a, {1, 1}, b, {1, 2}), InvalidAxes);
    CHECK_THROWS_AS(contract(a, {1}, b, {1, 2}), InvalidAxes);
    CHECK_THROWS_AS(contract(a, {3}, b, {1}), InvalidAxes);
}

TEST_CASE("contract agrees with the oracle on random small instances") {
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> size_dist(1, 3), order_dist(1, 3);
    for (int trial = 0; trial < 60; ++trial) {
        Shape sa(static_cast<std::size_t>(order_dist(rng)));
        for (auto& d : sa) d = size_dist(rng);
        // share the first min(orders) axes sizes on a random subset
        Shape sb(static_cast<std::size_t>(order_dist(rng)));
        for (auto& d : sb) d = size_dist(rng);
        const int shared = std::uniform_int_distribution<int>(
            0, std::min(static_cast<int>(sa.size()), static_cast<int>(sb.size())))(rng);
        std::vector<int> axes_a, axes_b;
        for (int s = 0; s < shared; ++s) {
            axes_a.push_back(s + 1);
            axes_b.push_back(s + 1);
            sb[static_cast<std::size_t>(s)] = sa[static_cast<std::size_t>(s)];
        }
        const TensorD a = oracle::random_tensor(sa, rng);
        const TensorD b = oracle::random_tensor(sb, rng);
        const TensorD got = contract(a, axes_a, b, axes_b);
        const TensorD want = oracle::contract_bruteforce(a, axes_a, b, axes_b);
        REQUIRE(got.shape() == want.shape());
        CHECK(oracle::max_abs_diff(got, want) < 1e-12);
    }
}

TEST_CASE("outer product norm is the product of norms") {
    std::mt19937_64 rng(23);
    const TensorD a = oracle::random_tensor({2, 3}, rng);
    const TensorD b = oracle::random_tensor({4}, rng);
    const TensorD outer = contract(a, {}, b, {});
    CHECK(outer.shape() == Shape{2, 3, 4});
    CHECK(frobenius_norm(outer) ==
          doctest::Approx(frobenius_norm(a) * frobenius_norm(b)).epsilon(1e-12));
}

TEST_CASE("frobenius_norm basics") {
    CHECK(frobenius_norm(TensorD(Shape{3, 2, 4})) == 0.0);
    CHECK(frobenius_norm(make_tensor({2}, {3, 4})) == doctest::Approx(5.0));
    CHECK(frobenius_norm(make_tensor({2, 2}, {1, 1, 1, 1})) == doctest::Approx(2.0));
}

TEST_CASE("relative_error basics and errors") {
    const TensorD x = make_tensor({2}, {1, 0});
    CHECK(relative_error(x, x) == 0.0);
    CHECK(relative_error(x, TensorD(Shape{2})) == doctest::Approx(1.0));
    CHECK(relative_error(x, make_tensor({2}, {0, 1})) == doctest::Approx(std::sqrt(2.0)));
    CHECK_THROWS_AS(relative_error(x, TensorD(Shape{3})), ShapeMismatch);
    CHECK_THROWS_AS(relative_error(TensorD(Shape{2}), x), DegenerateReference);
}

TEST_CASE("relative_error is scale invariant") {
    std::mt19937_64 rng(29);
    const TensorD x = oracle::random_tensor({3, 2}, rng);
    const TensorD y = oracle::random_tensor({3, 2}, rng);
    const double base = relative_error(x, y);
    for (double s : {2.0, -0.5, 1e6, 1e-6}) {
        const TensorD xs(x.shape(), x.data() * s);
        const TensorD ys(y.shape(), y.data() * s);
        CHECK(relative_error(xs, ys) == doctest::Approx(base).epsilon(1e-12));
    }
}
