#include <doctest.h>

#include <cmath>

#include "lingd/hsic.hpp"
#include "lingd/rng.hpp"

using namespace lingd;

namespace {
Matrix gaussian_column(Rng& rng, Index n) {
    Matrix x(n, 1);
    for (Index i = 0; i < n; ++i) x(i, 0) = rng.normal();
    return x;
}
}  // namespace

TEST_SUITE("hsic") {

TEST_CASE("zero-variance block is rejected") {
    Rng rng(1);
    const Matrix x = gaussian_column(rng, 100);
    const Matrix y = Matrix::Constant(100, 1, 3.0);
    CHECK_THROWS_AS(hsic_statistic(x, y), DegenerateInput);
    CHECK_THROWS_AS(hsic_test(x, y, 0.05), DegenerateInput);
}

TEST_CASE("identical samples exceed the permutation null") {
    Rng rng(2);
    const Matrix x = gaussian_column(rng, 200);
    HsicOptions opts;
    opts.use_permutation = true;
    opts.seed = 7;
    CHECK(hsic_test(x, x, 0.01, opts) == Independence::dependent);
    CHECK(hsic_statistic(x, x) > 0.0);
}

TEST_CASE("independent samples stay below the permutation threshold") {
    int independent = 0;
    HsicOptions opts;
    opts.use_permutation = true;
    opts.permutations = 200;
    for (int s = 0; s < 100; ++s) {
        Rng rng(100 + s);
        const Matrix x = gaussian_column(rng, 200);
        const Matrix y = gaussian_column(rng, 200);
        opts.seed = s;
        if (hsic_test(x, y, 0.05, opts) == Independence::independent)
            ++independent;
    }
    CHECK(independent >= 90);
}

TEST_CASE("gamma test flags a cubic relationship") {
    Rng rng(3);
    const Index n = 500;
    Matrix x = gaussian_column(rng, n);
    Matrix y(n, 1);
    for (Index i = 0; i < n; ++i)
        y(i, 0) = std::pow(x(i, 0), 3) + 0.1 * rng.normal();
    CHECK(hsic_test(x, y, 0.05) == Independence::dependent);
    HsicOptions opts;
    opts.use_permutation = true;
    opts.seed = 4;
    CHECK(hsic_test(x, y, 0.05, opts) == Independence::dependent);
}

TEST_CASE("alpha near one always rejects") {
    Rng rng(5);
    const Matrix x = gaussian_column(rng, 200);
    const Matrix y = gaussian_column(rng, 200);
    CHECK(hsic_test(x, y, 0.999) == Independence::dependent);
}

TEST_CASE("decision is invariant under affine rescaling") {
    Rng base(6);
    const Index n = 400;
    Matrix x = gaussian_column(base, n);
    Matrix y(n, 1);
    for (Index i = 0; i < n; ++i)
        y(i, 0) = 0.8 * x(i, 0) + 0.6 * base.normal();
    const Independence reference = hsic_test(x, y, 0.05);
    for (int trial = 0; trial < 50; ++trial) {
        Rng rng(700 + trial);
        const double ax = rng.signed_uniform(0.01, 100.0);
        const double bx = rng.uniform(-5.0, 5.0);
        const double ay = rng.signed_uniform(0.01, 100.0);
        const double by = rng.uniform(-5.0, 5.0);
        const Matrix xr = (x.array() * ax + bx).matrix();
        const Matrix yr = (y.array() * ay + by).matrix();
        CHECK(hsic_test(xr, yr, 0.05) == reference);
    }
}

TEST_CASE("type-I error of the gamma test is near the level") {
    const double alpha = 0.05;
    int rejections = 0;
    const int trials = 500;
    for (int s = 0; s < trials; ++s) {
        Rng rng(9000 + s);
        const Matrix x = gaussian_column(rng, 500);
        const Matrix y = gaussian_column(rng, 500);
        if (hsic_test(x, y, alpha) == Independence::dependent) ++rejections;
    }
    const double rate = static_cast<double>(rejections) / trials;
    CHECK(rate < alpha + 0.05);
    CHECK(rate >= 0.0);
}

TEST_CASE("multivariate blocks are accepted") {
    Rng rng(8);
    const Index n = 300;
    Matrix x(n, 2), y(n, 3);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < 2; ++j) x(i, j) = rng.normal();
        for (Index j = 0; j < 3; ++j) y(i, j) = rng.normal();
    }
    CHECK(hsic_test(x, y, 0.05) == Independence::independent);
    y.col(0) = x.col(0);
    CHECK(hsic_test(x, y, 0.05) == Independence::dependent);
}

TEST_CASE("subsampling caps the kernel size without losing the signal") {
    Rng rng(9);
    const Index n = 6000;
    Matrix x = gaussian_column(rng, n);
    Matrix y = x;
    HsicOptions opts;
    opts.n_max = 500;
    CHECK(hsic_test(x, y, 0.05, opts) == Independence::dependent);
}

TEST_CASE("gamma quantile matches the chi-square special case") {
    // Gamma(shape=1/2, scale=2) is chi-square with one degree of freedom
    const double q95 = detail::gamma_quantile(0.95, 0.5, 2.0);
    CHECK(q95 == doctest::Approx(3.841458).epsilon(1e-4));
    const double q50 = detail::gamma_quantile(0.5, 1.0, 1.0);
    CHECK(q50 == doctest::Approx(std::log(2.0)).epsilon(1e-6));
}

}  // TEST_SUITE
