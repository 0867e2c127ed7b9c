#include <doctest.h>

#include <cmath>
#include <set>

#include "lingd/mbest.hpp"
#include "lingd/rng.hpp"
#include "lingd/sem.hpp"

using namespace lingd;

namespace {
// diamond 0->1, 0->2, 1->3, 2->3
WeightedDigraph diamond() {
    WeightedDigraph g(4);
    g.add_edge(0, 1, 0.8);
    g.add_edge(0, 2, 0.6);
    g.add_edge(1, 3, 0.7);
    g.add_edge(2, 3, -0.5);
    return g;
}

double f1(const IndexList& est, const IndexList& truth) {
    std::set<int> t(truth.begin(), truth.end());
    int tp = 0;
    for (int v : est)
        if (t.count(v)) ++tp;
    if (est.empty() && truth.empty()) return 1.0;
    if (tp == 0) return 0.0;
    const double prec = double(tp) / est.size();
    const double rec = double(tp) / truth.size();
    return 2.0 * prec * rec / (prec + rec);
}
}  // namespace

TEST_SUITE("mbest") {

TEST_CASE("full shrinkage above the critical lambda") {
    Rng rng(2);
    const Index n = 200;
    Matrix x(n, 3);
    Vector y(n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < 3; ++j) x(i, j) = rng.normal();
        y(i) = x(i, 0) + 0.1 * rng.normal();
    }
    const Vector beta = lasso(x, y, 5.0);
    CHECK(beta.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("lambda zero on an orthonormal design is least squares") {
    // exactly orthogonal unit-variance columns, so beta = X^T y / n
    const Index n = 400;
    Matrix x(n, 2);
    Vector y(n);
    for (Index i = 0; i < n; ++i) {
        x(i, 0) = (i % 2 == 0) ? 1.0 : -1.0;
        x(i, 1) = ((i / 2) % 2 == 0) ? 1.0 : -1.0;
        y(i) = 1.5 * x(i, 0) - 0.5 * x(i, 1);
    }
    const Vector beta = lasso(x, y, 0.0);
    const Vector target = x.transpose() * y / double(n);
    CHECK((beta - target).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(beta(0) == doctest::Approx(1.5));
    CHECK(beta(1) == doctest::Approx(-0.5));
}

TEST_CASE("single predictor solution is the soft-thresholded slope") {
    Rng rng(6);
    const Index n = 100000;
    Matrix x(n, 1);
    Vector y(n);
    for (Index i = 0; i < n; ++i) {
        x(i, 0) = rng.normal();
        y(i) = 2.0 * x(i, 0);
    }
    const Vector beta = lasso(x, y, 0.1);
    CHECK(beta(0) == doctest::Approx(1.9).epsilon(0.01));
}

TEST_CASE("nodewise lasso recovers the diamond blanket") {
    const auto g = diamond();
    SemSpec spec;
    spec.d = 4;
    spec.seed = 11;
    const auto data = simulate(g, 10000, spec);
    CHECK(nodewise_lasso_mb(data, 3) == IndexList{1, 2});
}

TEST_CASE("independent columns give an empty blanket") {
    SemSpec spec;
    spec.d = 6;
    spec.seed = 13;
    WeightedDigraph g(6);
    const auto data = simulate(g, 10000, spec);
    CHECK(nodewise_lasso_mb(data, 0).empty());
}

TEST_CASE("saturated target keeps every parent at small lambda") {
    WeightedDigraph g(5);
    for (int j = 0; j < 4; ++j) g.add_edge(j, 4, 0.7);
    SemSpec spec;
    spec.d = 5;
    spec.seed = 17;
    const auto data = simulate(g, 5000, spec);
    CHECK(nodewise_lasso_mb(data, 4, 0.01) == IndexList{0, 1, 2, 3});
}

TEST_CASE("theta of a single edge") {
    Matrix b = Matrix::Zero(2, 2);
    b(1, 0) = 0.6;
    const Matrix theta = theta_from_model(b, Vector::Ones(2));
    CHECK(theta(0, 0) == doctest::Approx(1.36));
    CHECK(theta(0, 1) == doctest::Approx(-0.6));
    CHECK(theta(1, 0) == doctest::Approx(-0.6));
    CHECK(theta(1, 1) == doctest::Approx(1.0));
}

TEST_CASE("theta of the empty graph is the precision diagonal") {
    Vector omega(3);
    omega << 4.0, 1.0, 0.25;
    const Matrix theta = theta_from_model(Matrix::Zero(3, 3), omega);
    CHECK((theta - Matrix(omega.cwiseInverse().asDiagonal()))
              .cwiseAbs()
              .maxCoeff() < 1e-12);
}

TEST_CASE("theta couples co-parents of a collider") {
    Matrix b = Matrix::Zero(3, 3);
    b(2, 0) = 0.5;  // 0 -> 2
    b(2, 1) = 0.8;  // 1 -> 2
    const Matrix theta = theta_from_model(b, Vector::Ones(3));
    CHECK(theta(0, 1) == doctest::Approx(0.4));  // product of the two weights
}

TEST_CASE("theta support equals the moral graph on random models") {
    Rng rng(19);
    int checked = 0;
    for (int trial = 0; trial < 200; ++trial) {
        SemSpec spec;
        spec.d = 3 + static_cast<int>(rng.uniform_int(4));
        spec.expected_degree = 2.0;
        spec.seed = rng.next();
        const auto g = random_dag(spec);
        Vector omega(spec.d);
        for (Index i = 0; i < spec.d; ++i) omega(i) = rng.uniform(0.5, 1.5);
        const Matrix theta = theta_from_model(g.B, omega);
        const Adjacency moral = moral_graph(g);
        for (Index i = 0; i < spec.d; ++i)
            for (Index j = 0; j < spec.d; ++j) {
                if (i == j) continue;
                CHECK((std::abs(theta(i, j)) > 1e-9) == moral(i, j));
            }
        ++checked;
    }
    CHECK(checked == 200);
}

TEST_CASE("inverse covariance support recovers the diamond moral graph") {
    const auto g = diamond();
    SemSpec spec;
    spec.d = 4;
    spec.seed = 23;
    const auto data = simulate(g, 20000, spec);
    const Adjacency est = inv_cov_moral_support(data, 0.1);
    const Adjacency truth = moral_graph(g);
    for (Index i = 0; i < 4; ++i)
        for (Index j = 0; j < 4; ++j) CHECK(est(i, j) == truth(i, j));
}

TEST_CASE("inverse covariance support of independent columns is empty") {
    SemSpec spec;
    spec.d = 5;
    spec.seed = 29;
    WeightedDigraph g(5);
    const auto data = simulate(g, 10000, spec);
    const Adjacency est = inv_cov_moral_support(data, 0.1);
    CHECK_FALSE(est.any());
}

TEST_CASE("blanket F1 does not degrade with more data") {
    Rng rng(31);
    double f1_small = 0.0, f1_large = 0.0;
    const int seeds = 20;
    for (int s = 0; s < seeds; ++s) {
        SemSpec spec;
        spec.d = 10;
        spec.expected_degree = 2.0;
        spec.seed = rng.next();
        const auto g = random_dag(spec);
        const int target = static_cast<int>(rng.uniform_int(spec.d));
        const IndexList truth = markov_blanket(g, target);
        f1_small += f1(nodewise_lasso_mb(simulate(g, 500, spec), target), truth);
        f1_large += f1(nodewise_lasso_mb(simulate(g, 5000, spec), target), truth);
    }
    CHECK(f1_large >= f1_small);
    CHECK(f1_large / seeds > 0.7);
}

}  // TEST_SUITE
