#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "chromacs/errors.hpp"
#include "chromacs/solver.hpp"
#include "helpers.hpp"

using namespace chromacs;
using chromacs::testing::max_abs_diff;
using chromacs::testing::random_vector;

namespace {

DenseOperator gaussian_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0 / std::sqrt(static_cast<double>(rows)));
    std::vector<double> a(rows * cols);
    for (double& v : a) v = n(rng);
    return DenseOperator(rows, cols, std::move(a));
}

// Gaussian elimination with partial pivoting on (A A^T) w = r.
std::vector<double> direct_normal_solve(const DenseOperator& A, std::vector<double> r) {
    const std::size_t m = A.rows();
    std::vector<double> M(m * m, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
            for (std::size_t k = 0; k < A.cols(); ++k) M[i * m + j] += A(i, k) * A(j, k);
    for (std::size_t c = 0; c < m; ++c) {
        std::size_t piv = c;
        for (std::size_t i = c + 1; i < m; ++i)
            if (std::abs(M[i * m + c]) > std::abs(M[piv * m + c])) piv = i;
        for (std::size_t j = 0; j < m; ++j) std::swap(M[c * m + j], M[piv * m + j]);
        std::swap(r[c], r[piv]);
        for (std::size_t i = c + 1; i < m; ++i) {
            const double f = M[i * m + c] / M[c * m + c];
            for (std::size_t j = c; j < m; ++j) M[i * m + j] -= f * M[c * m + j];
            r[i] -= f * r[c];
        }
    }
    std::vector<double> w(m);
    for (std::size_t i = m; i-- > 0;) {
        double acc = r[i];
        for (std::size_t j = i + 1; j < m; ++j) acc -= M[i * m + j] * w[j];
        w[i] = acc / M[i * m + i];
    }
    return w;
}

double residual(const LinearOperator& A, std::span<const double> u, std::span<const double> y) {
    const auto Au = A.apply(u);
    std::vector<double> d(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) d[i] = y[i] - Au[i];
    return norm2(d);
}

} // namespace

TEST_CASE("soft_threshold") {
    const auto out = soft_threshold(std::vector<double>{3.0, -0.5, -4.0, 1.0}, 1.0);
    CHECK(out == std::vector<double>{2.0, 0.0, -3.0, 0.0});
    const auto v = random_vector(50, 1);
    CHECK(soft_threshold(v, 0.0) == v);
    try {
        soft_threshold(v, -1.0);
        FAIL("expected NegativeThreshold");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::NegativeThreshold);
    }
}

TEST_CASE("soft_threshold minimises the prox objective") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-0.3, 0.3);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto v = random_vector(12, seed, -2.0, 2.0);
        const double t = 0.1 + 0.05 * static_cast<double>(seed);
        const auto p = soft_threshold(v, t);
        const auto objective = [&](const std::vector<double>& x) {
            double l1 = 0.0, sq = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                l1 += std::abs(x[i]);
                sq += (x[i] - v[i]) * (x[i] - v[i]);
            }
            return t * l1 + 0.5 * sq;
        };
        const double best = objective(p);
        for (int trial = 0; trial < 200; ++trial) {
            auto q = p;
            for (double& x : q) x += u(rng) * (trial % 2 ? 1e-3 : 1.0);
            CHECK(objective(q) >= best - 1e-14);
        }
    }
}

TEST_CASE("cg_normal_solve") {
    const ScaledIdentity I(10), twoI(10, 2.0);
    const auto r = random_vector(10, 2);
    SolverConfig cfg;
    const auto w1 = cg_normal_solve(I, r, cfg);
    CHECK(w1.converged);
    CHECK(max_abs_diff(w1.w, r) <= 1e-14);
    const auto w2 = cg_normal_solve(twoI, r, cfg);
    for (std::size_t i = 0; i < 10; ++i) CHECK(w2.w[i] == doctest::Approx(r[i] / 4.0).epsilon(1e-13));

    const auto A = gaussian_matrix(20, 50, 3);
    const auto rr = random_vector(20, 4);
    const auto res = cg_normal_solve(A, rr, cfg);
    CHECK(res.converged);
    CHECK(res.relative_residual <= 1e-10);
    CHECK(max_abs_diff(res.w, direct_normal_solve(A, rr)) <= 1e-8);

    SolverConfig mu_cfg;
    mu_cfg.tikhonov_mu = 1.0;
    const auto wmu = cg_normal_solve(I, r, mu_cfg);
    for (std::size_t i = 0; i < 10; ++i) CHECK(wmu.w[i] == doctest::Approx(r[i] / 2.0).epsilon(1e-13));

    SolverConfig tiny;
    tiny.cg_max_iters = 2;
    const auto stalled = cg_normal_solve(A, rr, tiny);
    CHECK_FALSE(stalled.converged);
    CHECK(stalled.iterations == 2);
    CHECK(stalled.relative_residual > 1e-10);

    CHECK(cg_normal_solve(A, std::vector<double>(20, 0.0), cfg).w == std::vector<double>(20, 0.0));
    CHECK_THROWS_AS(cg_normal_solve(A, std::vector<double>(19, 0.0), cfg), Error);
}

TEST_CASE("project_affine") {
    const auto A = gaussian_matrix(30, 80, 6);
    const auto y = random_vector(30, 7);
    const SolverConfig cfg;

    const auto p = project_affine(std::vector<double>(80, 0.0), A, y, cfg);
    CHECK(residual(A, p.u, y) <= 1e-8 * norm2(y));
    // minimum-norm solution lies in the row space: u = A^T w
    CHECK(max_abs_diff(p.u, A.apply_adjoint(direct_normal_solve(A, y))) <= 1e-8);

    const auto v = random_vector(80, 8);
    const auto u = project_affine(v, A, y, cfg).u;
    const auto uu = project_affine(u, A, y, cfg).u;
    CHECK(max_abs_diff(u, uu) <= 1e-8);
    CHECK(residual(A, u, y) / norm2(y) <= 1e-6);
    // v - u is orthogonal to the null space: A^T-range check via the projection of the difference
    std::vector<double> diff(80);
    for (std::size_t i = 0; i < 80; ++i) diff[i] = u[i] - v[i];
    const auto back = A.apply_adjoint(direct_normal_solve(A, A.apply(diff)));
    CHECK(max_abs_diff(back, diff) <= 1e-8);

    const auto feasible = A.apply(v);
    CHECK(max_abs_diff(project_affine(v, A, feasible, cfg).u, v) <= 1e-10);

    SolverConfig eps;
    eps.epsilon = 0.1;
    try {
        project_affine(v, A, y, eps);
        FAIL("expected Unsupported");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::Unsupported);
    }
}

TEST_CASE("douglas_rachford trivial cases") {
    const auto A = gaussian_matrix(10, 25, 9);
    SolverConfig cfg;
    const auto zero = douglas_rachford(A, std::vector<double>(10, 0.0), cfg);
    CHECK(zero.report.iterations == 1);
    CHECK(zero.report.converged);
    for (double v : zero.alpha) CHECK(v == 0.0);

    const ScaledIdentity I(16);
    std::vector<double> y(16, 0.0);
    y[3] = 2.0;
    y[11] = -1.5;
    const auto id = douglas_rachford(I, y, cfg);
    CHECK(max_abs_diff(id.alpha, y) <= 1e-12);
}

TEST_CASE("douglas_rachford recovers a planted sparse vector") {
    const std::size_t m = 60, n = 150;
    const auto A = gaussian_matrix(m, n, 10);
    std::vector<double> truth(n, 0.0);
    std::mt19937_64 rng(11);
    for (std::size_t i : {3u, 17u, 40u, 77u, 101u, 140u}) truth[i] = std::normal_distribution<double>()(rng) + 1.0;
    const auto y = A.apply(truth);
    SolverConfig cfg;
    cfg.record_trace = true;
    const auto r = douglas_rachford(A, y, cfg);
    std::vector<double> err(n);
    for (std::size_t i = 0; i < n; ++i) err[i] = r.alpha[i] - truth[i];
    CHECK(norm2(err) / norm2(truth) <= 1e-4);
    CHECK(r.report.feasibility_residual <= 1e-6);
    CHECK(r.report.converged);
    CHECK(r.report.trace.size() == r.report.iterations);
    CHECK(r.report.gamma > 0.0);

    std::ostringstream csv;
    write_trace_csv(r.report.trace, csv);
    CHECK(csv.str().rfind("iter,l1_value,rel_change,feas_residual,elapsed_s\n", 0) == 0);

    // deterministic given inputs
    const auto again = douglas_rachford(A, y, cfg);
    CHECK(again.alpha == r.alpha);
}

TEST_CASE("douglas_rachford reports divergence and bad configs") {
    const auto A = gaussian_matrix(5, 8, 12);
    const auto y = random_vector(5, 13);
    SolverConfig bad;
    bad.relax = 2.5;
    CHECK_THROWS_AS(douglas_rachford(A, y, bad), Error);
    SolverConfig nan;
    nan.gamma = std::nan("");
    CHECK_THROWS_AS(douglas_rachford(A, y, nan), Error);
    auto poisoned = y;
    poisoned[2] = std::numeric_limits<double>::infinity();
    try {
        douglas_rachford(A, poisoned, SolverConfig{});
        FAIL("expected NonFinite");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::NonFinite);
    }
}
