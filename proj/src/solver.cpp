#include "chromacs/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>

#include "chromacs/errors.hpp"

namespace chromacs {

namespace {

// ||y - A u|| below this fraction of ||y|| counts as feasible
constexpr double kProjectionFloor = 1e-8;

double l1_norm(std::span<const double> v) {
    double acc = 0.0;
    for (double x : v) acc += std::abs(x);
    return acc;
}

double linf_norm(std::span<const double> v) {
    double acc = 0.0;
    for (double x : v) acc = std::max(acc, std::abs(x));
    return acc;
}

// (A A^T + mu I) p
void normal_apply(const LinearOperator& A, double mu, std::span<const double> p, std::span<double> out,
                  std::vector<double>& tmp) {
    tmp.resize(A.cols());
    A.apply_adjoint(p, tmp);
    A.apply(tmp, out);
    if (mu != 0.0) {
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += mu * p[i];
    }
}

} // namespace

void SolverConfig::validate() const {
    require(std::isfinite(gamma), Errc::InvalidArgument, "gamma must be finite");
    require(relax > 0.0 && relax < 2.0, Errc::InvalidArgument, "relax must lie in (0, 2)");
    require(max_iters >= 1, Errc::InvalidArgument, "max_iters must be >= 1");
    require(stop_tol >= 0.0, Errc::InvalidArgument, "stop_tol must be >= 0");
    require(cg_tol > 0.0 && cg_tol < 1.0, Errc::InvalidArgument, "cg_tol must lie in (0, 1)");
    require(cg_max_iters >= 1, Errc::InvalidArgument, "cg_max_iters must be >= 1");
    require(tikhonov_mu >= 0.0, Errc::InvalidArgument, "tikhonov_mu must be >= 0");
    require(epsilon >= 0.0, Errc::InvalidArgument, "epsilon must be >= 0");
    require(epsilon == 0.0, Errc::Unsupported, "only the noiseless constraint (epsilon = 0) is supported");
}

std::vector<double> soft_threshold(std::span<const double> v, double t) {
    require(t >= 0.0, Errc::NegativeThreshold, "threshold must be >= 0");
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double mag = std::abs(v[i]) - t;
        out[i] = mag > 0.0 ? std::copysign(mag, v[i]) : 0.0;
    }
    return out;
}

CgResult cg_normal_solve(const LinearOperator& A, std::span<const double> r, const SolverConfig& cfg,
                         const NormalSolveOptions& options) {
    const std::size_t m = A.rows();
    const auto w0 = options.initial_guess;
    const LinearOperator* precond = options.preconditioner;
    require(r.size() == m, Errc::DimensionMismatch, "right-hand side has wrong length");
    require(w0.empty() || w0.size() == m, Errc::DimensionMismatch, "initial guess has wrong length");
    require(!precond || (precond->rows() == m && precond->cols() == m), Errc::DimensionMismatch,
            "preconditioner has wrong shape");
    const double mu = cfg.tikhonov_mu;

    CgResult res;
    res.w.assign(m, 0.0);
    const double rnorm = norm2(r);
    if (rnorm == 0.0) {
        res.converged = true;
        return res;
    }
    const double target = std::max(cfg.cg_tol * rnorm, options.abs_tol);
    if (!w0.empty()) std::copy(w0.begin(), w0.end(), res.w.begin());

    std::vector<double> resid(m), z(m), p(m), q(m), tmp;
    std::vector<double> best = res.w;
    double best_norm = std::numeric_limits<double>::infinity();
    const auto precondition = [&](std::span<const double> in, std::span<double> out) {
        if (precond) {
            precond->apply(in, out);
        } else {
            std::copy(in.begin(), in.end(), out.begin());
        }
    };

    // Outer restarts re-anchor the recursive residual on the true one.
    while (res.iterations < cfg.cg_max_iters) {
        normal_apply(A, mu, res.w, q, tmp);
        for (std::size_t i = 0; i < m; ++i) resid[i] = r[i] - q[i];
        const double true_norm = norm2(resid);
        if (true_norm < best_norm) {
            best_norm = true_norm;
            best = res.w;
        }
        if (true_norm <= target) {
            res.converged = true;
            break;
        }
        precondition(resid, z);
        p = z;
        double rz = dot(resid, z);
        bool progressed = false;
        while (res.iterations < cfg.cg_max_iters) {
            normal_apply(A, mu, p, q, tmp);
            const double pq = dot(p, q);
            if (!(pq > 0.0) || !(rz > 0.0)) break;
            const double step = rz / pq;
            for (std::size_t i = 0; i < m; ++i) {
                res.w[i] += step * p[i];
                resid[i] -= step * q[i];
            }
            ++res.iterations;
            progressed = true;
            if (norm2(resid) <= target) break;
            precondition(resid, z);
            const double rz_new = dot(resid, z);
            const double beta = rz_new / rz;
            rz = rz_new;
            for (std::size_t i = 0; i < m; ++i) p[i] = z[i] + beta * p[i];
        }
        if (!progressed) break;
    }
    if (!res.converged) {
        // budget exhausted or breakdown: compare the last iterate with the best seen
        normal_apply(A, mu, res.w, q, tmp);
        double rr = 0.0;
        for (std::size_t i = 0; i < m; ++i) rr += (r[i] - q[i]) * (r[i] - q[i]);
        if (std::sqrt(rr) < best_norm) {
            best_norm = std::sqrt(rr);
            best = res.w;
        }
        res.w = std::move(best);
        res.converged = best_norm <= target;
    }
    res.relative_residual = best_norm / rnorm;
    return res;
}

ProjectionResult project_affine(std::span<const double> v, const LinearOperator& A,
                                std::span<const double> y, const SolverConfig& cfg,
                                const NormalSolveOptions& options) {
    require(cfg.epsilon == 0.0, Errc::Unsupported, "only the noiseless constraint (epsilon = 0) is supported");
    require(v.size() == A.cols() && y.size() == A.rows(), Errc::DimensionMismatch,
            "projection operand sizes do not match the operator");
    std::vector<double> r = A.apply(v);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = y[i] - r[i];
    NormalSolveOptions opts = options;
    opts.abs_tol = std::max(opts.abs_tol, kProjectionFloor * norm2(y));
    ProjectionResult out;
    out.cg = cg_normal_solve(A, r, cfg, opts);
    out.u = A.apply_adjoint(out.cg.w);
    for (std::size_t i = 0; i < v.size(); ++i) out.u[i] += v[i];
    return out;
}

SolveResult douglas_rachford(const LinearOperator& A, std::span<const double> y, const SolverConfig& cfg,
                             const LinearOperator* preconditioner) {
    cfg.validate();
    require(y.size() == A.rows(), Errc::DimensionMismatch, "measurement vector has wrong length");
    for (double v : y) require(std::isfinite(v), Errc::NonFinite, "measurements contain NaN/Inf");
    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    const auto elapsed = [&] { return std::chrono::duration<double>(clock::now() - t0).count(); };

    SolveResult result;
    SolveReport& rep = result.report;
    const double ynorm = norm2(y);
    const double yscale = ynorm > 0.0 ? ynorm : 1.0;

    rep.gamma = cfg.gamma;
    if (rep.gamma <= 0.0) {
        rep.gamma = 0.01 * linf_norm(A.apply_adjoint(y));
        if (rep.gamma <= 0.0) rep.gamma = 1.0;
    }

    const std::size_t n = A.cols();
    std::vector<double> z(n, 0.0), alpha, alpha_prev, reflected(n);
    std::vector<double> w;  // warm start for the projection solves
    std::size_t t = 0;
    for (;; ++t) {
        alpha = soft_threshold(z, rep.gamma);
        if (t > 0) {
            double diff = 0.0;
            for (std::size_t i = 0; i < n; ++i) diff += (alpha[i] - alpha_prev[i]) * (alpha[i] - alpha_prev[i]);
            rep.final_rel_change = std::sqrt(diff) / std::max(norm2(alpha_prev), 1e-30);
            if (rep.final_rel_change <= cfg.stop_tol) {
                rep.converged = true;
                break;
            }
        }
        if (t >= cfg.max_iters) break;

        for (std::size_t i = 0; i < n; ++i) reflected[i] = 2.0 * alpha[i] - z[i];
        NormalSolveOptions opts;
        opts.preconditioner = preconditioner;
        if (cfg.warm_start_cg) opts.initial_guess = w;
        auto proj = project_affine(reflected, A, y, cfg, opts);
        rep.cg_iterations += proj.cg.iterations;
        if (!proj.cg.converged) ++rep.cg_stagnations;
        if (cfg.warm_start_cg) w = std::move(proj.cg.w);

        double znorm = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            z[i] += cfg.relax * (proj.u[i] - alpha[i]);
            znorm += z[i] * z[i];
        }
        require(std::isfinite(znorm), Errc::NonFinite,
                "Douglas-Rachford iterates diverged at iteration " + std::to_string(t));

        if (cfg.record_trace) {
            TraceRow row;
            row.iter = t + 1;
            row.l1_value = l1_norm(proj.u);
            row.rel_change = t > 0 ? rep.final_rel_change : 0.0;
            auto Aa = A.apply(alpha);
            double fr = 0.0;
            for (std::size_t i = 0; i < Aa.size(); ++i) fr += (y[i] - Aa[i]) * (y[i] - Aa[i]);
            row.feas_residual = std::sqrt(fr) / yscale;
            row.elapsed_s = elapsed();
            rep.trace.push_back(row);
        }
        alpha_prev.swap(alpha);
    }
    rep.iterations = t;

    // alpha is already close to feasible, so a zero start beats the reflected-point multiplier
    NormalSolveOptions final_opts;
    final_opts.preconditioner = preconditioner;
    auto final_proj = project_affine(alpha, A, y, cfg, final_opts);
    rep.cg_iterations += final_proj.cg.iterations;
    rep.final_cg_converged = final_proj.cg.converged;
    if (!final_proj.cg.converged) ++rep.cg_stagnations;
    result.alpha = std::move(final_proj.u);
    for (double v : result.alpha) {
        require(std::isfinite(v), Errc::NonFinite, "solution contains NaN/Inf");
    }

    auto Aa = A.apply(result.alpha);
    double fr = 0.0;
    for (std::size_t i = 0; i < Aa.size(); ++i) fr += (y[i] - Aa[i]) * (y[i] - Aa[i]);
    rep.feasibility_residual = std::sqrt(fr) / yscale;
    rep.l1_value = l1_norm(result.alpha);
    rep.wall_time_s = elapsed();
    return result;
}

void write_trace_csv(const std::vector<TraceRow>& trace, std::ostream& out) {
    out << "iter,l1_value,rel_change,feas_residual,elapsed_s\n";
    out.precision(17);
    for (const auto& r : trace) {
        out << r.iter << ',' << r.l1_value << ',' << r.rel_change << ',' << r.feas_residual << ','
            << r.elapsed_s << '\n';
    }
}

} // namespace chromacs
