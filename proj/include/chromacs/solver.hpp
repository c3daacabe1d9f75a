#pragma once

// Basis pursuit  min ||alpha||_1  s.t.  A alpha = y  by Douglas-Rachford splitting
// between the l1 prox (soft thresholding) and the projection onto the affine
// feasible set (conjugate gradients on the normal equations A A^T w = r).

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "chromacs/linear_operator.hpp"

namespace chromacs {

struct SolverConfig {
    double gamma = 0.0;  // <= 0 selects 0.01 * ||A^T y||_inf
    double relax = 1.0;
    std::size_t max_iters = 2000;
    double stop_tol = 1e-6;
    double cg_tol = 1e-10;
    std::size_t cg_max_iters = 500;
    double tikhonov_mu = 0.0;
    double epsilon = 0.0;  // only 0 is supported
    bool warm_start_cg = true;
    bool record_trace = false;

    void validate() const;
};

std::vector<double> soft_threshold(std::span<const double> v, double t);

struct CgResult {
    std::vector<double> w;
    std::size_t iterations = 0;
    double relative_residual = 0.0;
    bool converged = false;
};

struct NormalSolveOptions {
    std::span<const double> initial_guess;     // empty = start from 0
    double abs_tol = 0.0;                      // absolute residual floor
    const LinearOperator* preconditioner = nullptr;  // SPD approximation of (A A^T)^-1
};

/// Solves (A A^T + mu I) w = r by (preconditioned) conjugate gradients. The stopping
/// test always uses the true, unpreconditioned residual. Never throws on stagnation:
/// the best iterate is returned with converged = false.
CgResult cg_normal_solve(const LinearOperator& A, std::span<const double> r, const SolverConfig& cfg,
                         const NormalSolveOptions& options = {});

struct ProjectionResult {
    std::vector<double> u;
    CgResult cg;
};

/// Euclidean projection of v onto {alpha : A alpha = y}, up to CG tolerance. A residual
/// ||y - A u|| <= 1e-8 ||y|| is accepted as feasible.
ProjectionResult project_affine(std::span<const double> v, const LinearOperator& A,
                                std::span<const double> y, const SolverConfig& cfg,
                                const NormalSolveOptions& options = {});

struct TraceRow {
    std::size_t iter = 0;
    double l1_value = 0.0;
    double rel_change = 0.0;
    double feas_residual = 0.0;
    double elapsed_s = 0.0;
};

struct SolveReport {
    std::size_t iterations = 0;
    double final_rel_change = 0.0;
    double feasibility_residual = 0.0;
    double l1_value = 0.0;
    double wall_time_s = 0.0;
    double gamma = 0.0;
    std::size_t cg_iterations = 0;
    std::size_t cg_stagnations = 0;
    bool final_cg_converged = true;
    bool converged = false;  // stop_tol reached before max_iters
    std::vector<TraceRow> trace;
};

struct SolveResult {
    std::vector<double> alpha;
    SolveReport report;
};

/// Returns the feasible projection of the last shadow iterate.
SolveResult douglas_rachford(const LinearOperator& A, std::span<const double> y, const SolverConfig& cfg,
                             const LinearOperator* preconditioner = nullptr);

/// CSV columns: iter,l1_value,rel_change,feas_residual,elapsed_s
void write_trace_csv(const std::vector<TraceRow>& trace, std::ostream& out);

} // namespace chromacs
