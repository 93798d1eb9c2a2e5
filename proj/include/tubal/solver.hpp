#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tubal/diagnostics.hpp"
#include "tubal/sensing.hpp"
#include "tubal/tensor.hpp"

namespace tubal {

enum class StopRule { rel_change, rel_error, iters_only };
enum class EtaMode { fixed, auto_rho };
enum class StopReason { rel_change_tol, rel_error_tol, max_iters, init_only };

struct FgdConfig {
    int r = 1;
    double eta = 1e-3;
    int max_iters = 1000;
    StopRule stop = StopRule::rel_change;
    double stop_tol = 5e-4;
    EtaMode eta_mode = EtaMode::fixed;
    double rho = 10.0;  // auto mode: eta = 1/(rho * sigma1_hat), rho >= 10
    int trace_every = 1;
    bool record_error_terms = false;
    // Apply the update with the raw adjoint residual instead of its
    // symmetrization; only the genuine gradient for symmetric measurements.
    bool raw_eq6 = false;
    // Budget for the packed symmetric cache; 0 streams every iteration.
    std::size_t pack_budget = default_pack_budget_bytes();
    // Noisy problems with caches above this size keep float rows: the noise
    // floor dwarfs the ~1e-7 storage error and bandwidth halves.
    std::size_t pack_f32_threshold = 256ull << 20;
};

struct TracePoint {
    int t = 0;
    double rel_error = 0.0;
    double objective = 0.0;
    double rel_change = 0.0;  // NaN at t = 0
    double wall_time_s = 0.0;
    std::optional<ErrorTerms> error_terms;
};

struct ConvergenceTrace {
    std::vector<TracePoint> points;
};

struct SolveResult {
    Tensor3 f_final;
    Tensor3 x_final;
    int iterations = 0;
    ConvergenceTrace trace;
    StopReason stop_reason = StopReason::max_iters;
    double eta_used = 0.0;
};

// F0 = P_r(sym(M*(y))). The symmetrization is a no-op for symmetrized
// measurements and makes the projection well defined for plain Gaussian ones.
Tensor3 spectral_init(const ProblemInstance& p, int r);

// One gradient step on 1/4 |y - M(F F^*)|^2.
Tensor3 fgd_step(const Tensor3& f, const ProblemInstance& p, double eta, bool raw_eq6 = false);

// One gradient step on 1/4 |F F^* - X_star|_F^2.
Tensor3 population_step(const Tensor3& f, const Tensor3& x_star, double eta);

struct StopDecision {
    bool stop = false;
    StopReason reason = StopReason::max_iters;
};

StopDecision stop_check(const ConvergenceTrace& trace, const FgdConfig& cfg);

SolveResult fgd_solve(const ProblemInstance& p, const FgdConfig& cfg);

const char* to_string(StopReason r);

}  // namespace tubal
