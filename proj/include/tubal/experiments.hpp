#pragma once

#include <map>
#include <string>
#include <vector>

#include "tubal/config.hpp"
#include "tubal/diagnostics.hpp"
#include "tubal/solver.hpp"

namespace tubal {

struct SeedRunRow {
    std::uint64_t seed = 0;
    double final_rel_error = 0.0;
    int iterations = 0;
    double wall_s = 0.0;
    std::string stop_reason;
};

struct RunRecord {
    std::vector<SeedRunRow> rows;
    double mean_rel_error = 0.0;
    double std_rel_error = 0.0;
    double mean_wall_s = 0.0;
    std::vector<std::string> trace_paths;
    RateFit rate;  // fitted on the first seed's rel_error trace
    // first seed's per-iteration series, kept for downstream rate checks
    std::vector<double> first_rel_error;
    std::vector<double> first_objective;
};

RunRecord cmd_convergence(const ExperimentConfig& cfg);

struct PhaseCell {
    long m = 0;
    int r_star = 0;
    int successes = 0;
    bool recovered = false;
};

std::vector<PhaseCell> cmd_phase(const ExperimentConfig& cfg);

struct TableCell {
    int n = 0;
    double v = 0.0;
    int r_star = 0;
    int r = 0;
    long m = 0;
    double mean_rel_error = 0.0;
    double std_rel_error = 0.0;
    double mean_wall_s = 0.0;
    double mean_iterations = 0.0;
};

std::vector<TableCell> cmd_tables(const ExperimentConfig& cfg);

struct LemmaCurves {
    std::vector<double> d_ss, st, tt, delta;
};

struct LemmaCheckResult {
    LemmaCurves pop_exact, pop_over, samp_exact, samp_over;
    // keys like "pop_exact/tt" -> fitted rate
    std::map<std::string, RateFit> fits;
};

LemmaCheckResult cmd_lemma_check(const ExperimentConfig& cfg);

struct BenchRow {
    int n = 0, r = 0, n3 = 0;
    double median_ns_parallel = 0.0;
    double median_ns_serial = 0.0;
};

struct BenchResult {
    std::vector<BenchRow> rows;
    // doubling ratios of the parallel kernel at the first shape
    double n_doubling_ratio = 0.0;
    double r_doubling_ratio = 0.0;
    double n_scaling_exponent = 0.0;
    double r_scaling_exponent = 0.0;
};

BenchResult cmd_bench(const ExperimentConfig& cfg);

std::vector<RipEstimate> cmd_rip(const ExperimentConfig& cfg);

}  // namespace tubal
