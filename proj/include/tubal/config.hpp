#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "tubal/sensing.hpp"
#include "tubal/solver.hpp"

namespace tubal {

// Flat key=value experiment configuration. A config file sets keys; CLI flags
// override them afterwards. Every run serializes its resolved config next to
// its outputs so results are reproducible from the output directory alone.
struct ExperimentConfig {
    std::string command;

    int n = 50;
    int n3 = 5;
    int r_star = 3;
    int r = 0;       // 0: r_star (convergence/phase) or r_star + 2 (tables)
    long m = 0;      // 0: derived from m_rule
    std::string m_rule = "fig";  // fig: 10(2n-r*)n3; tables: 10 r* n3 (2n-r*)
    double v = 0.0;
    double eta = 1e-3;
    std::string eta_mode = "fixed";  // fixed | auto
    double rho = 10.0;
    int max_iters = 1000;
    std::string stop = "rel_change";  // rel_change | rel_error | iters
    double stop_tol = 5e-4;
    int trace_every = 1;
    std::uint64_t seed = 0;
    int seeds = 10;  // consecutive seeds starting at `seed`
    std::string out_dir = "out";
    std::string measurement = "gaussian";  // gaussian | symmetrized
    int threads = 0;
    bool save_tensors = false;
    bool error_terms = false;

    // phase
    int grid_m = 10;
    int grid_r = 10;
    std::vector<long> m_list;
    std::vector<int> r_star_list;

    // tables
    int table = 2;  // r_star = 0.3n / 0.2n / 0.1n for tables 2/3/4
    std::vector<int> n_list = {30, 50};
    std::vector<double> v_list = {0.3, 0.5, 0.7};

    // lemma-check
    int pop_iters = 400;
    int sample_iters_exact = 300;
    int sample_iters_over = 1000;
    int r_over = 0;  // 0: r_star + 2

    // rip
    int trials = 20;
    int runs = 1;

    // bench
    std::vector<std::array<int, 3>> bench_shapes;  // (n, r, n3)
    bool bench_shapes_set = false;                 // explicit empty list stays empty
    int bench_reps = 50;

    static ExperimentConfig load(const std::string& path);
    void set(const std::string& key, const std::string& value);
    std::string serialize() const;

    long resolved_m(int rs) const;
    int resolved_r() const;
    MeasureMode measure_mode() const;
    StopRule stop_rule() const;
    FgdConfig fgd(int r_effective) const;
};

}  // namespace tubal
