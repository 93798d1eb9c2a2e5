#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "tubal/decomposition.hpp"
#include "tubal/tensor.hpp"

namespace tubal {

enum class MeasureMode { plain_gaussian, symmetrized };
enum class Materialization { streamed, dense };

constexpr int kDefaultChunk = 256;
constexpr std::size_t kDefaultDenseBudget = 2ull << 30;  // 2 GiB

// Gaussian measurement ensemble {A_i}. Every A_i is a pure function of
// (seed, i), so streamed and dense materializations agree bit-for-bit and
// results do not depend on chunking or thread count.
class MeasurementEnsemble {
public:
    MeasurementEnsemble() = default;  // empty; fill via make()

    static MeasurementEnsemble make(int n, int n3, long m, std::uint64_t seed,
                                    MeasureMode mode = MeasureMode::plain_gaussian,
                                    Materialization mat = Materialization::streamed,
                                    int chunk = kDefaultChunk, double entry_std = 0.0,
                                    std::size_t dense_budget = kDefaultDenseBudget);

    int n() const { return n_; }
    int n3() const { return n3_; }
    long m() const { return m_; }
    std::uint64_t seed() const { return seed_; }
    MeasureMode mode() const { return mode_; }
    Materialization materialization() const { return mat_; }
    int chunk() const { return chunk_; }
    double entry_std() const { return entry_std_; }
    std::size_t entry_count() const { return static_cast<std::size_t>(n_) * n_ * n3_; }

    // Raw entries of A_i in tensor layout order.
    void generate_into(long i, double* dst) const;
    Tensor3 tensor(long i) const;

    // y_i = <A_i, X>
    Eigen::VectorXd measure(const Tensor3& x) const;

    // sum_i y_i A_i; chunk partial sums are combined in index order so the
    // result is identical for any thread count.
    Tensor3 adjoint(const Eigen::VectorXd& y) const;

private:
    int n_ = 0, n3_ = 0;
    long m_ = 0;
    std::uint64_t seed_ = 0;
    MeasureMode mode_ = MeasureMode::plain_gaussian;
    Materialization mat_ = Materialization::streamed;
    int chunk_ = kDefaultChunk;
    double entry_std_ = 0.0;
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> dense_;
};

MeasurementEnsemble make_ensemble(int n, int n3, long m, std::uint64_t seed,
                                  MeasureMode mode = MeasureMode::plain_gaussian,
                                  Materialization mat = Materialization::streamed,
                                  int chunk = kDefaultChunk, double entry_std = 0.0,
                                  std::size_t dense_budget = kDefaultDenseBudget);

struct ProblemInstance {
    Tensor3 x_star;
    Tensor3 f_star;
    Eigen::VectorXd y;
    double noise_std = 0.0;
    MeasurementEnsemble ensemble;
    SpectrumStats spectrum;
    int r_star = 0;
    std::uint64_t seed = 0;
};

ProblemInstance gen_problem(int n, int n3, int r_star, long m, double v, std::uint64_t seed,
                            MeasureMode mode = MeasureMode::plain_gaussian,
                            Materialization mat = Materialization::streamed);

struct RipEstimate {
    int r = 0;
    int trials = 0;
    double delta_hat = 0.0;
    std::vector<double> ratio_samples;
};

RipEstimate empirical_rip(int n, int n3, int r, long m, int trials, std::uint64_t seed,
                          MeasureMode mode = MeasureMode::plain_gaussian);

// --- packed symmetric fast path ---------------------------------------------
// A symmetric tensor has ~half as many free entries as its dense layout; the
// packed form stores each entry class once with sqrt-multiplicity weights so
// that the packing is an isometry: <X,Y> = pack(X).dot(pack(Y)). Measuring a
// symmetric X needs only sym(A_i), so the solver's inner loop runs on rows of
// packed sym(A_i) at half the memory traffic of the plain dense ensemble.

struct SymPackLayout {
    int n = 0, n3 = 0;
    std::vector<std::int32_t> rep;     // linear tensor index of the representative
    std::vector<std::int32_t> mirror;  // index of the transposed partner (== rep on fixed points)
    std::vector<double> weight;        // 1 or sqrt(2)

    static SymPackLayout make(int n, int n3);
    std::size_t len() const { return rep.size(); }

    Eigen::VectorXd pack(const Tensor3& x_sym) const;
    Tensor3 unpack(const Eigen::VectorXd& p) const;
};

class PackedSymOperator {
public:
    // Packs sym(A_i) for every i. Prefers double rows; float storage (with
    // double accumulation) is used when prefer_f32 is set or when double rows
    // would exceed budget_bytes; returns nullopt if even float does not fit.
    static std::optional<PackedSymOperator> build(const MeasurementEnsemble& e,
                                                  std::size_t budget_bytes,
                                                  bool prefer_f32 = false);

    const SymPackLayout& layout() const { return layout_; }
    bool single_precision() const { return use32_; }
    long m() const { return m_; }

    // <sym(A_i), X> for packed symmetric X; equals measure(X) of the plain
    // ensemble up to roundoff whenever X is symmetric.
    Eigen::VectorXd measure(const Eigen::VectorXd& x_packed) const;

    // pack(sym(sum_i w_i A_i)); deterministic chunk-ordered reduction.
    Eigen::VectorXd adjoint(const Eigen::VectorXd& w) const;

private:
    SymPackLayout layout_;
    long m_ = 0;
    bool use32_ = false;
    std::vector<double> rows64_;
    std::vector<float> rows32_;
};

// Default budget for the packed cache; override with TUBAL_FGD_PACK_BUDGET_MB.
std::size_t default_pack_budget_bytes();

}  // namespace tubal
