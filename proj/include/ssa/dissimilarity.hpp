#pragma once

#include "ssa/core.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

// =============================================================================
// Pairwise dissimilarities between state sequences.
//
//   om        optimal matching: minimum total cost of indels and substitutions
//   hamming   sum of position-wise substitution costs, no time warping
//   dhd       dynamic Hamming: position-wise costs c_t(a, b) varying with t
//   lcs       |x| + |y| - 2 * LCS(x, y)
//
// OM with indel 1 and constant substitution cost 2 coincides with lcs.
// =============================================================================

namespace ssa {

enum class CostSource { constant, transition_rate, user };

/// Symmetric a x a substitution costs with a zero diagonal, plus the indel
/// cost used by OM.
class SubstitutionCostMatrix {
public:
    /// Throws ValidationError unless `costs` is a x a, symmetric, zero on the
    /// diagonal, non-negative and finite, and `indel` > 0.
    SubstitutionCostMatrix(std::size_t alphabet_size, std::vector<double> costs, double indel = 1.0,
                           CostSource source = CostSource::user);

    static SubstitutionCostMatrix constant(std::size_t alphabet_size, double substitution = 2.0, double indel = 1.0);

    std::size_t alphabet_size() const noexcept { return size_; }
    double indel() const noexcept { return indel_; }
    CostSource source() const noexcept { return source_; }
    double operator()(State a, State b) const noexcept { return costs_[a * size_ + b]; }
    std::span<const double> values() const noexcept { return costs_; }

private:
    std::size_t size_;
    std::vector<double> costs_;
    double indel_;
    CostSource source_;
};

/// One a x a cost slice per sequence position.
class TimeVaryingCosts {
public:
    TimeVaryingCosts(std::size_t alphabet_size, std::vector<std::vector<double>> slices);

    std::size_t alphabet_size() const noexcept { return size_; }
    std::size_t length() const noexcept { return slices_.size(); }
    double operator()(std::size_t t, State a, State b) const noexcept { return slices_[t][a * size_ + b]; }
    std::span<const double> slice(std::size_t t) const { return slices_.at(t); }

private:
    std::size_t size_;
    std::vector<std::vector<double>> slices_;
};

/// Symmetric n x n matrix stored as the packed strict lower triangle
/// (row-major: (1,0), (2,0), (2,1), (3,0), ...).
class DissimilarityMatrix {
public:
    explicit DissimilarityMatrix(std::size_t n, std::string metric_tag = {});
    DissimilarityMatrix(std::size_t n, std::vector<double> packed, std::string metric_tag = {});

    std::size_t size() const noexcept { return n_; }
    const std::string& metric_tag() const noexcept { return tag_; }

    double operator()(std::size_t i, std::size_t j) const noexcept {
        if (i == j) return 0.0;
        return i > j ? packed_[offset(i, j)] : packed_[offset(j, i)];
    }
    void set(std::size_t i, std::size_t j, double value) noexcept {
        if (i != j) (i > j ? packed_[offset(i, j)] : packed_[offset(j, i)]) = value;
    }
    std::span<const double> packed() const noexcept { return packed_; }
    std::span<double> packed() noexcept { return packed_; }
    double max() const noexcept;

    static constexpr std::size_t offset(std::size_t i, std::size_t j) noexcept { return i * (i - 1) / 2 + j; }

    friend bool operator==(const DissimilarityMatrix&, const DissimilarityMatrix&) = default;

private:
    std::size_t n_;
    std::vector<double> packed_;
    std::string tag_;
};

// ---------------------------------------------------------------------------
// Costs
// ---------------------------------------------------------------------------

/// Data-driven costs c(a,b) = 2 - p(a,b) - p(b,a), with p pooled over all
/// adjacent position pairs:
///   p(a,b) = sum_t N_{t,t+1}(a,b) / sum_t N_t(a),  t = 1..T-1.
/// A state never seen at positions 1..T-1 gets zero outgoing rates and a
/// message in `warnings`. Indel is 1.
SubstitutionCostMatrix transition_rate_costs(const SequenceSet& set, std::vector<std::string>* warnings = nullptr);

/// Position-dependent costs for the dynamic Hamming distance:
///   c_t(a,b) = 4 - p(x_t=a | x_{t-1}=b) - p(x_t=b | x_{t-1}=a)
///                - p(x_{t+1}=a | x_t=b) - p(x_{t+1}=b | x_t=a)
/// Conditionals whose conditioning state is unobserved count as 0. At t = 1
/// and t = T only one adjacent transition exists; its two terms are doubled.
/// Requires T >= 3.
TimeVaryingCosts dhd_costs(const SequenceSet& set);

// ---------------------------------------------------------------------------
// Kernels
// ---------------------------------------------------------------------------

double om_distance(std::span<const State> x, std::span<const State> y, const SubstitutionCostMatrix& costs);
std::size_t lcs_length(std::span<const State> x, std::span<const State> y);
double lcs_distance(std::span<const State> x, std::span<const State> y);
/// Unit costs when `costs` is null. Throws ValidationError on a length mismatch.
double hamming_distance(std::span<const State> x, std::span<const State> y,
                        const SubstitutionCostMatrix* costs = nullptr);
double dhd_distance(std::span<const State> x, std::span<const State> y, const TimeVaryingCosts& costs);

// ---------------------------------------------------------------------------
// Full matrix
// ---------------------------------------------------------------------------

enum class Metric { om, hamming, dhd, lcs };

std::string to_string(Metric metric);
Metric parse_metric(std::string_view name);

struct PairwiseParams {
    /// OM and Hamming costs. Defaults: OM constant 2 / indel 1, Hamming unit.
    std::optional<SubstitutionCostMatrix> costs;
    /// DHD slices; estimated with dhd_costs() when absent.
    std::optional<TimeVaryingCosts> time_costs;
    /// Worker count; <= 0 means all available cores.
    int threads = 0;
};

/// All n(n-1)/2 pairs. Each pair is written exactly once, so the result is
/// bit-identical for any thread count.
DissimilarityMatrix pairwise_matrix(const SequenceSet& set, Metric metric, const PairwiseParams& params = {});

/// Sampled check of d(i,k) <= d(i,j) + d(j,k) (+ tolerance).
struct TriangleAudit {
    std::size_t checked = 0;
    std::size_t violations = 0;
    double worst_excess = 0.0;
};
TriangleAudit triangle_audit(const DissimilarityMatrix& d, std::size_t samples, std::uint64_t seed,
                             double tolerance = 1e-9);

// ---------------------------------------------------------------------------
// I/O
// ---------------------------------------------------------------------------

/// Square CSV: header `id,<id_1>,...,<id_n>`, then one row per subject.
void write_matrix_csv(std::ostream& out, const DissimilarityMatrix& d, std::span<const std::string> ids);
DissimilarityMatrix read_matrix_csv(std::istream& in, std::vector<std::string>* ids = nullptr);

/// "SQDM", u16 version (1), u32 n, then the packed lower triangle as
/// little-endian IEEE-754 doubles. All integers little-endian.
void write_matrix_binary(std::ostream& out, const DissimilarityMatrix& d);
DissimilarityMatrix read_matrix_binary(std::istream& in);
/// Dispatches on the magic bytes.
DissimilarityMatrix read_matrix(const std::string& path, std::vector<std::string>* ids = nullptr);

/// Square CSV with state identifiers as header row and first column.
void write_costs_csv(std::ostream& out, const SubstitutionCostMatrix& costs, const Alphabet& alphabet);
SubstitutionCostMatrix read_costs_csv(std::istream& in, const Alphabet& alphabet, double indel = 1.0);

}  // namespace ssa
