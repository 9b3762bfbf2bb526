#pragma once

#include "ssa/clustering.hpp"
#include "ssa/core.hpp"
#include "ssa/dissimilarity.hpp"

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace ssa {

/// Adjacent-position transitions pooled over all subjects and positions.
struct TransitionMatrix {
    std::size_t a = 0;
    std::vector<std::uint64_t> counts;  // row-major a x a
    std::vector<double> probs;          // row-normalized; zero rows for unobserved origins
    std::vector<bool> observed;         // false: state never seen at positions 1..T-1

    double prob(State from, State to) const { return probs[from * a + to]; }
    std::uint64_t count(State from, State to) const { return counts[from * a + to]; }
};

struct StateDistribution {
    std::size_t a = 0;
    std::vector<std::vector<double>> per_position;  // T vectors of a proportions
};

struct FrequencyEntry {
    std::vector<State> states;
    std::size_t count = 0;
    double share = 0.0;
    std::size_t first_index = 0;  // first subject showing this sequence
};

struct FrequencyTable {
    std::size_t n = 0;
    std::size_t distinct = 0;
    std::vector<FrequencyEntry> entries;  // count descending, ties by first appearance
};

TransitionMatrix transition_matrix(const SequenceSet& set);
StateDistribution state_distribution(const SequenceSet& set);
/// Position-wise most frequent state; ties go to the lower alphabet index.
StateSequence modal_sequence(const SequenceSet& set);
FrequencyTable frequency_table(const SequenceSet& set, std::size_t top);

/// Neighbourhood density: for each i, the share of subjects j (i included)
/// with d(i, j) <= radius_fraction * max(d). The most representative
/// sequence (medoid) is the argmax, lowest index on ties.
std::vector<double> representativeness(const DissimilarityMatrix& d, double radius_fraction = 0.1);
std::size_t most_representative(const std::vector<double>& scores);

// ---------------------------------------------------------------------------
// Cluster profiling
// ---------------------------------------------------------------------------

/// Subject-keyed covariate table. A column is numeric when every non-empty
/// value parses as a number, categorical otherwise.
struct CovariateTable {
    std::vector<std::string> columns;
    std::map<std::string, std::vector<std::string>> rows;  // id -> values aligned with columns
};
/// Header `id,<col>...`.
CovariateTable parse_covariates(std::istream& in);
/// Rows in `ids` order; an id without a row is a ValidationError.
void write_covariates(std::ostream& out, const CovariateTable& table, std::span<const std::string> ids);

struct CategoricalProfile {
    std::string column;
    std::vector<std::string> levels;                 // first-appearance order
    std::vector<std::vector<std::size_t>> counts;    // [level][cluster]
    double chi_squared = 0.0;
    std::size_t df = 0;
    double p_value = 1.0;
    bool low_expected = false;  // some expected count < 5
};

struct NumericProfile {
    std::string column;
    std::vector<double> mean;  // per cluster
    std::vector<double> sd;    // per cluster, sample SD (0 for a single member)
};

struct ClusterProfile {
    std::size_t k = 0;
    std::vector<std::size_t> sizes;
    std::vector<CategoricalProfile> categorical;
    /// Covariate numeric columns first, then time spent in each state.
    std::vector<NumericProfile> numeric;
    std::vector<std::string> warnings;
};

/// Pearson chi-squared test of independence, no continuity correction.
/// Rows or columns with zero total are dropped.
struct ChiSquaredTest {
    double statistic = 0.0;
    std::size_t df = 0;
    double p_value = 1.0;
    bool low_expected = false;
};
ChiSquaredTest chi_squared_test(const std::vector<std::vector<std::size_t>>& table);

/// Per-cluster counts and chi-squared for categorical covariates and mean
/// (SD) for numeric ones, plus time in each state computed from `set`.
/// `covariates` may be null to profile the sequences alone.
ClusterProfile cluster_profile(const SequenceSet& set, const ClusterAssignment& assignment,
                               const CovariateTable* covariates);

/// Layout mirrors the usual "characteristics by cluster" table:
/// variable,level,cluster_1,...,cluster_k,p_value
void write_profile_csv(std::ostream& out, const ClusterProfile& profile);
std::string render_profile_text(const ClusterProfile& profile);

// ---------------------------------------------------------------------------
// Report bundle
// ---------------------------------------------------------------------------

void write_transition_csv(std::ostream& out, const TransitionMatrix& tm, const Alphabet& alphabet);
void write_distribution_csv(std::ostream& out, const StateDistribution& dist, const Alphabet& alphabet);
void write_frequency_csv(std::ostream& out, const FrequencyTable& table, const Alphabet& alphabet);
/// JSON with transition matrix, distribution, modal sequence and frequency table.
std::string describe_json(const SequenceSet& set, std::size_t top);

}  // namespace ssa
