#pragma once

#include "ssa/clustering.hpp"
#include "ssa/core.hpp"
#include "ssa/descriptives.hpp"
#include "ssa/survival.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

// =============================================================================
// Synthetic cohorts.
//
// All draws come from Philox4x32-10 keyed by the 64-bit seed. Subject i uses
// stream i (sequences) or stream 2^32 + i (outcomes), so every value is a
// fixed function of (seed, subject, draw index) and reproducible on any
// platform and thread count.
// =============================================================================

namespace ssa {

struct GeneratorSpec {
    Alphabet alphabet;
    std::vector<double> initial;     // a entries, sums to 1
    std::vector<double> transition;  // a x a row-major, rows sum to 1
    std::size_t n = 0;
    std::size_t length = 0;
    std::uint64_t seed = 0;
    std::string granularity = "week";
};

/// The four weekly treatment-variety states "0/3".."3/3" and the observed
/// weekly transition matrix of the first-year schizophrenia cohort. The
/// printed second row sums to 1.01 and is rescaled to 1.
GeneratorSpec table2_spec(std::size_t n = 2329, std::size_t length = 52, std::uint64_t seed = 7);
/// The published entries as printed, row-major, before any rescaling.
std::span<const double> table2_printed();

/// Rows of `transition` are rescaled to sum to 1 when within 0.02 of 1;
/// anything further off, or negative, is a ValidationError.
GeneratorSpec normalized(GeneratorSpec spec);

/// Uniform initial distribution, or the empirical first-position shares of `cohort`.
std::vector<double> initial_distribution(std::size_t alphabet_size, const SequenceSet* cohort = nullptr);

/// Independent first-order Markov chains. Validates the spec strictly
/// (rows within 1e-9 of 1).
SequenceSet generate_sequences(const GeneratorSpec& spec);

struct OutcomeSpec {
    std::vector<double> hr_per_cluster;  // hazard multiplier for clusters 1..k
    double baseline_rate = 0.01;         // events per time unit in cluster 1
    double censor_time = 52.0;           // administrative censoring
    std::uint64_t seed = 0;
};

/// Exponential event times with rate baseline * hr[cluster], censored at
/// censor_time. Subjects with no event before censor_time get time =
/// censor_time, event = 0.
OutcomeTable generate_outcomes(std::span<const std::string> ids, const ClusterAssignment& clusters, const OutcomeSpec& spec);

/// Baseline characteristics drawn independently of the sequences, using the
/// case-study cohort marginals: sex, age class, number of co-treatments and
/// clinical status. Categories are strings; subject i uses stream 2^33 + i.
CovariateTable generate_covariates(std::span<const std::string> ids, std::uint64_t seed);

/// Header comment written at the top of generated data files.
std::string generator_header(std::uint64_t seed);

}  // namespace ssa
