#pragma once

#include "ssa/core.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

// =============================================================================
// Per-sequence longitudinal indicators.
//
// entropy      h = -sum_i pi_i ln(pi_i), pi_i the share of positions in state i.
// turbulence   log2( phi * (s2max + 1) / (s2 + 1) ) where phi counts the
//              distinct subsequences (empty one included) of the spell-collapsed
//              sequence, s2 is the population variance of the m spell
//              durations and s2max = (m - 1)(1 - mean duration)^2.
//              A single-spell sequence has turbulence exactly 1.
//
// No "complexity index" beyond these two is provided.
// =============================================================================

namespace ssa {

using BigCount = boost::multiprecision::cpp_int;

struct IndicatorRow {
    std::string subject_id;
    double entropy = 0.0;
    double normalized_entropy = 0.0;
    double turbulence = 1.0;
    std::size_t n_transitions = 0;
    std::size_t n_distinct_states = 1;
    std::vector<std::size_t> time_in_state;
};

double entropy(std::span<const State> sequence, std::size_t alphabet_size);

/// Distinct subsequences of `dss`, including the empty one. Last-occurrence
/// recurrence: f(i) = 2 f(i-1) - f(prev(i) - 1), exact in arbitrary precision.
BigCount count_distinct_subsequences(std::span<const State> dss);

double turbulence(std::span<const State> sequence);

/// One row per sequence in input order. Rows are evaluated in parallel when
/// `threads` > 1; the result does not depend on the schedule.
std::vector<IndicatorRow> indicator_table(const SequenceSet& set, int threads = 1);

/// Column header `id,entropy,normalized_entropy,turbulence,n_transitions,
/// n_distinct_states,time_in_<state>...`.
void write_indicators(std::ostream& out, const std::vector<IndicatorRow>& rows, const Alphabet& alphabet);

/// High/low split used as Cox covariates: `value >= cohort mean` is high.
struct IndicatorStrata {
    double entropy_mean = 0.0;
    double turbulence_mean = 0.0;
    std::vector<bool> high_entropy;
    std::vector<bool> high_turbulence;
};
IndicatorStrata stratify_at_mean(std::span<const IndicatorRow> rows);

}  // namespace ssa
