#include "ssa/indicators.hpp"

#include "ssa/csv.hpp"

#include <cmath>
#include <ostream>

namespace ssa {

namespace {

// log2 of an arbitrarily large positive integer without overflowing a double.
double log2_big(const BigCount& value) {
    const auto msb = boost::multiprecision::msb(value);
    if (msb < 1000) return std::log2(value.convert_to<double>());
    const auto shift = msb - 60;
    const BigCount top = value >> shift;
    return std::log2(top.convert_to<double>()) + static_cast<double>(shift);
}

std::vector<std::size_t> occupancy(std::span<const State> sequence, std::size_t alphabet_size) {
    std::vector<std::size_t> counts(alphabet_size, 0);
    for (State s : sequence) ++counts.at(s);
    return counts;
}

double entropy_from_counts(const std::vector<std::size_t>& counts, std::size_t length) {
    double h = 0.0;
    for (std::size_t c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / static_cast<double>(length);
        h -= p * std::log(p);
    }
    // a single occupied state gives -1*log(1) == -0.0
    return h == 0.0 ? 0.0 : h;
}

}  // namespace

double entropy(std::span<const State> sequence, std::size_t alphabet_size) {
    return entropy_from_counts(occupancy(sequence, alphabet_size), sequence.size());
}

BigCount count_distinct_subsequences(std::span<const State> dss) {
    // prefix[i] = distinct subsequences of dss[0..i), prefix[0] = 1 (empty)
    std::vector<BigCount> prefix(dss.size() + 1);
    prefix[0] = 1;
    std::vector<std::size_t> last;  // 1-based position of the previous occurrence, 0 if none
    for (std::size_t i = 1; i <= dss.size(); ++i) {
        const State s = dss[i - 1];
        if (s >= last.size()) last.resize(s + 1u, 0);
        prefix[i] = prefix[i - 1] * 2;
        if (last[s] > 0) prefix[i] -= prefix[last[s] - 1];
        last[s] = i;
    }
    return prefix.back();
}

double turbulence(std::span<const State> sequence) {
    const auto spells = collapse(sequence);
    const double m = static_cast<double>(spells.durations.size());
    double mean = 0.0;
    for (auto d : spells.durations) mean += static_cast<double>(d);
    mean /= m;
    double variance = 0.0;
    for (auto d : spells.durations) {
        const double dev = static_cast<double>(d) - mean;
        variance += dev * dev;
    }
    variance /= m;
    const double variance_max = (m - 1.0) * (1.0 - mean) * (1.0 - mean);
    const double phi_log2 = log2_big(count_distinct_subsequences(spells.states));
    return phi_log2 + std::log2((variance_max + 1.0) / (variance + 1.0));
}

std::vector<IndicatorRow> indicator_table(const SequenceSet& set, int threads) {
    const std::size_t a = set.alphabet_size();
    const double log_a = std::log(static_cast<double>(a));
    std::vector<IndicatorRow> rows(set.size());
    const auto n = static_cast<std::ptrdiff_t>(set.size());

#pragma omp parallel for num_threads(threads > 0 ? threads : 1) schedule(dynamic, 64)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto& seq = set[static_cast<std::size_t>(i)];
        IndicatorRow row;
        row.subject_id = seq.subject_id;
        row.time_in_state = occupancy(seq.states, a);
        row.entropy = entropy_from_counts(row.time_in_state, seq.length());
        row.normalized_entropy = a > 1 ? row.entropy / log_a : 0.0;
        row.turbulence = turbulence(seq.states);
        row.n_transitions = collapse(seq.states).states.size() - 1;
        row.n_distinct_states = 0;
        for (auto c : row.time_in_state) row.n_distinct_states += c > 0 ? 1 : 0;
        rows[static_cast<std::size_t>(i)] = std::move(row);
    }
    return rows;
}

void write_indicators(std::ostream& out, const std::vector<IndicatorRow>& rows, const Alphabet& alphabet) {
    csv::Row header{"id", "entropy", "normalized_entropy", "turbulence", "n_transitions", "n_distinct_states"};
    for (const auto& s : alphabet.states()) header.push_back("time_in_" + s);
    csv::write_row(out, header);
    for (const auto& r : rows) {
        csv::Row row{r.subject_id,
                     csv::format_double(r.entropy),
                     csv::format_double(r.normalized_entropy),
                     csv::format_double(r.turbulence),
                     std::to_string(r.n_transitions),
                     std::to_string(r.n_distinct_states)};
        for (auto c : r.time_in_state) row.push_back(std::to_string(c));
        csv::write_row(out, row);
    }
}

IndicatorStrata stratify_at_mean(std::span<const IndicatorRow> rows) {
    IndicatorStrata strata;
    if (rows.empty()) return strata;
    for (const auto& r : rows) {
        strata.entropy_mean += r.entropy;
        strata.turbulence_mean += r.turbulence;
    }
    strata.entropy_mean /= static_cast<double>(rows.size());
    strata.turbulence_mean /= static_cast<double>(rows.size());
    for (const auto& r : rows) {
        strata.high_entropy.push_back(r.entropy >= strata.entropy_mean);
        strata.high_turbulence.push_back(r.turbulence >= strata.turbulence_mean);
    }
    return strata;
}

}  // namespace ssa
