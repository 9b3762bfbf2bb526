#include "ssa/synth.hpp"

#include "ssa/error.hpp"
#include "ssa/random.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace ssa {

namespace {

constexpr std::array<double, 16> kPublishedTransitions = {
    0.95, 0.04, 0.01, 0.00,  //
    0.09, 0.81, 0.10, 0.01,  //
    0.01, 0.12, 0.83, 0.04,  //
    0.00, 0.01, 0.12, 0.87,
};

constexpr std::uint64_t kOutcomeStreamBase = std::uint64_t{1} << 32;
constexpr std::uint64_t kCovariateStreamBase = std::uint64_t{1} << 33;

struct Marginal {
    const char* column;
    std::vector<const char*> levels;
    std::vector<double> weights;  // printed percentages, rescaled on use
};

const std::vector<Marginal>& cohort_marginals() {
    static const std::vector<Marginal> m = {
        {"sex", {"Male", "Female"}, {66.1, 33.9}},
        {"age_class", {"18-29", "30-40"}, {54.9, 45.1}},
        {"co_treatments", {"0", "1-2", ">=3"}, {65.9, 32.8, 1.3}},
        {"clinical_status", {"Good", "Intermediate", "Poor"}, {48.6, 8.8, 42.7}},
    };
    return m;
}

void check_distribution(std::span<const double> p, double tolerance, const std::string& what) {
    double total = 0.0;
    for (double v : p) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError(what + ": probabilities must be finite and non-negative");
        total += v;
    }
    if (std::abs(total - 1.0) > tolerance) {
        throw ValidationError(what + ": probabilities sum to " + std::to_string(total) + ", expected 1");
    }
}

State draw(std::span<const double> p, double u) {
    double cum = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t s = 0; s < p.size(); ++s) {
        if (p[s] <= 0.0) continue;
        last_positive = s;
        cum += p[s];
        if (u < cum) return static_cast<State>(s);
    }
    return static_cast<State>(last_positive);  // u landed in the rounding gap above cum
}

}  // namespace

std::span<const double> table2_printed() { return kPublishedTransitions; }

GeneratorSpec table2_spec(std::size_t n, std::size_t length, std::uint64_t seed) {
    GeneratorSpec spec;
    spec.alphabet = Alphabet({"0/3", "1/3", "2/3", "3/3"},
                             {"No treatment", "Low variety", "Medium variety", "High variety"},
                             {"#f0f0f0", "#a6cee3", "#1f78b4", "#08306b"});
    spec.initial = initial_distribution(4);
    spec.transition.assign(kPublishedTransitions.begin(), kPublishedTransitions.end());
    spec.n = n;
    spec.length = length;
    spec.seed = seed;
    return normalized(std::move(spec));
}

GeneratorSpec normalized(GeneratorSpec spec) {
    const std::size_t a = spec.alphabet.size();
    if (spec.transition.size() != a * a) throw ValidationError("generator: transition matrix must be a x a");
    for (std::size_t i = 0; i < a; ++i) {
        double total = 0.0;
        for (std::size_t j = 0; j < a; ++j) {
            const double v = spec.transition[i * a + j];
            if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError("generator: transition probabilities must be non-negative");
            total += v;
        }
        if (std::abs(total - 1.0) > 0.02 + 1e-12) {
            throw ValidationError("generator: transition row " + std::to_string(i + 1) + " sums to " + std::to_string(total));
        }
        for (std::size_t j = 0; j < a; ++j) spec.transition[i * a + j] /= total;
    }
    return spec;
}

std::vector<double> initial_distribution(std::size_t alphabet_size, const SequenceSet* cohort) {
    std::vector<double> p(alphabet_size, 1.0 / static_cast<double>(alphabet_size));
    if (!cohort) return p;
    if (cohort->alphabet_size() != alphabet_size) throw ValidationError("generator: cohort alphabet size mismatch");
    std::fill(p.begin(), p.end(), 0.0);
    for (const auto& seq : cohort->sequences()) p[seq.states.front()] += 1.0;
    for (double& v : p) v /= static_cast<double>(cohort->size());
    return p;
}

SequenceSet generate_sequences(const GeneratorSpec& spec) {
    const std::size_t a = spec.alphabet.size();
    if (spec.n == 0 || spec.length == 0) throw ValidationError("generator: n and length must be positive");
    if (spec.initial.size() != a) throw ValidationError("generator: initial distribution must have one entry per state");
    if (spec.transition.size() != a * a) throw ValidationError("generator: transition matrix must be a x a");
    check_distribution(spec.initial, 1e-9, "generator: initial distribution");
    for (std::size_t i = 0; i < a; ++i) {
        check_distribution(std::span<const double>(spec.transition).subspan(i * a, a), 1e-9,
                           "generator: transition row " + std::to_string(i + 1));
    }

    const int width = static_cast<int>(std::to_string(spec.n).size());
    std::vector<StateSequence> sequences(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i) {
        Philox::Stream rng(spec.seed, i);
        auto& seq = sequences[i];
        const auto number = std::to_string(i + 1);
        seq.subject_id = "p" + std::string(static_cast<std::size_t>(width) - number.size(), '0') + number;
        seq.states.resize(spec.length);
        State s = draw(spec.initial, rng.uniform());
        seq.states[0] = s;
        for (std::size_t t = 1; t < spec.length; ++t) {
            s = draw(std::span<const double>(spec.transition).subspan(s * a, a), rng.uniform());
            seq.states[t] = s;
        }
    }
    return SequenceSet(spec.alphabet, std::move(sequences), spec.granularity);
}

OutcomeTable generate_outcomes(std::span<const std::string> ids, const ClusterAssignment& clusters, const OutcomeSpec& spec) {
    if (ids.size() != clusters.labels.size()) throw ValidationError("outcomes: id count does not match label count");
    if (spec.hr_per_cluster.size() < clusters.k) throw ValidationError("outcomes: need one hazard ratio per cluster");
    for (double hr : spec.hr_per_cluster) {
        if (!(hr > 0.0) || !std::isfinite(hr)) throw ValidationError("outcomes: hazard ratios must be positive");
    }
    if (!(spec.baseline_rate >= 0.0)) throw ValidationError("outcomes: baseline rate must be non-negative");
    if (!(spec.censor_time > 0.0)) throw ValidationError("outcomes: censor time must be positive");

    OutcomeTable table;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        Philox::Stream rng(spec.seed, kOutcomeStreamBase + i);
        const double rate = spec.baseline_rate * spec.hr_per_cluster[static_cast<std::size_t>(clusters.labels[i] - 1)];
        const double u = rng.uniform();
        Outcome o{spec.censor_time, false};
        if (rate > 0.0) {
            const double t = -std::log1p(-u) / rate;
            if (t < spec.censor_time) o = {std::max(t, 1e-12), true};
        }
        table.emplace(ids[i], o);
    }
    return table;
}

CovariateTable generate_covariates(std::span<const std::string> ids, std::uint64_t seed) {
    CovariateTable table;
    for (const auto& m : cohort_marginals()) table.columns.emplace_back(m.column);
    for (std::size_t i = 0; i < ids.size(); ++i) {
        Philox::Stream rng(seed, kCovariateStreamBase + i);
        std::vector<std::string> row;
        for (const auto& m : cohort_marginals()) {
            double total = 0.0;
            for (double w : m.weights) total += w;
            std::vector<double> p;
            for (double w : m.weights) p.push_back(w / total);
            row.emplace_back(m.levels[draw(p, rng.uniform())]);
        }
        if (!table.rows.emplace(ids[i], std::move(row)).second) throw ValidationError("covariates: duplicate id '" + ids[i] + "'");
    }
    return table;
}

std::string generator_header(std::uint64_t seed) {
    return "# generator: Philox4x32-10 counter-based PRNG; key = seed " + std::to_string(seed) +
           "; counter = (subject stream, draw index); uniform = top 53 bits of a 64-bit draw / 2^53";
}

}  // namespace ssa
