#include "ssa/descriptives.hpp"

#include "ssa/csv.hpp"
#include "ssa/error.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace ssa {

TransitionMatrix transition_matrix(const SequenceSet& set) {
    const std::size_t a = set.alphabet_size();
    if (set.length() < 2) throw ValidationError("transition matrix: sequences must have length >= 2");
    TransitionMatrix tm;
    tm.a = a;
    tm.counts.assign(a * a, 0);
    tm.probs.assign(a * a, 0.0);
    tm.observed.assign(a, false);
    for (const auto& seq : set.sequences()) {
        for (std::size_t t = 0; t + 1 < seq.length(); ++t) ++tm.counts[seq.states[t] * a + seq.states[t + 1]];
    }
    for (std::size_t i = 0; i < a; ++i) {
        std::uint64_t total = 0;
        for (std::size_t j = 0; j < a; ++j) total += tm.counts[i * a + j];
        if (total == 0) continue;
        tm.observed[i] = true;
        for (std::size_t j = 0; j < a; ++j) {
            tm.probs[i * a + j] = static_cast<double>(tm.counts[i * a + j]) / static_cast<double>(total);
        }
    }
    return tm;
}

StateDistribution state_distribution(const SequenceSet& set) {
    const std::size_t a = set.alphabet_size();
    StateDistribution dist;
    dist.a = a;
    dist.per_position.assign(set.length(), std::vector<double>(a, 0.0));
    std::vector<std::vector<std::size_t>> counts(set.length(), std::vector<std::size_t>(a, 0));
    for (const auto& seq : set.sequences()) {
        for (std::size_t t = 0; t < seq.length(); ++t) ++counts[t][seq.states[t]];
    }
    const double n = static_cast<double>(set.size());
    for (std::size_t t = 0; t < set.length(); ++t) {
        for (std::size_t s = 0; s < a; ++s) dist.per_position[t][s] = static_cast<double>(counts[t][s]) / n;
    }
    return dist;
}

StateSequence modal_sequence(const SequenceSet& set) {
    const std::size_t a = set.alphabet_size();
    StateSequence modal{"modal", {}};
    modal.states.reserve(set.length());
    std::vector<std::size_t> counts(a);
    for (std::size_t t = 0; t < set.length(); ++t) {
        std::fill(counts.begin(), counts.end(), 0);
        for (const auto& seq : set.sequences()) ++counts[seq.states[t]];
        const auto best = std::max_element(counts.begin(), counts.end());  // first maximum
        modal.states.push_back(static_cast<State>(best - counts.begin()));
    }
    return modal;
}

FrequencyTable frequency_table(const SequenceSet& set, std::size_t top) {
    if (top < 1) throw ValidationError("frequency table: top must be >= 1");
    std::map<std::vector<State>, std::size_t> slot;
    std::vector<FrequencyEntry> entries;
    for (std::size_t i = 0; i < set.size(); ++i) {
        const auto& states = set[i].states;
        const auto [it, inserted] = slot.emplace(states, entries.size());
        if (inserted) entries.push_back({states, 0, 0.0, i});
        ++entries[it->second].count;
    }
    std::stable_sort(entries.begin(), entries.end(),
                     [](const FrequencyEntry& x, const FrequencyEntry& y) { return x.count > y.count; });
    FrequencyTable table;
    table.n = set.size();
    table.distinct = entries.size();
    for (auto& e : entries) e.share = static_cast<double>(e.count) / static_cast<double>(set.size());
    if (entries.size() > top) entries.resize(top);
    table.entries = std::move(entries);
    return table;
}

std::vector<double> representativeness(const DissimilarityMatrix& d, double radius_fraction) {
    if (!(radius_fraction > 0.0 && radius_fraction <= 1.0)) {
        throw ValidationError("representativeness: radius fraction must be in (0, 1]");
    }
    const std::size_t n = d.size();
    const double radius = radius_fraction * d.max();
    std::vector<double> scores(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t within = 0;
        for (std::size_t j = 0; j < n; ++j) within += d(i, j) <= radius ? 1 : 0;
        scores[i] = static_cast<double>(within) / static_cast<double>(n);
    }
    return scores;
}

std::size_t most_representative(const std::vector<double>& scores) {
    if (scores.empty()) throw ValidationError("representativeness: no scores");
    return static_cast<std::size_t>(std::max_element(scores.begin(), scores.end()) - scores.begin());
}

// ---------------------------------------------------------------------------
// Profiling
// ---------------------------------------------------------------------------

namespace {

bool parse_number(const std::string& text, double& value) {
    if (text.empty()) return false;
    try {
        std::size_t used = 0;
        value = std::stod(text, &used);
        return used == text.size() && std::isfinite(value);
    } catch (const std::exception&) {
        return false;
    }
}

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string format_p(double p) {
    if (p < 0.001) return "<0.001";
    return fixed(p, 3);
}

NumericProfile numeric_profile(std::string column, const std::vector<std::vector<double>>& by_cluster) {
    NumericProfile out{std::move(column), {}, {}};
    for (const auto& values : by_cluster) {
        double mean = 0.0;
        for (double v : values) mean += v;
        mean = values.empty() ? std::nan("") : mean / static_cast<double>(values.size());
        double ss = 0.0;
        for (double v : values) ss += (v - mean) * (v - mean);
        out.mean.push_back(mean);
        out.sd.push_back(values.size() > 1 ? std::sqrt(ss / static_cast<double>(values.size() - 1)) : 0.0);
    }
    return out;
}

}  // namespace

CovariateTable parse_covariates(std::istream& in) {
    const auto rows = csv::read(in);
    if (rows.empty() || rows.front().empty() || rows.front()[0] != "id") {
        throw ValidationError("covariates: header must start with 'id'");
    }
    CovariateTable table;
    table.columns.assign(rows.front().begin() + 1, rows.front().end());
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != rows.front().size()) throw ValidationError("covariates: row " + std::to_string(r) + " has the wrong width");
        if (!table.rows.emplace(row[0], std::vector<std::string>(row.begin() + 1, row.end())).second) {
            throw ValidationError("covariates: duplicate id '" + row[0] + "'");
        }
    }
    return table;
}

void write_covariates(std::ostream& out, const CovariateTable& table, std::span<const std::string> ids) {
    csv::Row header{"id"};
    header.insert(header.end(), table.columns.begin(), table.columns.end());
    csv::write_row(out, header);
    for (const auto& id : ids) {
        const auto it = table.rows.find(id);
        if (it == table.rows.end()) throw ValidationError("covariates: no row for subject '" + id + "'");
        csv::Row row{id};
        row.insert(row.end(), it->second.begin(), it->second.end());
        csv::write_row(out, row);
    }
}

ChiSquaredTest chi_squared_test(const std::vector<std::vector<std::size_t>>& table) {
    std::vector<double> row_total;
    std::vector<double> col_total;
    double total = 0.0;
    for (const auto& row : table) {
        if (col_total.size() < row.size()) col_total.resize(row.size(), 0.0);
        double rt = 0.0;
        for (std::size_t c = 0; c < row.size(); ++c) {
            rt += static_cast<double>(row[c]);
            col_total[c] += static_cast<double>(row[c]);
        }
        row_total.push_back(rt);
        total += rt;
    }
    ChiSquaredTest test;
    std::size_t rows_used = 0;
    std::size_t cols_used = 0;
    for (double r : row_total) rows_used += r > 0 ? 1 : 0;
    for (double c : col_total) cols_used += c > 0 ? 1 : 0;
    if (rows_used < 2 || cols_used < 2) return test;
    for (std::size_t r = 0; r < table.size(); ++r) {
        if (row_total[r] == 0) continue;
        for (std::size_t c = 0; c < col_total.size(); ++c) {
            if (col_total[c] == 0) continue;
            const double expected = row_total[r] * col_total[c] / total;
            const double observed = c < table[r].size() ? static_cast<double>(table[r][c]) : 0.0;
            if (expected < 5.0) test.low_expected = true;
            test.statistic += (observed - expected) * (observed - expected) / expected;
        }
    }
    test.df = (rows_used - 1) * (cols_used - 1);
    const boost::math::chi_squared dist(static_cast<double>(test.df));
    test.p_value = boost::math::cdf(boost::math::complement(dist, test.statistic));
    return test;
}

ClusterProfile cluster_profile(const SequenceSet& set, const ClusterAssignment& assignment,
                               const CovariateTable* covariates) {
    const std::size_t n = set.size();
    const std::size_t k = assignment.k;
    if (assignment.labels.size() != n) throw ValidationError("profile: label count does not match the number of sequences");
    ClusterProfile profile;
    profile.k = k;
    profile.sizes = assignment.sizes;

    if (covariates) {
        std::vector<const std::vector<std::string>*> row_of(n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto it = covariates->rows.find(set[i].subject_id);
            if (it == covariates->rows.end()) {
                throw ValidationError("profile: no covariates for subject '" + set[i].subject_id + "'");
            }
            row_of[i] = &it->second;
        }
        if (covariates->rows.size() > n) {
            profile.warnings.push_back(std::to_string(covariates->rows.size() - n) +
                                       " covariate rows do not match any sequence and were ignored");
        }
        for (std::size_t c = 0; c < covariates->columns.size(); ++c) {
            const auto& name = covariates->columns[c];
            bool numeric = true;
            bool any = false;
            for (std::size_t i = 0; i < n && numeric; ++i) {
                const auto& v = (*row_of[i])[c];
                if (v.empty()) continue;
                double x;
                any = true;
                numeric = parse_number(v, x);
            }
            if (numeric && any) {
                std::vector<std::vector<double>> by_cluster(k);
                for (std::size_t i = 0; i < n; ++i) {
                    double x;
                    if (parse_number((*row_of[i])[c], x)) by_cluster[static_cast<std::size_t>(assignment.labels[i] - 1)].push_back(x);
                }
                profile.numeric.push_back(numeric_profile(name, by_cluster));
                continue;
            }
            CategoricalProfile cat{name, {}, {}, 0.0, 0, 1.0, false};
            std::map<std::string, std::size_t> level_index;
            for (std::size_t i = 0; i < n; ++i) {
                const auto& v = (*row_of[i])[c];
                if (v.empty()) continue;
                const auto [it, inserted] = level_index.emplace(v, cat.levels.size());
                if (inserted) {
                    cat.levels.push_back(v);
                    cat.counts.emplace_back(k, 0);
                }
                ++cat.counts[it->second][static_cast<std::size_t>(assignment.labels[i] - 1)];
            }
            const auto test = chi_squared_test(cat.counts);
            cat.chi_squared = test.statistic;
            cat.df = test.df;
            cat.p_value = test.p_value;
            cat.low_expected = test.low_expected;
            if (test.low_expected) {
                profile.warnings.push_back("column '" + name + "': expected count below 5 in some cell; chi-squared p-value is approximate");
            }
            profile.categorical.push_back(std::move(cat));
        }
    }

    for (std::size_t s = 0; s < set.alphabet_size(); ++s) {
        std::vector<std::vector<double>> by_cluster(k);
        for (std::size_t i = 0; i < n; ++i) {
            const auto& states = set[i].states;
            const auto time = std::count(states.begin(), states.end(), static_cast<State>(s));
            by_cluster[static_cast<std::size_t>(assignment.labels[i] - 1)].push_back(static_cast<double>(time));
        }
        profile.numeric.push_back(numeric_profile("time_in_" + set.alphabet().state(static_cast<State>(s)), by_cluster));
    }
    return profile;
}

void write_profile_csv(std::ostream& out, const ClusterProfile& profile) {
    csv::Row header{"variable", "level"};
    for (std::size_t c = 0; c < profile.k; ++c) header.push_back("cluster_" + std::to_string(c + 1));
    header.push_back("p_value");
    csv::write_row(out, header);

    csv::Row sizes{"N", ""};
    for (auto s : profile.sizes) sizes.push_back(std::to_string(s));
    sizes.push_back("");
    csv::write_row(out, sizes);

    for (const auto& cat : profile.categorical) {
        for (std::size_t l = 0; l < cat.levels.size(); ++l) {
            csv::Row row{cat.column, cat.levels[l]};
            for (std::size_t c = 0; c < profile.k; ++c) {
                const double pct = 100.0 * static_cast<double>(cat.counts[l][c]) / static_cast<double>(profile.sizes[c]);
                row.push_back(std::to_string(cat.counts[l][c]) + " (" + fixed(pct, 1) + "%)");
            }
            row.push_back(l == 0 ? format_p(cat.p_value) : "");
            csv::write_row(out, row);
        }
    }
    for (const auto& num : profile.numeric) {
        csv::Row row{num.column, "mean (SD)"};
        for (std::size_t c = 0; c < profile.k; ++c) row.push_back(fixed(num.mean[c], 1) + " (" + fixed(num.sd[c], 1) + ")");
        row.push_back("");
        csv::write_row(out, row);
    }
}

std::string render_profile_text(const ClusterProfile& profile) {
    std::ostringstream out;
    char line[512];
    std::snprintf(line, sizeof line, "%-28s", "");
    out << line;
    for (std::size_t c = 0; c < profile.k; ++c) {
        std::snprintf(line, sizeof line, "%16s", ("Cluster " + std::to_string(c + 1)).c_str());
        out << line;
    }
    out << "   P-value\n";
    std::snprintf(line, sizeof line, "%-28s", "");
    out << line;
    for (auto s : profile.sizes) {
        std::snprintf(line, sizeof line, "%16s", ("(N = " + std::to_string(s) + ")").c_str());
        out << line;
    }
    out << "\n";
    for (const auto& cat : profile.categorical) {
        out << cat.column << "\n";
        for (std::size_t l = 0; l < cat.levels.size(); ++l) {
            std::snprintf(line, sizeof line, "  %-26s", cat.levels[l].c_str());
            out << line;
            for (std::size_t c = 0; c < profile.k; ++c) {
                const double pct = 100.0 * static_cast<double>(cat.counts[l][c]) / static_cast<double>(profile.sizes[c]);
                std::snprintf(line, sizeof line, "%16s", (std::to_string(cat.counts[l][c]) + " (" + fixed(pct, 1) + "%)").c_str());
                out << line;
            }
            if (l == 0) out << "   " << format_p(cat.p_value);
            out << "\n";
        }
    }
    out << "mean (SD)\n";
    for (const auto& num : profile.numeric) {
        std::snprintf(line, sizeof line, "  %-26s", num.column.c_str());
        out << line;
        for (std::size_t c = 0; c < profile.k; ++c) {
            std::snprintf(line, sizeof line, "%16s", (fixed(num.mean[c], 1) + " (" + fixed(num.sd[c], 1) + ")").c_str());
            out << line;
        }
        out << "\n";
    }
    for (const auto& w : profile.warnings) out << "warning: " << w << "\n";
    return out.str();
}

// ---------------------------------------------------------------------------
// Report bundle
// ---------------------------------------------------------------------------

void write_transition_csv(std::ostream& out, const TransitionMatrix& tm, const Alphabet& alphabet) {
    csv::Row header{"from"};
    for (const auto& s : alphabet.states()) header.push_back(s);
    header.push_back("observed");
    csv::write_row(out, header);
    for (std::size_t i = 0; i < tm.a; ++i) {
        csv::Row row{alphabet.state(static_cast<State>(i))};
        for (std::size_t j = 0; j < tm.a; ++j) row.push_back(csv::format_double(tm.probs[i * tm.a + j]));
        row.push_back(tm.observed[i] ? "1" : "0");
        csv::write_row(out, row);
    }
}

void write_distribution_csv(std::ostream& out, const StateDistribution& dist, const Alphabet& alphabet) {
    csv::Row header{"position"};
    for (const auto& s : alphabet.states()) header.push_back(s);
    csv::write_row(out, header);
    for (std::size_t t = 0; t < dist.per_position.size(); ++t) {
        csv::Row row{std::to_string(t + 1)};
        for (double p : dist.per_position[t]) row.push_back(csv::format_double(p));
        csv::write_row(out, row);
    }
}

void write_frequency_csv(std::ostream& out, const FrequencyTable& table, const Alphabet& alphabet) {
    csv::write_row(out, {"rank", "count", "share", "sequence"});
    for (std::size_t r = 0; r < table.entries.size(); ++r) {
        const auto& e = table.entries[r];
        std::string seq;
        for (std::size_t t = 0; t < e.states.size(); ++t) {
            if (t) seq += '-';
            seq += alphabet.state(e.states[t]);
        }
        csv::write_row(out, {std::to_string(r + 1), std::to_string(e.count), csv::format_double(e.share), seq});
    }
}

std::string describe_json(const SequenceSet& set, std::size_t top) {
    const auto& alphabet = set.alphabet();
    nlohmann::ordered_json doc;
    doc["n"] = set.size();
    doc["length"] = set.length();
    doc["granularity"] = set.granularity();
    doc["states"] = alphabet.states();
    if (set.length() >= 2) {
        const auto tm = transition_matrix(set);
        auto rows = nlohmann::ordered_json::array();
        for (std::size_t i = 0; i < tm.a; ++i) {
            rows.push_back(std::vector<double>(tm.probs.begin() + static_cast<std::ptrdiff_t>(i * tm.a),
                                               tm.probs.begin() + static_cast<std::ptrdiff_t>((i + 1) * tm.a)));
        }
        doc["transition_matrix"] = rows;
        std::vector<std::uint64_t> counts = tm.counts;
        doc["transition_counts"] = counts;
        doc["transition_observed"] = std::vector<bool>(tm.observed);
    }
    doc["state_distribution"] = state_distribution(set).per_position;
    std::vector<std::string> modal;
    for (State s : modal_sequence(set).states) modal.push_back(alphabet.state(s));
    doc["modal_sequence"] = modal;
    const auto freq = frequency_table(set, top);
    doc["distinct_sequences"] = freq.distinct;
    auto entries = nlohmann::ordered_json::array();
    for (const auto& e : freq.entries) {
        nlohmann::ordered_json entry;
        std::vector<std::string> states;
        for (State s : e.states) states.push_back(alphabet.state(s));
        entry["sequence"] = states;
        entry["count"] = e.count;
        entry["share"] = e.share;
        entries.push_back(entry);
    }
    doc["frequency_table"] = entries;
    return doc.dump(1) + "\n";
}

}  // namespace ssa
