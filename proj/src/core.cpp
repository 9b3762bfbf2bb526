#include "ssa/core.hpp"

#include "ssa/csv.hpp"
#include "ssa/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <unordered_set>

namespace ssa {

namespace {

const std::string kEmpty;

std::size_t parse_positive(const std::string& text, const char* what, std::size_t row) {
    std::size_t value = 0;
    const auto* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, value);
    if (res.ec != std::errc{} || res.ptr != end || value == 0) {
        throw ValidationError("spells: row " + std::to_string(row) + ": " + what +
                              " must be a positive integer, got '" + text + "'");
    }
    return value;
}

}  // namespace

// ---------------------------------------------------------------------------
// Alphabet
// ---------------------------------------------------------------------------

Alphabet::Alphabet(std::vector<std::string> states, std::vector<std::string> labels,
                   std::vector<std::string> colors)
    : states_(std::move(states)), labels_(std::move(labels)), colors_(std::move(colors)) {
    if (states_.empty()) throw ValidationError("alphabet: at least one state required");
    if (states_.size() > std::numeric_limits<State>::max()) {
        throw ValidationError("alphabet: too many states");
    }
    std::unordered_set<std::string> seen;
    for (const auto& s : states_) {
        if (s.empty()) throw ValidationError("alphabet: empty state identifier");
        if (!seen.insert(s).second) throw ValidationError("alphabet: duplicate state '" + s + "'");
    }
    if (!labels_.empty() && labels_.size() != states_.size()) {
        throw ValidationError("alphabet: label count does not match state count");
    }
    if (!colors_.empty() && colors_.size() != states_.size()) {
        throw ValidationError("alphabet: color count does not match state count");
    }
    // A label equal to its state id is the same as no label.
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (labels_[i] == states_[i]) labels_[i].clear();
    }
    const auto blank = [](const std::vector<std::string>& v) {
        return std::all_of(v.begin(), v.end(), [](const std::string& x) { return x.empty(); });
    };
    if (blank(labels_)) labels_.clear();
    if (blank(colors_)) colors_.clear();
}

const std::string& Alphabet::label(State s) const {
    if (!labels_.empty() && !labels_.at(s).empty()) return labels_[s];
    return states_.at(s);
}

const std::string& Alphabet::color(State s) const {
    return colors_.empty() ? kEmpty : colors_.at(s);
}

std::optional<State> Alphabet::find(std::string_view id) const {
    for (std::size_t i = 0; i < states_.size(); ++i) {
        if (states_[i] == id) return static_cast<State>(i);
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// SequenceSet
// ---------------------------------------------------------------------------

SequenceSet::SequenceSet(Alphabet alphabet, std::vector<StateSequence> sequences, std::string granularity)
    : alphabet_(std::move(alphabet)), sequences_(std::move(sequences)), granularity_(std::move(granularity)) {
    if (alphabet_.size() == 0) throw ValidationError("sequence set: empty alphabet");
    if (sequences_.empty()) throw ValidationError("sequence set: no sequences");
    const std::size_t length = sequences_.front().length();
    if (length == 0) throw ValidationError("sequence set: zero-length sequence");
    index_.reserve(sequences_.size());
    for (std::size_t i = 0; i < sequences_.size(); ++i) {
        const auto& seq = sequences_[i];
        if (seq.length() != length) {
            throw ValidationError("sequence set: subject '" + seq.subject_id + "' has length " +
                                  std::to_string(seq.length()) + ", expected " + std::to_string(length) +
                                  " (equal lengths required)");
        }
        for (State s : seq.states) {
            if (s >= alphabet_.size()) {
                throw ValidationError("sequence set: subject '" + seq.subject_id + "' has state index " +
                                      std::to_string(s) + " outside the alphabet");
            }
        }
        if (!index_.emplace(seq.subject_id, i).second) {
            throw ValidationError("sequence set: duplicate subject id '" + seq.subject_id + "'");
        }
    }
}

std::optional<std::size_t> SequenceSet::find(std::string_view subject_id) const {
    const auto it = index_.find(std::string(subject_id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

SequenceSet SequenceSet::subset(std::span<const std::size_t> indices) const {
    std::vector<StateSequence> picked;
    picked.reserve(indices.size());
    for (std::size_t i : indices) picked.push_back(sequences_.at(i));
    return SequenceSet(alphabet_, std::move(picked), granularity_);
}

// ---------------------------------------------------------------------------
// Wide format
// ---------------------------------------------------------------------------

SequenceSet parse_wide(std::istream& in, const WideOptions& options) {
    const auto rows = csv::read(in);
    if (rows.empty()) throw ValidationError("wide: missing header row");
    const auto& header = rows.front();

    const auto column_of = [&](const std::string& name) {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw ValidationError("wide: column '" + name + "' not found in header");
        return static_cast<std::size_t>(it - header.begin());
    };

    const std::size_t id_col = column_of(options.id_column);
    std::vector<std::size_t> state_cols;
    if (options.state_columns.empty()) {
        for (std::size_t c = 0; c < header.size(); ++c) {
            if (c != id_col) state_cols.push_back(c);
        }
    } else {
        for (const auto& name : options.state_columns) state_cols.push_back(column_of(name));
    }
    if (state_cols.empty()) throw ValidationError("wide: no state columns");
    if (rows.size() < 2) throw ValidationError("wide: no data rows");

    std::vector<std::string> inferred;
    std::unordered_map<std::string, State> inferred_index;
    std::vector<StateSequence> sequences;
    sequences.reserve(rows.size() - 1);

    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != header.size()) {
            throw ValidationError("wide: row " + std::to_string(r) + " has " + std::to_string(row.size()) +
                                  " fields, header has " + std::to_string(header.size()));
        }
        StateSequence seq;
        seq.subject_id = row[id_col];
        seq.states.reserve(state_cols.size());
        for (std::size_t c : state_cols) {
            const auto& token = row[c];
            if (options.alphabet) {
                const auto s = options.alphabet->find(token);
                if (!s) {
                    throw ValidationError("wide: row " + std::to_string(r) + ", column '" + header[c] +
                                          "': unknown state '" + token + "'");
                }
                seq.states.push_back(*s);
            } else {
                if (token.empty()) {
                    throw ValidationError("wide: row " + std::to_string(r) + ", column '" + header[c] +
                                          "': empty state");
                }
                auto [it, inserted] = inferred_index.emplace(token, static_cast<State>(inferred.size()));
                if (inserted) inferred.push_back(token);
                seq.states.push_back(it->second);
            }
        }
        sequences.push_back(std::move(seq));
    }

    Alphabet alphabet = options.alphabet ? *options.alphabet : Alphabet(std::move(inferred));
    return SequenceSet(std::move(alphabet), std::move(sequences), options.granularity);
}

SequenceSet read_wide(const std::string& path, const WideOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open '" + path + "'");
    return parse_wide(in, options);
}

void write_wide(std::ostream& out, const SequenceSet& set) {
    csv::Row header{"id"};
    for (std::size_t t = 1; t <= set.length(); ++t) header.push_back("t" + std::to_string(t));
    csv::write_row(out, header);
    const auto& alphabet = set.alphabet();
    for (const auto& seq : set.sequences()) {
        csv::Row row{seq.subject_id};
        for (State s : seq.states) row.push_back(alphabet.state(s));
        csv::write_row(out, row);
    }
}

// ---------------------------------------------------------------------------
// Spell format
// ---------------------------------------------------------------------------

SequenceSet spells_to_wide(std::span<const SpellRecord> spells, const Alphabet& alphabet, std::string granularity) {
    if (spells.empty()) throw ValidationError("spells: no records");
    std::vector<std::string> order;
    std::unordered_map<std::string, std::vector<const SpellRecord*>> by_subject;
    for (const auto& spell : spells) {
        auto& list = by_subject[spell.subject_id];
        if (list.empty()) order.push_back(spell.subject_id);
        list.push_back(&spell);
    }

    std::vector<StateSequence> sequences;
    sequences.reserve(order.size());
    std::size_t length = 0;
    for (const auto& id : order) {
        auto list = by_subject[id];
        std::stable_sort(list.begin(), list.end(),
                         [](const SpellRecord* a, const SpellRecord* b) { return a->start < b->start; });
        StateSequence seq{id, {}};
        std::size_t next = 1;
        for (const auto* spell : list) {
            if (spell->duration == 0) throw ValidationError("spells: subject '" + id + "' has a zero-length spell");
            if (spell->state >= alphabet.size()) {
                throw ValidationError("spells: subject '" + id + "' has a state outside the alphabet");
            }
            if (spell->start > next) {
                throw ValidationError("spells: subject '" + id + "' has a gap at time " + std::to_string(next));
            }
            if (spell->start < next) {
                throw ValidationError("spells: subject '" + id + "' has overlapping spells at time " +
                                      std::to_string(spell->start));
            }
            seq.states.insert(seq.states.end(), spell->duration, spell->state);
            next += spell->duration;
        }
        if (sequences.empty()) {
            length = seq.length();
        } else if (seq.length() != length) {
            throw ValidationError("spells: subject '" + id + "' covers " + std::to_string(seq.length()) +
                                  " time units, expected " + std::to_string(length));
        }
        sequences.push_back(std::move(seq));
    }
    return SequenceSet(alphabet, std::move(sequences), std::move(granularity));
}

Spells collapse(std::span<const State> sequence) {
    Spells out;
    for (State s : sequence) {
        if (!out.states.empty() && out.states.back() == s) {
            ++out.durations.back();
        } else {
            out.states.push_back(s);
            out.durations.push_back(1);
        }
    }
    return out;
}

std::vector<SpellRecord> wide_to_spells(const SequenceSet& set) {
    std::vector<SpellRecord> out;
    for (const auto& seq : set.sequences()) {
        const auto spells = collapse(seq.states);
        std::size_t start = 1;
        for (std::size_t i = 0; i < spells.states.size(); ++i) {
            out.push_back({seq.subject_id, spells.states[i], start, spells.durations[i]});
            start += spells.durations[i];
        }
    }
    return out;
}

std::vector<SpellRecord> parse_spells(std::istream& in, const Alphabet& alphabet) {
    const auto rows = csv::read(in);
    if (rows.empty()) throw ValidationError("spells: missing header row");
    const auto& header = rows.front();
    const csv::Row expected{"id", "state", "start", "duration"};
    if (header != expected) throw ValidationError("spells: header must be 'id,state,start,duration'");
    std::vector<SpellRecord> spells;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != 4) throw ValidationError("spells: row " + std::to_string(r) + " must have 4 fields");
        const auto s = alphabet.find(row[1]);
        if (!s) throw ValidationError("spells: row " + std::to_string(r) + ": unknown state '" + row[1] + "'");
        spells.push_back({row[0], *s, parse_positive(row[2], "start", r), parse_positive(row[3], "duration", r)});
    }
    return spells;
}

void write_spells(std::ostream& out, const std::vector<SpellRecord>& spells, const Alphabet& alphabet) {
    csv::write_row(out, {"id", "state", "start", "duration"});
    for (const auto& spell : spells) {
        csv::write_row(out, {spell.subject_id, alphabet.state(spell.state), std::to_string(spell.start),
                             std::to_string(spell.duration)});
    }
}

// ---------------------------------------------------------------------------
// Alphabet JSON
// ---------------------------------------------------------------------------

Alphabet parse_alphabet_json(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(std::string("alphabet json: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("states") || !doc["states"].is_array()) {
        throw ValidationError("alphabet json: expected an object with a \"states\" array");
    }
    std::vector<std::string> states;
    for (const auto& s : doc["states"]) {
        if (!s.is_string()) throw ValidationError("alphabet json: states must be strings");
        states.push_back(s.get<std::string>());
    }

    const auto keyed = [&](const char* key) {
        std::vector<std::string> values;
        if (!doc.contains(key)) return values;
        const auto& obj = doc[key];
        if (!obj.is_object()) throw ValidationError(std::string("alphabet json: \"") + key + "\" must be an object");
        values.assign(states.size(), std::string());
        for (const auto& [name, value] : obj.items()) {
            const auto it = std::find(states.begin(), states.end(), name);
            if (it == states.end()) {
                throw ValidationError(std::string("alphabet json: \"") + key + "\" names unknown state '" + name + "'");
            }
            if (!value.is_string()) throw ValidationError(std::string("alphabet json: \"") + key + "\" values must be strings");
            values[static_cast<std::size_t>(it - states.begin())] = value.get<std::string>();
        }
        return values;
    };
    auto labels = keyed("labels");
    auto colors = keyed("colors");
    return Alphabet(std::move(states), std::move(labels), std::move(colors));
}

Alphabet read_alphabet_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_alphabet_json(buffer.str());
}

std::string alphabet_to_json(const Alphabet& alphabet) {
    // ordered_json keeps declaration order in the label/color objects
    nlohmann::ordered_json doc;
    doc["states"] = alphabet.states();
    if (alphabet.has_labels()) {
        nlohmann::ordered_json labels = nlohmann::ordered_json::object();
        for (std::size_t i = 0; i < alphabet.size(); ++i) {
            const auto s = static_cast<State>(i);
            if (alphabet.label(s) != alphabet.state(s)) labels[alphabet.state(s)] = alphabet.label(s);
        }
        doc["labels"] = labels;
    }
    if (alphabet.has_colors()) {
        nlohmann::ordered_json colors = nlohmann::ordered_json::object();
        for (std::size_t i = 0; i < alphabet.size(); ++i) {
            const auto& c = alphabet.color(static_cast<State>(i));
            if (!c.empty()) colors[alphabet.state(static_cast<State>(i))] = c;
        }
        doc["colors"] = colors;
    }
    return doc.dump(2) + "\n";
}

}  // namespace ssa
