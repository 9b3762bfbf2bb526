#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

// =============================================================================
// Sequence data model
//
// A cohort is a SequenceSet: n subjects, each observed at the same T equally
// spaced positions, every position holding one state of a shared Alphabet.
// Time is 1-based in every external format and 0-based in memory.
// =============================================================================

namespace ssa {

/// Index of a state within its Alphabet.
using State = std::uint16_t;

/// The finite state set. Declaration order is the canonical order for every
/// matrix row, legend and tie-break downstream.
class Alphabet {
public:
    Alphabet() = default;
    explicit Alphabet(std::vector<std::string> states, std::vector<std::string> labels = {},
                      std::vector<std::string> colors = {});

    std::size_t size() const noexcept { return states_.size(); }
    const std::vector<std::string>& states() const noexcept { return states_; }
    const std::string& state(State s) const { return states_.at(s); }

    /// Display name; falls back to the state identifier.
    const std::string& label(State s) const;
    /// Declared color, or empty when none was given.
    const std::string& color(State s) const;
    bool has_labels() const noexcept { return !labels_.empty(); }
    bool has_colors() const noexcept { return !colors_.empty(); }

    std::optional<State> find(std::string_view id) const;

    friend bool operator==(const Alphabet&, const Alphabet&) = default;

private:
    std::vector<std::string> states_;
    std::vector<std::string> labels_;
    std::vector<std::string> colors_;
};

struct StateSequence {
    std::string subject_id;
    std::vector<State> states;

    std::size_t length() const noexcept { return states.size(); }
    friend bool operator==(const StateSequence&, const StateSequence&) = default;
};

/// Immutable cohort of equal-length sequences over one alphabet.
class SequenceSet {
public:
    /// Throws ValidationError on an empty set, a zero-length or ragged
    /// sequence, a state index outside the alphabet, or a duplicate id.
    SequenceSet(Alphabet alphabet, std::vector<StateSequence> sequences,
                std::string granularity = "week");

    const Alphabet& alphabet() const noexcept { return alphabet_; }
    std::span<const StateSequence> sequences() const noexcept { return sequences_; }
    const StateSequence& operator[](std::size_t i) const { return sequences_[i]; }
    const std::string& granularity() const noexcept { return granularity_; }

    std::size_t size() const noexcept { return sequences_.size(); }
    std::size_t length() const noexcept { return sequences_.front().length(); }
    std::size_t alphabet_size() const noexcept { return alphabet_.size(); }

    /// Position of a subject in input order.
    std::optional<std::size_t> find(std::string_view subject_id) const;

    /// Subset in the given order, sharing the alphabet.
    SequenceSet subset(std::span<const std::size_t> indices) const;

private:
    Alphabet alphabet_;
    std::vector<StateSequence> sequences_;
    std::string granularity_;
    std::unordered_map<std::string, std::size_t> index_;
};

struct SpellRecord {
    std::string subject_id;
    State state = 0;
    std::size_t start = 1;     // 1-based
    std::size_t duration = 1;

    friend bool operator==(const SpellRecord&, const SpellRecord&) = default;
};

// -----------------------------------------------------------------------------
// Ingestion and conversion
// -----------------------------------------------------------------------------

struct WideOptions {
    std::string id_column = "id";
    /// Time-ordered state columns; empty means every column except the id.
    std::vector<std::string> state_columns;
    /// Declared alphabet; when absent, distinct tokens in first-appearance order.
    std::optional<Alphabet> alphabet;
    std::string granularity = "week";
};

/// Parses a wide table (header row, one subject per row). Errors name the
/// offending row (1-based, header excluded), column and token.
SequenceSet parse_wide(std::istream& in, const WideOptions& options = {});
SequenceSet read_wide(const std::string& path, const WideOptions& options = {});
void write_wide(std::ostream& out, const SequenceSet& set);

/// Expands contiguous spells into a wide set. Subjects appear in order of
/// first occurrence; spells for one subject may be listed in any order.
SequenceSet spells_to_wide(std::span<const SpellRecord> spells, const Alphabet& alphabet,
                           std::string granularity = "week");

/// Maximal runs of identical states, in subject then time order.
std::vector<SpellRecord> wide_to_spells(const SequenceSet& set);

/// Spell CSV with columns `id,state,start,duration`.
std::vector<SpellRecord> parse_spells(std::istream& in, const Alphabet& alphabet);
void write_spells(std::ostream& out, const std::vector<SpellRecord>& spells, const Alphabet& alphabet);

/// `{"states":[...], "labels":{...}, "colors":{...}}`; labels/colors optional.
Alphabet parse_alphabet_json(std::string_view text);
Alphabet read_alphabet_json(const std::string& path);
std::string alphabet_to_json(const Alphabet& alphabet);

/// Spell-collapsed view of one sequence: distinct successive states and
/// their durations.
struct Spells {
    std::vector<State> states;
    std::vector<std::size_t> durations;
};
Spells collapse(std::span<const State> sequence);

}  // namespace ssa
