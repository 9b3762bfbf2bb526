#pragma once

#include "ssa/core.hpp"
#include "ssa/random.hpp"

#include <sstream>
#include <string>
#include <vector>

namespace testing {

inline ssa::Alphabet letters(std::size_t a) {
    std::vector<std::string> states;
    for (std::size_t i = 0; i < a; ++i) states.emplace_back(1, static_cast<char>('A' + i));
    return ssa::Alphabet(states);
}

/// Sequence from a string of letters, "ABBA" -> {0,1,1,0}.
inline std::vector<ssa::State> seq(std::string_view s) {
    std::vector<ssa::State> out;
    for (char c : s) out.push_back(static_cast<ssa::State>(c - 'A'));
    return out;
}

inline ssa::SequenceSet set_of(std::size_t a, const std::vector<std::string>& rows) {
    std::vector<ssa::StateSequence> seqs;
    for (std::size_t i = 0; i < rows.size(); ++i) seqs.push_back({"s" + std::to_string(i + 1), seq(rows[i])});
    return ssa::SequenceSet(letters(a), std::move(seqs));
}

inline std::vector<ssa::State> random_seq(ssa::Philox::Stream& rng, std::size_t length, std::size_t a) {
    std::vector<ssa::State> out(length);
    for (auto& s : out) s = static_cast<ssa::State>(rng.below(a));
    return out;
}

inline ssa::SequenceSet random_set(std::uint64_t seed, std::size_t n, std::size_t length, std::size_t a) {
    ssa::Philox::Stream rng(seed, 0);
    std::vector<ssa::StateSequence> seqs;
    for (std::size_t i = 0; i < n; ++i) seqs.push_back({"r" + std::to_string(i), random_seq(rng, length, a)});
    return ssa::SequenceSet(letters(a), std::move(seqs));
}

/// All sequences over `a` states with lengths in [1, max_len].
inline std::vector<std::vector<ssa::State>> all_sequences(std::size_t a, std::size_t max_len) {
    std::vector<std::vector<ssa::State>> out;
    std::vector<std::vector<ssa::State>> level{{}};
    for (std::size_t len = 1; len <= max_len; ++len) {
        std::vector<std::vector<ssa::State>> next;
        for (const auto& s : level) {
            for (std::size_t c = 0; c < a; ++c) {
                auto t = s;
                t.push_back(static_cast<ssa::State>(c));
                next.push_back(std::move(t));
            }
        }
        out.insert(out.end(), next.begin(), next.end());
        level = std::move(next);
    }
    return out;
}

}  // namespace testing
