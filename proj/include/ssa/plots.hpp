#pragma once

#include "ssa/clustering.hpp"
#include "ssa/core.hpp"
#include "ssa/descriptives.hpp"

#include <string>
#include <vector>

// =============================================================================
// Static SVG renderers: index, state-distribution, frequency and modal plots.
//
// Output is plain SVG text with no drawing dependency and is byte-stable for
// a fixed input and config. Shapes carry `class` and `data-*` attributes
// (row, position, state) so tests and downstream tools can read them back.
// =============================================================================

namespace ssa {

enum class SortKey { input, first_state, cluster };

struct PlotConfig {
    double width = 800.0;
    double height = 500.0;
    /// One color per state. Empty: the alphabet's colors when it declares all
    /// of them, else the default palette.
    std::vector<std::string> colors;
    SortKey sort = SortKey::input;
    bool legend = true;
    std::string title;
};

/// Okabe-Ito colorblind-safe cycle.
const std::vector<std::string>& default_palette();

/// Resolved fill for every state. States past the palette length reuse its
/// colors and are drawn with a hatch overlay.
std::vector<std::string> state_colors(const Alphabet& alphabet, const PlotConfig& config);

/// One row per sequence, one rect per position. With `labels` and
/// SortKey::cluster, rows are grouped by cluster with a separator line.
std::string index_plot(const SequenceSet& set, const ClusterAssignment* labels, const PlotConfig& config);
/// Stacked bars; state s at position t has height proportion(t, s) * plot height.
std::string distribution_plot(const StateDistribution& dist, const Alphabet& alphabet, const PlotConfig& config);
/// Listed sequences stacked as strips, heights proportional to share and
/// scaled so the listed shares fill the plot.
std::string frequency_plot(const FrequencyTable& table, const Alphabet& alphabet, const PlotConfig& config);
/// One modal-state strip per cluster (a single strip without labels).
std::string modal_plot(const SequenceSet& set, const ClusterAssignment* labels, const PlotConfig& config);

}  // namespace ssa
