#include "ssa/plots.hpp"

#include "ssa/error.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>

namespace ssa {

namespace {

constexpr double kLeft = 90.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kLegendHeight = 40.0;
constexpr double kBottomAxis = 24.0;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    std::string s = buf;
    // trim trailing zeros for compact, still byte-stable output
    while (!s.empty() && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
    if (s == "-0") s = "0";
    return s;
}

std::string xml_escape(const std::string& text) {
    std::string out;
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

struct Frame {
    double x0, y0, w, h;
};

class Svg {
public:
    Svg(const PlotConfig& config, const Alphabet& alphabet, std::vector<std::string> colors, const std::string& kind)
        : config_(config), alphabet_(alphabet), colors_(std::move(colors)) {
        if (!(config.width > 0.0) || !(config.height > 0.0)) throw ValidationError("plot: dimensions must be positive");
        out_ << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
        out_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << num(config.width) << "\" height=\""
             << num(config.height) << "\" viewBox=\"0 0 " << num(config.width) << ' ' << num(config.height)
             << "\" data-kind=\"" << kind << "\">\n";
        if (alphabet.size() > default_palette().size()) {
            out_ << "<defs><pattern id=\"hatch\" width=\"6\" height=\"6\" patternUnits=\"userSpaceOnUse\" "
                    "patternTransform=\"rotate(45)\"><line x1=\"0\" y1=\"0\" x2=\"0\" y2=\"6\" stroke=\"#000000\" "
                    "stroke-width=\"1.5\"/></pattern></defs>\n";
        }
        out_ << "<rect class=\"background\" x=\"0\" y=\"0\" width=\"" << num(config.width) << "\" height=\""
             << num(config.height) << "\" fill=\"#ffffff\"/>\n";
        if (!config.title.empty()) {
            text(config.width / 2.0, 24.0, config.title, "middle", 16);
        }
    }

    Frame frame() const {
        const double bottom = kBottomAxis + (config_.legend ? kLegendHeight : 0.0);
        const double w = config_.width - kLeft - kRight;
        const double h = config_.height - kTop - bottom;
        if (w <= 0.0 || h <= 0.0) throw ValidationError("plot: dimensions too small for the plot area");
        return {kLeft, kTop, w, h};
    }

    void open_area(const Frame& f, std::size_t positions) {
        out_ << "<g class=\"plot-area\" data-x=\"" << num(f.x0) << "\" data-y=\"" << num(f.y0) << "\" data-plot-width=\""
             << num(f.w) << "\" data-plot-height=\"" << num(f.h) << "\" data-positions=\"" << positions << "\">\n";
    }
    void close_area() { out_ << "</g>\n"; }

    bool hatched(State s) const { return s >= default_palette().size(); }

    void cell(const std::string& cls, double x, double y, double w, double h, State s, const std::string& attrs) {
        out_ << "<rect class=\"" << cls << "\" " << attrs << " data-state=\"" << xml_escape(alphabet_.state(s)) << "\" x=\""
             << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(w) << "\" height=\"" << num(h) << "\" fill=\""
             << colors_[s] << "\"/>\n";
        if (hatched(s)) {
            out_ << "<rect class=\"hatch\" x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(w) << "\" height=\""
                 << num(h) << "\" fill=\"url(#hatch)\"/>\n";
        }
    }

    void text(double x, double y, const std::string& content, const char* anchor = "start", int size = 11) {
        out_ << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" font-family=\"sans-serif\" font-size=\"" << size
             << "\" text-anchor=\"" << anchor << "\">" << xml_escape(content) << "</text>\n";
    }

    void line(double x1, double y1, double x2, double y2, const char* cls) {
        out_ << "<line class=\"" << cls << "\" x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(x2) << "\" y2=\""
             << num(y2) << "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
    }

    void time_axis(const Frame& f, std::size_t positions) {
        const double y = f.y0 + f.h;
        line(f.x0, y, f.x0 + f.w, y, "axis");
        const std::size_t step = positions <= 12 ? 1 : positions <= 60 ? 4 : positions / 12;
        for (std::size_t t = 1; t <= positions; t += step) {
            const double x = f.x0 + (static_cast<double>(t) - 0.5) * f.w / static_cast<double>(positions);
            text(x, y + 14.0, std::to_string(t), "middle", 10);
        }
    }

    void legend() {
        if (!config_.legend) return;
        const double y = config_.height - kLegendHeight + 12.0;
        const double slot = (config_.width - kLeft - kRight) / static_cast<double>(alphabet_.size());
        out_ << "<g class=\"legend\">\n";
        for (std::size_t s = 0; s < alphabet_.size(); ++s) {
            const double x = kLeft + slot * static_cast<double>(s);
            const auto state = static_cast<State>(s);
            out_ << "<rect class=\"swatch\" data-state=\"" << xml_escape(alphabet_.state(state)) << "\" x=\"" << num(x)
                 << "\" y=\"" << num(y) << "\" width=\"12\" height=\"12\" fill=\"" << colors_[s] << "\" stroke=\"#333333\"/>\n";
            std::string label = alphabet_.label(state);
            if (hatched(state)) {
                out_ << "<rect class=\"hatch\" x=\"" << num(x) << "\" y=\"" << num(y)
                     << "\" width=\"12\" height=\"12\" fill=\"url(#hatch)\"/>\n";
                label += " (hatched)";
            }
            text(x + 16.0, y + 10.0, label);
        }
        out_ << "</g>\n";
    }

    std::string finish() {
        legend();
        out_ << "</svg>\n";
        return out_.str();
    }

private:
    const PlotConfig& config_;
    const Alphabet& alphabet_;
    std::vector<std::string> colors_;
    std::ostringstream out_;
};

// Emits one rect per position of `states` across a row of the frame.
void draw_row(Svg& svg, const Frame& f, std::span<const State> states, double y, double h, std::size_t row,
              const std::string& cls) {
    const double cw = f.w / static_cast<double>(states.size());
    const std::string prefix = "data-row=\"" + std::to_string(row) + "\" data-pos=\"";
    for (std::size_t t = 0; t < states.size(); ++t) {
        svg.cell(cls, f.x0 + cw * static_cast<double>(t), y, cw, h, states[t], prefix + std::to_string(t + 1) + "\"");
    }
}

}  // namespace

const std::vector<std::string>& default_palette() {
    static const std::vector<std::string> palette = {"#E69F00", "#56B4E9", "#009E73", "#F0E442",
                                                     "#0072B2", "#D55E00", "#CC79A7", "#000000"};
    return palette;
}

std::vector<std::string> state_colors(const Alphabet& alphabet, const PlotConfig& config) {
    const std::size_t a = alphabet.size();
    if (!config.colors.empty()) {
        if (config.colors.size() != a) throw ValidationError("plot: need exactly one color per state");
        return config.colors;
    }
    std::vector<std::string> colors(a);
    bool all_declared = alphabet.has_colors();
    for (std::size_t s = 0; s < a && all_declared; ++s) all_declared = !alphabet.color(static_cast<State>(s)).empty();
    for (std::size_t s = 0; s < a; ++s) {
        colors[s] = all_declared ? alphabet.color(static_cast<State>(s)) : default_palette()[s % default_palette().size()];
    }
    return colors;
}

std::string index_plot(const SequenceSet& set, const ClusterAssignment* labels, const PlotConfig& config) {
    if (labels && labels->labels.size() != set.size()) throw ValidationError("index plot: label count does not match sequences");
    if (config.sort == SortKey::cluster && !labels) throw ValidationError("index plot: cluster sort needs cluster labels");

    std::vector<std::size_t> order(set.size());
    std::iota(order.begin(), order.end(), 0);
    if (config.sort == SortKey::first_state) {
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return set[a].states < set[b].states; });
    } else if (config.sort == SortKey::cluster) {
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return labels->labels[a] < labels->labels[b]; });
    }

    Svg svg(config, set.alphabet(), state_colors(set.alphabet(), config), "index");
    const Frame f = svg.frame();
    const double rh = f.h / static_cast<double>(set.size());
    svg.open_area(f, set.length());
    for (std::size_t r = 0; r < order.size(); ++r) {
        draw_row(svg, f, set[order[r]].states, f.y0 + rh * static_cast<double>(r), rh, r, "cell");
    }
    if (config.sort == SortKey::cluster) {
        for (std::size_t r = 1; r < order.size(); ++r) {
            if (labels->labels[order[r]] != labels->labels[order[r - 1]]) {
                const double y = f.y0 + rh * static_cast<double>(r);
                svg.line(f.x0, y, f.x0 + f.w, y, "separator");
            }
        }
        std::size_t start = 0;
        for (std::size_t r = 1; r <= order.size(); ++r) {
            if (r == order.size() || labels->labels[order[r]] != labels->labels[order[start]]) {
                const double mid = f.y0 + rh * (static_cast<double>(start + r) / 2.0);
                svg.text(f.x0 - 6.0, mid + 4.0, "Cluster " + std::to_string(labels->labels[order[start]]), "end", 10);
                start = r;
            }
        }
    } else {
        svg.text(f.x0 - 6.0, f.y0 + 10.0, "1", "end", 10);
        svg.text(f.x0 - 6.0, f.y0 + f.h, std::to_string(set.size()), "end", 10);
    }
    svg.close_area();
    svg.time_axis(f, set.length());
    return svg.finish();
}

std::string distribution_plot(const StateDistribution& dist, const Alphabet& alphabet, const PlotConfig& config) {
    if (dist.per_position.empty() || dist.a != alphabet.size()) throw ValidationError("distribution plot: invalid distribution");
    Svg svg(config, alphabet, state_colors(alphabet, config), "distribution");
    const Frame f = svg.frame();
    const std::size_t positions = dist.per_position.size();
    const double cw = f.w / static_cast<double>(positions);
    svg.open_area(f, positions);
    for (std::size_t t = 0; t < positions; ++t) {
        double y = f.y0 + f.h;  // stack upwards from the baseline
        for (std::size_t s = 0; s < dist.a; ++s) {
            const double h = dist.per_position[t][s] * f.h;
            if (h <= 0.0) continue;
            y -= h;
            const std::string attrs = "data-pos=\"" + std::to_string(t + 1) + "\"";
            svg.cell("band", f.x0 + cw * static_cast<double>(t), y, cw, h, static_cast<State>(s), attrs);
        }
    }
    svg.close_area();
    svg.text(f.x0 - 6.0, f.y0 + 4.0, "1.0", "end", 10);
    svg.text(f.x0 - 6.0, f.y0 + f.h / 2.0 + 4.0, "0.5", "end", 10);
    svg.text(f.x0 - 6.0, f.y0 + f.h + 4.0, "0", "end", 10);
    svg.time_axis(f, positions);
    return svg.finish();
}

std::string frequency_plot(const FrequencyTable& table, const Alphabet& alphabet, const PlotConfig& config) {
    if (table.entries.empty()) throw ValidationError("frequency plot: empty table");
    Svg svg(config, alphabet, state_colors(alphabet, config), "frequency");
    const Frame f = svg.frame();
    double shown = 0.0;
    for (const auto& e : table.entries) shown += e.share;
    const std::size_t positions = table.entries.front().states.size();
    svg.open_area(f, positions);
    double y = f.y0;
    for (std::size_t r = 0; r < table.entries.size(); ++r) {
        const auto& e = table.entries[r];
        const double h = e.share / shown * f.h;
        draw_row(svg, f, e.states, y, h, r, "cell");
        y += h;
    }
    svg.close_area();
    char pct[64];
    std::snprintf(pct, sizeof pct, "%.1f%% of %zu", 100.0 * shown, table.n);
    svg.text(f.x0 - 6.0, f.y0 + 10.0, pct, "end", 10);
    svg.time_axis(f, positions);
    return svg.finish();
}

std::string modal_plot(const SequenceSet& set, const ClusterAssignment* labels, const PlotConfig& config) {
    std::vector<std::pair<std::string, StateSequence>> strips;
    if (labels) {
        if (labels->labels.size() != set.size()) throw ValidationError("modal plot: label count does not match sequences");
        for (std::size_t c = 1; c <= labels->k; ++c) {
            std::vector<std::size_t> members;
            for (std::size_t i = 0; i < set.size(); ++i) {
                if (labels->labels[i] == static_cast<int>(c)) members.push_back(i);
            }
            strips.emplace_back("Cluster " + std::to_string(c) + " (n=" + std::to_string(members.size()) + ")",
                                modal_sequence(set.subset(members)));
        }
    } else {
        strips.emplace_back("All (n=" + std::to_string(set.size()) + ")", modal_sequence(set));
    }

    Svg svg(config, set.alphabet(), state_colors(set.alphabet(), config), "modal");
    const Frame f = svg.frame();
    const double slot = f.h / static_cast<double>(strips.size());
    const double h = slot * 0.8;
    svg.open_area(f, set.length());
    for (std::size_t r = 0; r < strips.size(); ++r) {
        const double y = f.y0 + slot * static_cast<double>(r) + (slot - h) / 2.0;
        draw_row(svg, f, strips[r].second.states, y, h, r, "cell");
        svg.text(f.x0 - 6.0, y + h / 2.0 + 4.0, strips[r].first, "end", 10);
    }
    svg.close_area();
    svg.time_axis(f, set.length());
    return svg.finish();
}

}  // namespace ssa
