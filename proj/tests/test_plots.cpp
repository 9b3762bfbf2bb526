#include "helpers.hpp"
#include "svg_reader.hpp"
#include "ssa/descriptives.hpp"
#include "ssa/error.hpp"
#include "ssa/plots.hpp"
#include "ssa/synth.hpp"

#include <doctest.h>

#include <cmath>

using namespace ssa;

namespace {

double attr(const svg_reader::Attrs& a, const std::string& key) { return std::stod(a.at(key)); }

double plot_height(const svg_reader::Document& doc) {
    for (const auto& g : doc.groups) {
        if (g.count("data-plot-height")) return std::stod(g.at("data-plot-height"));
    }
    return -1.0;
}

}  // namespace

TEST_CASE("index plot cells carry the state color") {
    const auto set = testing::random_set(2, 5, 10, 4);
    const auto svg = index_plot(set, nullptr, {});
    const auto doc = svg_reader::parse(svg);
    const auto cells = svg_reader::with_class(doc, "cell");
    REQUIRE(cells.size() == 50);
    const auto& palette = default_palette();
    for (const auto& c : cells) {
        const auto row = std::stoul(c.at("data-row"));
        const auto pos = std::stoul(c.at("data-pos"));
        const State s = set[row].states[pos - 1];
        CHECK(c.at("fill") == palette[s]);
        CHECK(c.at("data-state") == set.alphabet().state(s));
    }
    CHECK(doc.root.at("data-kind") == "index");
}

TEST_CASE("index plot: one sequence, three positions") {
    const auto doc = svg_reader::parse(index_plot(testing::set_of(3, {"AAC"}), nullptr, {}));
    const auto cells = svg_reader::with_class(doc, "cell");
    REQUIRE(cells.size() == 3);
    CHECK(cells[0].at("fill") == default_palette()[0]);
    CHECK(cells[1].at("fill") == default_palette()[0]);
    CHECK(cells[2].at("fill") == default_palette()[2]);
}

TEST_CASE("index plot: ten sequences in input order") {
    const auto set = testing::random_set(3, 10, 6, 3);
    const auto cells = svg_reader::with_class(svg_reader::parse(index_plot(set, nullptr, {})), "cell");
    double last_y = -1.0;
    for (std::size_t r = 0; r < 10; ++r) {
        const auto& first = cells[r * 6];
        CHECK(std::stoul(first.at("data-row")) == r);
        CHECK(first.at("data-state") == set.alphabet().state(set[r].states[0]));
        CHECK(attr(first, "y") > last_y);
        last_y = attr(first, "y");
    }
}

TEST_CASE("index plot: cluster sort groups rows") {
    const auto set = testing::set_of(2, {"AA", "BB", "AB", "BA", "AA"});
    const auto labels = ClusterAssignment::from_labels({2, 1, 2, 1, 1});
    PlotConfig config;
    config.sort = SortKey::cluster;
    const auto svg = index_plot(set, &labels, config);
    const auto cells = svg_reader::with_class(svg_reader::parse(svg), "cell");
    // Rows 0..2 are cluster 1 (inputs 1, 3, 4), rows 3..4 cluster 2 (inputs 0, 2).
    const std::vector<std::string> expected{"B", "B", "B", "A", "A", "A", "A", "A", "A", "B"};
    for (std::size_t i = 0; i < cells.size(); ++i) CHECK(cells[i].at("data-state") == expected[i]);
    CHECK(svg.find("Cluster 2") != std::string::npos);
    CHECK(svg.find("class=\"separator\"") != std::string::npos);
    CHECK_THROWS_AS(index_plot(set, nullptr, config), ValidationError);
}

TEST_CASE("index plot: first-state sort") {
    const auto set = testing::set_of(2, {"BA", "AB", "AA"});
    PlotConfig config;
    config.sort = SortKey::first_state;
    const auto cells = svg_reader::with_class(svg_reader::parse(index_plot(set, nullptr, config)), "cell");
    CHECK(cells[0].at("data-state") == "A");
    CHECK(cells[1].at("data-state") == "A");
    CHECK(cells[4].at("data-state") == "B");
}

TEST_CASE("distribution plot bands") {
    SUBCASE("one-hot gives a single full band") {
        const auto set = testing::set_of(2, {"AAB"});
        const auto doc = svg_reader::parse(distribution_plot(state_distribution(set), set.alphabet(), {}));
        const auto bands = svg_reader::with_class(doc, "band");
        REQUIRE(bands.size() == 3);
        for (const auto& b : bands) CHECK(attr(b, "height") == doctest::Approx(plot_height(doc)));
    }
    SUBCASE("50/50") {
        const auto set = testing::set_of(2, {"AB", "BA"});
        const auto doc = svg_reader::parse(distribution_plot(state_distribution(set), set.alphabet(), {}));
        for (const auto& b : svg_reader::with_class(doc, "band")) CHECK(attr(b, "height") == doctest::Approx(plot_height(doc) / 2));
    }
    SUBCASE("heights match proportions") {
        const auto set = testing::random_set(6, 37, 12, 4);
        const auto dist = state_distribution(set);
        const auto doc = svg_reader::parse(distribution_plot(dist, set.alphabet(), {}));
        const double h = plot_height(doc);
        std::vector<double> sums(12, 0.0);
        for (const auto& b : svg_reader::with_class(doc, "band")) {
            const auto pos = std::stoul(b.at("data-pos"));
            const auto s = *set.alphabet().find(b.at("data-state"));
            CHECK(std::abs(attr(b, "height") - dist.per_position[pos - 1][s] * h) < 0.5);
            sums[pos - 1] += attr(b, "height");
        }
        for (double s : sums) CHECK(std::abs(s - h) < 0.5);
    }
}

TEST_CASE("frequency plot strips") {
    SUBCASE("identical cohort") {
        const auto set = testing::set_of(2, {"AB", "AB"});
        const auto doc = svg_reader::parse(frequency_plot(frequency_table(set, 10), set.alphabet(), {}));
        for (const auto& c : svg_reader::with_class(doc, "cell")) CHECK(attr(c, "height") == doctest::Approx(plot_height(doc)));
    }
    SUBCASE("60/30/10") {
        std::vector<std::string> rows(6, "AA");
        rows.insert(rows.end(), 3, "AB");
        rows.push_back("BB");
        const auto set = testing::set_of(2, rows);
        const auto doc = svg_reader::parse(frequency_plot(frequency_table(set, 10), set.alphabet(), {}));
        std::map<std::string, double> height;
        for (const auto& c : svg_reader::with_class(doc, "cell")) height[c.at("data-row")] = attr(c, "height");
        CHECK(height["0"] / height["2"] == doctest::Approx(6.0).epsilon(1e-3));
        CHECK(height["1"] / height["2"] == doctest::Approx(3.0).epsilon(1e-3));
    }
    SUBCASE("ten equal strips") {
        std::vector<std::string> rows;
        for (int i = 0; i < 10; ++i) {
            std::string s;
            for (int b = 3; b >= 0; --b) s += (i >> b) & 1 ? 'B' : 'A';
            rows.push_back(s);
        }
        const auto set = testing::set_of(2, rows);
        const auto doc = svg_reader::parse(frequency_plot(frequency_table(set, 10), set.alphabet(), {}));
        for (const auto& c : svg_reader::with_class(doc, "cell")) CHECK(attr(c, "height") == doctest::Approx(plot_height(doc) / 10).epsilon(1e-3));
    }
}

TEST_CASE("modal plot") {
    const auto flat = testing::set_of(2, {"AAA", "AAA"});
    const auto one = svg_reader::with_class(svg_reader::parse(modal_plot(flat, nullptr, {})), "cell");
    REQUIRE(one.size() == 3);
    for (const auto& c : one) CHECK(c.at("data-state") == "A");

    const auto set = testing::set_of(3, {"AAB", "ABB", "CCA", "CCC", "BBB", "BAB"});
    const auto labels = ClusterAssignment::from_labels({1, 1, 2, 2, 3, 3});
    const auto cells = svg_reader::with_class(svg_reader::parse(modal_plot(set, &labels, {})), "cell");
    REQUIRE(cells.size() == 9);
    // Cluster 1: position 2 ties A/B and resolves to A.
    const std::vector<std::string> expected{"A", "A", "B", "C", "C", "A", "B", "A", "B"};
    for (std::size_t i = 0; i < 9; ++i) CHECK(cells[i].at("data-state") == expected[i]);
}

TEST_CASE("palette, hatching and determinism") {
    std::vector<std::string> many;
    for (int i = 0; i < 10; ++i) many.push_back("s" + std::to_string(i));
    const Alphabet big(many);
    std::vector<StateSequence> seqs{{"x", {0, 8, 9}}};
    const SequenceSet set(big, seqs);
    const auto svg = index_plot(set, nullptr, {});
    CHECK(svg.find("pattern id=\"hatch\"") != std::string::npos);
    CHECK(svg.find("s9 (hatched)") != std::string::npos);
    CHECK(svg == index_plot(set, nullptr, {}));
    CHECK_NOTHROW(svg_reader::parse(svg));

    const auto colored = table2_spec(3, 4, 1).alphabet;
    CHECK(state_colors(colored, {}) == std::vector<std::string>{"#f0f0f0", "#a6cee3", "#1f78b4", "#08306b"});
    PlotConfig custom;
    custom.colors = {"#111111"};
    CHECK_THROWS_AS(state_colors(colored, custom), ValidationError);
    PlotConfig tiny;
    tiny.width = 50;
    CHECK_THROWS_AS(index_plot(set, nullptr, tiny), ValidationError);
}

TEST_CASE("labels with markup are escaped") {
    const Alphabet a({"<a>", "b&c"});
    const SequenceSet set(a, {{"x", {0, 1}}});
    PlotConfig config;
    config.title = "A \"quoted\" <title>";
    CHECK_NOTHROW(svg_reader::parse(index_plot(set, nullptr, config)));
}
