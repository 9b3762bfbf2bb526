#include "cli.hpp"

#include "manifest.hpp"

#include "ssa/clustering.hpp"
#include "ssa/core.hpp"
#include "ssa/csv.hpp"
#include "ssa/descriptives.hpp"
#include "ssa/dissimilarity.hpp"
#include "ssa/error.hpp"
#include "ssa/indicators.hpp"
#include "ssa/plots.hpp"
#include "ssa/survival.hpp"
#include "ssa/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <omp.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#ifndef SSA_VERSION
#define SSA_VERSION "0.0.0"
#endif
#ifndef SSA_BUILD_HASH
#define SSA_BUILD_HASH "unknown"
#endif

namespace ssa::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

// Matrices with more subjects than this are written in the binary format
// unless --format csv is given.
constexpr std::size_t kBinaryThreshold = 1000;

struct Context {
    int threads = 0;
    std::ostream& out;
    std::ostream& err;
};

int resolve_threads(int requested) { return requested > 0 ? requested : std::max(1, omp_get_max_threads()); }

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open '" + path + "'");
    return in;
}

template <class F>
std::string render(F&& write) {
    std::ostringstream s;
    write(s);
    return s.str();
}

std::vector<std::string> subject_ids(const SequenceSet& set) {
    std::vector<std::string> ids;
    ids.reserve(set.size());
    for (const auto& seq : set.sequences()) ids.push_back(seq.subject_id);
    return ids;
}

std::vector<double> parse_number_list(const std::string& text, const std::string& what) {
    std::vector<double> values;
    std::stringstream s(text);
    std::string field;
    while (std::getline(s, field, ',')) {
        try {
            std::size_t used = 0;
            values.push_back(std::stod(field, &used));
            if (used != field.size()) throw std::invalid_argument(field);
        } catch (const std::exception&) {
            throw ValidationError(what + ": '" + field + "' is not a number");
        }
    }
    if (values.empty()) throw ValidationError(what + ": empty list");
    return values;
}

// ---------------------------------------------------------------------------
// Shared option groups
// ---------------------------------------------------------------------------

struct SequenceInput {
    std::string input;
    std::string spells;
    std::string alphabet;
    std::string id_column = "id";
    std::string granularity = "week";

    void add_to(CLI::App* app) {
        app->add_option("--input,-i", input, "Wide sequence CSV: id column plus one column per position");
        app->add_option("--spells", spells, "Spell CSV (id,state,start,duration) instead of --input; needs --alphabet");
        app->add_option("--alphabet", alphabet, "Alphabet JSON; default: tokens in order of first appearance");
        app->add_option("--id-column", id_column, "Subject id column of the wide CSV");
        app->add_option("--granularity", granularity, "Width of one position");
    }

    SequenceSet load(Manifest& m) const {
        if (input.empty() == spells.empty()) throw ValidationError("give exactly one of --input or --spells");
        std::optional<Alphabet> declared;
        if (!alphabet.empty()) {
            m.input(alphabet);
            declared = read_alphabet_json(alphabet);
        }
        if (!spells.empty()) {
            if (!declared) throw ValidationError("--spells needs --alphabet");
            m.input(spells);
            auto in = open_input(spells);
            return spells_to_wide(parse_spells(in, *declared), *declared, granularity);
        }
        m.input(input);
        WideOptions options;
        options.id_column = id_column;
        options.alphabet = declared;
        options.granularity = granularity;
        return read_wide(input, options);
    }
};

struct DistParams {
    std::string metric = "lcs";
    std::string costs = "constant";
    double sub_cost = 2.0;
    double indel = 1.0;
    std::string format = "auto";
    std::size_t audit = 0;
    std::uint64_t audit_seed = 1;

    void add_to(CLI::App* app) {
        app->add_option("--metric", metric, "om, lcs, hamming or dhd")
            ->check(CLI::IsMember({"om", "lcs", "hamming", "dhd"}));
        app->add_option("--costs", costs,
                        "Substitution costs for om/hamming: 'constant', 'transition' (2 - p(a,b) - p(b,a)) or a cost CSV path");
        app->add_option("--sub-cost", sub_cost, "Constant substitution cost for om");
        app->add_option("--indel", indel, "Insertion/deletion cost for om");
        app->add_option("--format", format, "Matrix output: auto (binary above 1000 subjects), csv or binary")
            ->check(CLI::IsMember({"auto", "csv", "binary"}));
        app->add_option("--audit", audit, "Sampled triangle-inequality checks to run (0 = none)");
        app->add_option("--audit-seed", audit_seed, "Seed for the triangle audit sample");
    }
};

struct ClusterParams {
    std::size_t k = 3;
    std::size_t k_min = 2;
    std::size_t k_max = 8;

    void add_to(CLI::App* app) {
        app->add_option("--k", k, "Number of clusters to cut");
        app->add_option("--k-min", k_min, "Smallest k in the silhouette report");
        app->add_option("--k-max", k_max, "Largest k in the silhouette report");
    }
    void validate() const {
        if (k < 1) throw ValidationError("--k must be at least 1");
        if (k_min > k_max) throw ValidationError("--k-min must not exceed --k-max");
    }
};

struct PlotParams {
    std::string prefix = "ssa";
    double width = 800.0;
    double height = 500.0;
    std::string sort = "auto";
    std::size_t top = 10;
    std::string title;
    std::string colors;
    bool per_cluster = true;

    void add_to(CLI::App* app) {
        app->add_option("--prefix", prefix, "File name prefix: <prefix>_{index,dist,freq,modal}[_cluster<k>].svg");
        app->add_option("--width", width, "SVG width in px");
        app->add_option("--height", height, "SVG height in px");
        app->add_option("--sort", sort, "Index plot row order: auto, input, first or cluster")
            ->check(CLI::IsMember({"auto", "input", "first", "cluster"}));
        app->add_option("--plot-top", top, "Sequences shown in the frequency plot");
        app->add_option("--title", title, "Plot title");
        app->add_option("--colors", colors, "Comma-separated fill colors, one per state");
        app->add_option("--per-cluster", per_cluster, "Also write one index/dist/freq plot per cluster");
    }
};

// ---------------------------------------------------------------------------
// Stages shared by the single commands and the pipeline
// ---------------------------------------------------------------------------

void stage_describe(const SequenceSet& set, std::size_t top, Manifest& m) {
    m.write_output("describe.json", describe_json(set, top));
    const auto& alphabet = set.alphabet();
    m.write_output("transitions.csv", render([&](std::ostream& o) { write_transition_csv(o, transition_matrix(set), alphabet); }));
    m.write_output("distribution.csv",
                   render([&](std::ostream& o) { write_distribution_csv(o, state_distribution(set), alphabet); }));
    m.write_output("frequency.csv", render([&](std::ostream& o) { write_frequency_csv(o, frequency_table(set, top), alphabet); }));
}

std::vector<IndicatorRow> stage_indicators(const SequenceSet& set, const Context& ctx, Manifest& m) {
    auto rows = indicator_table(set, resolve_threads(ctx.threads));
    m.write_output("indicators.csv", render([&](std::ostream& o) { write_indicators(o, rows, set.alphabet()); }));
    return rows;
}

DissimilarityMatrix stage_dist(const SequenceSet& set, const DistParams& p, const Context& ctx, Manifest& m) {
    const Metric metric = parse_metric(p.metric);
    const std::size_t a = set.alphabet_size();
    PairwiseParams params;
    params.threads = resolve_threads(ctx.threads);
    if (metric == Metric::om || metric == Metric::hamming) {
        std::vector<std::string> warnings;
        if (p.costs == "constant") {
            if (metric == Metric::om) params.costs = SubstitutionCostMatrix::constant(a, p.sub_cost, p.indel);
        } else if (p.costs == "transition") {
            const auto rates = transition_rate_costs(set, &warnings);
            params.costs = SubstitutionCostMatrix(a, std::vector<double>(rates.values().begin(), rates.values().end()), p.indel,
                                                  CostSource::transition_rate);
        } else {
            m.input(p.costs);
            auto in = open_input(p.costs);
            params.costs = read_costs_csv(in, set.alphabet(), p.indel);
        }
        for (const auto& w : warnings) ctx.err << "warning: " << w << "\n";
        if (params.costs) {
            m.write_output("costs.csv", render([&](std::ostream& o) { write_costs_csv(o, *params.costs, set.alphabet()); }));
        }
    } else if (p.costs != "constant") {
        throw ValidationError("--costs applies only to om and hamming");
    }

    auto d = pairwise_matrix(set, metric, params);

    std::string format = p.format;
    if (format == "auto") format = set.size() > kBinaryThreshold ? "binary" : "csv";
    m.parameter("resolved_format", format);
    if (format == "csv") {
        const auto ids = subject_ids(set);
        m.write_output("dist.csv", render([&](std::ostream& o) { write_matrix_csv(o, d, ids); }));
    } else {
        m.write_output("dist.bin", render([&](std::ostream& o) { write_matrix_binary(o, d); }));
    }

    if (p.audit > 0 && d.size() >= 3) {
        const auto audit = triangle_audit(d, p.audit, p.audit_seed);
        json doc;
        doc["checked"] = audit.checked;
        doc["violations"] = audit.violations;
        doc["worst_excess"] = audit.worst_excess;
        m.write_output("dist_audit.json", doc.dump(2) + "\n");
        if (audit.violations > 0) {
            ctx.err << "warning: " << audit.violations << " of " << audit.checked << " sampled triples violate the triangle inequality\n";
        }
    }
    return d;
}

ClusterAssignment stage_cluster(const DissimilarityMatrix& d, std::span<const std::string> ids, const ClusterParams& p,
                                const Context& ctx, Manifest& m) {
    p.validate();
    if (p.k > d.size()) throw ValidationError("--k " + std::to_string(p.k) + " exceeds the " + std::to_string(d.size()) + " subjects");
    const auto tree = ward_cluster(d);
    if (!tree.inversions.empty()) ctx.err << "warning: dendrogram has " << tree.inversions.size() << " height inversions\n";
    const auto assignment = cut_tree(tree, p.k);
    m.write_output("clusters.csv", render([&](std::ostream& o) { write_assignment_csv(o, ids, assignment); }));
    m.write_output("dendrogram.json", dendrogram_to_json(tree));

    std::vector<SilhouetteDiagnostic> diag;
    if (d.size() >= 3) diag = silhouette_by_k(d, tree, p.k_min, p.k_max, resolve_threads(ctx.threads));
    m.write_output("silhouette.csv", render([&](std::ostream& o) {
                       csv::write_row(o, {"k", "silhouette"});
                       for (const auto& s : diag) csv::write_row(o, {std::to_string(s.k), csv::format_double(s.width)});
                   }));
    ctx.out << "k  silhouette\n";
    for (const auto& s : diag) {
        std::ostringstream line;
        line << std::fixed << std::setprecision(4) << s.width;
        ctx.out << s.k << (s.k < 10 ? "  " : " ") << line.str() << (s.k == p.k ? "  <- cut" : "") << "\n";
    }
    ctx.out << "cluster sizes:";
    for (auto s : assignment.sizes) ctx.out << " " << s;
    ctx.out << "\n";
    return assignment;
}

void stage_profile(const SequenceSet& set, const ClusterAssignment& clusters, const CovariateTable* covariates, const Context& ctx,
                   Manifest& m) {
    const auto profile = cluster_profile(set, clusters, covariates);
    for (const auto& w : profile.warnings) ctx.err << "warning: " << w << "\n";
    m.write_output("profile.csv", render([&](std::ostream& o) { write_profile_csv(o, profile); }));
    m.write_output("profile.txt", render_profile_text(profile));
}

void stage_assoc(const SequenceSet& set, const ClusterAssignment& clusters, std::span<const IndicatorRow> indicators,
                 const OutcomeTable& outcomes, const std::string& ties, const Context& ctx, Manifest& m) {
    CoxOptions options;
    options.ties = ties == "breslow" ? TieMethod::breslow : TieMethod::efron;
    const auto ids = subject_ids(set);
    const auto design = build_design(ids, clusters, indicators, outcomes);
    const auto report = univariable_and_adjusted(design, options);
    m.write_output("hazard.csv", render([&](std::ostream& o) { write_hazard_csv(o, report); }));
    const auto text = render_hazard_text(report);
    m.write_output("hazard.txt", text);
    ctx.out << text;
}

SortKey resolve_sort(const std::string& sort, bool have_clusters) {
    if (sort == "input") return SortKey::input;
    if (sort == "first") return SortKey::first_state;
    if (sort == "cluster") {
        if (!have_clusters) throw ValidationError("--sort cluster needs --clusters");
        return SortKey::cluster;
    }
    return have_clusters ? SortKey::cluster : SortKey::input;
}

void stage_plots(const SequenceSet& set, const ClusterAssignment* clusters, const PlotParams& p, Manifest& m) {
    PlotConfig config;
    config.width = p.width;
    config.height = p.height;
    config.sort = resolve_sort(p.sort, clusters != nullptr);
    config.title = p.title;
    if (!p.colors.empty()) {
        std::stringstream s(p.colors);
        std::string c;
        while (std::getline(s, c, ',')) config.colors.push_back(c);
        if (config.colors.size() != set.alphabet_size()) throw ValidationError("--colors needs one color per state");
    }
    const auto& alphabet = set.alphabet();
    const auto write_set = [&](const SequenceSet& part, const std::string& suffix) {
        m.write_output(p.prefix + "_index" + suffix + ".svg", index_plot(part, suffix.empty() ? clusters : nullptr, config));
        m.write_output(p.prefix + "_dist" + suffix + ".svg", distribution_plot(state_distribution(part), alphabet, config));
        m.write_output(p.prefix + "_freq" + suffix + ".svg", frequency_plot(frequency_table(part, p.top), alphabet, config));
    };
    write_set(set, "");
    m.write_output(p.prefix + "_modal.svg", modal_plot(set, clusters, config));
    if (clusters && p.per_cluster) {
        PlotConfig inner = config;
        if (inner.sort == SortKey::cluster) inner.sort = SortKey::input;
        for (std::size_t c = 1; c <= clusters->k; ++c) {
            std::vector<std::size_t> members;
            for (std::size_t i = 0; i < clusters->labels.size(); ++i) {
                if (clusters->labels[i] == static_cast<int>(c)) members.push_back(i);
            }
            const auto part = set.subset(members);
            const std::string suffix = "_cluster" + std::to_string(c);
            m.write_output(p.prefix + "_index" + suffix + ".svg", index_plot(part, nullptr, inner));
            m.write_output(p.prefix + "_dist" + suffix + ".svg", distribution_plot(state_distribution(part), alphabet, inner));
            m.write_output(p.prefix + "_freq" + suffix + ".svg", frequency_plot(frequency_table(part, p.top), alphabet, inner));
        }
    }
}

ClusterAssignment load_clusters(const std::string& path, std::span<const std::string> ids, Manifest& m) {
    m.input(path);
    auto in = open_input(path);
    return read_assignment_csv(in, ids);
}

CovariateTable load_covariates(const std::string& path, Manifest& m) {
    m.input(path);
    auto in = open_input(path);
    return parse_covariates(in);
}

OutcomeTable load_outcomes(const std::string& path, Manifest& m) {
    m.input(path);
    auto in = open_input(path);
    return parse_outcomes(in);
}

void require(const std::string& value, const std::string& flag) {
    if (value.empty()) throw ValidationError(flag + " is required");
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateParams {
    bool table2 = false;
    std::string transition;
    std::size_t n = 2329;
    std::size_t t = 52;
    std::uint64_t seed = 7;
    std::string initial = "uniform";
    std::string initial_from;
    std::string hr = "1,1.8,1.6";
    double baseline_rate = 0.01;
    double censor_time = 52.0;
    std::size_t k = 3;
};

GeneratorSpec read_transition_csv(const std::string& path) {
    auto in = open_input(path);
    const auto rows = csv::read(in);
    if (rows.size() < 2) throw ValidationError("transition csv: need a header and at least one row");
    std::vector<std::string> states(rows.front().begin() + 1, rows.front().end());
    if (rows.size() != states.size() + 1) throw ValidationError("transition csv: must be square");
    GeneratorSpec spec;
    spec.alphabet = Alphabet(states);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() != states.size() + 1 || rows[r][0] != states[r - 1]) {
            throw ValidationError("transition csv: row " + std::to_string(r) + " must be labelled '" + states[r - 1] + "'");
        }
        for (std::size_t c = 1; c < rows[r].size(); ++c) {
            spec.transition.push_back(parse_number_list(rows[r][c], "transition csv").front());
        }
    }
    return spec;
}

void run_simulate(const SimulateParams& p, const Context& ctx, Manifest& m) {
    if (p.table2 == !p.transition.empty()) throw ValidationError("give exactly one of --table2 or --transition");
    GeneratorSpec spec;
    if (p.table2) {
        spec = table2_spec(p.n, p.t, p.seed);
    } else {
        m.input(p.transition);
        spec = read_transition_csv(p.transition);
        spec.n = p.n;
        spec.length = p.t;
        spec.seed = p.seed;
        spec = normalized(std::move(spec));
    }
    const std::size_t a = spec.alphabet.size();
    if (!p.initial_from.empty()) {
        m.input(p.initial_from);
        WideOptions options;
        options.alphabet = spec.alphabet;
        const auto cohort = read_wide(p.initial_from, options);
        spec.initial = initial_distribution(a, &cohort);
    } else if (p.initial == "uniform") {
        spec.initial = initial_distribution(a);
    } else if (const auto s = spec.alphabet.find(p.initial)) {
        spec.initial.assign(a, 0.0);
        spec.initial[*s] = 1.0;
    } else {
        spec.initial = parse_number_list(p.initial, "--initial");
    }
    m.seed(p.seed);

    const auto set = generate_sequences(spec);
    const auto ids = subject_ids(set);
    m.write_output("sequences.csv", render([&](std::ostream& o) {
                       o << generator_header(p.seed) << "\n";
                       write_wide(o, set);
                   }));
    m.write_output("alphabet.json", alphabet_to_json(set.alphabet()));
    m.write_output("covariates.csv", render([&](std::ostream& o) { write_covariates(o, generate_covariates(ids, p.seed), ids); }));

    // Outcomes depend on the LCS / Ward clusters of the generated cohort.
    ClusterParams cp;
    cp.k = p.k;
    cp.validate();
    PairwiseParams pp;
    pp.threads = resolve_threads(ctx.threads);
    const auto d = pairwise_matrix(set, Metric::lcs, pp);
    if (p.k > d.size()) throw ValidationError("--k exceeds --n");
    const auto truth = d.size() >= 2 ? cut_tree(ward_cluster(d), p.k) : ClusterAssignment::from_labels({1});
    m.write_output("truth_clusters.csv", render([&](std::ostream& o) { write_assignment_csv(o, ids, truth); }));

    OutcomeSpec os;
    os.hr_per_cluster = parse_number_list(p.hr, "--hr");
    os.baseline_rate = p.baseline_rate;
    os.censor_time = p.censor_time;
    os.seed = p.seed;
    const auto outcomes = generate_outcomes(ids, truth, os);
    m.write_output("outcomes.csv", render([&](std::ostream& o) { write_outcomes(o, ids, outcomes); }));

    std::size_t events = 0;
    for (const auto& [id, o] : outcomes) events += o.event ? 1 : 0;
    ctx.out << "simulated " << set.size() << " sequences of length " << set.length() << ", " << events << " events\n";
}

// ---------------------------------------------------------------------------
// Parameter capture for manifests
// ---------------------------------------------------------------------------

void record_parameters(const CLI::App* app, Manifest& m) {
    for (const CLI::Option* opt : app->get_options()) {
        const std::string name = opt->get_single_name();
        if (name.empty() || name == "help" || name == "out" || name == "version" || name == "config" || name == "json-errors" ||
            name == "explain") {
            continue;
        }
        if (opt->count() > 0) {
            const auto& results = opt->results();
            m.parameter(name, results.size() == 1 ? json(results.front()) : json(results));
        } else {
            m.parameter(name, opt->get_default_str());
        }
    }
}

void print_json_error(std::ostream& err, const std::string& kind, int code, const std::string& message) {
    json doc;
    doc["error"]["type"] = kind;
    doc["error"]["exit_code"] = code;
    doc["error"]["message"] = message;
    err << doc.dump() << "\n";
}

// Option storage for one subcommand. Every subcommand owns its own copy:
// CLI11 applies config-file sections even for commands that are not run, so
// shared storage would let [dist] keys leak into `pipeline`.
struct CommandOptions {
    std::string out_dir = ".";
    SequenceInput seq;
    DistParams dist;
    ClusterParams cluster;
    PlotParams plot;
    SimulateParams sim;
    std::size_t top = 10;
    std::string dist_path;
    std::string clusters;
    std::string covariates;
    std::string outcomes;
    std::string ties = "efron";

    void add_out(CLI::App* sub) { sub->add_option("--out,-o", out_dir, "Output directory"); }
    void add_ties(CLI::App* sub) {
        sub->add_option("--ties", ties, "Tied event times: efron or breslow")->check(CLI::IsMember({"efron", "breslow"}));
    }
};

void execute(const std::string& command, CommandOptions& o, const Context& ctx, Manifest& m) {
    if (command == "ingest") {
        const auto set = o.seq.load(m);
        m.write_output("sequences.csv", render([&](std::ostream& s) { write_wide(s, set); }));
        m.write_output("spells.csv", render([&](std::ostream& s) { write_spells(s, wide_to_spells(set), set.alphabet()); }));
        m.write_output("alphabet.json", alphabet_to_json(set.alphabet()));
        ctx.out << set.size() << " sequences, length " << set.length() << ", " << set.alphabet_size() << " states\n";
    } else if (command == "describe") {
        stage_describe(o.seq.load(m), o.top, m);
    } else if (command == "indicators") {
        stage_indicators(o.seq.load(m), ctx, m);
    } else if (command == "dist") {
        const auto set = o.seq.load(m);
        if (o.dist.audit > 0) m.seed(o.dist.audit_seed);
        stage_dist(set, o.dist, ctx, m);
    } else if (command == "cluster") {
        o.cluster.validate();
        require(o.dist_path, "--dist");
        m.input(o.dist_path);
        std::vector<std::string> ids;
        const auto d = read_matrix(o.dist_path, &ids);
        if (!o.seq.input.empty()) {
            const auto from_input = subject_ids(o.seq.load(m));
            if (!ids.empty() && ids != from_input) throw ValidationError("--input subjects differ from the matrix header");
            ids = from_input;
        }
        if (ids.empty()) throw ValidationError("a binary matrix carries no subject ids; pass the sequence CSV with --input");
        if (ids.size() != d.size()) {
            throw ValidationError("--input has " + std::to_string(ids.size()) + " subjects, matrix has " + std::to_string(d.size()));
        }
        stage_cluster(d, ids, o.cluster, ctx, m);
    } else if (command == "profile") {
        require(o.clusters, "--clusters");
        const auto set = o.seq.load(m);
        const auto labels = load_clusters(o.clusters, subject_ids(set), m);
        std::optional<CovariateTable> cov;
        if (!o.covariates.empty()) cov = load_covariates(o.covariates, m);
        stage_profile(set, labels, cov ? &*cov : nullptr, ctx, m);
    } else if (command == "assoc") {
        require(o.clusters, "--clusters");
        require(o.outcomes, "--outcomes");
        const auto set = o.seq.load(m);
        const auto labels = load_clusters(o.clusters, subject_ids(set), m);
        const auto outcomes = load_outcomes(o.outcomes, m);
        const auto rows = indicator_table(set, resolve_threads(ctx.threads));
        stage_assoc(set, labels, rows, outcomes, o.ties, ctx, m);
    } else if (command == "plot") {
        const auto set = o.seq.load(m);
        std::optional<ClusterAssignment> labels;
        if (!o.clusters.empty()) labels = load_clusters(o.clusters, subject_ids(set), m);
        stage_plots(set, labels ? &*labels : nullptr, o.plot, m);
    } else if (command == "simulate") {
        run_simulate(o.sim, ctx, m);
    } else if (command == "pipeline") {
        o.cluster.validate();
        const auto set = o.seq.load(m);
        std::optional<CovariateTable> cov;
        if (!o.covariates.empty()) cov = load_covariates(o.covariates, m);
        std::optional<OutcomeTable> outcomes;
        if (!o.outcomes.empty()) outcomes = load_outcomes(o.outcomes, m);
        if (o.dist.audit > 0) m.seed(o.dist.audit_seed);

        stage_describe(set, o.top, m);
        const auto rows = stage_indicators(set, ctx, m);
        const auto d = stage_dist(set, o.dist, ctx, m);
        const auto labels = stage_cluster(d, subject_ids(set), o.cluster, ctx, m);
        stage_profile(set, labels, cov ? &*cov : nullptr, ctx, m);
        if (outcomes) {
            stage_assoc(set, labels, rows, *outcomes, o.ties, ctx, m);
        } else {
            ctx.err << "note: no --outcomes, skipping the Cox stage\n";
        }
        stage_plots(set, &labels, o.plot, m);
    }
}

}  // namespace

int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    const bool json_errors = std::find(args.begin(), args.end(), "--json-errors") != args.end();
    const auto fail = [&](const std::string& kind, int code, const std::string& message) {
        if (json_errors) {
            print_json_error(err, kind, code, message);
        } else {
            err << "error: " << message << "\n";
        }
        return code;
    };

    CLI::App app{"State-sequence analysis of longitudinal categorical pathways", "ssa"};
    app.option_defaults()->always_capture_default();
    app.set_version_flag("--version", std::string("ssa ") + SSA_VERSION + " (build " + SSA_BUILD_HASH + ")");
    app.set_config("--config", "", "TOML-style config file; keys under [<command>] set that command's options, flags override");
    int threads = 0;
    bool explain = false;
    bool json_flag = false;
    app.add_option("--threads", threads, "Worker threads; 0 uses all available cores");
    app.add_flag("--json-errors", json_flag, "Report errors as one JSON object on standard error");
    app.add_flag("--explain", explain, "Print every option of the command with its effective value, then exit");
    app.require_subcommand(0, 1);

    std::map<std::string, CommandOptions> options;
    const auto command = [&](const std::string& name, const std::string& description) {
        return std::pair<CLI::App*, CommandOptions&>{app.add_subcommand(name, description), options[name]};
    };

    {
        auto [sub, o] = command("ingest", "Validate a cohort and write it back as wide CSV, spell CSV and alphabet JSON");
        o.seq.add_to(sub);
        o.add_out(sub);
    }
    {
        auto [sub, o] = command("describe", "Transition matrix, state distribution, modal sequence and frequency table");
        o.seq.add_to(sub);
        sub->add_option("--top", o.top, "Most frequent sequences to list");
        o.add_out(sub);
    }
    {
        auto [sub, o] = command("indicators", "Per-subject entropy, turbulence and time in each state");
        o.seq.add_to(sub);
        o.add_out(sub);
    }
    {
        auto [sub, o] = command("dist", "Pairwise dissimilarity matrix");
        o.seq.add_to(sub);
        o.dist.add_to(sub);
        o.add_out(sub);
    }
    {
        auto [sub, o] = command("cluster", "Ward clustering of a dissimilarity matrix with silhouette by k");
        sub->add_option("--dist", o.dist_path, "Matrix from `dist` (CSV or binary)");
        sub->add_option("--input,-i", o.seq.input, "Sequence CSV supplying subject ids for a binary matrix");
        sub->add_option("--id-column", o.seq.id_column, "Subject id column of the sequence CSV");
        o.cluster.add_to(sub);
        o.add_out(sub);
    }
    {
        auto [sub, o] = command("profile", "Cluster profile table with chi-squared tests");
        o.seq.add_to(sub);
        sub->add_option("--clusters", o.clusters, "Assignment CSV (id,cluster)");
        sub->add_option("--covariates", o.covariates, "Covariate CSV (id,<columns>)");
        o.add_out(sub);
    }
    {
        auto [sub, o] = command("assoc", "Cox regression of outcomes on clusters and indicator strata");
        o.seq.add_to(sub);
        sub->add_option("--clusters", o.clusters, "Assignment CSV (id,cluster)");
        sub->add_option("--outcomes", o.outcomes, "Outcome CSV (id,time,event)");
        o.add_ties(sub);
        o.add_out(sub);
    }
    {
        auto [sub, o] = command("plot", "Index, distribution, frequency and modal SVG plots");
        o.seq.add_to(sub);
        sub->add_option("--clusters", o.clusters, "Assignment CSV (id,cluster)");
        o.plot.add_to(sub);
        o.add_out(sub);
    }
    {
        auto [sub, o] = command("simulate", "Generate a synthetic cohort with outcomes and covariates");
        auto& s = o.sim;
        sub->add_flag("--table2", s.table2, "Use the built-in four-state weekly treatment-variety transition matrix");
        sub->add_option("--transition", s.transition, "Transition matrix CSV with state ids as header and first column");
        sub->add_option("--n", s.n, "Subjects");
        sub->add_option("--t", s.t, "Positions per sequence");
        sub->add_option("--seed", s.seed, "Generator seed");
        sub->add_option("--initial", s.initial, "First-position distribution: uniform, a state id, or comma-separated probabilities");
        sub->add_option("--initial-from", s.initial_from, "Use the first-position shares of this wide CSV");
        sub->add_option("--k", s.k, "Clusters (LCS + Ward) that carry the hazard ratios");
        sub->add_option("--hr", s.hr, "Comma-separated hazard multiplier per cluster");
        sub->add_option("--baseline-rate", s.baseline_rate, "Events per position in cluster 1");
        sub->add_option("--censor-time", s.censor_time, "Administrative censoring time");
        o.add_out(sub);
    }
    {
        auto [sub, o] = command("pipeline", "Run every stage: describe, indicators, dist, cluster, profile, assoc, plot");
        o.seq.add_to(sub);
        sub->add_option("--covariates", o.covariates, "Covariate CSV (id,<columns>)");
        sub->add_option("--outcomes", o.outcomes, "Outcome CSV (id,time,event); assoc is skipped without it");
        sub->add_option("--top", o.top, "Most frequent sequences to list");
        o.dist.add_to(sub);
        o.cluster.add_to(sub);
        o.add_ties(sub);
        o.plot.add_to(sub);
        o.add_out(sub);
    }

    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e, out, err);
        return fail("usage", 1, e.what());
    }

    const auto chosen = app.get_subcommands();
    if (explain) {
        if (chosen.empty()) {
            out << app.config_to_str(true, true);
        } else {
            out << "[" << chosen.front()->get_name() << "]\n" << chosen.front()->config_to_str(true, true);
        }
        return 0;
    }
    if (chosen.empty()) {
        out << app.help();
        return 1;
    }

    const CLI::App* sub = chosen.front();
    const Context ctx{threads, out, err};
    try {
        auto& o = options.at(sub->get_name());
        Manifest m(sub->get_name(), o.out_dir);
        if (const auto* config = app.get_option("--config"); config->count() > 0) m.input(config->as<std::string>());
        record_parameters(&app, m);
        record_parameters(sub, m);
        execute(sub->get_name(), o, ctx, m);
        m.finish();
    } catch (const ValidationError& e) {
        return fail("validation", 1, e.what());
    } catch (const ComputationError& e) {
        return fail("computation", 2, e.what());
    } catch (const std::exception& e) {
        return fail("computation", 2, e.what());
    }
    return 0;
}

}  // namespace ssa::cli
