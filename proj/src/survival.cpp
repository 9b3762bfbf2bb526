#include "ssa/survival.hpp"

#include "ssa/csv.hpp"
#include "ssa/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace ssa {

namespace {

constexpr double kZ975 = 1.959963984540054;

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct Prepared {
    std::size_t n = 0;
    std::size_t p = 0;
    Mat x;                              // centred covariates, n x p
    std::vector<double> time;
    std::vector<bool> event;
    std::vector<std::size_t> order;     // descending time, then input order
    Vec sd;
};

Prepared prepare(std::span<const SurvivalRecord> records) {
    Prepared prep;
    prep.n = records.size();
    if (prep.n == 0) throw ValidationError("cox: no records");
    prep.p = records.front().covariates.size();
    prep.x.resize(static_cast<Eigen::Index>(prep.n), static_cast<Eigen::Index>(prep.p));
    for (std::size_t i = 0; i < prep.n; ++i) {
        const auto& r = records[i];
        if (!(r.time > 0.0) || !std::isfinite(r.time)) {
            throw ValidationError("cox: subject '" + r.subject_id + "' has a non-positive or non-finite time");
        }
        if (r.covariates.size() != prep.p) throw ValidationError("cox: subject '" + r.subject_id + "' has the wrong number of covariates");
        for (std::size_t j = 0; j < prep.p; ++j) {
            if (!std::isfinite(r.covariates[j])) throw ValidationError("cox: subject '" + r.subject_id + "' has a non-finite covariate");
            prep.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = r.covariates[j];
        }
        prep.time.push_back(r.time);
        prep.event.push_back(r.event);
    }
    const Vec mean = prep.x.colwise().mean();
    prep.x.rowwise() -= mean.transpose();
    prep.sd = (prep.x.colwise().squaredNorm() / static_cast<double>(prep.n)).cwiseSqrt().transpose();
    prep.order.resize(prep.n);
    std::iota(prep.order.begin(), prep.order.end(), 0);
    std::stable_sort(prep.order.begin(), prep.order.end(),
                     [&](std::size_t a, std::size_t b) { return prep.time[a] > prep.time[b]; });
    return prep;
}

struct Evaluation {
    double value = 0.0;
    Vec gradient;
    Mat information;
};

Evaluation evaluate(const Prepared& prep, const Vec& beta, TieMethod ties) {
    const auto p = static_cast<Eigen::Index>(prep.p);
    Evaluation ev{0.0, Vec::Zero(p), Mat::Zero(p, p)};
    const Vec eta = prep.x * beta;

    double s0 = 0.0;
    Vec s1 = Vec::Zero(p);
    Mat s2 = Mat::Zero(p, p);
    std::size_t pos = 0;
    while (pos < prep.n) {
        const double t = prep.time[prep.order[pos]];
        double d0 = 0.0;
        Vec d1 = Vec::Zero(p);
        Mat d2 = Mat::Zero(p, p);
        std::size_t deaths = 0;
        // Everyone with this time joins the risk set before its deaths are scored.
        for (; pos < prep.n && prep.time[prep.order[pos]] == t; ++pos) {
            const auto i = static_cast<Eigen::Index>(prep.order[pos]);
            const double w = std::exp(eta(i));
            const auto xi = prep.x.row(i).transpose();
            s0 += w;
            s1.noalias() += w * xi;
            s2.noalias() += w * xi * xi.transpose();
            if (prep.event[prep.order[pos]]) {
                ++deaths;
                d0 += w;
                d1.noalias() += w * xi;
                d2.noalias() += w * xi * xi.transpose();
                ev.value += eta(i);
                ev.gradient += xi;
            }
        }
        for (std::size_t l = 0; l < deaths; ++l) {
            const double f = ties == TieMethod::efron ? static_cast<double>(l) / static_cast<double>(deaths) : 0.0;
            const double r0 = s0 - f * d0;
            const Vec r1 = s1 - f * d1;
            const Mat r2 = s2 - f * d2;
            const Vec mean = r1 / r0;
            ev.value -= std::log(r0);
            ev.gradient -= mean;
            ev.information += r2 / r0 - mean * mean.transpose();
        }
    }
    return ev;
}

CoxFit fit_prepared(const Prepared& prep, std::size_t events, std::vector<std::string> names, const CoxOptions& options) {
    const auto p = static_cast<Eigen::Index>(prep.p);
    CoxFit fit;
    fit.names = std::move(names);
    fit.n = prep.n;
    fit.events = events;
    fit.ties = options.ties;

    Vec beta = Vec::Zero(p);
    Evaluation cur = evaluate(prep, beta, options.ties);
    fit.null_log_likelihood = cur.value;

    if (p > 0) {
        for (Eigen::Index j = 0; j < p; ++j) {
            if (prep.sd(j) == 0.0) {
                throw ComputationError("cox: rank deficiency, covariate '" + fit.names[static_cast<std::size_t>(j)] + "' is constant");
            }
        }
        // Scale-free rank check on the information at beta = 0.
        const Vec scale = cur.information.diagonal().cwiseSqrt();
        if ((scale.array() <= 0.0).any()) throw ComputationError("cox: rank deficiency, a covariate does not vary within risk sets");
        const Mat corr = scale.asDiagonal().inverse() * cur.information * scale.asDiagonal().inverse();
        const Eigen::SelfAdjointEigenSolver<Mat> eig(corr);
        if (eig.eigenvalues().minCoeff() < 1e-10 * std::max(1.0, eig.eigenvalues().maxCoeff())) {
            throw ComputationError("cox: rank deficiency, covariates are collinear on the risk sets");
        }

        int iter = 0;
        for (; iter < options.max_iterations; ++iter) {
            const Vec step = cur.information.ldlt().solve(cur.gradient);
            double scale_step = 1.0;
            Vec next = beta + step;
            Evaluation cand = evaluate(prep, next, options.ties);
            for (int halve = 0; halve < 30 && !(cand.value >= cur.value - 1e-12 * std::abs(cur.value)); ++halve) {
                scale_step *= 0.5;
                next = beta + scale_step * step;
                cand = evaluate(prep, next, options.ties);
            }
            const double change = std::abs(cand.value - cur.value) / std::max(std::abs(cur.value), 1e-300);
            beta = next;
            cur = std::move(cand);
            if (change < options.tolerance) {
                ++iter;
                break;
            }
        }
        fit.iterations = iter;

        for (Eigen::Index j = 0; j < p; ++j) {
            if (std::abs(beta(j)) * prep.sd(j) > options.divergence_limit) {
                char buf[160];
                std::snprintf(buf, sizeof buf, " (coefficient %.3g after %d iterations)", beta(j), iter);
                throw ComputationError("cox: monotone likelihood, coefficient for '" + fit.names[static_cast<std::size_t>(j)] +
                                       "' diverges" + buf);
            }
        }
        if (!beta.allFinite()) throw ComputationError("cox: non-finite coefficients");
    }

    fit.log_likelihood = cur.value;
    const Mat cov = p > 0 ? Mat(cur.information.inverse()) : Mat();
    for (Eigen::Index j = 0; j < p; ++j) {
        const double b = beta(j);
        const double se = std::sqrt(cov(j, j));
        fit.coefficients.push_back(b);
        fit.standard_errors.push_back(se);
        fit.hazard_ratios.push_back(std::exp(b));
        fit.ci_low.push_back(std::exp(b - kZ975 * se));
        fit.ci_high.push_back(std::exp(b + kZ975 * se));
    }
    return fit;
}

std::vector<std::string> default_names(std::size_t p) {
    std::vector<std::string> names;
    for (std::size_t j = 0; j < p; ++j) names.push_back("x" + std::to_string(j + 1));
    return names;
}

}  // namespace

PartialLikelihood cox_partial_likelihood(std::span<const SurvivalRecord> records, std::span<const double> beta,
                                         TieMethod ties) {
    const auto prep = prepare(records);
    if (beta.size() != prep.p) throw ValidationError("cox: coefficient count does not match covariates");
    const Vec b = Eigen::Map<const Vec>(beta.data(), static_cast<Eigen::Index>(beta.size()));
    const auto ev = evaluate(prep, b, ties);
    PartialLikelihood out;
    out.value = ev.value;
    out.gradient.assign(ev.gradient.data(), ev.gradient.data() + ev.gradient.size());
    const auto p = static_cast<Eigen::Index>(prep.p);
    for (Eigen::Index r = 0; r < p; ++r) {
        for (Eigen::Index c = 0; c < p; ++c) out.information.push_back(ev.information(r, c));
    }
    return out;
}

CoxFit cox_fit(std::span<const SurvivalRecord> records, std::vector<std::string> names, const CoxOptions& options) {
    const auto prep = prepare(records);
    if (names.empty()) names = default_names(prep.p);
    if (names.size() != prep.p) throw ValidationError("cox: name count does not match covariates");
    std::size_t events = 0;
    for (bool e : prep.event) events += e ? 1 : 0;
    if (events == 0) throw ValidationError("cox: no events");
    return fit_prepared(prep, events, std::move(names), options);
}

// ---------------------------------------------------------------------------
// Design and reporting
// ---------------------------------------------------------------------------

OutcomeTable parse_outcomes(std::istream& in) {
    const auto rows = csv::read(in);
    if (rows.empty() || rows.front() != csv::Row{"id", "time", "event"}) throw ValidationError("outcomes: header must be 'id,time,event'");
    OutcomeTable table;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != 3) throw ValidationError("outcomes: row " + std::to_string(r) + " must have 3 fields");
        Outcome o;
        try {
            std::size_t used = 0;
            o.time = std::stod(row[1], &used);
            if (used != row[1].size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw ValidationError("outcomes: row " + std::to_string(r) + ": bad time '" + row[1] + "'");
        }
        if (!(o.time > 0.0) || !std::isfinite(o.time)) throw ValidationError("outcomes: row " + std::to_string(r) + ": time must be positive");
        if (row[2] != "0" && row[2] != "1") throw ValidationError("outcomes: row " + std::to_string(r) + ": event must be 0 or 1");
        o.event = row[2] == "1";
        if (!table.emplace(row[0], o).second) throw ValidationError("outcomes: duplicate id '" + row[0] + "'");
    }
    return table;
}

void write_outcomes(std::ostream& out, std::span<const std::string> ids, const OutcomeTable& outcomes) {
    csv::write_row(out, {"id", "time", "event"});
    for (const auto& id : ids) {
        const auto& o = outcomes.at(id);
        csv::write_row(out, {id, csv::format_double(o.time), o.event ? "1" : "0"});
    }
}

Design build_design(std::span<const std::string> ids, const ClusterAssignment& clusters,
                    std::span<const IndicatorRow> indicators, const OutcomeTable& outcomes) {
    if (clusters.labels.size() != ids.size() || indicators.size() != ids.size()) {
        throw ValidationError("design: cluster labels, indicators and ids must have the same length");
    }
    Design design;
    for (std::size_t c = 2; c <= clusters.k; ++c) design.names.push_back("Cluster " + std::to_string(c));
    design.names.push_back("High Entropy");
    design.names.push_back("High Turbulence");

    const auto strata = stratify_at_mean(indicators);
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (indicators[i].subject_id != ids[i]) {
            throw ValidationError("design: indicator row " + std::to_string(i + 1) + " is for '" + indicators[i].subject_id +
                                  "', expected '" + ids[i] + "'");
        }
        const auto it = outcomes.find(ids[i]);
        if (it == outcomes.end()) throw ValidationError("design: no outcome for subject '" + ids[i] + "'");
        SurvivalRecord rec{ids[i], it->second.time, it->second.event, {}};
        for (std::size_t c = 2; c <= clusters.k; ++c) rec.covariates.push_back(clusters.labels[i] == static_cast<int>(c) ? 1.0 : 0.0);
        rec.covariates.push_back(strata.high_entropy[i] ? 1.0 : 0.0);
        rec.covariates.push_back(strata.high_turbulence[i] ? 1.0 : 0.0);
        design.records.push_back(std::move(rec));
    }
    return design;
}

HazardReport univariable_and_adjusted(const Design& design, const CoxOptions& options) {
    HazardReport report;
    report.names = design.names;
    const std::size_t p = design.names.size();
    for (std::size_t j = 0; j < p; ++j) {
        std::vector<SurvivalRecord> single;
        single.reserve(design.records.size());
        for (const auto& r : design.records) single.push_back({r.subject_id, r.time, r.event, {r.covariates.at(j)}});
        report.univariable.push_back(cox_fit(single, {design.names[j]}, options));
    }
    report.adjusted = cox_fit(design.records, design.names, options);
    return report;
}

std::string format_hazard(double hr, double low, double high) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.2f (%.2f - %.2f)", hr, low, high);
    return buf;
}

void write_hazard_csv(std::ostream& out, const HazardReport& report) {
    csv::write_row(out, {"covariate", "univariable_hr", "univariable_low", "univariable_high", "adjusted_hr", "adjusted_low",
                         "adjusted_high", "univariable", "adjusted"});
    for (std::size_t j = 0; j < report.names.size(); ++j) {
        const auto& u = report.univariable[j];
        const auto& a = report.adjusted;
        csv::write_row(out, {report.names[j], csv::format_double(u.hazard_ratios[0]), csv::format_double(u.ci_low[0]),
                             csv::format_double(u.ci_high[0]), csv::format_double(a.hazard_ratios[j]),
                             csv::format_double(a.ci_low[j]), csv::format_double(a.ci_high[j]),
                             format_hazard(u.hazard_ratios[0], u.ci_low[0], u.ci_high[0]),
                             format_hazard(a.hazard_ratios[j], a.ci_low[j], a.ci_high[j])});
    }
}

std::string render_hazard_text(const HazardReport& report) {
    std::ostringstream out;
    char line[256];
    std::snprintf(line, sizeof line, "%-20s %-26s %-26s\n", "", "Univariable HR (95%CI)", "Adjusted HR (95%CI)");
    out << line;
    for (std::size_t j = 0; j < report.names.size(); ++j) {
        const auto& u = report.univariable[j];
        const auto& a = report.adjusted;
        std::snprintf(line, sizeof line, "%-20s %-26s %-26s\n", report.names[j].c_str(),
                      format_hazard(u.hazard_ratios[0], u.ci_low[0], u.ci_high[0]).c_str(),
                      format_hazard(a.hazard_ratios[j], a.ci_low[j], a.ci_high[j]).c_str());
        out << line;
    }
    out << "\nReferences: cluster 1; entropy and turbulence below the cohort mean.\n";
    out << "Ties: " << (report.adjusted.ties == TieMethod::efron ? "Efron" : "Breslow") << "; n = " << report.adjusted.n
        << ", events = " << report.adjusted.events << ".\n";
    out << "Note: clusters reflect observed care intensity. A higher hazard in more intensively treated\n"
           "clusters can arise because sicker subjects receive more care; read these ratios as\n"
           "associations, not treatment effects.\n";
    return out.str();
}

}  // namespace ssa
