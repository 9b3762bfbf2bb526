#pragma once

#include "ssa/clustering.hpp"
#include "ssa/indicators.hpp"

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

// =============================================================================
// Cox proportional-hazards regression.
//
// The partial likelihood is maximised by Newton-Raphson with step halving.
// Tied event times use Efron's approximation by default; Breslow's is
// available. Risk-set sums are accumulated in descending time order, and
// covariates are centred internally (this changes neither coefficients nor
// the likelihood).
// =============================================================================

namespace ssa {

struct SurvivalRecord {
    std::string subject_id;
    double time = 0.0;
    bool event = false;
    std::vector<double> covariates;
};

enum class TieMethod { efron, breslow };

struct CoxOptions {
    TieMethod ties = TieMethod::efron;
    int max_iterations = 50;
    /// Converged when |ll_new - ll_old| / |ll_old| falls below this.
    double tolerance = 1e-9;
    /// |beta| times the covariate SD above this is reported as separation.
    double divergence_limit = 10.0;
};

struct CoxFit {
    std::vector<std::string> names;
    std::vector<double> coefficients;
    std::vector<double> hazard_ratios;
    std::vector<double> standard_errors;
    std::vector<double> ci_low;   // 95% Wald, HR scale
    std::vector<double> ci_high;
    double log_likelihood = 0.0;
    double null_log_likelihood = 0.0;
    int iterations = 0;
    std::size_t n = 0;
    std::size_t events = 0;
    TieMethod ties = TieMethod::efron;
};

/// Log partial likelihood with its gradient and observed information
/// (negative Hessian, row-major p x p) at `beta`.
struct PartialLikelihood {
    double value = 0.0;
    std::vector<double> gradient;
    std::vector<double> information;
};
PartialLikelihood cox_partial_likelihood(std::span<const SurvivalRecord> records, std::span<const double> beta,
                                         TieMethod ties = TieMethod::efron);

/// Throws ValidationError on malformed records or no events and
/// ComputationError on rank deficiency or a diverging coefficient.
CoxFit cox_fit(std::span<const SurvivalRecord> records, std::vector<std::string> names = {},
               const CoxOptions& options = {});

// ---------------------------------------------------------------------------
// Design construction and reporting
// ---------------------------------------------------------------------------

struct Outcome {
    double time = 0.0;
    bool event = false;
};
using OutcomeTable = std::map<std::string, Outcome>;

/// Columns `id,time,event`, event in {0,1}, time > 0.
OutcomeTable parse_outcomes(std::istream& in);
void write_outcomes(std::ostream& out, std::span<const std::string> ids, const OutcomeTable& outcomes);

struct Design {
    std::vector<std::string> names;
    std::vector<SurvivalRecord> records;
};

/// Covariates: one dummy per cluster 2..k (cluster 1 is the reference), then
/// "High Entropy" and "High Turbulence" flags (value >= cohort mean).
/// `indicators` must be aligned with `ids`.
Design build_design(std::span<const std::string> ids, const ClusterAssignment& clusters,
                    std::span<const IndicatorRow> indicators, const OutcomeTable& outcomes);

struct HazardReport {
    std::vector<std::string> names;
    std::vector<CoxFit> univariable;  // one single-covariate fit per name
    CoxFit adjusted;
};
HazardReport univariable_and_adjusted(const Design& design, const CoxOptions& options = {});

/// "1.81 (1.47 - 2.23)"
std::string format_hazard(double hr, double low, double high);
/// covariate,univariable_hr,univariable_low,univariable_high,adjusted_hr,...
void write_hazard_csv(std::ostream& out, const HazardReport& report);
/// Two-column table of "HR (low - high)" strings plus reference and
/// interpretation notes.
std::string render_hazard_text(const HazardReport& report);

}  // namespace ssa
