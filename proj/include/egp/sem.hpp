#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "egp/dataset.hpp"
#include "egp/graph.hpp"
#include "egp/separation.hpp"

namespace egp {

/// Directed edge of the canonical graph, by node name (synthetic latents use
/// their internal names).
using EdgeKey = std::pair<std::string, std::string>;

/// Linear-Gaussian structural equations over a causal graph:
/// V = sum(coef(P -> V) * P) + noise_scale(V) * e_V, with e_V ~ N(0, 1).
struct SemModel {
    CausalGraph graph;
    std::map<EdgeKey, double> coefficients;
    std::map<std::string, double> noise_scale;
    std::uint64_t seed = 0;

    double coefficient(const std::string& from, const std::string& to) const;
};

/// Unspecified coefficients are drawn with magnitude uniform in [0.3, 1.0]
/// and a fair random sign; noise scales default to 1. Deterministic in seed.
SemModel instantiate_sem(const CausalGraph& g, const std::map<EdgeKey, double>& spec = {},
                         std::uint64_t seed = 0, const std::map<std::string, double>& noise = {});

/// n rows drawn in topological order; latent columns are generated but
/// dropped. The noise stream of each node depends only on (seed, node name),
/// so regimes sampled with the same seed share their draws.
Dataset sample(const SemModel& model, std::size_t n, const Regime& regime = Regime::observational());

enum class Assignment {
    threshold,   // D = 1{structural index of D > 0}
    randomized,  // D ~ Bernoulli(1/2), independent of everything
};

/// Per-unit potential outcomes for a binary exposure.
struct PoTable {
    std::vector<double> y0;
    std::vector<double> y1;
    std::vector<int> d;
    std::vector<double> y;

    std::size_t size() const { return d.size(); }
    /// y == y1 * d + y0 * (1 - d) for every unit, exactly.
    bool switching_holds() const;
};

struct PoSample {
    Dataset data;  // with the binary exposure column
    PoTable po;
};

PoSample sample_potential_outcomes(const SemModel& model, const std::string& exposure,
                                   const std::string& outcome, std::size_t n,
                                   Assignment assignment = Assignment::threshold);

/// Sum over directed paths of the product of their coefficients.
double true_effect(const SemModel& model, const std::string& exposure, const std::string& outcome);

enum class EstimatorKind { naive, adjust, iv };

std::string_view estimator_name(EstimatorKind kind);

struct EstimatorSpec {
    EstimatorKind kind = EstimatorKind::naive;
    NodeSet covariates;                 // adjust: z; iv: given
    std::optional<std::string> instrument;

    static EstimatorSpec naive() { return {}; }
    static EstimatorSpec adjust(NodeSet z) { return {EstimatorKind::adjust, std::move(z), {}}; }
    static EstimatorSpec iv(std::string z, NodeSet given) {
        return {EstimatorKind::iv, std::move(given), std::move(z)};
    }
};

inline constexpr double kWeakInstrumentF = 10.0;

struct Estimate {
    double value = 0.0;
    double standard_error = 0.0;
    std::size_t n = 0;
    std::optional<double> first_stage_f;
    std::vector<std::string> warnings;
};

/// naive: OLS slope of y on d; adjust: coefficient of d in OLS of y on
/// (d, z); iv: two-stage least squares. All regressions include an intercept.
/// Throws missing_column, singular_design.
Estimate estimate(const Dataset& data, const std::string& exposure, const std::string& outcome,
                  const EstimatorSpec& spec);

struct EstimandReport {
    double ate = 0.0;
    double att = 0.0;
    double atc = 0.0;
    double naive_diff = 0.0;
    double p_treated = 0.0;
    /// (1 - P[D]) (E[Y1|D=1] - E[Y1|D=0])
    double control_po_bias = 0.0;
    /// P[D] (E[Y0|D=1] - E[Y0|D=0])
    double treated_po_bias = 0.0;
    /// E[Y0|D=1] - E[Y0|D=0]
    double baseline_bias = 0.0;
    /// (1 - P[D]) (ATT - ATC)
    double differential_response = 0.0;
    /// naive_diff - (ate + control_po_bias + treated_po_bias)
    double weighted_form_residual = 0.0;
    /// naive_diff - (ate + baseline_bias + differential_response)
    double baseline_form_residual = 0.0;
};

/// Throws empty_arm when either exposure arm has no units.
EstimandReport bias_decomposition(const PoTable& po);

struct CiTestResult {
    double partial_correlation = 0.0;
    double statistic = 0.0;  // Fisher z
    double p_value = 1.0;
    bool reject = false;
};

/// Fisher-z test of a partial correlation. Multi-node sides are tested
/// pairwise with a Bonferroni-combined p-value.
CiTestResult ci_test(const Dataset& data, const CIStatement& stmt, double alpha);

enum class Correction { none, holm };

std::string_view correction_name(Correction c);

struct FitTest {
    CIStatement statement;
    CiTestResult result;
    double adjusted_p = 1.0;
    bool reject = false;
};

struct FitReport {
    std::vector<FitTest> tests;
    double rejected_fraction = 0.0;
    bool compatible = true;
    /// False when the graph implies no testable independence.
    bool testable = false;
    double alpha = 0.0;
    Correction correction = Correction::holm;
};

inline constexpr double kDefaultAlpha = 0.01;

FitReport model_fit_report(const CausalGraph& g, const Dataset& data,
                           std::size_t max_cond = 3, double alpha = kDefaultAlpha,
                           Correction correction = Correction::holm);

struct PositivityReport {
    std::size_t violating = 0;
    std::size_t total = 0;  // populated strata
    std::vector<std::vector<int>> violating_strata;  // bin index per covariate
};

/// Equal-frequency bins per covariate; a populated stratum violates overlap
/// when it holds a single exposure arm. Non-binary exposures are binarized
/// as 1{d > 0}.
PositivityReport positivity_check(const Dataset& data, const std::string& exposure,
                                  const std::vector<std::string>& covariates, std::size_t bins);

struct SensitivityPoint {
    double strength = 0.0;
    double estimate = 0.0;
    double standard_error = 0.0;
    double true_effect = 0.0;
    double bias = 0.0;
};

/// Name of the confounder added by the sensitivity sweep.
inline constexpr const char* kSweepConfounder = "U*";

/// For each strength s, adds a latent U* with U* -> exposure (|s|) and
/// U* -> outcome (s), simulates n rows with the model's seed and re-estimates
/// with adjustment for z. Throws invalid_argument when z is not admissible.
std::vector<SensitivityPoint> sensitivity_sweep(const SemModel& base, const std::string& exposure,
                                                const std::string& outcome, const NodeSet& z,
                                                const std::vector<double>& strengths, std::size_t n);

std::vector<SensitivityPoint> sensitivity_sweep(const CausalGraph& g, const std::string& exposure,
                                                const std::string& outcome, const NodeSet& z,
                                                const std::vector<double>& strengths, std::size_t n,
                                                std::uint64_t seed);

} // namespace egp
