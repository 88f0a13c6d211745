#include "egp/sem.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>

#include "egp/error.hpp"
#include "egp/identification.hpp"
#include "egp/implications.hpp"

namespace egp {

double SemModel::coefficient(const std::string& from, const std::string& to) const {
    auto it = coefficients.find({from, to});
    if (it == coefficients.end())
        throw Error(ErrorCode::unknown_edge_in_spec, "model has no edge " + from + " -> " + to);
    return it->second;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::mt19937_64 stream(std::uint64_t seed, std::string_view tag) {
    return std::mt19937_64(splitmix64(seed ^ splitmix64(fnv1a(tag))));
}

Eigen::VectorXd standard_normals(std::uint64_t seed, std::string_view tag, std::size_t n) {
    auto rng = stream(seed, tag);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd out(static_cast<Eigen::Index>(n));
    for (auto& x : out) x = normal(rng);
    return out;
}

using ColumnHook = std::function<void(int, Eigen::VectorXd&)>;

// Columns for every canonical node, evaluated in topological order.
Eigen::MatrixXd simulate(const SemModel& m, const Eigen::MatrixXd& noise, const ColumnHook& hook) {
    const auto& g = m.graph;
    Eigen::MatrixXd values(noise.rows(), noise.cols());
    for (int v : g.topological_order()) {
        Eigen::VectorXd col = noise.col(v);
        for (int p : g.parent_ids(v)) col += m.coefficient(g.name_of(p), g.name_of(v)) * values.col(p);
        if (hook) hook(v, col);
        values.col(v) = col;
    }
    return values;
}

Eigen::MatrixXd draw_noise(const SemModel& m, std::size_t n) {
    const auto& g = m.graph;
    Eigen::MatrixXd noise(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(g.size()));
    for (std::size_t v = 0; v < g.size(); ++v) {
        const auto& name = g.name_of(static_cast<int>(v));
        noise.col(static_cast<Eigen::Index>(v)) = m.noise_scale.at(name) * standard_normals(m.seed, name, n);
    }
    return noise;
}

Dataset observed_columns(const SemModel& m, const Eigen::MatrixXd& values, const Regime& regime) {
    Dataset data;
    std::vector<Eigen::Index> keep;
    for (std::size_t v = 0; v < m.graph.declared_count(); ++v) {
        if (m.graph.is_latent(static_cast<int>(v))) continue;
        data.columns.push_back(m.graph.name_of(static_cast<int>(v)));
        keep.push_back(static_cast<Eigen::Index>(v));
    }
    data.values.resize(values.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t c = 0; c < keep.size(); ++c) data.values.col(static_cast<Eigen::Index>(c)) = values.col(keep[c]);
    data.meta = {m.seed, regime, DataSource::simulated};
    return data;
}

void require_rows(std::size_t n) {
    if (n == 0) throw Error(ErrorCode::invalid_argument, "sample size must be at least 1");
}

} // namespace

SemModel instantiate_sem(const CausalGraph& g, const std::map<EdgeKey, double>& spec,
                         std::uint64_t seed, const std::map<std::string, double>& noise) {
    SemModel m;
    m.graph = g;
    m.seed = seed;
    auto rng = stream(seed, "coefficients");
    std::uniform_real_distribution<double> magnitude(0.3, 1.0);
    std::bernoulli_distribution negative(0.5);
    for (auto [from, to] : g.canonical_edges()) {
        const double mag = magnitude(rng);
        const double value = negative(rng) ? -mag : mag;
        m.coefficients[{g.name_of(from), g.name_of(to)}] = value;
    }
    for (const auto& [edge, value] : spec) {
        auto it = m.coefficients.find(edge);
        if (it == m.coefficients.end())
            throw Error(ErrorCode::unknown_edge_in_spec,
                        "coefficient given for " + edge.first + " -> " + edge.second +
                            ", which is not a directed edge of the graph");
        it->second = value;
    }
    for (std::size_t v = 0; v < g.size(); ++v) m.noise_scale[g.name_of(static_cast<int>(v))] = 1.0;
    for (const auto& [node, scale] : noise) {
        auto it = m.noise_scale.find(node);
        if (it == m.noise_scale.end()) throw Error(ErrorCode::unknown_node, "unknown node '" + node + "'");
        if (!(scale > 0.0) || !std::isfinite(scale))
            throw Error(ErrorCode::invalid_argument, "noise scale for '" + node + "' must be positive");
        it->second = scale;
    }
    return m;
}

Dataset sample(const SemModel& model, std::size_t n, const Regime& regime) {
    require_rows(n);
    int fixed = -1;
    if (regime.node) fixed = model.graph.index(*regime.node);
    const auto values = simulate(model, draw_noise(model, n), [&](int v, Eigen::VectorXd& col) {
        if (v == fixed) col.setConstant(regime.value);
    });
    return observed_columns(model, values, regime);
}

bool PoTable::switching_holds() const {
    for (std::size_t i = 0; i < d.size(); ++i)
        if (y[i] != y1[i] * d[i] + y0[i] * (1 - d[i])) return false;
    return true;
}

PoSample sample_potential_outcomes(const SemModel& model, const std::string& exposure,
                                   const std::string& outcome, std::size_t n, Assignment assignment) {
    require_rows(n);
    const auto& g = model.graph;
    const int d = g.index(exposure);
    const int y = g.index(outcome);
    if (d == y) throw Error(ErrorCode::invalid_argument, "exposure and outcome must differ");
    const auto noise = draw_noise(model, n);

    Eigen::VectorXd coin;
    if (assignment == Assignment::randomized) {
        auto rng = stream(model.seed, exposure + "#assignment");
        std::bernoulli_distribution fair(0.5);
        coin.resize(static_cast<Eigen::Index>(n));
        for (auto& c : coin) c = fair(rng) ? 1.0 : 0.0;
    }
    const auto observed = simulate(model, noise, [&](int v, Eigen::VectorXd& col) {
        if (v != d) return;
        if (assignment == Assignment::randomized) col = coin;
        else col = (col.array() > 0.0).cast<double>();
    });
    auto fixed_at = [&](double value) {
        return simulate(model, noise, [&](int v, Eigen::VectorXd& col) {
            if (v == d) col.setConstant(value);
        });
    };
    const auto untreated = fixed_at(0.0);
    const auto treated = fixed_at(1.0);

    PoSample out;
    out.data = observed_columns(model, observed, Regime::observational());
    out.po.y0.resize(n);
    out.po.y1.resize(n);
    out.po.d.resize(n);
    out.po.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        out.po.y0[i] = untreated(r, y);
        out.po.y1[i] = treated(r, y);
        out.po.d[i] = observed(r, d) > 0.5 ? 1 : 0;
        out.po.y[i] = observed(r, y);
    }
    return out;
}

double true_effect(const SemModel& model, const std::string& exposure, const std::string& outcome) {
    const auto& g = model.graph;
    const int d = g.index(exposure);
    const int y = g.index(outcome);
    if (d == y) throw Error(ErrorCode::invalid_argument, "exposure and outcome must differ");
    std::vector<double> effect(g.size(), 0.0);
    effect[d] = 1.0;
    for (int v : g.topological_order()) {
        if (v == d) continue;
        for (int p : g.parent_ids(v))
            if (effect[p] != 0.0) effect[v] += model.coefficient(g.name_of(p), g.name_of(v)) * effect[p];
    }
    return effect[y];
}

std::string_view estimator_name(EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::naive: return "naive";
        case EstimatorKind::adjust: return "adjust";
        case EstimatorKind::iv: return "iv";
    }
    return "naive";
}

namespace {

struct OlsFit {
    Eigen::VectorXd beta;
    Eigen::MatrixXd xtx_inverse;
    Eigen::VectorXd residuals;
    double sigma2 = 0.0;
};

OlsFit ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::string_view what) {
    const auto n = x.rows();
    const auto k = x.cols();
    if (n <= k)
        throw Error(ErrorCode::insufficient_sample, "regression for " + std::string(what) + " needs more than " +
                                                        std::to_string(k) + " rows");
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    qr.setThreshold(1e-10);
    if (qr.rank() < k)
        throw Error(ErrorCode::singular_design,
                    "collinear or constant regressors in " + std::string(what));
    OlsFit fit;
    fit.beta = qr.solve(y);
    fit.residuals = y - x * fit.beta;
    fit.sigma2 = fit.residuals.squaredNorm() / static_cast<double>(n - k);
    fit.xtx_inverse = (x.transpose() * x).inverse();
    return fit;
}

Eigen::MatrixXd design(const Dataset& data, const std::vector<Eigen::VectorXd>& leading,
                       const NodeSet& covariates) {
    const auto n = static_cast<Eigen::Index>(data.rows());
    Eigen::MatrixXd x(n, static_cast<Eigen::Index>(1 + leading.size() + covariates.size()));
    x.col(0).setOnes();
    Eigen::Index c = 1;
    for (const auto& col : leading) x.col(c++) = col;
    for (const auto& name : covariates) x.col(c++) = data.column(name);
    return x;
}

} // namespace

Estimate estimate(const Dataset& data, const std::string& exposure, const std::string& outcome,
                  const EstimatorSpec& spec) {
    const Eigen::VectorXd d = data.column(exposure);
    const Eigen::VectorXd y = data.column(outcome);
    for (const auto& c : spec.covariates)
        if (c == exposure || c == outcome)
            throw Error(ErrorCode::invalid_argument, "covariates may not include exposure or outcome");

    Estimate out;
    out.n = data.rows();
    switch (spec.kind) {
        case EstimatorKind::naive:
        case EstimatorKind::adjust: {
            const NodeSet none;
            const auto& z = spec.kind == EstimatorKind::naive ? none : spec.covariates;
            const auto fit = ols(design(data, {d}, z), y, "the outcome model");
            out.value = fit.beta(1);
            out.standard_error = std::sqrt(fit.sigma2 * fit.xtx_inverse(1, 1));
            break;
        }
        case EstimatorKind::iv: {
            if (!spec.instrument)
                throw Error(ErrorCode::invalid_argument, "instrumental-variable estimate needs an instrument");
            const auto& zname = *spec.instrument;
            if (zname == exposure || zname == outcome || spec.covariates.contains(zname))
                throw Error(ErrorCode::invalid_argument, "instrument must differ from exposure, outcome and covariates");
            const Eigen::VectorXd z = data.column(zname);
            const auto first_x = design(data, {z}, spec.covariates);
            const auto first = ols(first_x, d, "the first stage");
            const double t = first.beta(1) / std::sqrt(first.sigma2 * first.xtx_inverse(1, 1));
            out.first_stage_f = t * t;
            if (*out.first_stage_f < kWeakInstrumentF)
                out.warnings.push_back("weak instrument: first-stage F below " +
                                       std::to_string(static_cast<int>(kWeakInstrumentF)));
            const Eigen::VectorXd d_hat = first_x * first.beta;
            const auto second = ols(design(data, {d_hat}, spec.covariates), y, "the second stage");
            const Eigen::VectorXd resid = y - design(data, {d}, spec.covariates) * second.beta;
            const auto dof = static_cast<double>(data.rows()) - static_cast<double>(second.beta.size());
            const double sigma2 = resid.squaredNorm() / dof;
            out.value = second.beta(1);
            out.standard_error = std::sqrt(sigma2 * second.xtx_inverse(1, 1));
            break;
        }
    }
    return out;
}

EstimandReport bias_decomposition(const PoTable& po) {
    double n1 = 0, n0 = 0;
    double y1_t = 0, y1_c = 0, y0_t = 0, y0_c = 0, tau = 0;
    for (std::size_t i = 0; i < po.size(); ++i) {
        tau += po.y1[i] - po.y0[i];
        if (po.d[i] == 1) {
            n1 += 1;
            y1_t += po.y1[i];
            y0_t += po.y0[i];
        } else {
            n0 += 1;
            y1_c += po.y1[i];
            y0_c += po.y0[i];
        }
    }
    if (n1 == 0 || n0 == 0) throw Error(ErrorCode::empty_arm, "both exposure arms need at least one unit");
    y1_t /= n1;
    y0_t /= n1;
    y1_c /= n0;
    y0_c /= n0;

    double obs_t = 0, obs_c = 0;
    for (std::size_t i = 0; i < po.size(); ++i) (po.d[i] == 1 ? obs_t : obs_c) += po.y[i];
    obs_t /= n1;
    obs_c /= n0;

    EstimandReport r;
    r.p_treated = n1 / (n1 + n0);
    r.ate = tau / (n1 + n0);
    r.att = y1_t - y0_t;
    r.atc = y1_c - y0_c;
    r.naive_diff = obs_t - obs_c;
    r.control_po_bias = (1 - r.p_treated) * (y1_t - y1_c);
    r.treated_po_bias = r.p_treated * (y0_t - y0_c);
    r.baseline_bias = y0_t - y0_c;
    r.differential_response = (1 - r.p_treated) * (r.att - r.atc);
    r.weighted_form_residual = r.naive_diff - (r.ate + r.control_po_bias + r.treated_po_bias);
    r.baseline_form_residual = r.naive_diff - (r.ate + r.baseline_bias + r.differential_response);
    return r;
}

namespace {

double normal_two_sided_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

CiTestResult pairwise_ci(const Dataset& data, const std::string& a, const std::string& b,
                         const NodeSet& given, double alpha) {
    const auto n = data.rows();
    if (n <= given.size() + 3)
        throw Error(ErrorCode::insufficient_sample,
                    "Fisher-z test needs more than " + std::to_string(given.size() + 3) + " rows");
    const auto x = design(data, {}, given);
    auto residual = [&](const std::string& name) -> Eigen::VectorXd {
        const Eigen::VectorXd col = data.column(name);
        const double mean = col.mean();
        if ((col.array() - mean).abs().maxCoeff() == 0.0)
            throw Error(ErrorCode::singular_design, "column '" + name + "' has zero variance");
        return ols(x, col, "the partial correlation of '" + name + "'").residuals;
    };
    const Eigen::VectorXd ra = residual(a);
    const Eigen::VectorXd rb = residual(b);
    const double denom = std::sqrt(ra.squaredNorm() * rb.squaredNorm());
    if (denom == 0.0)
        throw Error(ErrorCode::singular_design, "'" + a + "' or '" + b + "' is determined by the conditioning set");
    double r = ra.dot(rb) / denom;
    r = std::clamp(r, -1.0 + 1e-15, 1.0 - 1e-15);

    CiTestResult out;
    out.partial_correlation = r;
    out.statistic = std::atanh(r) * std::sqrt(static_cast<double>(n - given.size() - 3));
    out.p_value = normal_two_sided_p(out.statistic);
    out.reject = out.p_value < alpha;
    return out;
}

} // namespace

CiTestResult ci_test(const Dataset& data, const CIStatement& stmt, double alpha) {
    if (stmt.a.empty() || stmt.b.empty())
        throw Error(ErrorCode::invalid_argument, "independence statement needs both sides");
    for (const auto* set : {&stmt.a, &stmt.b, &stmt.given})
        for (const auto& v : *set) data.column_index(v);
    std::optional<CiTestResult> best;
    std::size_t tests = 0;
    for (const auto& a : stmt.a) {
        for (const auto& b : stmt.b) {
            auto r = pairwise_ci(data, a, b, stmt.given, alpha);
            ++tests;
            if (!best || r.p_value < best->p_value) best = r;
        }
    }
    best->p_value = std::min(1.0, best->p_value * static_cast<double>(tests));
    best->reject = best->p_value < alpha;
    return *best;
}

std::string_view correction_name(Correction c) { return c == Correction::holm ? "holm" : "none"; }

FitReport model_fit_report(const CausalGraph& g, const Dataset& data, std::size_t max_cond, double alpha,
                           Correction correction) {
    require_columns(data, g);
    FitReport report;
    report.alpha = alpha;
    report.correction = correction;
    for (auto& stmt : implied_independencies(g, max_cond)) {
        FitTest t;
        t.result = ci_test(data, stmt, alpha);
        t.statement = std::move(stmt);
        t.adjusted_p = t.result.p_value;
        report.tests.push_back(std::move(t));
    }
    const auto m = report.tests.size();
    report.testable = m > 0;
    if (correction == Correction::holm && m > 0) {
        std::vector<std::size_t> order(m);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) {
            return report.tests[i].result.p_value < report.tests[j].result.p_value;
        });
        double running = 0.0;
        for (std::size_t rank = 0; rank < m; ++rank) {
            auto& t = report.tests[order[rank]];
            running = std::max(running, std::min(1.0, static_cast<double>(m - rank) * t.result.p_value));
            t.adjusted_p = running;
        }
    }
    std::size_t rejected = 0;
    for (auto& t : report.tests) {
        t.reject = t.adjusted_p < alpha;
        if (t.reject) ++rejected;
    }
    report.rejected_fraction = m ? static_cast<double>(rejected) / static_cast<double>(m) : 0.0;
    report.compatible = rejected == 0;
    return report;
}

PositivityReport positivity_check(const Dataset& data, const std::string& exposure,
                                  const std::vector<std::string>& covariates, std::size_t bins) {
    if (bins < 2) throw Error(ErrorCode::invalid_argument, "positivity check needs at least 2 bins");
    const Eigen::VectorXd d = data.column(exposure);
    const bool binary = (d.array() == 0.0 || d.array() == 1.0).all();
    const auto n = data.rows();

    std::vector<std::vector<int>> bin_of(n, std::vector<int>(covariates.size()));
    for (std::size_t c = 0; c < covariates.size(); ++c) {
        const Eigen::VectorXd col = data.column(covariates[c]);
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) {
            return col(static_cast<Eigen::Index>(i)) < col(static_cast<Eigen::Index>(j));
        });
        int current = 0;
        for (std::size_t rank = 0; rank < n; ++rank) {
            const auto i = order[rank];
            const bool tie = rank > 0 && col(static_cast<Eigen::Index>(i)) ==
                                             col(static_cast<Eigen::Index>(order[rank - 1]));
            if (!tie) current = static_cast<int>(rank * bins / n);
            bin_of[i][c] = current;
        }
    }

    std::map<std::vector<int>, std::pair<std::size_t, std::size_t>> strata;
    for (std::size_t i = 0; i < n; ++i) {
        const double di = d(static_cast<Eigen::Index>(i));
        const bool treated = binary ? di == 1.0 : di > 0.0;
        auto& counts = strata[bin_of[i]];
        (treated ? counts.second : counts.first) += 1;
    }
    PositivityReport report;
    report.total = strata.size();
    for (const auto& [key, counts] : strata) {
        if (counts.first == 0 || counts.second == 0) {
            ++report.violating;
            report.violating_strata.push_back(key);
        }
    }
    return report;
}

std::vector<SensitivityPoint> sensitivity_sweep(const SemModel& base, const std::string& exposure,
                                                const std::string& outcome, const NodeSet& z,
                                                const std::vector<double>& strengths, std::size_t n) {
    const auto& g = base.graph;
    if (!backdoor_admissible(g, exposure, outcome, z).admissible)
        throw Error(ErrorCode::invalid_argument, "adjustment set is not admissible in the base graph");
    if (g.contains(kSweepConfounder))
        throw Error(ErrorCode::invalid_argument, std::string("graph already has a node named ") + kSweepConfounder);

    std::vector<NodeDecl> nodes(g.nodes().begin(), g.nodes().end());
    nodes.push_back({kSweepConfounder, NodeRole{.latent = true}});
    std::vector<Edge> edges(g.edges().begin(), g.edges().end());
    edges.push_back({kSweepConfounder, exposure, EdgeKind::directed});
    edges.push_back({kSweepConfounder, outcome, EdgeKind::directed});
    const auto augmented = CausalGraph::build(g.name(), std::move(nodes), std::move(edges));

    std::vector<SensitivityPoint> out;
    for (double s : strengths) {
        if (!std::isfinite(s)) throw Error(ErrorCode::invalid_argument, "sensitivity strengths must be finite");
        SemModel m;
        m.graph = augmented;
        m.seed = base.seed;
        m.coefficients = base.coefficients;
        m.coefficients[{kSweepConfounder, exposure}] = std::abs(s);
        m.coefficients[{kSweepConfounder, outcome}] = s;
        m.noise_scale = base.noise_scale;
        m.noise_scale[kSweepConfounder] = 1.0;

        const auto est = estimate(sample(m, n), exposure, outcome, EstimatorSpec::adjust(z));
        SensitivityPoint p;
        p.strength = s;
        p.estimate = est.value;
        p.standard_error = est.standard_error;
        p.true_effect = true_effect(m, exposure, outcome);
        p.bias = p.estimate - p.true_effect;
        out.push_back(p);
    }
    return out;
}

std::vector<SensitivityPoint> sensitivity_sweep(const CausalGraph& g, const std::string& exposure,
                                                const std::string& outcome, const NodeSet& z,
                                                const std::vector<double>& strengths, std::size_t n,
                                                std::uint64_t seed) {
    return sensitivity_sweep(instantiate_sem(g, {}, seed), exposure, outcome, z, strengths, n);
}

} // namespace egp
