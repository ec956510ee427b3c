#pragma once

// Twin-system perturbation experiments.  A clean and a perturbed system are
// integrated on the same grid with shared solver coefficients, the trajectory
// deviation is measured in the Frobenius norm, and the result is compared
// against the bound shape eps * E_beta(L * T^beta).  The proportionality
// constant is fitted and reported, never asserted: the theory guarantees its
// existence, not its value.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "frond/dynamics.hpp"
#include "frond/errors.hpp"
#include "frond/fde.hpp"
#include "frond/graph.hpp"
#include "frond/rng.hpp"
#include "frond/special.hpp"

namespace frond {

enum class PerturbationKind { Feature, Topology };

struct TopologyEdit {
    int i = 0;
    int j = 0;
    double new_weight = 0.0;  // zero deletes the edge
};

struct PerturbationSpec {
    PerturbationKind kind = PerturbationKind::Feature;
    double epsilon = 0.0;             // feature mode: Frobenius norm of the offset
    std::vector<TopologyEdit> edits;  // topology mode, applied symmetrically
    std::uint64_t seed = 0;

    void validate() const {
        if (kind == PerturbationKind::Feature) {
            if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
                throw config_error("robustness_lab", "feature perturbation needs epsilon > 0");
            }
        } else {
            if (edits.empty()) {
                throw config_error("robustness_lab", "topology perturbation needs edits");
            }
            for (const auto& e : edits) {
                if (e.i == e.j) {
                    throw config_error("robustness_lab",
                                       "topology edit on the diagonal at node " +
                                           std::to_string(e.i));
                }
            }
        }
    }
};

struct DeviationReport {
    double beta = 0.0;
    // Max over the evolved grid points t_j, j >= 1, of ||X - X~||_F.  The
    // t = 0 point is excluded: there the deviation equals the injected offset
    // by construction (reported as epsilon_effective), and a statistic pinned
    // at epsilon cannot discriminate between memory settings on stable flows.
    double sup_deviation = 0.0;
    double terminal_deviation = 0.0;  // at t = T
    double epsilon_effective = 0.0;   // feature eps, or the functional eps estimate
    double lipschitz = 0.0;
    bool lipschitz_exact = false;
    double bound_factor = 0.0;  // E_beta(L * T^beta)
    double fitted_c = 0.0;      // sup_deviation / (eps * bound_factor)
};

/// Seeded isotropic Gaussian offset rescaled to Frobenius norm epsilon.
inline Matrix perturb_features(const Matrix& x0, const PerturbationSpec& spec) {
    if (spec.kind != PerturbationKind::Feature) {
        throw config_error("robustness_lab", "perturb_features: spec.kind is not feature");
    }
    spec.validate();
    if (x0.size() == 0) {
        throw config_error("robustness_lab", "perturb_features: empty input");
    }
    Rng rng(spec.seed);
    Matrix dir(x0.rows(), x0.cols());
    double norm = 0.0;
    do {
        for (Eigen::Index r = 0; r < dir.rows(); ++r) {
            for (Eigen::Index c = 0; c < dir.cols(); ++c) {
                dir(r, c) = rng.normal();
            }
        }
        norm = dir.norm();
    } while (norm == 0.0);
    return x0 + (spec.epsilon / norm) * dir;
}

/// Copy of the graph with each edited pair's weight replaced; zero deletes.
inline Graph perturb_topology(const Graph& graph, const PerturbationSpec& spec) {
    if (spec.kind != PerturbationKind::Topology) {
        throw config_error("robustness_lab", "perturb_topology: spec.kind is not topology");
    }
    spec.validate();
    Graph out = graph;
    for (const auto& e : spec.edits) {
        out.set_weight(e.i, e.j, e.new_weight);
    }
    return out;
}

/// Max over sample states of ||F(X) - F~(X)||_F; a lower estimate of the
/// supremum over the compact set the theory quantifies over.
inline double functional_epsilon(const RhsFn& rhs, const RhsFn& rhs_tilde,
                                 const std::vector<Matrix>& sample_states) {
    if (sample_states.empty()) {
        throw config_error("robustness_lab", "functional_epsilon: no sample states");
    }
    double worst = 0.0;
    for (const Matrix& x : sample_states) {
        const Matrix d = rhs(0.0, x) - rhs_tilde(0.0, x);
        if (!d.allFinite()) {
            throw numeric_error("robustness_lab", "functional_epsilon: non-finite rhs value");
        }
        worst = std::max(worst, d.norm());
    }
    return worst;
}

/// Integrate the clean/perturbed twin systems and fill a DeviationReport.
/// Feature mode shares one F built from the clean anchor; topology mode
/// shares the initial state and perturbs F through the edited graph.
inline DeviationReport deviation_experiment(const Graph& graph, const DynamicsSpec& spec,
                                            const Matrix& x0, const PerturbationSpec& pert,
                                            const FdeConfig& cfg) {
    pert.validate();
    cfg.validate();

    Trajectory clean;
    Trajectory perturbed;
    double eps_effective = 0.0;
    if (pert.kind == PerturbationKind::Feature) {
        const RhsFn rhs = make_rhs(graph, spec, x0);
        const Matrix x0_tilde = perturb_features(x0, pert);
        auto pair = solve_fde_pair(rhs, rhs, x0, x0_tilde, cfg);
        clean = std::move(pair.first);
        perturbed = std::move(pair.second);
        eps_effective = pert.epsilon;
    } else {
        const Graph graph_tilde = perturb_topology(graph, pert);
        const RhsFn rhs = make_rhs(graph, spec, x0);
        const RhsFn rhs_tilde = make_rhs(graph_tilde, spec, x0);
        auto pair = solve_fde_pair(rhs, rhs_tilde, x0, x0, cfg);
        clean = std::move(pair.first);
        perturbed = std::move(pair.second);
        // The clean trajectory (x0 included) stands in for the compact set.
        eps_effective = functional_epsilon(rhs, rhs_tilde, clean.states);
    }

    const LipschitzEstimate lip = lipschitz_estimate(graph, spec, clean.states);

    DeviationReport report;
    report.beta = cfg.beta;
    for (std::size_t j = 1; j < clean.states.size(); ++j) {
        const double d = (clean.states[j] - perturbed.states[j]).norm();
        report.sup_deviation = std::max(report.sup_deviation, d);
    }
    report.terminal_deviation = (clean.terminal() - perturbed.terminal()).norm();
    report.epsilon_effective = eps_effective;
    report.lipschitz = lip.value;
    report.lipschitz_exact = lip.exact;
    report.bound_factor = lip.value > 0.0 ? mlf_bound(cfg.beta, lip.value, cfg.horizon_T) : 1.0;
    const double denom = eps_effective * report.bound_factor;
    report.fitted_c = (denom > 0.0 && report.sup_deviation > 0.0)
                          ? report.sup_deviation / denom
                          : 0.0;
    return report;
}

inline double median(std::vector<double> v) {
    if (v.empty()) {
        throw config_error("robustness_lab", "median of empty set");
    }
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

namespace detail {

// 1-based ranks with ties averaged.
inline std::vector<double> average_ranks(const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        idx[i] = i;
    }
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size(), 0.0);
    std::size_t i = 0;
    while (i < idx.size()) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) {
            ++j;
        }
        const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) {
            ranks[idx[k]] = rank;
        }
        i = j + 1;
    }
    return ranks;
}

}  // namespace detail

/// Spearman rank correlation; nullopt when undefined (fewer than two points
/// or a constant sequence).
inline std::optional<double> spearman(const std::vector<double>& xs,
                                      const std::vector<double>& ys) {
    if (xs.size() != ys.size()) {
        throw config_error("robustness_lab", "spearman: length mismatch");
    }
    const std::size_t n = xs.size();
    if (n < 2) {
        return std::nullopt;
    }
    const auto rx = detail::average_ranks(xs);
    const auto ry = detail::average_ranks(ys);
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) {
        return std::nullopt;
    }
    return sxy / std::sqrt(sxx * syy);
}

struct BetaSweepRow {
    double beta = 0.0;
    double median_sup_deviation = 0.0;
    double median_terminal_deviation = 0.0;
    double bound_factor = 0.0;
};

struct BetaSweepResult {
    std::vector<BetaSweepRow> rows;
    std::optional<double> spearman_beta_sup;  // rank correlation beta vs median sup
    std::vector<std::string> failures;        // nonempty marks a partial result
};

/// Run n_seeds deviation experiments per beta (seed s uses pert.seed + s,
/// varying only the perturbation direction) and aggregate medians.
inline BetaSweepResult beta_sweep(const Graph& graph, const DynamicsSpec& spec, const Matrix& x0,
                                  const PerturbationSpec& pert_template,
                                  const FdeConfig& cfg_template, const std::vector<double>& betas,
                                  int n_seeds) {
    if (betas.empty()) {
        throw config_error("robustness_lab", "beta_sweep: empty beta list");
    }
    for (std::size_t i = 0; i < betas.size(); ++i) {
        if (!(betas[i] > 0.0) || betas[i] > 1.0) {
            throw config_error("robustness_lab", "beta_sweep: betas must lie in (0, 1]");
        }
        if (i > 0 && !(betas[i] > betas[i - 1])) {
            throw config_error("robustness_lab", "beta_sweep: betas must be strictly ascending");
        }
    }
    if (n_seeds < 1) {
        throw config_error("robustness_lab", "beta_sweep: need at least one seed");
    }

    BetaSweepResult result;
    for (double beta : betas) {
        try {
            const FdeConfig cfg = FdeConfig::make(beta, cfg_template.step_h,
                                                  cfg_template.horizon_T);
            std::vector<double> sups, terminals, bounds;
            sups.reserve(static_cast<std::size_t>(n_seeds));
            for (int s = 0; s < n_seeds; ++s) {
                PerturbationSpec pert = pert_template;
                pert.seed = pert_template.seed + static_cast<std::uint64_t>(s);
                const DeviationReport rep = deviation_experiment(graph, spec, x0, pert, cfg);
                sups.push_back(rep.sup_deviation);
                terminals.push_back(rep.terminal_deviation);
                bounds.push_back(rep.bound_factor);
            }
            result.rows.push_back(
                {beta, median(sups), median(terminals), median(bounds)});
        } catch (const error& e) {
            result.failures.push_back("beta=" + std::to_string(beta) + ": " + e.what());
        }
    }
    if (result.rows.empty()) {
        throw numeric_error("robustness_lab",
                            "beta_sweep: every beta cell failed; first failure: " +
                                result.failures.front());
    }
    if (result.rows.size() >= 2) {
        std::vector<double> bs, sups;
        for (const auto& row : result.rows) {
            bs.push_back(row.beta);
            sups.push_back(row.median_sup_deviation);
        }
        result.spearman_beta_sup = spearman(bs, sups);
    }
    return result;
}

}  // namespace frond
