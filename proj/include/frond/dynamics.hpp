#pragma once

// Right-hand sides for the three graph flows, built from a graph and frozen
// parameters:
//
//   grand     F(X) = (A(X) - I) X          attention-weighted diffusion
//   graphbel  F(X) = (A_S . B_S - Psi) X   conservative (zero row sum) flow
//   graphcon  stacked [Y; X] oscillator    dY = sigma(F_theta(X)) - gamma X - alpha Y,
//                                          dX = Y
//
// Attention rows are softmax over graph neighborhoods, so every nonempty row
// sums to one.  In `Static` mode the state-dependent operators are frozen at
// the anchor state (the system's X(0)) and the flows become linear maps; in
// `Dynamic` mode they are rebuilt from X(t) at every evaluation.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "frond/errors.hpp"
#include "frond/fde.hpp"
#include "frond/graph.hpp"
#include "frond/rng.hpp"

namespace frond {

struct AttentionParams {
    Matrix w_key;    // d x d_k
    Matrix w_query;  // d x d_k

    int d_k() const { return static_cast<int>(w_key.cols()); }

    void validate(int feature_dim) const {
        if (w_key.rows() != feature_dim || w_query.rows() != feature_dim ||
            w_key.cols() != w_query.cols() || w_key.cols() < 1) {
            throw config_error("graph_dynamics", "attention weight shapes inconsistent with d=" +
                                                     std::to_string(feature_dim));
        }
        if (!w_key.allFinite() || !w_query.allFinite()) {
            throw config_error("graph_dynamics", "attention weights must be finite");
        }
    }
};

// Frozen seeded initialization, uniform on [-s, s] with s = fan_in^{-1/2}.
inline Matrix seeded_weight(int rows, int cols, std::uint64_t seed) {
    Rng rng(seed);
    const double s = 1.0 / std::sqrt(static_cast<double>(rows));
    Matrix w(rows, cols);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            w(r, c) = rng.uniform(-s, s);
        }
    }
    return w;
}

inline AttentionParams seeded_attention_params(int d, int d_k, std::uint64_t seed) {
    AttentionParams p;
    p.w_key = seeded_weight(d, d_k, derive_seed(seed, 0));
    p.w_query = seeded_weight(d, d_k, derive_seed(seed, 1));
    return p;
}

enum class DynamicsKind { Grand, GraphBel, GraphCon };
enum class AttentionMode { Static, Dynamic };
enum class Activation { Tanh, Relu };

struct DynamicsSpec {
    DynamicsKind kind = DynamicsKind::Grand;
    AttentionMode attention_mode = AttentionMode::Static;
    AttentionParams attention;  // grand, graphbel, optionally graphcon coupling

    Matrix coupling_weight;            // graphcon, d x d
    double gamma = 0.0;                // graphcon restoring coefficient
    double alpha = 0.0;                // graphcon damping
    Activation activation = Activation::Tanh;
    bool graphcon_attention_coupling = false;  // default coupling hop is D^{-1/2} W D^{-1/2}

    // Uniform scaling of the constructed F; rescaling a linear flow pins its
    // Lipschitz constant without touching the frozen weights.
    double rhs_scale = 1.0;

    void validate() const {
        if (!(rhs_scale > 0.0) || !std::isfinite(rhs_scale)) {
            throw config_error("graph_dynamics", "rhs_scale must be positive");
        }
        if (kind == DynamicsKind::GraphCon) {
            if (!(gamma >= 0.0) || !(alpha >= 0.0)) {
                throw config_error("graph_dynamics", "graphcon gamma/alpha must be >= 0");
            }
            if (coupling_weight.rows() != coupling_weight.cols() ||
                coupling_weight.rows() < 1 || !coupling_weight.allFinite()) {
                throw config_error("graph_dynamics", "graphcon coupling weight must be a finite square matrix");
            }
        }
    }
};

/// Row-stochastic attention over graph neighborhoods.  Entry (i, j) is nonzero
/// only where W_ij != 0; rows of isolated nodes stay all-zero.  Logits are
/// scaled by the key dimension d_k, not its square root.
inline SparseMatrix attention_matrix(const Graph& graph, const Matrix& x,
                                     const AttentionParams& params) {
    const int n = graph.n_nodes();
    if (x.rows() != n) {
        throw config_error("graph_dynamics", "feature matrix has " + std::to_string(x.rows()) +
                                                 " rows for " + std::to_string(n) + " nodes");
    }
    params.validate(static_cast<int>(x.cols()));

    const Matrix key = x * params.w_key;
    const Matrix query = x * params.w_query;
    const double inv_dk = 1.0 / static_cast<double>(params.d_k());
    const auto nbrs = graph.neighbor_lists();

    std::vector<Eigen::Triplet<double>> triplets;
    std::vector<double> logits;
    for (int i = 0; i < n; ++i) {
        const auto& list = nbrs[static_cast<std::size_t>(i)];
        if (list.empty()) {
            continue;
        }
        logits.clear();
        double max_logit = -std::numeric_limits<double>::infinity();
        for (int j : list) {
            const double l = key.row(i).dot(query.row(j)) * inv_dk;
            logits.push_back(l);
            max_logit = std::max(max_logit, l);
        }
        double denom = 0.0;
        for (double& l : logits) {
            l = std::exp(l - max_logit);
            denom += l;
        }
        for (std::size_t m = 0; m < list.size(); ++m) {
            triplets.emplace_back(i, list[m], logits[m] / denom);
        }
    }
    SparseMatrix a(n, n);
    a.setFromTriplets(triplets.begin(), triplets.end());
    return a;
}

namespace detail {

// A_S . B_S - Psi with A_S the attention, B_S the cosine similarity of
// endpoint features (0 when either norm vanishes), and Psi the diagonal of
// row sums of A_S . B_S.  Rows sum to zero by construction.
inline SparseMatrix graphbel_operator(const Graph& graph, const Matrix& x,
                                      const AttentionParams& params) {
    const int n = graph.n_nodes();
    SparseMatrix a = attention_matrix(graph, x, params);

    std::vector<double> norms(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        norms[static_cast<std::size_t>(i)] = x.row(i).norm();
    }
    constexpr double kNormFloor = 1e-12;

    std::vector<Eigen::Triplet<double>> triplets;
    std::vector<double> row_sum(static_cast<std::size_t>(n), 0.0);
    for (int col = 0; col < a.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(a, col); it; ++it) {
            const int i = static_cast<int>(it.row());
            const int j = static_cast<int>(it.col());
            double b = 0.0;
            const double ni = norms[static_cast<std::size_t>(i)];
            const double nj = norms[static_cast<std::size_t>(j)];
            if (ni >= kNormFloor && nj >= kNormFloor) {
                b = x.row(i).dot(x.row(j)) / (ni * nj);
            }
            const double v = it.value() * b;
            if (v != 0.0) {
                triplets.emplace_back(i, j, v);
                row_sum[static_cast<std::size_t>(i)] += v;
            }
        }
    }
    for (int i = 0; i < n; ++i) {
        if (row_sum[static_cast<std::size_t>(i)] != 0.0) {
            triplets.emplace_back(i, i, -row_sum[static_cast<std::size_t>(i)]);
        }
    }
    SparseMatrix op(n, n);
    op.setFromTriplets(triplets.begin(), triplets.end());
    return op;
}

// Symmetric degree normalization D^{-1/2} W D^{-1/2}; zero-degree nodes
// contribute nothing.
inline SparseMatrix normalized_adjacency(const Graph& graph) {
    const auto deg = graph.weighted_degrees();
    std::vector<double> inv_sqrt(deg.size(), 0.0);
    for (std::size_t i = 0; i < deg.size(); ++i) {
        if (deg[i] > 0.0) {
            inv_sqrt[i] = 1.0 / std::sqrt(deg[i]);
        }
    }
    std::vector<Eigen::Triplet<double>> triplets;
    for (const auto& [key, w] : graph.edges()) {
        const double v = w * inv_sqrt[static_cast<std::size_t>(key.first)] *
                         inv_sqrt[static_cast<std::size_t>(key.second)];
        triplets.emplace_back(key.first, key.second, v);
        triplets.emplace_back(key.second, key.first, v);
    }
    SparseMatrix a(graph.n_nodes(), graph.n_nodes());
    a.setFromTriplets(triplets.begin(), triplets.end());
    return a;
}

inline Matrix apply_activation(Activation act, Matrix m) {
    switch (act) {
        case Activation::Tanh:
            return m.array().tanh().matrix();
        case Activation::Relu:
            return m.cwiseMax(0.0);
    }
    throw config_error("graph_dynamics", "unknown activation");
}

inline void check_state_rows(const Matrix& x, Eigen::Index expected, const char* what) {
    if (x.rows() != expected) {
        throw config_error("graph_dynamics", std::string(what) + ": state has " +
                                                 std::to_string(x.rows()) + " rows, expected " +
                                                 std::to_string(expected));
    }
}

}  // namespace detail

/// Diffusion flow F(X) = scale * (A - I) X.  `x0` anchors the frozen attention
/// in Static mode and is ignored in Dynamic mode.
inline RhsFn grand_rhs(const Graph& graph, const DynamicsSpec& spec, const Matrix& x0) {
    if (spec.kind != DynamicsKind::Grand) {
        throw config_error("graph_dynamics", "grand_rhs: spec.kind is not grand");
    }
    spec.validate();
    const double s = spec.rhs_scale;
    const Eigen::Index n = graph.n_nodes();
    if (spec.attention_mode == AttentionMode::Static) {
        SparseMatrix a = attention_matrix(graph, x0, spec.attention);
        return [a, s, n](double, const Matrix& x) -> Matrix {
            detail::check_state_rows(x, n, "grand");
            return s * (a * x - x);
        };
    }
    Graph g = graph;
    AttentionParams p = spec.attention;
    return [g, p, s, n](double, const Matrix& x) -> Matrix {
        detail::check_state_rows(x, n, "grand");
        SparseMatrix a = attention_matrix(g, x, p);
        return s * (a * x - x);
    };
}

/// Conservative flow F(X) = scale * (A_S . B_S - Psi) X.  Static mode freezes
/// the whole operator at the anchor; Dynamic rebuilds it from X(t).
inline RhsFn graphbel_rhs(const Graph& graph, const DynamicsSpec& spec, const Matrix& x0) {
    if (spec.kind != DynamicsKind::GraphBel) {
        throw config_error("graph_dynamics", "graphbel_rhs: spec.kind is not graphbel");
    }
    spec.validate();
    const double s = spec.rhs_scale;
    const Eigen::Index n = graph.n_nodes();
    if (spec.attention_mode == AttentionMode::Static) {
        SparseMatrix op = detail::graphbel_operator(graph, x0, spec.attention);
        return [op, s, n](double, const Matrix& x) -> Matrix {
            detail::check_state_rows(x, n, "graphbel");
            return s * (op * x);
        };
    }
    Graph g = graph;
    AttentionParams p = spec.attention;
    return [g, p, s, n](double, const Matrix& x) -> Matrix {
        detail::check_state_rows(x, n, "graphbel");
        SparseMatrix op = detail::graphbel_operator(g, x, p);
        return s * (op * x);
    };
}

inline Matrix stack_graphcon_state(const Matrix& y0, const Matrix& x0) {
    if (y0.rows() != x0.rows() || y0.cols() != x0.cols()) {
        throw config_error("graph_dynamics", "graphcon Y0/X0 shapes differ");
    }
    Matrix s(2 * x0.rows(), x0.cols());
    s.topRows(y0.rows()) = y0;
    s.bottomRows(x0.rows()) = x0;
    return s;
}

inline Matrix graphcon_x_block(const Matrix& stacked, int n_nodes) {
    return stacked.bottomRows(n_nodes);
}

/// Oscillator flow on the stacked state [Y; X] (2n rows): the top block
/// evolves as sigma(coupling(X)) - gamma X - alpha Y and the bottom block as
/// Y.  The coupling hop is Ahat * X * M with Ahat either the normalized
/// adjacency or the (anchored/dynamic) attention.
inline RhsFn graphcon_rhs(const Graph& graph, const DynamicsSpec& spec, const Matrix& x0_stacked) {
    if (spec.kind != DynamicsKind::GraphCon) {
        throw config_error("graph_dynamics", "graphcon_rhs: spec.kind is not graphcon");
    }
    spec.validate();
    const int n = graph.n_nodes();
    if (x0_stacked.rows() != 2 * n) {
        throw config_error("graph_dynamics", "graphcon state must have 2 * n_nodes rows");
    }
    if (spec.coupling_weight.rows() != x0_stacked.cols()) {
        throw config_error("graph_dynamics", "graphcon coupling weight must be d x d");
    }

    const double s = spec.rhs_scale;
    const double gamma = spec.gamma;
    const double alpha = spec.alpha;
    const Activation act = spec.activation;
    const Matrix m = spec.coupling_weight;

    const bool dynamic_attention =
        spec.graphcon_attention_coupling && spec.attention_mode == AttentionMode::Dynamic;
    SparseMatrix ahat;
    if (!dynamic_attention) {
        ahat = spec.graphcon_attention_coupling
                   ? attention_matrix(graph, graphcon_x_block(x0_stacked, n), spec.attention)
                   : detail::normalized_adjacency(graph);
    }
    Graph g = graph;
    AttentionParams p = spec.attention;

    return [=](double, const Matrix& state) -> Matrix {
        detail::check_state_rows(state, 2 * n, "graphcon");
        const Matrix y = state.topRows(n);
        const Matrix x = state.bottomRows(n);
        SparseMatrix dyn_hop;
        if (dynamic_attention) {
            dyn_hop = attention_matrix(g, x, p);
        }
        const SparseMatrix& hop = dynamic_attention ? dyn_hop : ahat;
        Matrix out(2 * n, state.cols());
        out.topRows(n) = detail::apply_activation(act, hop * x * m) - gamma * x - alpha * y;
        out.bottomRows(n) = y;
        return s * out;
    };
}

/// Dispatch on spec.kind.  `x0` is the full system state: node features for
/// grand/graphbel, the stacked [Y; X] for graphcon.
inline RhsFn make_rhs(const Graph& graph, const DynamicsSpec& spec, const Matrix& x0) {
    switch (spec.kind) {
        case DynamicsKind::Grand:
            return grand_rhs(graph, spec, x0);
        case DynamicsKind::GraphBel:
            return graphbel_rhs(graph, spec, x0);
        case DynamicsKind::GraphCon:
            return graphcon_rhs(graph, spec, x0);
    }
    throw config_error("graph_dynamics", "unknown dynamics kind");
}

/// Largest singular value by power iteration on M^T M (200 iterations or
/// relative change < 1e-10).
inline double spectral_norm(const SparseMatrix& m) {
    if (m.rows() == 0 || m.nonZeros() == 0) {
        return 0.0;
    }
    Rng rng(0x5eedu);
    Eigen::VectorXd v(m.cols());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        v(i) = rng.normal();
    }
    v.normalize();
    const SparseMatrix mt = SparseMatrix(m.transpose());
    double sigma = 0.0;
    double prev = -1.0;
    for (int it = 0; it < 200; ++it) {
        Eigen::VectorXd w = m * v;
        Eigen::VectorXd u = mt * w;
        const double nu = u.norm();
        if (nu == 0.0) {
            return 0.0;
        }
        v = u / nu;
        sigma = std::sqrt(nu);
        if (prev >= 0.0 && std::fabs(sigma - prev) <= 1e-10 * std::max(sigma, 1e-30)) {
            break;
        }
        prev = sigma;
    }
    return sigma;
}

struct LipschitzEstimate {
    double value = 0.0;
    // True when the flow is a frozen linear map and the value is its spectral
    // norm; false for the sampled difference-quotient lower bound.
    bool exact = false;
};

/// Lipschitz constant of the constructed F.  Static-attention grand is a
/// linear map whose constant is the spectral norm of scale * (A - I), with A
/// anchored at x_samples.front() (the system's X(0)).  Everything else gets
/// the max difference quotient over sample pairs, flagged as a lower bound.
inline LipschitzEstimate lipschitz_estimate(const Graph& graph, const DynamicsSpec& spec,
                                            const std::vector<Matrix>& x_samples) {
    if (x_samples.size() < 2) {
        throw config_error("graph_dynamics", "lipschitz_estimate: need at least 2 sample states");
    }
    spec.validate();
    if (spec.kind == DynamicsKind::Grand && spec.attention_mode == AttentionMode::Static) {
        SparseMatrix a = attention_matrix(graph, x_samples.front(), spec.attention);
        SparseMatrix eye(a.rows(), a.cols());
        eye.setIdentity();
        const SparseMatrix op = a - eye;
        return {spec.rhs_scale * spectral_norm(op), true};
    }

    const RhsFn rhs = make_rhs(graph, spec, x_samples.front());
    std::vector<Matrix> values;
    values.reserve(x_samples.size());
    for (const Matrix& x : x_samples) {
        values.push_back(rhs(0.0, x));
    }
    double best = 0.0;
    bool any_pair = false;
    for (std::size_t i = 0; i < x_samples.size(); ++i) {
        for (std::size_t j = i + 1; j < x_samples.size(); ++j) {
            const double dx = (x_samples[i] - x_samples[j]).norm();
            if (dx < 1e-12) {
                continue;
            }
            any_pair = true;
            best = std::max(best, (values[i] - values[j]).norm() / dx);
        }
    }
    if (!any_pair) {
        throw numeric_error("graph_dynamics",
                            "lipschitz_estimate: all sample pairs are degenerate");
    }
    return {best, false};
}

}  // namespace frond
