#pragma once

// Explicit predictor for Caputo fractional initial-value problems
// D^beta X = F(t, X), beta in (0, 1], on a uniform grid t_j = j*h:
//
//   X_{k+1} = X_0 + (1/Gamma(beta)) * sum_{j=0}^{k} b_{j,k+1} F(t_j, X_j)
//   b_{j,k+1} = (h^beta / beta) * ((k+1-j)^beta - (k-j)^beta)
//
// The full RHS history enters every step; that memory sum is the whole point
// of the scheme, so no short-memory truncation is offered.  At beta = 1 all
// coefficients collapse to h and the recursion is explicit forward Euler.
// A corrector pass is a deliberate non-feature; corrector_hook marks the seam.

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "frond/errors.hpp"
#include "frond/special.hpp"

namespace frond {

using Matrix = Eigen::MatrixXd;

// Right-hand side F(t, X).  Must return a matrix of the input's shape and be
// deterministic for fixed inputs.
using RhsFn = std::function<Matrix(double, const Matrix&)>;

struct FdeConfig {
    double beta = 1.0;
    double step_h = 0.0;
    double horizon_T = 0.0;
    long n_steps = 0;

    static FdeConfig make(double beta, double step_h, double horizon_T) {
        FdeConfig cfg;
        cfg.beta = beta;
        cfg.step_h = step_h;
        cfg.horizon_T = horizon_T;
        cfg.n_steps = step_h > 0.0 ? std::lround(horizon_T / step_h) : 0;
        cfg.validate();
        return cfg;
    }

    void validate() const {
        if (!(beta > 0.0) || beta > 1.0) {
            throw config_error("fde_solver", "beta must be in (0, 1]");
        }
        if (!(step_h > 0.0) || !std::isfinite(step_h)) {
            throw config_error("fde_solver", "step size must be positive");
        }
        if (n_steps < 1) {
            throw config_error("fde_solver", "need at least one step");
        }
        if (!(std::fabs(static_cast<double>(n_steps) * step_h - horizon_T) < step_h / 2.0)) {
            throw config_error("fde_solver",
                               "horizon is not an integral number of steps: n=" +
                                   std::to_string(n_steps) + " h=" + std::to_string(step_h) +
                                   " T=" + std::to_string(horizon_T));
        }
    }
};

struct Trajectory {
    std::vector<double> times;        // t_j = j*h, j = 0..n_steps
    std::vector<Matrix> states;       // X_j, n_steps + 1 entries
    std::vector<Matrix> rhs_history;  // F(t_j, X_j), j = 0..n_steps-1

    const Matrix& terminal() const { return states.back(); }
};

/// Predictor weight b_{j,k+1}; strictly positive for 0 <= j <= k.
inline double ab_coefficient(double beta, double h, long j, long k) {
    if (j < 0 || j > k) {
        throw config_error("fde_solver",
                           "ab_coefficient: index j=" + std::to_string(j) +
                               " outside [0, " + std::to_string(k) + "]");
    }
    const double m = static_cast<double>(k + 1 - j);
    return std::pow(h, beta) / beta * (std::pow(m, beta) - std::pow(m - 1.0, beta));
}

/// Row {b_{j,k+1}}_{j=0..k}.  The row telescopes: its sum is h^beta (k+1)^beta / beta.
inline std::vector<double> coefficient_row(double beta, double h, long k) {
    if (k < 0) {
        throw config_error("fde_solver", "coefficient_row: k must be >= 0");
    }
    const double scale = std::pow(h, beta) / beta;
    std::vector<double> row(static_cast<std::size_t>(k) + 1);
    double prev = std::pow(static_cast<double>(k + 1), beta);  // (k+1-j)^beta at j=0
    for (long j = 0; j <= k; ++j) {
        const double next = std::pow(static_cast<double>(k - j), beta);
        row[static_cast<std::size_t>(j)] = scale * (prev - next);
        prev = next;
    }
    return row;
}

namespace detail {

// Elementwise Kahan accumulator; n^2 signed additions drift otherwise.
class KahanMatrix {
public:
    KahanMatrix(Eigen::Index rows, Eigen::Index cols)
        : sum_(Matrix::Zero(rows, cols)),
          comp_(Matrix::Zero(rows, cols)),
          y_(rows, cols),
          t_(rows, cols) {}

    template <typename Expr>
    void add(const Expr& term) {
        y_ = term - comp_;
        t_ = sum_ + y_;
        comp_ = (t_ - sum_) - y_;
        sum_.swap(t_);
    }

    const Matrix& value() const { return sum_; }

private:
    Matrix sum_, comp_, y_, t_;
};

// w_m = m^beta - (m-1)^beta for m = 1..n.  b_{j,k+1} = (h^beta/beta) w_{k+1-j},
// so one table serves every step.
inline std::vector<double> memory_weights(double beta, long n) {
    std::vector<double> w(static_cast<std::size_t>(n) + 1, 0.0);
    double prev = 0.0;
    for (long m = 1; m <= n; ++m) {
        const double cur = std::pow(static_cast<double>(m), beta);
        w[static_cast<std::size_t>(m)] = cur - prev;
        prev = cur;
    }
    return w;
}

inline Trajectory solve_with_weights(const RhsFn& rhs, const Matrix& x0, const FdeConfig& cfg,
                                     const std::vector<double>& weights) {
    if (x0.size() == 0) {
        throw config_error("fde_solver", "empty initial state");
    }
    if (!x0.allFinite()) {
        throw numeric_error("fde_solver", "initial state contains non-finite values");
    }
    const long n = cfg.n_steps;
    const double front = std::pow(cfg.step_h, cfg.beta) / cfg.beta / gamma_fn(cfg.beta);

    Trajectory traj;
    traj.times.reserve(static_cast<std::size_t>(n) + 1);
    traj.states.reserve(static_cast<std::size_t>(n) + 1);
    traj.rhs_history.reserve(static_cast<std::size_t>(n));
    for (long j = 0; j <= n; ++j) {
        traj.times.push_back(static_cast<double>(j) * cfg.step_h);
    }
    traj.states.push_back(x0);

    for (long k = 0; k < n; ++k) {
        Matrix f = rhs(traj.times[static_cast<std::size_t>(k)],
                       traj.states[static_cast<std::size_t>(k)]);
        if (f.rows() != x0.rows() || f.cols() != x0.cols()) {
            throw config_error("fde_solver",
                               "rhs output shape mismatch at step " + std::to_string(k));
        }
        if (!f.allFinite()) {
            throw numeric_error("fde_solver",
                                "non-finite rhs value at step " + std::to_string(k));
        }
        traj.rhs_history.push_back(std::move(f));

        KahanMatrix acc(x0.rows(), x0.cols());
        for (long j = 0; j <= k; ++j) {
            acc.add(weights[static_cast<std::size_t>(k + 1 - j)] *
                    traj.rhs_history[static_cast<std::size_t>(j)]);
        }
        Matrix next = x0 + front * acc.value();
        if (!next.allFinite()) {
            throw numeric_error("fde_solver",
                                "non-finite state at step " + std::to_string(k + 1));
        }
        traj.states.push_back(std::move(next));
    }
    return traj;
}

}  // namespace detail

// Extension seam for an Adams-Moulton corrector pass; the shipped scheme is
// predictor-only and leaves the trajectory untouched.
using CorrectorHook = std::function<void(Trajectory&)>;
inline const CorrectorHook kNoCorrector = {};

/// Integrate D^beta X = rhs(t, X), X(0) = x0 over the configured grid.
inline Trajectory solve_fde(const RhsFn& rhs, const Matrix& x0, const FdeConfig& cfg,
                            const CorrectorHook& corrector = kNoCorrector) {
    cfg.validate();
    auto weights = detail::memory_weights(cfg.beta, cfg.n_steps);
    Trajectory traj = detail::solve_with_weights(rhs, x0, cfg, weights);
    if (corrector) {
        corrector(traj);
    }
    return traj;
}

/// Twin integration on the identical grid with one shared coefficient table.
/// Identical inputs produce bitwise-identical trajectories.
inline std::pair<Trajectory, Trajectory> solve_fde_pair(const RhsFn& rhs, const RhsFn& rhs_tilde,
                                                        const Matrix& x0, const Matrix& x0_tilde,
                                                        const FdeConfig& cfg) {
    cfg.validate();
    if (x0.rows() != x0_tilde.rows() || x0.cols() != x0_tilde.cols()) {
        throw config_error("fde_solver", "paired initial states must share a shape");
    }
    auto weights = detail::memory_weights(cfg.beta, cfg.n_steps);
    Trajectory clean = detail::solve_with_weights(rhs, x0, cfg, weights);
    Trajectory perturbed = detail::solve_with_weights(rhs_tilde, x0_tilde, cfg, weights);
    return {std::move(clean), std::move(perturbed)};
}

/// Columnar text serialization: one row per time step, `t` followed by the
/// row-major flattened state.  Values carry 17 significant digits so they
/// round-trip bit-exactly.
inline void write_trajectory(std::ostream& out, const Trajectory& traj) {
    char buf[40];
    for (std::size_t j = 0; j < traj.states.size(); ++j) {
        std::snprintf(buf, sizeof(buf), "%.17g", traj.times[j]);
        out << buf;
        const Matrix& x = traj.states[j];
        for (Eigen::Index r = 0; r < x.rows(); ++r) {
            for (Eigen::Index c = 0; c < x.cols(); ++c) {
                std::snprintf(buf, sizeof(buf), "%.17g", x(r, c));
                out << ' ' << buf;
            }
        }
        out << '\n';
    }
}

}  // namespace frond
