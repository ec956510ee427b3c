// Acceptance suite: every release gate in one binary, one line per check.
// Tolerances are pinned here, not configurable.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "frond/dynamics.hpp"
#include "frond/fde.hpp"
#include "frond/io.hpp"
#include "frond/robustness.hpp"
#include "frond/runner.hpp"
#include "frond/special.hpp"

using namespace frond;

namespace {

struct Check {
    std::vector<std::string> failures;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            failures.push_back(what);
        }
    }
};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// --- 1: Mittag-Leffler against independent oracles ------------------------

void mlf_oracles(Check& c) {
    for (int i = 0; i <= 50; ++i) {
        const double z = -2.0 + 7.0 * i / 50.0;
        const double rel = std::fabs(mlf(z, 1.0) - std::exp(z)) / std::exp(z);
        c.require(rel < 1e-10, "mlf(z, beta=1) vs exp at z=" + fmt(z) + ": rel=" + fmt(rel));
    }
    const double oracle = std::exp(1.0) * std::erfc(-1.0);
    const double rel = std::fabs(mlf(1.0, 0.5) - oracle) / oracle;
    c.require(rel < 1e-8, "mlf(1, beta=0.5) vs erfc identity: rel=" + fmt(rel));
}

// --- 2: predictor coefficient identities -----------------------------------

void coefficient_identities(Check& c) {
    const double h = 0.1;
    for (double beta : {0.1, 0.5, 0.9, 1.0}) {
        for (long k : {0L, 1L, 10L, 100L, 10000L}) {
            const auto row = coefficient_row(beta, h, k);
            double sum = 0.0, comp = 0.0;
            bool positive = true;
            for (double b : row) {
                positive = positive && b > 0.0;
                const double y = b - comp;
                const double t = sum + y;
                comp = (t - sum) - y;
                sum = t;
            }
            c.require(positive, "nonpositive coefficient at beta=" + fmt(beta) +
                                    " k=" + std::to_string(k));
            const double expected =
                std::pow(h, beta) * std::pow(static_cast<double>(k + 1), beta) / beta;
            const double rel = std::fabs(sum - expected) / expected;
            c.require(rel <= 1e-12, "telescoping at beta=" + fmt(beta) + " k=" +
                                        std::to_string(k) + ": rel=" + fmt(rel));
        }
    }
}

// --- 3: beta = 1 reduces to forward Euler ----------------------------------

void euler_reduction(Check& c) {
    const Graph g = synth_graph("ring", 10, {}, 0);
    const Matrix x0 = gaussian_features(10, 4, 1.0, 301);
    DynamicsSpec spec;
    spec.attention = seeded_attention_params(4, 4, 302);
    const RhsFn rhs = grand_rhs(g, spec, x0);

    const FdeConfig cfg = FdeConfig::make(1.0, 0.01, 1.0);  // 100 steps
    const Trajectory traj = solve_fde(rhs, x0, cfg);

    Matrix y = x0;
    double worst = 0.0;
    for (long k = 0; k < cfg.n_steps; ++k) {
        y = y + cfg.step_h * rhs(static_cast<double>(k) * cfg.step_h, y);
        const Matrix& s = traj.states[static_cast<std::size_t>(k) + 1];
        // Elements transiting zero make a pure per-element quotient ill-posed,
        // so entries are compared relative to their own size or the state's
        // scale, whichever is larger.
        const double scale = y.cwiseAbs().maxCoeff();
        for (Eigen::Index r = 0; r < y.rows(); ++r) {
            for (Eigen::Index col = 0; col < y.cols(); ++col) {
                const double denom =
                    std::max({std::fabs(y(r, col)), std::fabs(s(r, col)), scale});
                worst = std::max(worst, std::fabs(s(r, col) - y(r, col)) / denom);
            }
        }
    }
    c.require(worst <= 1e-12, "solver vs reference Euler: worst rel=" + fmt(worst));
}

// --- 4: eigenfunction convergence ------------------------------------------

double eigen_error(double beta, double h) {
    const RhsFn rhs = [](double, const Matrix& y) -> Matrix { return -y; };
    Matrix y0(1, 1);
    y0 << 1.0;
    const Trajectory traj = solve_fde(rhs, y0, FdeConfig::make(beta, h, 1.0));
    double worst = 0.0;
    for (std::size_t j = 1; j < traj.states.size(); ++j) {
        const double exact = mlf(-std::pow(traj.times[j], beta), beta);
        worst = std::max(worst, std::fabs(traj.states[j](0, 0) - exact) / std::fabs(exact));
    }
    return worst;
}

void eigenfunction_convergence(Check& c) {
    for (double beta : {0.4, 0.7, 1.0}) {
        const double err10 = eigen_error(beta, std::pow(2.0, -10));
        c.require(err10 < 1e-2,
                  "grid error at h=2^-10, beta=" + fmt(beta) + ": " + fmt(err10));
        double prev = -1.0;
        for (int p = 6; p <= 11; ++p) {
            const double err = eigen_error(beta, std::pow(2.0, -p));
            if (prev >= 0.0) {
                c.require(err < prev, "error not decreasing at beta=" + fmt(beta) +
                                          " h=2^-" + std::to_string(p));
                c.require(prev / err >= 1.2, "refinement ratio " + fmt(prev / err) +
                                                 " < 1.2 at beta=" + fmt(beta) + " h=2^-" +
                                                 std::to_string(p));
            }
            prev = err;
        }
    }
}

// --- 5: bound monotonicity and curve shape over beta -----------------------

void bound_curve(Check& c) {
    const std::filesystem::path dir =
        std::filesystem::temp_directory_path() / "frond_acceptance_scan";
    std::filesystem::create_directories(dir);
    const std::string csv_path = (dir / "scan.csv").string();

    json cfg;
    cfg["subcommand"] = "mlf";
    cfg["bound_scan_L"] = {0.3, 0.5, 0.7};
    cfg["bound_scan_T"] = 10.0;
    cfg["betas"] = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    cfg["csv_path"] = csv_path;
    const json doc = run_to_json(cfg);

    for (const auto& inc : doc.at("result").at("strictly_increasing")) {
        c.require(inc.get<bool>(), "bound column not strictly increasing");
    }

    // Parse the emitted CSV back and verify the curve shape: increasing with
    // the steepest rise at the beta = 1 end.
    std::ifstream in(csv_path);
    c.require(static_cast<bool>(in), "scan CSV missing");
    std::string line;
    std::getline(in, line);  // header
    std::vector<std::vector<double>> cols(4);
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string cell;
        for (int k = 0; k < 4 && std::getline(ls, cell, ','); ++k) {
            cols[static_cast<std::size_t>(k)].push_back(std::stod(cell));
        }
    }
    c.require(cols[0].size() == 10, "scan CSV row count");
    for (int l = 1; l <= 3; ++l) {
        const auto& b = cols[static_cast<std::size_t>(l)];
        bool increasing = true;
        for (std::size_t i = 1; i < b.size(); ++i) {
            increasing = increasing && b[i] > b[i - 1];
        }
        c.require(increasing, "CSV bound column " + std::to_string(l) + " not increasing");
        if (b.size() >= 3) {
            const double first_step = b[1] - b[0];
            const double last_step = b[b.size() - 1] - b[b.size() - 2];
            c.require(last_step > first_step,
                      "curve does not steepen toward beta=1 in column " + std::to_string(l));
        }
    }
    std::filesystem::remove_all(dir);
}

// --- 6 and 7: operator identities on a shared instance pool ----------------

struct Instance {
    Graph graph;
    Matrix features;
    AttentionParams params;
};

std::vector<Instance> instance_pool() {
    std::vector<Instance> pool;
    pool.reserve(100);
    for (std::uint64_t i = 0; i < 100; ++i) {
        const int n = 10 + static_cast<int>((i * 7) % 41);  // sizes 10..50
        Graph g = [&]() {
            SynthGraphParams params;
            switch (i % 3) {
                case 0:
                    return synth_graph("ring", n, params, i);
                case 1:
                    params.p = 0.15;
                    return synth_graph("er", n, params, i);
                default:
                    params.blocks = 2;
                    params.p_in = 0.25;
                    params.p_out = 0.05;
                    return synth_graph("sbm", n, params, i);
            }
        }();
        const int d = 3 + static_cast<int>(i % 4);
        Matrix x = gaussian_features(g.n_nodes(), d, 1.0, 1000 + i);
        AttentionParams p = seeded_attention_params(d, d, 2000 + i);
        pool.push_back({std::move(g), std::move(x), std::move(p)});
    }
    return pool;
}

void graphbel_conservation(Check& c) {
    int idx = 0;
    for (const auto& inst : instance_pool()) {
        const SparseMatrix op = detail::graphbel_operator(inst.graph, inst.features, inst.params);
        Eigen::VectorXd row_sums = Eigen::VectorXd::Zero(inst.graph.n_nodes());
        for (int col = 0; col < op.outerSize(); ++col) {
            for (SparseMatrix::InnerIterator it(op, col); it; ++it) {
                row_sums(it.row()) += it.value();
            }
        }
        const double worst = row_sums.cwiseAbs().maxCoeff();
        c.require(worst <= 1e-12,
                  "row sum " + fmt(worst) + " on instance " + std::to_string(idx));
        ++idx;
    }
}

void attention_stochasticity(Check& c) {
    int idx = 0;
    for (const auto& inst : instance_pool()) {
        const SparseMatrix a = attention_matrix(inst.graph, inst.features, inst.params);
        Eigen::VectorXd row_sums = Eigen::VectorXd::Zero(inst.graph.n_nodes());
        for (int col = 0; col < a.outerSize(); ++col) {
            for (SparseMatrix::InnerIterator it(a, col); it; ++it) {
                row_sums(it.row()) += it.value();
            }
        }
        const auto nbrs = inst.graph.neighbor_lists();
        for (int i = 0; i < inst.graph.n_nodes(); ++i) {
            if (!nbrs[static_cast<std::size_t>(i)].empty()) {
                c.require(std::fabs(row_sums(i) - 1.0) <= 1e-12,
                          "row " + std::to_string(i) + " of instance " + std::to_string(idx) +
                              " sums to " + fmt(row_sums(i)));
            }
        }
        ++idx;
    }
}

// --- 8: deviation ordering across beta on the frozen fixture ---------------

json frozen_sweep_config() {
    json cfg;
    cfg["subcommand"] = "sweep";
    cfg["seed"] = 7;
    cfg["synth_graph_kind"] = "sbm";
    cfg["synth_graph_n"] = 50;
    cfg["synth_graph_blocks"] = 2;
    cfg["synth_graph_p_in"] = 0.2;
    cfg["synth_graph_p_out"] = 0.02;
    cfg["synth_features_dim"] = 8;
    cfg["dynamics_kind"] = "grand";
    cfg["dynamics_attention_mode"] = "static";
    cfg["dynamics_target_lipschitz"] = 0.8;
    cfg["fde_h"] = 0.1;
    cfg["fde_horizon"] = 10.0;
    cfg["perturbation_kind"] = "feature";
    cfg["perturbation_epsilon"] = 0.1;
    cfg["betas"] = {0.2, 0.4, 0.6, 0.8, 1.0};
    cfg["n_seeds"] = 20;
    return cfg;
}

void deviation_ordering(Check& c) {
    const json doc = run_to_json(frozen_sweep_config());
    const auto& r = doc.at("result");
    c.require(r.at("failures").empty(), "sweep reported per-beta failures");
    const auto& rows = r.at("rows");
    c.require(rows.size() == 5, "expected 5 sweep rows");
    if (rows.size() != 5) {
        return;
    }
    const double spearman_val = r.at("spearman_beta_vs_median_sup").is_null()
                                    ? -2.0
                                    : r.at("spearman_beta_vs_median_sup").get<double>();
    c.require(spearman_val >= 0.8,
              "Spearman(beta, median sup) = " + fmt(spearman_val) + " < 0.8");
    const double low = rows.front().at("median_sup_deviation").get<double>();
    const double high = rows.back().at("median_sup_deviation").get<double>();
    c.require(low < high, "median sup at beta=0.2 (" + fmt(low) +
                              ") not below beta=1.0 (" + fmt(high) + ")");
}

// --- 9: end-to-end reproducibility -----------------------------------------

void reproducibility(Check& c) {
    const std::filesystem::path dir =
        std::filesystem::temp_directory_path() / "frond_acceptance_repro";
    std::filesystem::create_directories(dir);

    json cfg = frozen_sweep_config();
    cfg["betas"] = {0.25, 0.5, 1.0};
    cfg["n_seeds"] = 5;
    cfg["synth_graph_n"] = 30;
    cfg["csv_path"] = (dir / "sweep.csv").string();
    cfg["output_path"] = (dir / "sweep.json").string();

    auto read = [](const std::filesystem::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string((std::istreambuf_iterator<char>(in)),
                           std::istreambuf_iterator<char>());
    };

    c.require(run(cfg) == 0, "first run failed");
    const std::string json_a = read(dir / "sweep.json");
    const std::string csv_a = read(dir / "sweep.csv");
    c.require(run(cfg) == 0, "second run failed");
    const std::string json_b = read(dir / "sweep.json");
    const std::string csv_b = read(dir / "sweep.csv");

    c.require(csv_a == csv_b, "CSV payloads differ between runs");
    json a = json::parse(json_a);
    json b = json::parse(json_b);
    a.erase("wall_clock_seconds");
    b.erase("wall_clock_seconds");
    c.require(a.dump() == b.dump(), "JSON payloads differ beyond the timing field");
    std::filesystem::remove_all(dir);
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double max_seconds;  // runtime budgets are part of the gate
        std::function<void(Check&)> body;
    };
    const std::vector<Criterion> criteria = {
        {1, "Mittag-Leffler oracle (exp reduction, erfc identity)", 1.0, mlf_oracles},
        {2, "coefficient positivity and telescoping identities", 5.0, coefficient_identities},
        {3, "beta=1 reduction to forward Euler on a 10-node system", 1.0, euler_reduction},
        {4, "eigenfunction convergence under grid refinement", 30.0, eigenfunction_convergence},
        {5, "bound factor monotone and steepening over beta", 1.0, bound_curve},
        {6, "graphbel operator conservation on 100 instances", 10.0, graphbel_conservation},
        {7, "attention row stochasticity on 100 instances", 10.0, attention_stochasticity},
        {8, "deviation ordering across beta on the frozen fixture", 120.0, deviation_ordering},
        {9, "end-to-end sweep reproducibility", 120.0, reproducibility},
    };

    int failed = 0;
    for (const auto& criterion : criteria) {
        Check check;
        const auto start = std::chrono::steady_clock::now();
        try {
            criterion.body(check);
        } catch (const std::exception& e) {
            check.failures.push_back(std::string("exception: ") + e.what());
        }
        const double seconds = std::chrono::duration_cast<std::chrono::duration<double>>(
                                   std::chrono::steady_clock::now() - start)
                                   .count();
        check.require(seconds < criterion.max_seconds,
                      "runtime " + fmt(seconds) + " s exceeded the " +
                          fmt(criterion.max_seconds) + " s budget");
        if (check.failures.empty()) {
            std::printf("[PASS] %d %s (%.2f s)\n", criterion.id, criterion.name, seconds);
        } else {
            ++failed;
            std::printf("[FAIL] %d %s (%.2f s)\n", criterion.id, criterion.name, seconds);
            for (const auto& f : check.failures) {
                std::printf("       - %s\n", f.c_str());
            }
        }
        std::fflush(stdout);
    }
    if (failed > 0) {
        std::printf("%d of %zu acceptance criteria failed\n", failed, criteria.size());
        return 1;
    }
    std::printf("all %zu acceptance criteria passed\n", criteria.size());
    return 0;
}
