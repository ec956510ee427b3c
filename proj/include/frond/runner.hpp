#pragma once

// Batch front door.  A run is described by one flat JSON document; CLI flags
// override keys one for one.  Results are JSON (plus an optional CSV of the
// sweep/scan table), written atomically, and embed the fully resolved config
// so every run is self-describing.  Identical config and seeds produce
// identical payloads up to the wall-clock field.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "frond/dynamics.hpp"
#include "frond/errors.hpp"
#include "frond/fde.hpp"
#include "frond/graph.hpp"
#include "frond/io.hpp"
#include "frond/log.hpp"
#include "frond/robustness.hpp"
#include "frond/special.hpp"

namespace frond {

using json = nlohmann::json;

inline constexpr const char* kArtifactVersion = "1.0.0";

namespace detail {

template <typename T>
T get_or(const json& cfg, const std::string& key, T fallback) {
    if (!cfg.contains(key)) {
        return fallback;
    }
    try {
        return cfg.at(key).get<T>();
    } catch (const json::exception&) {
        throw config_error("cli_runner", "config key `" + key + "` has the wrong type");
    }
}

template <typename T>
T require(const json& cfg, const std::string& key) {
    if (!cfg.contains(key)) {
        throw config_error("cli_runner", "missing config key `" + key + "`");
    }
    try {
        return cfg.at(key).get<T>();
    } catch (const json::exception&) {
        throw config_error("cli_runner", "config key `" + key + "` has the wrong type");
    }
}

inline DynamicsKind parse_kind(const std::string& s) {
    if (s == "grand") return DynamicsKind::Grand;
    if (s == "graphbel") return DynamicsKind::GraphBel;
    if (s == "graphcon") return DynamicsKind::GraphCon;
    throw config_error("cli_runner", "unknown dynamics_kind: " + s);
}

inline AttentionMode parse_mode(const std::string& s) {
    if (s == "static") return AttentionMode::Static;
    if (s == "dynamic") return AttentionMode::Dynamic;
    throw config_error("cli_runner", "unknown dynamics_attention_mode: " + s);
}

inline Activation parse_activation(const std::string& s) {
    if (s == "tanh") return Activation::Tanh;
    if (s == "relu") return Activation::Relu;
    throw config_error("cli_runner", "unknown dynamics_activation: " + s);
}

inline PerturbationKind parse_pert_kind(const std::string& s) {
    if (s == "feature") return PerturbationKind::Feature;
    if (s == "topology") return PerturbationKind::Topology;
    throw config_error("cli_runner", "unknown perturbation_kind: " + s);
}

}  // namespace detail

// Fills defaults so the echoed config is complete, and validates what can be
// validated without touching the filesystem.
inline json resolve_config(json cfg) {
    if (!cfg.is_object()) {
        throw config_error("cli_runner", "config must be a JSON object");
    }
    const std::string sub = detail::require<std::string>(cfg, "subcommand");
    if (sub != "mlf" && sub != "solve" && sub != "deviation" && sub != "sweep") {
        throw config_error("cli_runner", "unknown subcommand: " + sub);
    }
    if (!cfg.contains("seed")) cfg["seed"] = 0;
    if (!cfg.contains("log_level")) cfg["log_level"] = "warn";

    if (sub != "mlf") {
        if (!cfg.contains("graph_path") && !cfg.contains("synth_graph_kind")) {
            throw config_error("cli_runner", "need graph_path or synth_graph_kind");
        }
        if (!cfg.contains("features_path") && !cfg.contains("synth_features_dim")) {
            throw config_error("cli_runner", "need features_path or synth_features_dim");
        }
        if (cfg.contains("synth_features_dim") && !cfg.contains("synth_features_scale")) {
            cfg["synth_features_scale"] = 1.0;
        }
        if (!cfg.contains("dynamics_kind")) cfg["dynamics_kind"] = "grand";
        if (!cfg.contains("dynamics_attention_mode")) cfg["dynamics_attention_mode"] = "static";
        if (!cfg.contains("dynamics_activation")) cfg["dynamics_activation"] = "tanh";
        if (!cfg.contains("dynamics_gamma")) cfg["dynamics_gamma"] = 0.0;
        if (!cfg.contains("dynamics_alpha")) cfg["dynamics_alpha"] = 0.0;
        if (!cfg.contains("dynamics_rhs_scale")) cfg["dynamics_rhs_scale"] = 1.0;
        if (!cfg.contains("dynamics_graphcon_attention")) {
            cfg["dynamics_graphcon_attention"] = false;
        }
        detail::require<double>(cfg, "fde_h");
        detail::require<double>(cfg, "fde_horizon");
    }
    if (sub == "solve" || sub == "deviation") {
        const double beta = detail::require<double>(cfg, "fde_beta");
        if (!(beta > 0.0) || beta > 1.0) {
            throw config_error("cli_runner", "fde_beta must be in (0, 1]");
        }
    }
    if (sub == "deviation" || sub == "sweep") {
        detail::require<std::string>(cfg, "perturbation_kind");
    }
    if (sub == "sweep") {
        const auto betas = detail::require<std::vector<double>>(cfg, "betas");
        for (double b : betas) {
            if (!(b > 0.0) || b > 1.0) {
                throw config_error("cli_runner", "sweep betas must lie in (0, 1]");
            }
        }
        if (detail::get_or<int>(cfg, "n_seeds", 1) < 1) {
            throw config_error("cli_runner", "n_seeds must be >= 1");
        }
        if (!cfg.contains("n_seeds")) cfg["n_seeds"] = 1;
    }
    return cfg;
}

struct Scene {
    Graph graph;
    Matrix features;
    Matrix state0;  // features, or the stacked [Y; X] for graphcon
    DynamicsSpec spec;
};

inline Scene build_scene(json& cfg) {
    const std::uint64_t root_seed = detail::get_or<std::uint64_t>(cfg, "seed", 0);

    Graph graph = [&]() {
        if (cfg.contains("graph_path")) {
            return load_graph(detail::require<std::string>(cfg, "graph_path"));
        }
        SynthGraphParams params;
        params.p = detail::get_or<double>(cfg, "synth_graph_p", 0.0);
        params.blocks = detail::get_or<int>(cfg, "synth_graph_blocks", 2);
        params.p_in = detail::get_or<double>(cfg, "synth_graph_p_in", 0.0);
        params.p_out = detail::get_or<double>(cfg, "synth_graph_p_out", 0.0);
        return synth_graph(detail::require<std::string>(cfg, "synth_graph_kind"),
                           detail::require<int>(cfg, "synth_graph_n"), params,
                           derive_seed(root_seed, 0));
    }();

    Matrix features = cfg.contains("features_path")
                          ? load_features(detail::require<std::string>(cfg, "features_path"),
                                          graph.n_nodes())
                          : gaussian_features(graph.n_nodes(),
                                              detail::require<int>(cfg, "synth_features_dim"),
                                              detail::get_or<double>(cfg, "synth_features_scale", 1.0),
                                              derive_seed(root_seed, 1));
    const int d = static_cast<int>(features.cols());

    DynamicsSpec spec;
    spec.kind = detail::parse_kind(detail::require<std::string>(cfg, "dynamics_kind"));
    spec.attention_mode =
        detail::parse_mode(detail::require<std::string>(cfg, "dynamics_attention_mode"));
    spec.activation =
        detail::parse_activation(detail::require<std::string>(cfg, "dynamics_activation"));
    spec.gamma = detail::get_or<double>(cfg, "dynamics_gamma", 0.0);
    spec.alpha = detail::get_or<double>(cfg, "dynamics_alpha", 0.0);
    spec.rhs_scale = detail::get_or<double>(cfg, "dynamics_rhs_scale", 1.0);
    spec.graphcon_attention_coupling =
        detail::get_or<bool>(cfg, "dynamics_graphcon_attention", false);

    const int d_k = detail::get_or<int>(cfg, "dynamics_d_k", d);
    if (d_k < 1) {
        throw config_error("cli_runner", "dynamics_d_k must be >= 1");
    }
    cfg["dynamics_d_k"] = d_k;
    spec.attention = seeded_attention_params(d, d_k, derive_seed(root_seed, 2));
    if (spec.kind == DynamicsKind::GraphCon) {
        spec.coupling_weight = seeded_weight(d, d, derive_seed(root_seed, 3));
    }

    if (cfg.contains("dynamics_target_lipschitz")) {
        const double target = detail::require<double>(cfg, "dynamics_target_lipschitz");
        if (!(target > 0.0)) {
            throw config_error("cli_runner", "dynamics_target_lipschitz must be positive");
        }
        if (spec.kind != DynamicsKind::Grand || spec.attention_mode != AttentionMode::Static) {
            throw config_error("cli_runner",
                               "dynamics_target_lipschitz requires static-attention grand");
        }
        SparseMatrix a = attention_matrix(graph, features, spec.attention);
        SparseMatrix eye(a.rows(), a.cols());
        eye.setIdentity();
        const double sigma = spectral_norm(SparseMatrix(a - eye));
        if (sigma == 0.0) {
            throw numeric_error("cli_runner",
                                "cannot rescale a zero operator to the target Lipschitz constant");
        }
        spec.rhs_scale = target / sigma;
        cfg["dynamics_rhs_scale"] = spec.rhs_scale;
    }

    Matrix state0 = features;
    if (spec.kind == DynamicsKind::GraphCon) {
        state0 = stack_graphcon_state(Matrix::Zero(graph.n_nodes(), d), features);
    }
    return Scene{std::move(graph), std::move(features), std::move(state0), std::move(spec)};
}

inline PerturbationSpec parse_perturbation(const json& cfg, std::uint64_t root_seed) {
    PerturbationSpec pert;
    pert.kind = detail::parse_pert_kind(detail::require<std::string>(cfg, "perturbation_kind"));
    pert.seed = derive_seed(root_seed, 4);
    if (pert.kind == PerturbationKind::Feature) {
        pert.epsilon = detail::require<double>(cfg, "perturbation_epsilon");
    } else {
        const auto edits = detail::require<std::vector<std::vector<json>>>(cfg, "perturbation_edits");
        for (const auto& e : edits) {
            if (e.size() != 3) {
                throw config_error("cli_runner",
                                   "perturbation_edits entries must be [i, j, new_weight]");
            }
            pert.edits.push_back({e[0].get<int>(), e[1].get<int>(), e[2].get<double>()});
        }
    }
    return pert;
}

namespace detail {

inline json run_mlf(const json& cfg) {
    json result;
    const bool single = cfg.contains("mlf_z");
    const bool scan = cfg.contains("bound_scan_L");
    if (single == scan) {
        throw config_error("cli_runner", "mlf needs exactly one of mlf_z or bound_scan_L");
    }
    if (single) {
        MlfParams params;
        params.beta = get_or<double>(cfg, "mlf_beta", 1.0);
        params.alpha = get_or<double>(cfg, "mlf_alpha", 1.0);
        result["value"] = mlf(require<double>(cfg, "mlf_z"), params);
        return result;
    }
    const auto ls = require<std::vector<double>>(cfg, "bound_scan_L");
    const double T = require<double>(cfg, "bound_scan_T");
    const auto betas = require<std::vector<double>>(cfg, "betas");
    if (ls.empty()) {
        throw config_error("cli_runner", "bound_scan_L must be nonempty");
    }
    json rows = json::array();
    json increasing = json::array();
    std::vector<BoundScan> scans;
    for (double L : ls) {
        scans.push_back(bound_monotonicity_scan(L, T, betas));
        increasing.push_back(scans.back().strictly_increasing);
    }
    for (std::size_t r = 0; r < betas.size(); ++r) {
        json row;
        row["beta"] = betas[r];
        json bounds = json::array();
        for (const auto& s : scans) {
            bounds.push_back(s.rows[r].bound);
        }
        row["bounds"] = bounds;
        rows.push_back(row);
    }
    result["bound_scan_L"] = ls;
    result["bound_scan_T"] = T;
    result["rows"] = rows;
    result["strictly_increasing"] = increasing;
    return result;
}

inline std::string mlf_scan_csv(const json& result) {
    std::string csv = "beta";
    for (const auto& L : result.at("bound_scan_L")) {
        char label[32];
        std::snprintf(label, sizeof(label), "%g", L.get<double>());
        csv += ",bound_L" + std::string(label);
    }
    csv += '\n';
    for (const auto& row : result.at("rows")) {
        csv += fmt17(row.at("beta").get<double>());
        for (const auto& b : row.at("bounds")) {
            csv += ',' + fmt17(b.get<double>());
        }
        csv += '\n';
    }
    return csv;
}

inline json scene_summary(const Scene& scene) {
    json s;
    s["n_nodes"] = scene.graph.n_nodes();
    s["n_edges"] = scene.graph.n_edges();
    s["feature_dim"] = scene.features.cols();
    return s;
}

inline json report_to_json(const DeviationReport& rep) {
    json r;
    r["beta"] = rep.beta;
    r["sup_deviation"] = rep.sup_deviation;
    r["terminal_deviation"] = rep.terminal_deviation;
    r["epsilon_effective"] = rep.epsilon_effective;
    r["lipschitz"] = rep.lipschitz;
    r["lipschitz_exact"] = rep.lipschitz_exact;
    r["bound_factor"] = rep.bound_factor;
    r["fitted_c"] = rep.fitted_c;
    return r;
}

inline json run_solve(json& cfg) {
    Scene scene = build_scene(cfg);
    const FdeConfig fde = FdeConfig::make(require<double>(cfg, "fde_beta"),
                                          require<double>(cfg, "fde_h"),
                                          require<double>(cfg, "fde_horizon"));
    const RhsFn rhs = make_rhs(scene.graph, scene.spec, scene.state0);
    const Trajectory traj = solve_fde(rhs, scene.state0, fde);

    std::string traj_path = get_or<std::string>(cfg, "trajectory_path", "");
    if (traj_path.empty() && cfg.contains("output_path")) {
        traj_path = require<std::string>(cfg, "output_path") + ".traj";
        cfg["trajectory_path"] = traj_path;
    }
    if (!traj_path.empty()) {
        save_trajectory(traj_path, traj);
    }

    json result;
    result["scene"] = scene_summary(scene);
    result["beta"] = fde.beta;
    result["n_steps"] = fde.n_steps;
    result["state_rows"] = scene.state0.rows();
    result["state_cols"] = scene.state0.cols();
    result["terminal_frobenius_norm"] = traj.terminal().norm();
    if (!traj_path.empty()) {
        result["trajectory_path"] = traj_path;
    }
    return result;
}

inline json run_deviation(json& cfg) {
    Scene scene = build_scene(cfg);
    const FdeConfig fde = FdeConfig::make(require<double>(cfg, "fde_beta"),
                                          require<double>(cfg, "fde_h"),
                                          require<double>(cfg, "fde_horizon"));
    const PerturbationSpec pert =
        parse_perturbation(cfg, get_or<std::uint64_t>(cfg, "seed", 0));
    const DeviationReport rep =
        deviation_experiment(scene.graph, scene.spec, scene.state0, pert, fde);
    json result = report_to_json(rep);
    result["scene"] = scene_summary(scene);
    return result;
}

inline json run_sweep(json& cfg, std::string* csv_out) {
    Scene scene = build_scene(cfg);
    const FdeConfig cfg_template = FdeConfig::make(1.0, require<double>(cfg, "fde_h"),
                                                   require<double>(cfg, "fde_horizon"));
    const PerturbationSpec pert =
        parse_perturbation(cfg, get_or<std::uint64_t>(cfg, "seed", 0));
    const auto betas = require<std::vector<double>>(cfg, "betas");
    const int n_seeds = get_or<int>(cfg, "n_seeds", 1);

    const BetaSweepResult sweep =
        beta_sweep(scene.graph, scene.spec, scene.state0, pert, cfg_template, betas, n_seeds);

    json rows = json::array();
    std::string csv = "beta,median_sup_deviation,median_terminal_deviation,bound_factor\n";
    for (const auto& row : sweep.rows) {
        json r;
        r["beta"] = row.beta;
        r["median_sup_deviation"] = row.median_sup_deviation;
        r["median_terminal_deviation"] = row.median_terminal_deviation;
        r["bound_factor"] = row.bound_factor;
        rows.push_back(r);
        csv += fmt17(row.beta) + ',' + fmt17(row.median_sup_deviation) + ',' +
               fmt17(row.median_terminal_deviation) + ',' + fmt17(row.bound_factor) + '\n';
    }
    json result;
    result["scene"] = scene_summary(scene);
    result["rows"] = rows;
    result["n_seeds"] = n_seeds;
    if (sweep.spearman_beta_sup.has_value()) {
        result["spearman_beta_vs_median_sup"] = *sweep.spearman_beta_sup;
    } else {
        result["spearman_beta_vs_median_sup"] = nullptr;
    }
    result["failures"] = sweep.failures;
    if (csv_out != nullptr) {
        *csv_out = csv;
    }
    return result;
}

}  // namespace detail

/// Execute a run and return the full result document.  File side effects
/// (trajectory, CSV) happen here; the returned document is what run() writes
/// to output_path.
inline json run_to_json(json user_config) {
    const auto start = std::chrono::steady_clock::now();
    json cfg = resolve_config(std::move(user_config));
    init_log_level(cfg.at("log_level").get<std::string>());
    const std::string sub = cfg.at("subcommand").get<std::string>();

    std::string csv;
    json result;
    if (sub == "mlf") {
        result = detail::run_mlf(cfg);
        if (result.contains("rows")) {
            csv = detail::mlf_scan_csv(result);
        }
    } else if (sub == "solve") {
        result = detail::run_solve(cfg);
    } else if (sub == "deviation") {
        result = detail::run_deviation(cfg);
    } else {
        result = detail::run_sweep(cfg, &csv);
    }

    if (cfg.contains("csv_path")) {
        if (csv.empty()) {
            throw config_error("cli_runner", "csv_path is only meaningful for sweep or mlf scan");
        }
        atomic_write_file(cfg.at("csv_path").get<std::string>(), csv);
        log_info("wrote " + cfg.at("csv_path").get<std::string>());
    }

    const auto stop = std::chrono::steady_clock::now();
    json doc;
    doc["artifact_version"] = kArtifactVersion;
    doc["subcommand"] = sub;
    doc["config"] = cfg;
    doc["result"] = result;
    doc["wall_clock_seconds"] =
        std::chrono::duration_cast<std::chrono::duration<double>>(stop - start).count();
    return doc;
}

inline int exit_code_for(const error& e) {
    if (dynamic_cast<const parse_error*>(&e)) return 2;
    if (dynamic_cast<const numeric_error*>(&e)) return 3;
    if (dynamic_cast<const io_error*>(&e)) return 4;
    return 1;
}

/// Execute a run, write the result document (output_path or stdout), and map
/// failures to exit codes 1..4 with a machine-readable error record on stderr.
inline int run(json user_config) {
    try {
        json doc = run_to_json(std::move(user_config));
        const json& cfg = doc.at("config");
        if (cfg.contains("output_path")) {
            atomic_write_file(cfg.at("output_path").get<std::string>(), doc.dump(2) + "\n");
            log_info("wrote " + cfg.at("output_path").get<std::string>());
        } else {
            std::cout << doc.dump(2) << std::endl;
        }
        return 0;
    } catch (const error& e) {
        const int code = exit_code_for(e);
        json record;
        record["error"]["module"] = e.module();
        record["error"]["exit_code"] = code;
        record["error"]["message"] = e.what();
        std::cerr << record.dump() << std::endl;
        return code;
    } catch (const json::exception& e) {
        json record;
        record["error"]["module"] = "cli_runner";
        record["error"]["exit_code"] = 1;
        record["error"]["message"] = std::string("config error: ") + e.what();
        std::cerr << record.dump() << std::endl;
        return 1;
    } catch (const std::exception& e) {
        json record;
        record["error"]["module"] = "cli_runner";
        record["error"]["exit_code"] = 1;
        record["error"]["message"] = std::string("internal error: ") + e.what();
        std::cerr << record.dump() << std::endl;
        return 1;
    }
}

}  // namespace frond
