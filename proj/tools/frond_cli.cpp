// Command-line front end.  Every option mirrors one flat config key; a config
// file supplies the base document and flags override it.

#include <CLI11.hpp>

#include <fstream>
#include <string>
#include <vector>

#include "frond/runner.hpp"

namespace {

using frond::json;

json load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw frond::io_error("cli_runner", "cannot open config file: " + path);
    }
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw frond::parse_error("cli_runner",
                                 "config file " + path + " is not valid JSON: " + e.what());
    }
}

// One CLI option bound to one config key.  Bound holders are only filled once
// parsing finishes, so the overrides are collected afterwards, and only for
// flags that were actually used.
struct Overrides {
    std::vector<std::function<void(json&)>> finalizers;

    template <typename T>
    void bind(CLI::App* cmd, const std::string& flag, const std::string& key,
              const std::string& help) {
        auto holder = std::make_shared<T>();
        const CLI::Option* opt = cmd->add_option(flag, *holder, help);
        finalizers.push_back([opt, holder, key](json& cfg) {
            if (opt->count() > 0) {
                cfg[key] = *holder;
            }
        });
    }

    void bind_flag(CLI::App* cmd, const std::string& flag, const std::string& key,
                   const std::string& help) {
        auto holder = std::make_shared<bool>(false);
        const CLI::Option* opt = cmd->add_flag(flag, *holder, help);
        finalizers.push_back([opt, holder, key](json& cfg) {
            if (opt->count() > 0) {
                cfg[key] = *holder;
            }
        });
    }

    void apply(json& cfg) const {
        for (const auto& f : finalizers) {
            f(cfg);
        }
    }
};

void add_common(CLI::App* cmd, Overrides& ov, std::string& config_path) {
    cmd->add_option("--config", config_path, "JSON config file; flags override its keys");
    ov.bind<std::uint64_t>(cmd, "--seed", "seed", "root seed; module seeds derive from it");
    ov.bind<std::string>(cmd, "--output", "output_path", "result JSON path (default: stdout)");
    ov.bind<std::string>(cmd, "--log-level", "log_level", "quiet|warn|info|debug");
}

void add_scene(CLI::App* cmd, Overrides& ov) {
    ov.bind<std::string>(cmd, "--graph", "graph_path", "edge-list file");
    ov.bind<std::string>(cmd, "--synth-graph", "synth_graph_kind", "ring|er|sbm");
    ov.bind<int>(cmd, "--synth-n", "synth_graph_n", "synthetic graph size");
    ov.bind<double>(cmd, "--synth-p", "synth_graph_p", "er edge probability");
    ov.bind<int>(cmd, "--synth-blocks", "synth_graph_blocks", "sbm block count");
    ov.bind<double>(cmd, "--synth-p-in", "synth_graph_p_in", "sbm within-block probability");
    ov.bind<double>(cmd, "--synth-p-out", "synth_graph_p_out", "sbm between-block probability");
    ov.bind<std::string>(cmd, "--features", "features_path", "feature CSV file");
    ov.bind<int>(cmd, "--synth-features-dim", "synth_features_dim",
                 "synthesize Gaussian features of this dimension");
    ov.bind<double>(cmd, "--synth-features-scale", "synth_features_scale",
                    "feature synthesis scale");
    ov.bind<std::string>(cmd, "--dynamics", "dynamics_kind", "grand|graphbel|graphcon");
    ov.bind<std::string>(cmd, "--attention-mode", "dynamics_attention_mode", "static|dynamic");
    ov.bind<int>(cmd, "--d-k", "dynamics_d_k", "attention key dimension (default: feature dim)");
    ov.bind<double>(cmd, "--gamma", "dynamics_gamma", "graphcon restoring coefficient");
    ov.bind<double>(cmd, "--damping", "dynamics_alpha", "graphcon damping");
    ov.bind<std::string>(cmd, "--activation", "dynamics_activation", "tanh|relu");
    ov.bind<double>(cmd, "--rhs-scale", "dynamics_rhs_scale", "uniform scaling of F");
    ov.bind<double>(cmd, "--target-lipschitz", "dynamics_target_lipschitz",
                    "rescale static grand to this spectral norm");
    ov.bind_flag(cmd, "--graphcon-attention", "dynamics_graphcon_attention",
                 "use attention for the graphcon coupling hop");
    ov.bind<double>(cmd, "--step", "fde_h", "solver step size");
    ov.bind<double>(cmd, "--horizon", "fde_horizon", "integration horizon T");
}

void add_perturbation(CLI::App* cmd, Overrides& ov) {
    ov.bind<std::string>(cmd, "--perturbation", "perturbation_kind", "feature|topology");
    ov.bind<double>(cmd, "--epsilon", "perturbation_epsilon",
                    "Frobenius norm of the feature perturbation");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fractional-order graph dynamics engine"};
    app.require_subcommand(1);

    std::string config_path;
    Overrides ov;

    auto* mlf = app.add_subcommand("mlf", "evaluate the Mittag-Leffler function or bound scan");
    add_common(mlf, ov, config_path);
    ov.bind<double>(mlf, "--z", "mlf_z", "argument for a single evaluation");
    ov.bind<double>(mlf, "--beta", "mlf_beta", "series order");
    ov.bind<double>(mlf, "--alpha", "mlf_alpha", "second parameter");
    ov.bind<std::vector<double>>(mlf, "--scan-L", "bound_scan_L",
                                 "Lipschitz constants for a bound scan");
    ov.bind<double>(mlf, "--scan-T", "bound_scan_T", "horizon for the bound scan");
    ov.bind<std::vector<double>>(mlf, "--betas", "betas", "beta grid for the bound scan");
    ov.bind<std::string>(mlf, "--csv", "csv_path", "write the scan table as CSV");

    auto* solve = app.add_subcommand("solve", "integrate one system and store the trajectory");
    add_common(solve, ov, config_path);
    add_scene(solve, ov);
    ov.bind<double>(solve, "--beta", "fde_beta", "fractional order");
    ov.bind<std::string>(solve, "--trajectory", "trajectory_path", "columnar trajectory path");

    auto* deviation = app.add_subcommand("deviation", "one clean/perturbed twin experiment");
    add_common(deviation, ov, config_path);
    add_scene(deviation, ov);
    add_perturbation(deviation, ov);
    ov.bind<double>(deviation, "--beta", "fde_beta", "fractional order");

    auto* sweep = app.add_subcommand("sweep", "deviation experiments across a beta grid");
    add_common(sweep, ov, config_path);
    add_scene(sweep, ov);
    add_perturbation(sweep, ov);
    ov.bind<std::vector<double>>(sweep, "--betas", "betas", "beta grid");
    ov.bind<int>(sweep, "--n-seeds", "n_seeds", "perturbation seeds per beta");
    ov.bind<std::string>(sweep, "--csv", "csv_path", "write the sweep table as CSV");

    CLI11_PARSE(app, argc, argv);

    try {
        json cfg = config_path.empty() ? json::object() : load_config_file(config_path);
        ov.apply(cfg);
        cfg["subcommand"] = app.get_subcommands().front()->get_name();
        return frond::run(std::move(cfg));
    } catch (const frond::error& e) {
        json record;
        record["error"]["module"] = e.module();
        record["error"]["exit_code"] = frond::exit_code_for(e);
        record["error"]["message"] = e.what();
        std::cerr << record.dump() << std::endl;
        return frond::exit_code_for(e);
    }
}
