// finset: simulate finite-hypothesis LTI identification problems, run the
// MLE / OLS-projection estimators, evaluate sample-complexity bound
// conditions, and reproduce the built-in benchmark experiments.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "finset/finset.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<long> trials;
    std::string out_path;
    std::string format = "csv";
    unsigned threads = 0;
};

finset::ExperimentConfig load_config(const CommonOpts& opts) {
    std::ifstream in(opts.config_path);
    if (!in) {
        throw finset::ConfigInvalid("config: cannot open '" + opts.config_path + "'");
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw finset::ConfigInvalid("config: JSON parse error: " + std::string(e.what()));
    }
    finset::ExperimentConfig cfg = finset::parse_config(j);
    finset::apply_env_seed_override(cfg);
    if (opts.seed) cfg.seed = *opts.seed;
    if (opts.trials) cfg.n_trials = *opts.trials;
    cfg.validate();
    return cfg;
}

void write_output(const CommonOpts& opts, const std::string& content) {
    if (opts.out_path.empty()) {
        std::cout << content;
        return;
    }
    std::ofstream out(opts.out_path, std::ios::binary);
    if (!out) {
        throw finset::ConfigInvalid("out: cannot open '" + opts.out_path + "' for writing");
    }
    out << content;
}

int cmd_simulate(const CommonOpts& opts, std::optional<long> horizon) {
    finset::ExperimentConfig cfg = load_config(opts);
    const long t = horizon.value_or(cfg.horizons.front());
    finset::RngState rng(cfg.seed, 0);
    const finset::Trajectory traj =
        finset::simulate(cfg.set.true_system(), cfg.noise, cfg.x0, t, rng);
    std::ostringstream os;
    finset::write_trajectory_csv(os, traj);
    write_output(opts, os.str());
    return 0;
}

int cmd_estimate(const CommonOpts& opts, const std::string& traj_path,
                 std::optional<long> horizon, const std::string& format) {
    finset::ExperimentConfig cfg = load_config(opts);
    finset::Trajectory traj;
    if (!traj_path.empty()) {
        std::ifstream in(traj_path);
        if (!in) {
            throw finset::ConfigInvalid("traj: cannot open '" + traj_path + "'");
        }
        traj = finset::read_trajectory_csv(in);
    } else {
        finset::RngState rng(cfg.seed, 0);
        traj = finset::simulate(cfg.set.true_system(), cfg.noise, cfg.x0,
                                horizon.value_or(cfg.horizons.front()), rng);
    }

    std::vector<finset::EstimateOutcome> outcomes;
    if (cfg.run_mle) outcomes.push_back(finset::mle_estimate(cfg.set, cfg.noise, traj));
    if (cfg.run_ols) outcomes.push_back(finset::ols_project_estimate(cfg.set, traj));

    if (format == "csv") {
        std::ostringstream os;
        os << "estimator,candidate,score,chosen\n";
        os.precision(17);
        for (const auto& outcome : outcomes) {
            for (std::size_t c = 0; c < outcome.scores.size(); ++c) {
                os << finset::estimator_name(outcome.method) << "," << c << ","
                   << outcome.scores[c] << "," << (c == outcome.chosen ? 1 : 0) << "\n";
            }
        }
        write_output(opts, os.str());
    } else {
        nlohmann::json j;
        for (const auto& outcome : outcomes) {
            nlohmann::json jo;
            jo["chosen"] = outcome.chosen;
            jo["scores"] = outcome.scores;
            jo["tie"] = outcome.tie;
            j[finset::estimator_name(outcome.method)] = std::move(jo);
        }
        write_output(opts, j.dump(2) + "\n");
    }
    return 0;
}

finset::CovarianceConvention parse_convention(const std::string& name) {
    if (name == "zero_start") return finset::CovarianceConvention::kZeroStart;
    if (name == "inclusive") return finset::CovarianceConvention::kInclusive;
    throw finset::ConfigInvalid("convention: expected zero_start or inclusive");
}

int cmd_bounds(const CommonOpts& opts, bool gramian, const std::string& convention) {
    finset::ExperimentConfig cfg = load_config(opts);
    const finset::BoundReport report =
        finset::run_bounds(cfg, gramian, parse_convention(convention));
    write_output(opts, finset::to_json(report).dump(2) + "\n");
    return 0;
}

int cmd_montecarlo(const CommonOpts& opts) {
    finset::ExperimentConfig cfg = load_config(opts);
    const finset::TrialTable table = finset::run_montecarlo(cfg, opts.threads);
    write_output(opts, opts.format == "json" ? finset::to_json(table).dump(2) + "\n"
                                             : finset::to_csv(table));
    return 0;
}

int cmd_paper(const CommonOpts& opts, int experiment, const std::string& bounds_path,
              const std::string& emit_config_path) {
    finset::ExperimentConfig cfg = finset::builtin_paper_config(experiment);
    finset::apply_env_seed_override(cfg);
    if (opts.seed) cfg.seed = *opts.seed;
    if (opts.trials) cfg.n_trials = *opts.trials;
    cfg.validate();

    if (!emit_config_path.empty()) {
        std::ofstream out(emit_config_path);
        if (!out) {
            throw finset::ConfigInvalid("emit-config: cannot open '" + emit_config_path + "'");
        }
        out << finset::to_json(cfg).dump(2) << "\n";
        return 0;
    }

    const finset::TrialTable table = finset::run_montecarlo(cfg, opts.threads);
    write_output(opts, opts.format == "json" ? finset::to_json(table).dump(2) + "\n"
                                             : finset::to_csv(table));

    const finset::BoundReport report = finset::run_bounds(cfg);
    if (!bounds_path.empty()) {
        std::ofstream out(bounds_path);
        if (!out) {
            throw finset::ConfigInvalid("out-bounds: cannot open '" + bounds_path + "'");
        }
        out << finset::to_json(report).dump(2) << "\n";
    }
    std::ostringstream summary;
    summary << "experiment " << experiment << ": minimal lower-bound horizon = ";
    if (report.minimal_lower_bound) {
        summary << *report.minimal_lower_bound;
    } else {
        summary << "none up to " << report.lower_search_max;
    }
    bool any_satisfied = false;
    for (const auto& check : report.checks) any_satisfied |= check.satisfied;
    summary << ", sufficient condition "
            << (any_satisfied ? "satisfied at some configured horizon"
                              : "unsatisfied at all configured horizons");
    std::cerr << summary.str() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite-hypothesis LTI system identification toolkit"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::optional<long> horizon;
    std::string traj_path;
    std::string estimate_format = "json";
    bool gramian = false;
    std::string convention = "zero_start";
    int experiment = 0;
    std::string bounds_path;
    std::string emit_config_path;

    auto add_common = [&](CLI::App* cmd, bool needs_config) {
        if (needs_config) {
            cmd->add_option("--config", opts.config_path, "JSON configuration file")
                ->required();
        }
        cmd->add_option("--seed", opts.seed, "override the configured seed");
        cmd->add_option("--out", opts.out_path, "output file (default: stdout)");
    };

    CLI::App* simulate = app.add_subcommand(
        "simulate", "simulate one trajectory of the true system, emit CSV");
    add_common(simulate, true);
    simulate->add_option("--horizon", horizon, "trajectory length (default: first horizon)");

    CLI::App* estimate = app.add_subcommand(
        "estimate", "run the enabled estimators on one trajectory");
    add_common(estimate, true);
    estimate->add_option("--horizon", horizon, "trajectory length when simulating");
    estimate->add_option("--traj", traj_path, "trajectory CSV (default: simulate one)");
    estimate->add_option("--format", estimate_format, "csv or json (default json)")
        ->check(CLI::IsMember({"csv", "json"}));

    CLI::App* bounds = app.add_subcommand(
        "bounds", "evaluate the sample-complexity bound conditions, emit JSON");
    add_common(bounds, true);
    bounds->add_flag("--diagnostic-gramian", gramian,
                     "also report the Frobenius-of-sums SNR variant");
    bounds->add_option("--convention", convention,
                       "state covariance indexing: zero_start or inclusive")
        ->check(CLI::IsMember({"zero_start", "inclusive"}));

    CLI::App* montecarlo = app.add_subcommand(
        "montecarlo", "run the seeded Monte Carlo selection table");
    add_common(montecarlo, true);
    montecarlo->add_option("--trials", opts.trials, "override configured n_trials");
    montecarlo->add_option("--threads", opts.threads, "worker threads (0 = all cores)");
    montecarlo->add_option("--format", opts.format, "csv or json (default csv)")
        ->check(CLI::IsMember({"csv", "json"}));

    CLI::App* paper = app.add_subcommand(
        "paper", "run a built-in benchmark experiment (table + bound summary)");
    add_common(paper, false);
    paper->add_option("--exp", experiment, "experiment number")
        ->required()
        ->check(CLI::Range(1, 3));
    paper->add_option("--trials", opts.trials, "override the 1000-trial default");
    paper->add_option("--threads", opts.threads, "worker threads (0 = all cores)");
    paper->add_option("--format", opts.format, "csv or json (default csv)")
        ->check(CLI::IsMember({"csv", "json"}));
    paper->add_option("--out-bounds", bounds_path, "also write the bound report JSON here");
    paper->add_option("--emit-config", emit_config_path,
                      "write the experiment's config JSON and exit");

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) return cmd_simulate(opts, horizon);
        if (estimate->parsed()) return cmd_estimate(opts, traj_path, horizon, estimate_format);
        if (bounds->parsed()) return cmd_bounds(opts, gramian, convention);
        if (montecarlo->parsed()) return cmd_montecarlo(opts);
        if (paper->parsed()) return cmd_paper(opts, experiment, bounds_path, emit_config_path);
    } catch (const finset::ConfigInvalid& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const finset::UnknownExperiment& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const finset::Error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
