// Command-line front end: Garnet generation, single runs, grid sweeps,
// bound certification and the three-panel benchmark sweep.
//
// Exit codes: 0 success, 2 configuration error, 3 certification failure.

#include "mdvi/mdvi.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

namespace {

mdvi::json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open " + path);
    return mdvi::json::parse(in);
}

int cmd_garnet_generate(const std::string& out_path, const mdvi::GarnetParams& params,
                        std::uint64_t seed) {
    mdvi::Rng rng(seed);
    mdvi::TabularMdp mdp = mdvi::generate_garnet(params, rng);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + out_path);
    out << mdvi::to_json(mdp).dump(2) << '\n';
    std::cout << "wrote " << out_path << " (" << params.num_states << " states, "
              << params.num_actions << " actions)\n";
    return 0;
}

// Single-scheme run. The config document holds a "scheme" object plus either
// an "mdp_file" path or a "garnet" block (with optional "garnet_seed").
int cmd_run(const std::string& config_path, std::uint64_t seed, const std::string& out_path,
            const std::string& trace_path) {
    mdvi::json doc = load_json(config_path);
    mdvi::SchemeConfig scheme = mdvi::scheme_from_json(doc.at("scheme"));

    mdvi::TabularMdp mdp;
    if (doc.contains("mdp_file")) {
        mdp = mdvi::mdp_from_json(load_json(doc["mdp_file"].get<std::string>()));
    } else if (doc.contains("garnet")) {
        mdvi::GarnetParams params = mdvi::garnet_from_json(doc["garnet"]);
        mdvi::Rng garnet_rng(doc.value("garnet_seed", std::uint64_t{0}));
        mdp = mdvi::generate_garnet(params, garnet_rng);
    } else {
        throw std::invalid_argument("run config needs either mdp_file or garnet");
    }

    mdvi::Rng rng(seed);
    mdvi::RunTrace trace = mdvi::run_scheme(mdp, scheme, rng);
    mdvi::attach_targets(trace);

    std::map<std::string, std::vector<double>> metrics;
    std::vector<double> errs;
    errs.reserve(trace.policies.size());
    for (std::size_t k = 0; k < trace.policies.size(); ++k)
        errs.push_back(mdvi::normalized_error(trace, static_cast<int>(k), scheme.tau));
    metrics["normalized_error"] = errs;

    if (!trace_path.empty()) mdvi::write_trace_file(trace, trace_path, metrics);
    if (!out_path.empty()) {
        std::vector<mdvi::AggregateRow> rows;
        for (std::size_t k = 0; k < errs.size(); ++k)
            rows.push_back(mdvi::AggregateRow{scheme.describe(), static_cast<int>(k),
                                              "normalized_error", errs[k], 0.0});
        mdvi::write_csv_file(rows, out_path);
    }
    std::cout << scheme.describe() << ": final normalized error "
              << mdvi::format_double(errs.back()) << '\n';
    return 0;
}

int cmd_sweep(const std::string& config_path, int jobs, const std::string& out_override,
              std::optional<std::uint64_t> seed_override, const std::string& trace_dir) {
    mdvi::ExperimentConfig cfg = mdvi::experiment_from_json(load_json(config_path));
    if (!out_override.empty()) cfg.output_path = out_override;
    if (seed_override) cfg.master_seed = *seed_override;
    if (!trace_dir.empty()) cfg.trace_dir = trace_dir;
    if (cfg.output_path.empty())
        throw std::invalid_argument("sweep: no output_path in config and no --out given");
    mdvi::run_experiment(cfg, jobs);
    std::cout << "wrote " << cfg.output_path << '\n';
    return 0;
}

int cmd_bound_check(const std::string& trace_path, int theorem, int stride, bool full) {
    mdvi::RunTrace trace = mdvi::read_trace_file(trace_path);
    mdvi::attach_targets(trace);
    mdvi::BoundReport report = theorem == 1 ? mdvi::certify_thm1(trace, stride)
                                            : mdvi::certify_thm2(trace, stride);
    if (full) std::cout << mdvi::to_json(report).dump(2) << '\n';
    std::cout << "theorem " << theorem << ": min_slack " << mdvi::format_double(report.min_slack)
              << ", certified " << (report.certified ? "true" : "false") << '\n';
    return report.certified ? 0 : 3;
}

int cmd_fig1(const std::string& out_dir, int garnets, int iterations, int jobs,
             std::uint64_t seed) {
    mdvi::Fig1Config cfg;
    cfg.out_dir = out_dir;
    cfg.num_garnets = garnets;
    cfg.iterations = iterations;
    cfg.master_seed = seed;
    mdvi::Fig1Paths paths = mdvi::sweep_fig1(cfg, jobs);
    std::cout << "wrote " << paths.sampled_no_entropy << '\n'
              << "wrote " << paths.rate_table << '\n'
              << "wrote " << paths.sampled_entropy << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tabular KL/entropy-regularized value iteration toolkit"};
    app.require_subcommand(1);

    // garnet generate
    auto* garnet = app.add_subcommand("garnet", "Garnet random MDPs");
    garnet->require_subcommand(1);
    auto* generate = garnet->add_subcommand("generate", "draw one Garnet and write it as JSON");
    mdvi::GarnetParams gparams{30, 4, 4, 0.1, 0.9};
    std::uint64_t gseed = 0;
    std::string gout = "garnet.json";
    generate->add_option("--states", gparams.num_states, "number of states");
    generate->add_option("--actions", gparams.num_actions, "number of actions");
    generate->add_option("--branching", gparams.branching, "successor states per (s,a)");
    generate->add_option("--reward-fraction", gparams.reward_fraction,
                         "fraction of rewarding states");
    generate->add_option("--discount", gparams.discount, "discount factor");
    generate->add_option("--seed", gseed, "generator seed");
    generate->add_option("--out", gout, "output path");

    // run
    auto* run = app.add_subcommand("run", "run a single scheme from a JSON config");
    std::string run_config;
    std::uint64_t run_seed = 0;
    std::string run_out, run_trace;
    run->add_option("--config", run_config, "run config JSON")->required();
    run->add_option("--seed", run_seed, "run seed");
    run->add_option("--out", run_out, "metrics CSV path");
    run->add_option("--store-trace", run_trace, "write the full trace (JSON lines)");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "run a (garnet x scheme) grid experiment");
    std::string sweep_config, sweep_out, sweep_traces;
    int sweep_jobs = 1;
    std::optional<std::uint64_t> sweep_seed;
    sweep->add_option("--config", sweep_config, "experiment config JSON")->required();
    sweep->add_option("--jobs", sweep_jobs, "parallel workers");
    sweep->add_option("--out", sweep_out, "override output CSV path");
    sweep->add_option("--seed", sweep_seed, "override master seed");
    sweep->add_option("--store-trace", sweep_traces, "directory for per-run traces");

    // bound-check
    auto* bound = app.add_subcommand("bound-check", "certify a stored trace against a bound");
    std::string bound_trace;
    int bound_theorem = 1, bound_stride = 1;
    bool bound_full = false;
    bound->add_option("--trace", bound_trace, "trace file (JSON lines)")->required();
    bound->add_option("--theorem", bound_theorem, "1 or 2")->check(CLI::IsMember({1, 2}));
    bound->add_option("--stride", bound_stride, "certify every stride-th iteration");
    bound->add_flag("--full", bound_full, "print the per-iteration report as JSON");

    // fig1
    auto* fig1 = app.add_subcommand("fig1", "emit the three benchmark panels as CSV");
    std::string fig_dir = "fig1";
    int fig_garnets = 100, fig_iters = 800, fig_jobs = 1;
    std::uint64_t fig_seed = 0;
    fig1->add_option("--out-dir", fig_dir, "output directory");
    fig1->add_option("--garnets", fig_garnets, "number of Garnet instances");
    fig1->add_option("--iterations", fig_iters, "iterations per run");
    fig1->add_option("--jobs", fig_jobs, "parallel workers");
    fig1->add_option("--seed", fig_seed, "master seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (generate->parsed()) return cmd_garnet_generate(gout, gparams, gseed);
        if (run->parsed()) return cmd_run(run_config, run_seed, run_out, run_trace);
        if (sweep->parsed())
            return cmd_sweep(sweep_config, sweep_jobs, sweep_out, sweep_seed, sweep_traces);
        if (bound->parsed())
            return cmd_bound_check(bound_trace, bound_theorem, bound_stride, bound_full);
        if (fig1->parsed()) return cmd_fig1(fig_dir, fig_garnets, fig_iters, fig_jobs, fig_seed);
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const mdvi::json::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
