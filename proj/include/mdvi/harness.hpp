#pragma once

#include "mdvi/bounds.hpp"
#include "mdvi/garnet.hpp"
#include "mdvi/io.hpp"
#include "mdvi/schemes.hpp"

#include <atomic>
#include <exception>
#include <filesystem>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace mdvi {

enum class Metric { NormalizedError, LinfGap, BoundSlack };

inline const char* metric_name(Metric m) {
    switch (m) {
        case Metric::NormalizedError: return "normalized_error";
        case Metric::LinfGap: return "linf_gap";
        case Metric::BoundSlack: return "bound_slack";
    }
    return "?";
}

inline Metric metric_from_name(const std::string& name) {
    for (Metric m : {Metric::NormalizedError, Metric::LinfGap, Metric::BoundSlack})
        if (name == metric_name(m)) return m;
    throw std::invalid_argument("unknown metric: " + name);
}

/// A Garnet-suite sweep: num_garnets instances, every scheme run once per
/// instance, metrics aggregated across instances per scheme per iteration.
struct ExperimentConfig {
    GarnetParams garnet;
    int num_garnets = 1;
    std::uint64_t master_seed = 0;
    std::vector<SchemeConfig> schemes;
    std::vector<Metric> metrics = {Metric::NormalizedError};
    std::string output_path;
    int bound_stride = 10;   // BoundSlack metric certification stride
    std::string trace_dir;   // when set, per-run traces are stored here
};

inline void validate(const ExperimentConfig& cfg) {
    validate(cfg.garnet);
    if (cfg.num_garnets < 1)
        throw std::invalid_argument("experiment config: num_garnets must be >= 1");
    if (cfg.schemes.empty())
        throw std::invalid_argument("experiment config: scheme grid must be non-empty");
    for (const SchemeConfig& s : cfg.schemes) validate(s);
    if (cfg.metrics.empty())
        throw std::invalid_argument("experiment config: metric list must be non-empty");
    if (cfg.bound_stride < 1)
        throw std::invalid_argument("experiment config: bound_stride must be >= 1");
    for (const SchemeConfig& s : cfg.schemes)
        for (Metric m : cfg.metrics)
            if (m == Metric::BoundSlack &&
                !((s.variant == Variant::MD || s.variant == Variant::DA) && s.m == 1 &&
                  s.regularized_evaluation && (s.tau > 0.0 || s.lambda > 0.0)))
                throw std::invalid_argument(
                    "experiment config: bound_slack metric needs an MD/DA scheme with m=1 and "
                    "regularized evaluation");
}

inline json to_json(const ExperimentConfig& cfg) {
    json schemes = json::array();
    for (const SchemeConfig& s : cfg.schemes) schemes.push_back(to_json(s));
    json metrics = json::array();
    for (Metric m : cfg.metrics) metrics.push_back(metric_name(m));
    return json{{"garnet", to_json(cfg.garnet)}, {"num_garnets", cfg.num_garnets},
                {"master_seed", cfg.master_seed}, {"schemes", schemes},
                {"metrics", metrics},           {"output_path", cfg.output_path},
                {"bound_stride", cfg.bound_stride}, {"trace_dir", cfg.trace_dir}};
}

inline ExperimentConfig experiment_from_json(const json& j) {
    ExperimentConfig cfg;
    cfg.garnet = garnet_from_json(j.at("garnet"));
    cfg.num_garnets = j.value("num_garnets", 1);
    cfg.master_seed = j.value("master_seed", std::uint64_t{0});
    for (const json& s : j.at("schemes")) cfg.schemes.push_back(scheme_from_json(s));
    if (j.contains("metrics")) {
        cfg.metrics.clear();
        for (const json& m : j["metrics"]) cfg.metrics.push_back(metric_from_name(m.get<std::string>()));
    }
    cfg.output_path = j.value("output_path", std::string());
    cfg.bound_stride = j.value("bound_stride", 10);
    cfg.trace_dir = j.value("trace_dir", std::string());
    validate(cfg);
    return cfg;
}

// ---- seed plan ---------------------------------------------------------------

/// Garnet instance g is generated from stream (master, g); the run of scheme
/// s on instance g draws from stream (master, g, s). Both are pure functions
/// of the indices, so any parallel schedule reproduces the same numbers.
inline Rng garnet_stream(std::uint64_t master_seed, int garnet_index) {
    return Rng(master_seed, static_cast<std::uint64_t>(garnet_index));
}

inline Rng run_stream(std::uint64_t master_seed, int garnet_index, int scheme_index) {
    return Rng(master_seed, static_cast<std::uint64_t>(garnet_index),
               static_cast<std::uint64_t>(scheme_index));
}

// ---- parallel work queue -----------------------------------------------------

/// Run fn(0..count-1) on up to jobs threads. Results must be written to
/// pre-sized, task-owned slots; the first exception is rethrown.
inline void parallel_for(int count, int jobs, const std::function<void(int)>& fn) {
    jobs = std::max(1, std::min(jobs, count));
    if (jobs == 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&]() {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(jobs));
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

// ---- aggregation and CSV -----------------------------------------------------

struct AggregateRow {
    std::string scheme_id;
    int k = 0;
    std::string metric;
    double mean = 0.0;
    double std_dev = 0.0;
};

inline constexpr const char* kCsvHeader = "scheme_id,k,metric,mean,std";

inline void write_csv(const std::vector<AggregateRow>& rows, std::ostream& out) {
    out << kCsvHeader << '\n';
    for (const AggregateRow& row : rows)
        out << row.scheme_id << ',' << row.k << ',' << row.metric << ','
            << format_double(row.mean) << ',' << format_double(row.std_dev) << '\n';
}

inline void write_csv_file(const std::vector<AggregateRow>& rows, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_csv: cannot open " + path);
    write_csv(rows, out);
}

namespace detail {

/// Per-run metric curves, one value per recorded k (bound_slack only at
/// certified iterations, NaN elsewhere is avoided by its own k list).
struct RunMetrics {
    std::vector<double> per_iteration;           // NormalizedError / LinfGap, index k
    std::vector<std::pair<int, double>> sparse;  // BoundSlack at checked k
};

inline RunMetrics compute_metric(const RunTrace& trace, Metric metric, int bound_stride) {
    RunMetrics out;
    const double tau = trace.config.tau;
    const QTable& q_opt = tau > 0.0 ? trace.target_regularized->q : trace.target_plain->q;
    switch (metric) {
        case Metric::NormalizedError: {
            const double denom = q_opt.cwiseAbs().sum();
            if (denom == 0.0)
                throw std::domain_error("normalized_error: ||q_opt||_1 = 0 (degenerate MDP)");
            for (const Policy& pi : trace.policies) {
                const QTable q_pi = regularized_policy_value(trace.mdp, pi, tau);
                out.per_iteration.push_back((q_opt - q_pi).cwiseAbs().sum() / denom);
            }
            break;
        }
        case Metric::LinfGap:
            for (const Policy& pi : trace.policies) {
                const QTable q_pi = regularized_policy_value(trace.mdp, pi, tau);
                out.per_iteration.push_back((q_opt - q_pi).cwiseAbs().maxCoeff());
            }
            break;
        case Metric::BoundSlack: {
            BoundReport report = tau > 0.0 ? certify_thm2(trace, bound_stride)
                                           : certify_thm1(trace, bound_stride);
            for (const BoundCheck& c : report.checks) out.sparse.emplace_back(c.k, c.min_slack);
            break;
        }
    }
    return out;
}

inline void aggregate(const std::string& scheme_id, const std::string& metric,
                      const std::vector<std::vector<double>>& per_garnet,
                      const std::vector<int>& ks, std::vector<AggregateRow>& rows) {
    if (per_garnet.empty()) return;
    const std::size_t n = per_garnet.size();
    for (std::size_t i = 0; i < ks.size(); ++i) {
        double mean = 0.0;
        for (const auto& curve : per_garnet) mean += curve[i];
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (const auto& curve : per_garnet) var += (curve[i] - mean) * (curve[i] - mean);
        const double std_dev = n > 1 ? std::sqrt(var / static_cast<double>(n - 1)) : 0.0;
        rows.push_back(AggregateRow{scheme_id, ks[i], metric, mean, std_dev});
    }
}

}  // namespace detail

struct ExperimentResult {
    std::vector<AggregateRow> rows;
};

/// Run the whole (garnet x scheme) grid, aggregate mean/std across garnets,
/// and (when output_path is set) write the CSV. Deterministic for a fixed
/// master_seed regardless of the number of jobs: every run draws from a
/// stream keyed by its indices and aggregation visits runs in index order.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg, int jobs = 1) {
    validate(cfg);
    const int num_schemes = static_cast<int>(cfg.schemes.size());
    const int num_runs = cfg.num_garnets * num_schemes;

    struct Slot {
        std::vector<detail::RunMetrics> metrics;  // parallel to cfg.metrics
    };
    std::vector<Slot> slots(static_cast<std::size_t>(num_runs));

    if (!cfg.trace_dir.empty()) std::filesystem::create_directories(cfg.trace_dir);

    parallel_for(num_runs, jobs, [&](int task) {
        const int g = task / num_schemes;
        const int s = task % num_schemes;
        Rng garnet_rng = garnet_stream(cfg.master_seed, g);
        const TabularMdp mdp = generate_garnet(cfg.garnet, garnet_rng);
        Rng rng = run_stream(cfg.master_seed, g, s);
        RunTrace trace = run_scheme(mdp, cfg.schemes[static_cast<std::size_t>(s)], rng);
        attach_targets(trace);
        Slot& slot = slots[static_cast<std::size_t>(task)];
        std::map<std::string, std::vector<double>> stored_metrics;
        for (Metric m : cfg.metrics) {
            slot.metrics.push_back(detail::compute_metric(trace, m, cfg.bound_stride));
            if (!slot.metrics.back().per_iteration.empty())
                stored_metrics[metric_name(m)] = slot.metrics.back().per_iteration;
        }
        if (!cfg.trace_dir.empty()) {
            const std::string path = cfg.trace_dir + "/garnet" + std::to_string(g) + "_scheme" +
                                     std::to_string(s) + ".jsonl";
            write_trace_file(trace, path, stored_metrics);
        }
    });

    ExperimentResult result;
    for (int s = 0; s < num_schemes; ++s) {
        const std::string id = cfg.schemes[static_cast<std::size_t>(s)].describe();
        for (std::size_t mi = 0; mi < cfg.metrics.size(); ++mi) {
            std::vector<std::vector<double>> curves;
            std::vector<int> ks;
            for (int g = 0; g < cfg.num_garnets; ++g) {
                const detail::RunMetrics& rm =
                    slots[static_cast<std::size_t>(g * num_schemes + s)].metrics[mi];
                if (!rm.per_iteration.empty()) {
                    if (ks.empty())
                        for (std::size_t k = 0; k < rm.per_iteration.size(); ++k)
                            ks.push_back(static_cast<int>(k));
                    curves.push_back(rm.per_iteration);
                } else if (!rm.sparse.empty()) {
                    if (ks.empty())
                        for (const auto& [k, _] : rm.sparse) ks.push_back(k);
                    std::vector<double> curve;
                    for (const auto& [_, v] : rm.sparse) curve.push_back(v);
                    curves.push_back(std::move(curve));
                }
            }
            detail::aggregate(id, metric_name(cfg.metrics[mi]), curves, ks, result.rows);
        }
    }
    if (!cfg.output_path.empty()) write_csv_file(result.rows, cfg.output_path);
    return result;
}

// ---- the three-panel sweep ---------------------------------------------------

struct Fig1Config {
    GarnetParams garnet{30, 4, 4, 0.1, 0.9};
    int num_garnets = 100;
    int iterations = 800;
    std::uint64_t master_seed = 0;
    std::vector<double> lambda_grid = {0.1, 1.0, 10.0};
    std::vector<double> beta_grid = {0.1, 0.5, 0.9, 0.99};
    double tau = 1e-3;
    std::string out_dir = ".";
};

struct Fig1Paths {
    std::string sampled_no_entropy;  // AVI vs DA(lambda, 0) curves
    std::string rate_table;          // pure g2(k) tabulation
    std::string sampled_entropy;     // DA(lambda, tau) curves over beta
};

/// Emit the three data files: (a) sampled-error curves of AVI and
/// DA(lambda,0) over the lambda grid, (b) the pure function g2(k) over the
/// beta grid, (c) sampled-error curves of DA(lambda, tau) with lambda chosen
/// per beta so that lambda/(lambda+tau) hits the grid value.
inline Fig1Paths sweep_fig1(const Fig1Config& cfg, int jobs = 1) {
    std::filesystem::create_directories(cfg.out_dir);
    Fig1Paths paths;
    paths.sampled_no_entropy = cfg.out_dir + "/fig1_no_entropy.csv";
    paths.rate_table = cfg.out_dir + "/fig1_g2.csv";
    paths.sampled_entropy = cfg.out_dir + "/fig1_entropy.csv";

    ExperimentConfig panel_a;
    panel_a.garnet = cfg.garnet;
    panel_a.num_garnets = cfg.num_garnets;
    panel_a.master_seed = cfg.master_seed;
    panel_a.output_path = paths.sampled_no_entropy;
    {
        SchemeConfig avi;
        avi.variant = Variant::AVI;
        avi.iterations = cfg.iterations;
        avi.error_model = ErrorModel::GenerativeSample;
        avi.id = "avi";
        panel_a.schemes.push_back(avi);
        for (double lambda : cfg.lambda_grid) {
            SchemeConfig da;
            da.variant = Variant::DA;
            da.lambda = lambda;
            da.iterations = cfg.iterations;
            da.error_model = ErrorModel::GenerativeSample;
            da.id = "da_lambda" + format_double(lambda);
            panel_a.schemes.push_back(da);
        }
    }
    run_experiment(panel_a, jobs);

    {
        std::vector<AggregateRow> rows;
        const double v_tau =
            (1.0 + cfg.tau * std::log(static_cast<double>(cfg.garnet.num_actions))) /
            (1.0 - cfg.garnet.discount);
        for (double beta : cfg.beta_grid)
            for (int k = 0; k <= cfg.iterations; ++k)
                rows.push_back(AggregateRow{"g2_beta" + format_double(beta), k, "g2",
                                            g2(k, cfg.garnet.discount, beta, v_tau), 0.0});
        write_csv_file(rows, paths.rate_table);
    }

    ExperimentConfig panel_c;
    panel_c.garnet = cfg.garnet;
    panel_c.num_garnets = cfg.num_garnets;
    panel_c.master_seed = cfg.master_seed;
    panel_c.output_path = paths.sampled_entropy;
    for (double beta : cfg.beta_grid) {
        SchemeConfig da;
        da.variant = Variant::DA;
        da.tau = cfg.tau;
        da.lambda = beta * cfg.tau / (1.0 - beta);
        da.iterations = cfg.iterations;
        da.error_model = ErrorModel::GenerativeSample;
        da.id = "da_beta" + format_double(beta);
        panel_c.schemes.push_back(da);
    }
    run_experiment(panel_c, jobs);

    return paths;
}

}  // namespace mdvi
