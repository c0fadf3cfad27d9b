// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one PASS/FAIL line per criterion. Exit code is the number of
// failed criteria. argv[1] (optional) is the CLI binary, needed by the
// determinism criterion.

#include "mdvi/mdvi.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>
#include <vector>

using namespace mdvi;

namespace {

int failures = 0;

void report(int criterion, const char* name, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %d (%s): %s\n", pass ? "PASS" : "FAIL", criterion, name,
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

std::string fmt(double x) { return format_double(x); }

TabularMdp random_dense_mdp(int states, int actions, double discount, Rng& rng) {
    TabularMdp mdp;
    mdp.num_states = states;
    mdp.num_actions = actions;
    mdp.discount = discount;
    mdp.r_max = 1.0;
    mdp.kernel.resize(static_cast<Eigen::Index>(states) * actions, states);
    for (Eigen::Index row = 0; row < mdp.kernel.rows(); ++row) {
        double total = 0.0;
        for (int sp = 0; sp < states; ++sp) {
            mdp.kernel(row, sp) = rng.uniform_open01();
            total += mdp.kernel(row, sp);
        }
        mdp.kernel.row(row) /= total;
    }
    mdp.reward.resize(states, actions);
    for (int s = 0; s < states; ++s)
        for (int a = 0; a < actions; ++a) mdp.reward(s, a) = 2.0 * rng.uniform01() - 1.0;
    return mdp;
}

double max_table_gap(const std::vector<QTable>& a, const std::vector<QTable>& b) {
    double worst = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k)
        worst = std::max(worst, (a[k] - b[k]).cwiseAbs().maxCoeff());
    return worst;
}

double max_policy_tv(const std::vector<Policy>& a, const std::vector<Policy>& b) {
    double worst = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k)
        worst = std::max(worst,
                         0.5 * (a[k].probs - b[k].probs).cwiseAbs().rowwise().sum().maxCoeff());
    return worst;
}

// 1. MD-VI and DA-VI coincide, with and without a shared error sequence.
void criterion_equivalence() {
    const int seeds = 20, iterations = 50;
    double worst_q = 0.0, worst_tv = 0.0;
    for (int seed = 0; seed < seeds; ++seed) {
        Rng mdp_rng(1000 + seed);
        const TabularMdp mdp = random_dense_mdp(5, 3, 0.9, mdp_rng);
        std::vector<QTable> errors;
        Rng err_rng(2000 + seed);
        for (int k = 0; k < iterations; ++k) {
            QTable e(5, 3);
            for (int s = 0; s < 5; ++s)
                for (int a = 0; a < 3; ++a) e(s, a) = 0.05 * err_rng.normal();
            errors.push_back(std::move(e));
        }
        struct Pair { double lambda, tau; };
        for (const Pair p : {Pair{0.5, 0.0}, Pair{0.1, 0.05}}) {
            for (bool with_errors : {false, true}) {
                SchemeConfig md_cfg, da_cfg;
                md_cfg.variant = Variant::MD;
                da_cfg.variant = Variant::DA;
                md_cfg.lambda = da_cfg.lambda = p.lambda;
                md_cfg.tau = da_cfg.tau = p.tau;
                md_cfg.iterations = da_cfg.iterations = iterations;
                Rng r1(0), r2(0);
                std::span<const QTable> injected =
                    with_errors ? std::span<const QTable>(errors) : std::span<const QTable>();
                const RunTrace md = run_md(mdp, md_cfg, r1, injected);
                const RunTrace da = run_da(mdp, da_cfg, r2, injected);
                worst_q = std::max(worst_q, max_table_gap(md.q, da.q));
                worst_tv = std::max(worst_tv, max_policy_tv(md.policies, da.policies));
            }
        }
    }
    const bool pass = worst_q <= 1e-8 && worst_tv <= 1e-8;
    report(1, "MD/DA equivalence", pass,
           "max q gap " + fmt(worst_q) + ", max policy TV " + fmt(worst_tv) +
               " over 20 seeds, K=50 (tolerance 1e-8)");
}

// 2. Named reparameterizations: CVI<->MD, DPP = CVI at beta 1, SQL as the
// vanishing-KL limit of DA.
void criterion_reparameterizations() {
    std::ostringstream detail;
    bool pass = true;

    // CVI policies vs MD policies, matching initializations
    {
        const double lambda = 0.2, tau = 0.1;
        double worst_tv = 0.0;
        for (int seed = 0; seed < 10; ++seed) {
            Rng mdp_rng(3000 + seed);
            const TabularMdp mdp = random_dense_mdp(5, 3, 0.9, mdp_rng);
            SchemeConfig cvi_cfg, md_cfg;
            cvi_cfg.variant = Variant::CVI;
            md_cfg.variant = Variant::MD;
            cvi_cfg.lambda = md_cfg.lambda = lambda;
            cvi_cfg.tau = md_cfg.tau = tau;
            cvi_cfg.iterations = md_cfg.iterations = 50;
            md_cfg.initial_q =
                mdp.reward.array() + mdp.discount * (lambda + tau) * std::log(3.0);
            Rng r1(0), r2(0);
            const RunTrace cvi = run_variant(mdp, cvi_cfg, r1);
            const RunTrace md = run_md(mdp, md_cfg, r2);
            worst_tv = std::max(worst_tv, max_policy_tv(cvi.policies, md.policies));
        }
        pass = pass && worst_tv <= 1e-7;
        detail << "CVI vs MD policy TV " << fmt(worst_tv) << " (<=1e-7)";
    }

    // CVI at tau = 0 reproduces the exponential-form DPP recursion
    {
        Rng mdp_rng(3100);
        const TabularMdp mdp = random_dense_mdp(5, 3, 0.9, mdp_rng);
        const double lambda = 0.5;
        SchemeConfig cfg;
        cfg.variant = Variant::CVI;
        cfg.lambda = lambda;
        cfg.iterations = 50;
        Rng rng(0);
        const RunTrace cvi = run_variant(mdp, cfg, rng);
        QTable psi = QTable::Zero(5, 3);
        double worst = 0.0;
        for (int k = 0; k < 50; ++k) {
            Eigen::VectorXd v(5);
            for (int s = 0; s < 5; ++s) {
                const double m = psi.row(s).maxCoeff();
                double sum = 0.0;
                for (int a = 0; a < 3; ++a) sum += std::exp((psi(s, a) - m) / lambda);
                v[s] = m + lambda * std::log(sum);
            }
            QTable next = mdp.reward + mdp.discount * apply_kernel(mdp, v);
            for (int s = 0; s < 5; ++s)
                for (int a = 0; a < 3; ++a) next(s, a) += psi(s, a) - v[s];
            psi = next;
            worst = std::max(
                worst, (cvi.psi[static_cast<std::size_t>(k + 1)] - psi).cwiseAbs().maxCoeff());
        }
        pass = pass && worst <= 1e-10;
        detail << "; DPP-form gap " << fmt(worst) << " (<=1e-10)";
    }

    // SQL equals DA(1e-8, 0) where the argmax stays unique
    {
        TabularMdp mdp;
        mdp.num_states = 4;
        mdp.num_actions = 2;
        mdp.discount = 0.9;
        mdp.r_max = 1.0;
        Rng mdp_rng(3200);
        mdp.kernel.resize(8, 4);
        for (int row = 0; row < 8; ++row) {
            double total = 0.0;
            for (int sp = 0; sp < 4; ++sp) {
                mdp.kernel(row, sp) = mdp_rng.uniform_open01();
                total += mdp.kernel(row, sp);
            }
            mdp.kernel.row(row) /= total;
        }
        mdp.reward.resize(4, 2);
        for (int s = 0; s < 4; ++s) {
            mdp.reward(s, 0) = 1.0;
            mdp.reward(s, 1) = 0.2;
        }
        SchemeConfig sql_cfg, da_cfg;
        sql_cfg.variant = Variant::SQL;
        sql_cfg.iterations = 50;
        da_cfg.variant = Variant::DA;
        da_cfg.lambda = 1e-8;
        da_cfg.iterations = 50;
        Rng r1(0), r2(0);
        const RunTrace sql = run_variant(mdp, sql_cfg, r1);
        const RunTrace da = run_da(mdp, da_cfg, r2);
        const double gap = max_table_gap(sql.h, da.h);
        pass = pass && gap <= 1e-4;
        detail << "; SQL vs DA(1e-8,0) gap " << fmt(gap) << " (<=1e-4)";
    }

    report(2, "reparameterizations", pass, detail.str());
}

// 3. Thm 1 / Thm 2 certification along sampled garnet runs.
void criterion_certification() {
    const GarnetParams params{30, 4, 4, 0.1, 0.9};
    double worst1 = std::numeric_limits<double>::infinity();
    double worst2 = std::numeric_limits<double>::infinity();
    bool all_certified = true;
    for (int g = 0; g < 10; ++g) {
        Rng garnet_rng(5000 + g);
        const TabularMdp mdp = generate_garnet(params, garnet_rng);

        SchemeConfig thm1_cfg;
        thm1_cfg.variant = Variant::DA;
        thm1_cfg.lambda = 0.1;
        thm1_cfg.iterations = 800;
        thm1_cfg.error_model = ErrorModel::GenerativeSample;
        Rng r1(6000 + g);
        RunTrace trace1 = run_da(mdp, thm1_cfg, r1);
        attach_targets(trace1);
        const BoundReport report1 = certify_thm1(trace1);
        all_certified = all_certified && report1.certified && report1.lhs_nonnegative;
        worst1 = std::min(worst1, report1.min_slack);

        for (double beta : {0.5, 0.9}) {
            SchemeConfig thm2_cfg;
            thm2_cfg.variant = Variant::DA;
            thm2_cfg.tau = 1e-3;
            thm2_cfg.lambda = beta * thm2_cfg.tau / (1.0 - beta);
            thm2_cfg.iterations = 200;
            thm2_cfg.error_model = ErrorModel::GenerativeSample;
            Rng r2(7000 + 10 * g + static_cast<int>(10 * beta));
            RunTrace trace2 = run_da(mdp, thm2_cfg, r2);
            attach_targets(trace2);
            const BoundReport report2 = certify_thm2(trace2, 10);
            all_certified = all_certified && report2.certified && report2.lhs_nonnegative;
            worst2 = std::min(worst2, report2.min_slack);
        }
    }
    report(3, "theorem certification", all_certified,
           "thm1 min slack " + fmt(worst1) + " (every k, K=800), thm2 min slack " + fmt(worst2) +
               " (stride 10, K=200), 10 garnets each (>= -1e-8)");
}

// 4. Qualitative reproduction of the benchmark figure.
void criterion_figure() {
    const int jobs = std::min(8u, std::max(1u, std::thread::hardware_concurrency()));
    const int garnets = 100, iterations = 800;

    auto mean_at = [](const ExperimentResult& result, const std::string& id,
                      int k) -> double {
        for (const AggregateRow& row : result.rows)
            if (row.scheme_id == id && row.k == k && row.metric == "normalized_error")
                return row.mean;
        throw std::runtime_error("aggregate row not found: " + id);
    };

    ExperimentConfig panel_a;
    panel_a.garnet = GarnetParams{30, 4, 4, 0.1, 0.9};
    panel_a.num_garnets = garnets;
    panel_a.master_seed = 0;
    {
        SchemeConfig avi;
        avi.variant = Variant::AVI;
        avi.iterations = iterations;
        avi.error_model = ErrorModel::GenerativeSample;
        avi.id = "avi";
        panel_a.schemes.push_back(avi);
        for (double lambda : {0.1, 1.0, 10.0}) {
            SchemeConfig da;
            da.variant = Variant::DA;
            da.lambda = lambda;
            da.iterations = iterations;
            da.error_model = ErrorModel::GenerativeSample;
            da.id = "da_lambda" + format_double(lambda);
            panel_a.schemes.push_back(da);
        }
    }
    const ExperimentResult result_a = run_experiment(panel_a, jobs);
    const double avi_end = mean_at(result_a, "avi", iterations);
    const double da1_end = mean_at(result_a, "da_lambda1", iterations);
    const double l01 = mean_at(result_a, "da_lambda0.1", 100);
    const double l1 = mean_at(result_a, "da_lambda1", 100);
    const double l10 = mean_at(result_a, "da_lambda10", 100);
    const bool check_a = avi_end >= 2.0 * da1_end;
    const bool check_b = l01 < l1 && l1 < l10;

    ExperimentConfig panel_c;
    panel_c.garnet = panel_a.garnet;
    panel_c.num_garnets = garnets;
    panel_c.master_seed = 0;
    for (double beta : {0.1, 0.9}) {
        SchemeConfig da;
        da.variant = Variant::DA;
        da.tau = 1e-3;
        da.lambda = beta * da.tau / (1.0 - beta);
        da.iterations = iterations;
        da.error_model = ErrorModel::GenerativeSample;
        da.id = "da_beta" + format_double(beta);
        panel_c.schemes.push_back(da);
    }
    const ExperimentResult result_c = run_experiment(panel_c, jobs);
    const double b01_end = mean_at(result_c, "da_beta0.1", iterations);
    const double b09_end = mean_at(result_c, "da_beta0.9", iterations);
    const double b01_50 = mean_at(result_c, "da_beta0.1", 50);
    const double b09_50 = mean_at(result_c, "da_beta0.9", 50);
    const bool check_c_final = b09_end <= b01_end;
    const bool check_c_start = b09_50 >= b01_50;

    std::ostringstream detail;
    detail << "(a) AVI@800 " << fmt(avi_end) << " vs 2x DA(1,0)@800 " << fmt(2.0 * da1_end)
           << (check_a ? " ok" : " VIOLATED") << "; (b) lambda order @100 " << fmt(l01) << " < "
           << fmt(l1) << " < " << fmt(l10) << (check_b ? " ok" : " VIOLATED")
           << "; (c) final " << fmt(b09_end) << " <= " << fmt(b01_end)
           << (check_c_final ? " ok" : " VIOLATED") << ", @50 reversal " << fmt(b09_50)
           << " >= " << fmt(b01_50) << (check_c_start ? " ok" : " VIOLATED");
    report(4, "figure reproduction", check_a && check_b && check_c_final && check_c_start,
           detail.str());
}

// 5. The five averaging-identity lemmas hold along instrumented runs.
void criterion_lemmas() {
    double worst = 0.0;
    for (int seed = 0; seed < 5; ++seed) {
        Rng mdp_rng(8000 + seed);
        const TabularMdp mdp = random_dense_mdp(5, 3, 0.9, mdp_rng);

        // no-entropy run: residual lemma on (pi_k, q_k) plus the tau = 0
        // averaging identity; lambda large enough that no policy underflows
        {
            SchemeConfig cfg;
            cfg.variant = Variant::DA;
            cfg.lambda = 5.0;
            cfg.iterations = 100;
            cfg.error_model = ErrorModel::GenerativeSample;
            Rng rng(8100 + seed);
            const RunTrace t = run_da(mdp, cfg, rng);
            for (int k = 1; k <= 100; ++k) {
                const auto ku = static_cast<std::size_t>(k);
                const QTable lhs_res = policy_value(mdp, t.policies[ku]) - t.q[ku];
                const QTable rhs_res = PolicyResolvent(mdp, t.policies[ku])
                                           .apply(bellman_apply(mdp, t.policies[ku], t.q[ku]) -
                                                  t.q[ku]);
                worst = std::max(worst, (lhs_res - rhs_res).cwiseAbs().maxCoeff());
                if (k < 100) {
                    const QTable lhs = regularized_bellman_apply(
                        mdp, t.policies[ku + 1], t.policies[ku], cfg.lambda, 0.0, t.q[ku]);
                    const QTable a = regularized_bellman_apply(mdp, t.policies[ku + 1],
                                                               t.policies[ku + 1], 0.0,
                                                               cfg.lambda / (k + 1), t.h[ku]);
                    const QTable b = regularized_bellman_apply(mdp, t.policies[ku],
                                                               t.policies[ku], 0.0,
                                                               cfg.lambda / k, t.h[ku - 1]);
                    const QTable rhs = (k + 1.0) * a - static_cast<double>(k) * b;
                    worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
                }
            }
        }

        // entropy run: regularized residual lemma, the tau > 0 averaging
        // identity, and the h Bellman recursion
        {
            SchemeConfig cfg;
            cfg.variant = Variant::DA;
            cfg.tau = 0.05;
            cfg.lambda = 0.45;  // beta = 0.9
            cfg.iterations = 100;
            cfg.error_model = ErrorModel::GenerativeSample;
            Rng rng(8200 + seed);
            const RunTrace t = run_da(mdp, cfg, rng);
            const double beta = cfg.beta();
            const Policy pi0 = uniform_policy(5, 3);
            const QTable base = regularized_bellman_apply(mdp, pi0, pi0, 0.0, cfg.tau,
                                                          QTable::Zero(5, 3)) -
                                t.h[0];
            QTable weighted = QTable::Zero(5, 3);
            for (int k = 0; k < 100; ++k) {
                const auto ku = static_cast<std::size_t>(k);
                const QTable lhs_res =
                    regularized_policy_value(mdp, t.policies[ku + 1], cfg.tau) - t.q[ku + 1];
                const QTable rhs_res =
                    PolicyResolvent(mdp, t.policies[ku + 1])
                        .apply(regularized_bellman_apply(mdp, t.policies[ku + 1],
                                                         t.policies[ku + 1], 0.0, cfg.tau,
                                                         t.q[ku + 1]) -
                               t.q[ku + 1]);
                worst = std::max(worst, (lhs_res - rhs_res).cwiseAbs().maxCoeff());

                const QTable lhs = regularized_bellman_apply(mdp, t.policies[ku + 1],
                                                             t.policies[ku], cfg.lambda, cfg.tau,
                                                             t.q[ku]);
                const QTable a = regularized_bellman_apply(mdp, t.policies[ku + 1],
                                                           t.policies[ku + 1], 0.0, cfg.tau,
                                                           t.h[ku]);
                const QTable b = k >= 1 ? regularized_bellman_apply(mdp, t.policies[ku],
                                                                    t.policies[ku], 0.0, cfg.tau,
                                                                    t.h[ku - 1])
                                        : regularized_bellman_apply(mdp, pi0, pi0, 0.0, cfg.tau,
                                                                    QTable::Zero(5, 3));
                const QTable rhs = (a - beta * b) / (1.0 - beta);
                worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());

                weighted = beta * weighted + (1.0 - beta) * t.epsilon[ku + 1];
                const QTable expect = a + weighted - std::pow(beta, k + 1) * base;
                worst = std::max(worst, (t.h[ku + 1] - expect).cwiseAbs().maxCoeff());
            }
        }
    }
    report(5, "lemma identities", worst <= 1e-8,
           "max identity deviation " + fmt(worst) + " over 5 seeds, K=100 (<=1e-8)");
}

// 6. Entropy bias bound.
void criterion_bias_bound() {
    const GarnetParams params{30, 4, 4, 0.1, 0.9};
    double worst_margin = std::numeric_limits<double>::infinity();
    bool pass = true;
    for (double tau : {1e-3, 1e-2, 1e-1}) {
        const double bound = tau * std::log(4.0) / (1.0 - params.discount);
        for (int g = 0; g < 20; ++g) {
            Rng rng(9000 + g);
            const TabularMdp mdp = generate_garnet(params, rng);
            const OptimalSolution plain = optimal_value(mdp, 0.0);
            const OptimalSolution reg = optimal_value(mdp, tau);
            const double gap = (plain.q - policy_value(mdp, reg.pi)).cwiseAbs().maxCoeff();
            pass = pass && gap <= bound + 1e-9;
            worst_margin = std::min(worst_margin, bound - gap);
        }
    }
    report(6, "entropy bias bound", pass,
           "min margin (bound - gap) " + fmt(worst_margin) +
               " over 20 garnets x tau in {1e-3,1e-2,1e-1}");
}

// 7. Stationary variance of the moving-average errors.
void criterion_variance() {
    bool pass = true;
    std::ostringstream detail;
    Rng rng(10007);
    for (double beta : {0.5, 0.9}) {
        const int trials = 10000, horizon = 400;
        double sum = 0.0, sumsq = 0.0;
        for (int t = 0; t < trials; ++t) {
            double e = 0.0;
            for (int k = 0; k < horizon; ++k) e = beta * e + (1.0 - beta) * rng.normal();
            sum += e;
            sumsq += e * e;
        }
        const double mean = sum / trials;
        const double var = sumsq / trials - mean * mean;
        pass = pass && var <= 1.2 * (1.0 - beta);
        detail << "beta=" << beta << ": var " << fmt(var) << " vs cap "
               << fmt(1.2 * (1.0 - beta)) << "; ";
    }
    report(7, "variance contraction", pass, detail.str());
}

// 8. Byte-identical sweep output across worker counts, through the CLI.
void criterion_determinism(const char* cli_path) {
    if (cli_path == nullptr) {
        report(8, "sweep determinism", false, "CLI binary path not supplied");
        return;
    }
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "mdvi_acceptance_determinism";
    fs::create_directories(dir);

    ExperimentConfig cfg;
    cfg.garnet = GarnetParams{10, 3, 3, 0.1, 0.9};
    cfg.num_garnets = 4;
    cfg.master_seed = 17;
    for (double lambda : {0.3, 1.0}) {
        SchemeConfig da;
        da.variant = Variant::DA;
        da.lambda = lambda;
        da.iterations = 40;
        da.error_model = ErrorModel::GenerativeSample;
        da.id = "da" + format_double(lambda);
        cfg.schemes.push_back(da);
    }
    cfg.output_path = (dir / "out.csv").string();
    const fs::path cfg_path = dir / "sweep.json";
    {
        std::ofstream out(cfg_path);
        out << to_json(cfg).dump(2) << '\n';
    }

    std::vector<std::string> outputs;
    bool ran = true;
    for (int jobs : {1, 4, 8}) {
        const fs::path csv = dir / ("out_j" + std::to_string(jobs) + ".csv");
        const std::string cmd = std::string("\"") + cli_path + "\" sweep --config " +
                                cfg_path.string() + " --jobs " + std::to_string(jobs) +
                                " --out " + csv.string() + " > /dev/null";
        ran = ran && std::system(cmd.c_str()) == 0;
        std::ifstream in(csv, std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        outputs.push_back(buf.str());
    }
    const bool identical = ran && !outputs[0].empty() && outputs[0] == outputs[1] &&
                           outputs[0] == outputs[2];
    report(8, "sweep determinism", identical,
           ran ? (identical ? "CSV byte-identical across 1/4/8 workers"
                            : "CSV differs across worker counts")
               : "CLI invocation failed");
    fs::remove_all(dir);
}

}  // namespace

int main(int argc, char** argv) {
    const auto t0 = std::chrono::steady_clock::now();
    criterion_equivalence();
    criterion_reparameterizations();
    criterion_certification();
    criterion_figure();
    criterion_lemmas();
    criterion_bias_bound();
    criterion_variance();
    criterion_determinism(argc > 1 ? argv[1] : nullptr);
    const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(
                             std::chrono::steady_clock::now() - t0)
                             .count();
    std::printf("%d/8 criteria passed in %llds\n", 8 - failures,
                static_cast<long long>(seconds));
    return failures;
}
