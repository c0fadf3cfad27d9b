#pragma once

#include "mdvi/mdp.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mdvi {

enum class Variant { MD, DA, AVI, CVI, DPP, SQL, MoVI, MomentumVI, AdvantageLearning };

enum class ErrorModel { None, GenerativeSample, AdditiveGaussian };

/// Evaluation depth m = infinity: the evaluation step returns the exact
/// fixed point of its operator instead of m applications.
inline constexpr int kEvalInfinity = -1;

struct SchemeConfig {
    Variant variant = Variant::MD;
    double lambda = 0.0;
    double tau = 0.0;
    std::optional<double> beta_override;  // MomentumVI / AdvantageLearning only
    int m = 1;                            // evaluation depth, or kEvalInfinity
    bool regularized_evaluation = true;   // "w/" vs "w/o"
    bool clip_q = false;                  // clamp evaluation output to [-v_max, v_max]
    int iterations = 1;                   // K
    ErrorModel error_model = ErrorModel::None;
    double noise_sigma = 0.0;             // AdditiveGaussian scale
    bool record_trace = true;             // store per-iteration tables (needed for bounds)
    std::string id;                       // label for CSV output; derived when empty
    std::optional<QTable> initial_q;      // q_0 (or psi_0/h_0); zero when absent

    /// Moving-average weight: beta_override where required, else
    /// lambda / (lambda + tau).
    double beta() const {
        if (variant == Variant::MomentumVI || variant == Variant::AdvantageLearning) {
            if (!beta_override)
                throw std::invalid_argument("SchemeConfig::beta: beta_override not set");
            return *beta_override;
        }
        return GreedyParams{lambda, tau}.beta();
    }

    std::string describe() const;
};

inline const char* variant_name(Variant v) {
    switch (v) {
        case Variant::MD: return "MD";
        case Variant::DA: return "DA";
        case Variant::AVI: return "AVI";
        case Variant::CVI: return "CVI";
        case Variant::DPP: return "DPP";
        case Variant::SQL: return "SQL";
        case Variant::MoVI: return "MoVI";
        case Variant::MomentumVI: return "MomentumVI";
        case Variant::AdvantageLearning: return "AdvantageLearning";
    }
    return "?";
}

inline std::string SchemeConfig::describe() const {
    if (!id.empty()) return id;
    std::string out = variant_name(variant);
    out += "(lambda=" + std::to_string(lambda) + ",tau=" + std::to_string(tau);
    if (beta_override) out += ",beta=" + std::to_string(*beta_override);
    out += ")";
    if (!regularized_evaluation) out += "_wo";
    return out;
}

inline void validate(const SchemeConfig& cfg) {
    auto fail = [](const std::string& msg) { throw std::invalid_argument("scheme config: " + msg); };
    if (cfg.iterations < 1) fail("iterations must be >= 1");
    if (cfg.lambda < 0.0 || cfg.tau < 0.0) fail("lambda and tau must be nonnegative");
    if (cfg.m != kEvalInfinity && cfg.m < 1) fail("m must be >= 1 or infinity");
    if (cfg.noise_sigma < 0.0) fail("noise_sigma must be nonnegative");
    if (cfg.error_model == ErrorModel::GenerativeSample && cfg.m == kEvalInfinity)
        fail("generative sampling of an infinite-depth evaluation is undefined");

    const bool beta_variant =
        cfg.variant == Variant::MomentumVI || cfg.variant == Variant::AdvantageLearning;
    if (beta_variant) {
        if (!cfg.beta_override) fail("MomentumVI/AdvantageLearning require beta_override");
        if (*cfg.beta_override < 0.0 || *cfg.beta_override > 1.0)
            fail("beta_override must lie in [0, 1]");
        if (cfg.lambda != 0.0 || cfg.tau != 0.0)
            fail("MomentumVI/AdvantageLearning require lambda = tau = 0");
    } else if (cfg.beta_override) {
        fail("beta_override only applies to MomentumVI/AdvantageLearning");
    }

    switch (cfg.variant) {
        case Variant::MD:
            break;
        case Variant::DA:
            if (cfg.lambda + cfg.tau <= 0.0) fail("DA requires lambda + tau > 0");
            break;
        case Variant::AVI:
        case Variant::MoVI:
        case Variant::SQL:
            if (cfg.lambda != 0.0 || cfg.tau != 0.0)
                fail(std::string(variant_name(cfg.variant)) + " requires lambda = tau = 0");
            break;
        case Variant::CVI:
            if (cfg.lambda <= 0.0) fail("CVI requires lambda > 0");
            break;
        case Variant::DPP:
            if (cfg.lambda <= 0.0 || cfg.tau != 0.0) fail("DPP requires lambda > 0 and tau = 0");
            break;
        case Variant::MomentumVI:
        case Variant::AdvantageLearning:
            break;
    }

    const bool q_iterate = cfg.variant == Variant::MD || cfg.variant == Variant::DA ||
                           cfg.variant == Variant::AVI || cfg.variant == Variant::MoVI ||
                           cfg.variant == Variant::MomentumVI;
    if (cfg.clip_q && !q_iterate) fail("clip_q only applies to q-iterate variants");
    const bool literal_recursion =
        cfg.variant == Variant::CVI || cfg.variant == Variant::DPP ||
        cfg.variant == Variant::SQL || cfg.variant == Variant::AdvantageLearning;
    if (literal_recursion && cfg.m != 1)
        fail(std::string(variant_name(cfg.variant)) + " is defined with m = 1");
}

/// Per-iteration record of one run. Index k runs 0..K with the convention
/// q[0], h[0], psi[0] the initial tables, policies[0] the uniform policy and
/// epsilon[0] an all-zero table; epsilon[k] is the error realized at
/// iteration k.
///
/// q holds the q-iterate (MD/DA/AVI/MoVI/MomentumVI); SQL records its
/// averaged iterate in h only, CVI/DPP/AdvantageLearning record psi only.
struct RunTrace {
    TabularMdp mdp;
    SchemeConfig config;
    std::vector<QTable> q;
    std::vector<QTable> h;
    std::vector<QTable> psi;
    std::vector<Policy> policies;
    std::vector<QTable> epsilon;
    std::optional<OptimalSolution> target_plain;        // tau = 0 solution
    std::optional<OptimalSolution> target_regularized;  // solution at the scheme's tau
};

struct EvaluationResult {
    QTable value;  // realized q_{k+1}
    QTable error;  // realized minus exact operator output
};

namespace detail {

struct PolicyPair {
    Eigen::MatrixXd probs;
    Eigen::MatrixXd logs;
};

inline PolicyPair uniform_pair(Eigen::Index num_states, Eigen::Index num_actions) {
    const double p = 1.0 / static_cast<double>(num_actions);
    return PolicyPair{Eigen::MatrixXd::Constant(num_states, num_actions, p),
                      Eigen::MatrixXd::Constant(num_states, num_actions, std::log(p))};
}

inline PolicyPair softmax_pair(const Eigen::MatrixXd& logits) {
    SoftmaxRows sm = log_softmax_rows(logits);
    return PolicyPair{std::move(sm.probs), std::move(sm.log_probs)};
}

inline PolicyPair hard_pair(const QTable& q) {
    Policy pi = hard_greedy(q);
    return PolicyPair{pi.probs, pi.probs.array().log().matrix()};
}

/// Per-state regularizer constant of the evaluation operator,
/// c(s) = -lambda KL(pi'||mu)(s) + tau H(pi')(s), from log-policies.
inline Eigen::VectorXd regularizer_constant(const PolicyPair& next, const Eigen::MatrixXd* cur_logs,
                                            double lambda, double tau) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(next.probs.rows());
    if (lambda == 0.0 && tau == 0.0) return c;
    for (Eigen::Index s = 0; s < next.probs.rows(); ++s) {
        double acc = 0.0;
        for (Eigen::Index a = 0; a < next.probs.cols(); ++a) {
            const double p = next.probs(s, a);
            if (p <= kZeroProb) continue;
            double term = 0.0;
            if (lambda > 0.0) term -= lambda * (next.logs(s, a) - (*cur_logs)(s, a));
            if (tau > 0.0) term -= tau * next.logs(s, a);
            acc += p * term;
        }
        c[s] = acc;
    }
    return c;
}

inline QTable gaussian_table(Eigen::Index rows, Eigen::Index cols, double sigma, Rng& rng) {
    QTable noise(rows, cols);
    for (Eigen::Index s = 0; s < rows; ++s)
        for (Eigen::Index a = 0; a < cols; ++a) noise(s, a) = sigma * rng.normal();
    return noise;
}

/// Shared evaluation step: m applications (or the exact fixed point) of
/// T^{lambda,tau}_{pi'|pi}, or of plain T_{pi'} when the evaluation is
/// unregularized, followed by error realization and optional clipping.
/// With GenerativeSample only the outermost application is sampled.
inline EvaluationResult evaluation_core(const TabularMdp& mdp, const PolicyPair& next,
                                        const Eigen::MatrixXd* cur_logs, const QTable& q,
                                        const SchemeConfig& cfg, Rng& rng,
                                        const QTable* forced_error) {
    const double lambda = cfg.regularized_evaluation ? cfg.lambda : 0.0;
    const double tau = cfg.regularized_evaluation ? cfg.tau : 0.0;
    const Eigen::VectorXd c = regularizer_constant(next, cur_logs, lambda, tau);
    const Policy pi_next{next.probs};

    auto one_step_payoff = [&](const QTable& y) -> Eigen::VectorXd {
        return expectation_over_actions(pi_next, y) + c;
    };

    QTable exact;
    QTable pre_final;  // value entering the final (possibly sampled) application
    if (cfg.m == kEvalInfinity) {
        QTable rhs = mdp.reward + mdp.discount * apply_kernel(mdp, c);
        exact = PolicyResolvent(mdp, pi_next).apply(rhs);
    } else {
        QTable y = q;
        for (int i = 0; i + 1 < cfg.m; ++i)
            y = mdp.reward + mdp.discount * apply_kernel(mdp, one_step_payoff(y));
        pre_final = y;
        exact = mdp.reward + mdp.discount * apply_kernel(mdp, one_step_payoff(y));
    }

    QTable realized;
    switch (cfg.error_model) {
        case ErrorModel::None:
            realized = forced_error ? QTable(exact + *forced_error) : exact;
            break;
        case ErrorModel::GenerativeSample: {
            const Eigen::VectorXd w = one_step_payoff(pre_final);
            realized.resize(mdp.num_states, mdp.num_actions);
            for (Eigen::Index s = 0; s < mdp.num_states; ++s)
                for (Eigen::Index a = 0; a < mdp.num_actions; ++a) {
                    const Eigen::Index sp =
                        sample_next_state(mdp, flat_index(s, a, mdp.num_actions), rng);
                    realized(s, a) = mdp.reward(s, a) + mdp.discount * w[sp];
                }
            break;
        }
        case ErrorModel::AdditiveGaussian:
            realized = exact + gaussian_table(mdp.num_states, mdp.num_actions, cfg.noise_sigma, rng);
            break;
    }
    if (cfg.clip_q) {
        const double bound = v_max(mdp);
        realized = realized.cwiseMax(-bound).cwiseMin(bound);
    }
    return EvaluationResult{realized, realized - exact};
}

/// Realize a sampled/noisy version of an exact table update whose stochastic
/// part is the kernel application r + gamma P w; used by the literal named
/// recursions (CVI, DPP, SQL, AdvantageLearning).
inline QTable realize_kernel_update(const TabularMdp& mdp, const Eigen::VectorXd& w,
                                    const QTable& deterministic_part, const QTable& exact,
                                    const SchemeConfig& cfg, Rng& rng,
                                    const QTable* forced_error) {
    switch (cfg.error_model) {
        case ErrorModel::None:
            return forced_error ? QTable(exact + *forced_error) : exact;
        case ErrorModel::GenerativeSample: {
            QTable realized(mdp.num_states, mdp.num_actions);
            for (Eigen::Index s = 0; s < mdp.num_states; ++s)
                for (Eigen::Index a = 0; a < mdp.num_actions; ++a) {
                    const Eigen::Index sp =
                        sample_next_state(mdp, flat_index(s, a, mdp.num_actions), rng);
                    realized(s, a) = mdp.reward(s, a) + mdp.discount * w[sp];
                }
            return realized + deterministic_part;
        }
        case ErrorModel::AdditiveGaussian:
            return exact + gaussian_table(mdp.num_states, mdp.num_actions, cfg.noise_sigma, rng);
    }
    return exact;
}

}  // namespace detail

/// One evaluation step q -> (q', eps): m applications of the (regularized)
/// Bellman operator for the pi'|pi pair, plus the realized error.
inline EvaluationResult evaluation_step(const TabularMdp& mdp, const Policy& pi_next,
                                        const Policy& pi_cur, const QTable& q,
                                        const SchemeConfig& cfg, Rng& rng) {
    check_shape(mdp, pi_next, "evaluation_step");
    check_shape(mdp, q, "evaluation_step");
    const double lambda = cfg.regularized_evaluation ? cfg.lambda : 0.0;
    detail::PolicyPair next{pi_next.probs, pi_next.probs.array().log().matrix()};
    Eigen::MatrixXd cur_logs;
    if (lambda > 0.0) {
        check_shape(mdp, pi_cur, "evaluation_step");
        detail::check_kl_support(pi_next, pi_cur, "evaluation_step");
        cur_logs = pi_cur.probs.array().log().matrix();
    }
    return detail::evaluation_core(mdp, next, lambda > 0.0 ? &cur_logs : nullptr, q, cfg, rng,
                                   nullptr);
}

namespace detail {

class SchemeEngine {
  public:
    SchemeEngine(const TabularMdp& mdp, const SchemeConfig& cfg, Rng& rng,
                 std::span<const QTable> forced_errors)
        : mdp_(mdp), cfg_(cfg), rng_(rng), forced_(forced_errors) {
        mdvi::validate(mdp);
        mdvi::validate(cfg);
        if (!forced_.empty()) {
            if (cfg.error_model != ErrorModel::None)
                throw std::invalid_argument(
                    "run: injected error sequences require error_model = None");
            if (static_cast<int>(forced_.size()) < cfg.iterations)
                throw std::invalid_argument("run: injected error sequence shorter than iterations");
        }
    }

    RunTrace run() {
        trace_.mdp = mdp_;
        trace_.config = cfg_;
        const Eigen::Index S = mdp_.num_states, A = mdp_.num_actions;
        if (cfg_.initial_q) {
            check_shape(mdp_, *cfg_.initial_q, "run: initial_q");
            const bool value_iterate = cfg_.variant != Variant::CVI &&
                                       cfg_.variant != Variant::DPP &&
                                       cfg_.variant != Variant::AdvantageLearning;
            if (value_iterate && cfg_.initial_q->cwiseAbs().maxCoeff() > v_max(mdp_) + 1e-12)
                throw std::invalid_argument("run: ||initial_q||_inf exceeds v_max");
        }
        pi_ = uniform_pair(S, A);
        record_policy(pi_);
        record(trace_.epsilon, QTable::Zero(S, A));
        switch (cfg_.variant) {
            case Variant::MD:
            case Variant::AVI: run_md(); break;
            case Variant::DA: run_da(); break;
            case Variant::MoVI:
            case Variant::MomentumVI: run_averaged_greedy(); break;
            case Variant::SQL: run_sql(); break;
            case Variant::CVI:
            case Variant::DPP:
            case Variant::AdvantageLearning: run_psi(); break;
        }
        return std::move(trace_);
    }

  private:
    QTable initial_table() const {
        return cfg_.initial_q ? *cfg_.initial_q
                              : QTable::Zero(mdp_.num_states, mdp_.num_actions);
    }

    void record(std::vector<QTable>& dest, QTable value) {
        if (cfg_.record_trace) dest.push_back(std::move(value));
    }

    void record_policy(const PolicyPair& p) { trace_.policies.push_back(Policy{p.probs}); }

    const QTable* forced_at(int k) const {
        return forced_.empty() ? nullptr : &forced_[static_cast<std::size_t>(k)];
    }

    void step_eval(const PolicyPair& next, int k, QTable& q) {
        EvaluationResult res = evaluation_core(
            mdp_, next, cfg_.lambda > 0.0 && cfg_.regularized_evaluation ? &pi_.logs : nullptr, q,
            cfg_, rng_, forced_at(k));
        q = std::move(res.value);
        record(trace_.epsilon, std::move(res.error));
    }

    // pi_{k+1} = G^{lambda,tau}_{pi_k}(q_k); q_{k+1} = (T^{lambda,tau}_{pi_{k+1}|pi_k})^m q_k + eps.
    // With lambda = tau = 0 this is plain (approximate) value iteration.
    void run_md() {
        QTable q = initial_table();
        record(trace_.q, q);
        const double temp = cfg_.lambda + cfg_.tau;
        for (int k = 0; k < cfg_.iterations; ++k) {
            PolicyPair next = temp > 0.0
                                  ? softmax_pair((cfg_.lambda * pi_.logs + q) / temp)
                                  : hard_pair(q);
            step_eval(next, k, q);
            record(trace_.q, q);
            record_policy(next);
            pi_ = std::move(next);
        }
    }

    // tau = 0:  pi_{k+1} = G^{0,lambda/(k+1)}(h_k), h_{k+1} = ((k+1) h_k + q_{k+1})/(k+2), h_0 = q_0.
    // tau > 0:  pi_{k+1} = G^{0,tau}(h_k), h_{k+1} = beta h_k + (1-beta) q_{k+1}, h_{-1} = 0.
    void run_da() {
        QTable q = initial_table();
        const bool averaging = cfg_.tau == 0.0;
        const double beta = averaging ? 0.0 : cfg_.beta();
        QTable h = averaging ? q : QTable((1.0 - beta) * q);
        record(trace_.q, q);
        record(trace_.h, h);
        for (int k = 0; k < cfg_.iterations; ++k) {
            PolicyPair next = averaging
                                  ? softmax_pair(h * (static_cast<double>(k + 1) / cfg_.lambda))
                                  : softmax_pair(h / cfg_.tau);
            step_eval(next, k, q);
            if (averaging)
                h = (static_cast<double>(k + 1) * h + q) / static_cast<double>(k + 2);
            else
                h = beta * h + (1.0 - beta) * q;
            record(trace_.q, q);
            record(trace_.h, h);
            record_policy(next);
            pi_ = std::move(next);
        }
    }

    // MoVI: hard-greedy over the running average of q-tables.
    // MomentumVI: hard-greedy over the beta moving average (fixed beta).
    void run_averaged_greedy() {
        QTable q = initial_table();
        const bool movi = cfg_.variant == Variant::MoVI;
        const double beta = movi ? 0.0 : cfg_.beta();
        QTable h = movi ? q : QTable((1.0 - beta) * q);
        record(trace_.q, q);
        record(trace_.h, h);
        for (int k = 0; k < cfg_.iterations; ++k) {
            PolicyPair next = hard_pair(h);
            step_eval(next, k, q);
            if (movi)
                h = (static_cast<double>(k + 1) * h + q) / static_cast<double>(k + 2);
            else
                h = beta * h + (1.0 - beta) * q;
            record(trace_.q, q);
            record(trace_.h, h);
            record_policy(next);
            pi_ = std::move(next);
        }
    }

    // h_{k+1} = (1 - 1/(k+2)) h_k + (1/(k+2)) ((k+1) T* h_k - k T* h_{k-1});
    // under generative sampling both optimality backups reuse one draw per (s,a).
    void run_sql() {
        const Eigen::Index S = mdp_.num_states, A = mdp_.num_actions;
        QTable h = initial_table();
        QTable h_prev = h;
        record(trace_.h, h);
        for (int k = 0; k < cfg_.iterations; ++k) {
            PolicyPair next = hard_pair(h);
            const Eigen::VectorXd w = h.rowwise().maxCoeff();
            const Eigen::VectorXd w_prev = h_prev.rowwise().maxCoeff();
            QTable t_cur = mdp_.reward + mdp_.discount * apply_kernel(mdp_, w);
            QTable t_prev = mdp_.reward + mdp_.discount * apply_kernel(mdp_, w_prev);
            const double alpha = 1.0 / static_cast<double>(k + 2);
            const double kk = static_cast<double>(k);
            QTable exact = (1.0 - alpha) * h + alpha * ((kk + 1.0) * t_cur - kk * t_prev);
            QTable realized;
            switch (cfg_.error_model) {
                case ErrorModel::None:
                    realized = forced_at(k) ? QTable(exact + *forced_at(k)) : exact;
                    break;
                case ErrorModel::GenerativeSample: {
                    QTable s_cur(S, A), s_prev(S, A);
                    for (Eigen::Index s = 0; s < S; ++s)
                        for (Eigen::Index a = 0; a < A; ++a) {
                            const Eigen::Index sp = sample_next_state(mdp_, flat_index(s, a, A), rng_);
                            s_cur(s, a) = mdp_.reward(s, a) + mdp_.discount * w[sp];
                            s_prev(s, a) = mdp_.reward(s, a) + mdp_.discount * w_prev[sp];
                        }
                    realized = (1.0 - alpha) * h + alpha * ((kk + 1.0) * s_cur - kk * s_prev);
                    break;
                }
                case ErrorModel::AdditiveGaussian:
                    realized = exact + gaussian_table(S, A, cfg_.noise_sigma, rng_);
                    break;
            }
            record(trace_.epsilon, realized - exact);
            h_prev = std::move(h);
            h = std::move(realized);
            record(trace_.h, h);
            record_policy(next);
            pi_ = std::move(next);
        }
    }

    // CVI: psi_{k+1} = r + gamma P v_k + beta (psi_k - v_k), v_k = (lambda+tau) lse(psi_k/(lambda+tau)).
    // DPP: same with beta = 1 and v_k = <pi_k, psi_k>, pi_k = softmax(psi_k/lambda).
    // AdvantageLearning: the (lambda+tau) -> 0 limit, v_k = max_a psi_k, fixed beta.
    void run_psi() {
        const Eigen::Index S = mdp_.num_states, A = mdp_.num_actions;
        QTable psi = initial_table();
        record(trace_.psi, psi);
        for (int k = 0; k < cfg_.iterations; ++k) {
            Eigen::VectorXd v(S);
            double mix = 0.0;
            switch (cfg_.variant) {
                case Variant::CVI: {
                    const double temp = cfg_.lambda + cfg_.tau;
                    v = temp * logsumexp_rows(psi / temp);
                    mix = cfg_.beta();
                    break;
                }
                case Variant::DPP: {
                    PolicyPair cur = softmax_pair(psi / cfg_.lambda);
                    v = expectation_over_actions(Policy{cur.probs}, psi);
                    mix = 1.0;
                    break;
                }
                default: {  // AdvantageLearning
                    v = psi.rowwise().maxCoeff();
                    mix = cfg_.beta();
                    break;
                }
            }
            QTable deterministic = mix * (psi - v.replicate(1, A));
            QTable exact = mdp_.reward + mdp_.discount * apply_kernel(mdp_, v) + deterministic;
            QTable realized = realize_kernel_update(mdp_, v, deterministic, exact, cfg_, rng_,
                                                    forced_at(k));
            record(trace_.epsilon, realized - exact);
            psi = std::move(realized);
            record(trace_.psi, psi);
            PolicyPair next = policy_of_psi(psi);
            record_policy(next);
            pi_ = std::move(next);
        }
    }

    PolicyPair policy_of_psi(const QTable& psi) const {
        switch (cfg_.variant) {
            case Variant::CVI: return softmax_pair(psi / (cfg_.lambda + cfg_.tau));
            case Variant::DPP: return softmax_pair(psi / cfg_.lambda);
            default: return hard_pair(psi);
        }
    }

    const TabularMdp& mdp_;
    const SchemeConfig& cfg_;
    Rng& rng_;
    std::span<const QTable> forced_;
    PolicyPair pi_;
    RunTrace trace_;
};

}  // namespace detail

/// Run any configured scheme for config.iterations steps.
inline RunTrace run_scheme(const TabularMdp& mdp, const SchemeConfig& cfg, Rng& rng,
                           std::span<const QTable> injected_errors = {}) {
    return detail::SchemeEngine(mdp, cfg, rng, injected_errors).run();
}

inline RunTrace run_md(const TabularMdp& mdp, const SchemeConfig& cfg, Rng& rng,
                       std::span<const QTable> injected_errors = {}) {
    if (cfg.variant != Variant::MD)
        throw std::invalid_argument("run_md: config variant is not MD");
    return run_scheme(mdp, cfg, rng, injected_errors);
}

inline RunTrace run_da(const TabularMdp& mdp, const SchemeConfig& cfg, Rng& rng,
                       std::span<const QTable> injected_errors = {}) {
    if (cfg.variant != Variant::DA)
        throw std::invalid_argument("run_da: config variant is not DA");
    return run_scheme(mdp, cfg, rng, injected_errors);
}

inline RunTrace run_variant(const TabularMdp& mdp, const SchemeConfig& cfg, Rng& rng,
                            std::span<const QTable> injected_errors = {}) {
    if (cfg.variant == Variant::MD || cfg.variant == Variant::DA)
        throw std::invalid_argument("run_variant: use run_md/run_da for MD/DA configs");
    return run_scheme(mdp, cfg, rng, injected_errors);
}

}  // namespace mdvi
