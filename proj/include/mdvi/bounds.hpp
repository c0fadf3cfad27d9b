#pragma once

#include "mdvi/schemes.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace mdvi {

/// Absolute slack tolerance for bound certification: violations above it are
/// failures, violations inside (-atol, 0) count as round-off.
inline constexpr double kCertifyAtol = 1e-8;

/// Initialization-decay rate of the tau = 0 bound:
/// g1(k) = (4 / (1-gamma)) v^lambda_max / k.
inline double g1(int k, double gamma, double lambda, double r_max, int num_actions) {
    if (k < 1) throw std::invalid_argument("g1: k must be >= 1");
    const double v_lambda = (r_max + lambda * std::log(static_cast<double>(num_actions))) /
                            (1.0 - gamma);
    return 4.0 / (1.0 - gamma) * v_lambda / static_cast<double>(k);
}

/// Initialization-decay rate of the tau > 0 bound:
/// g2(k) = gamma^k (1 + (1-beta)/(1-gamma)) sum_{j=0..k} (beta/gamma)^j v^tau_max,
/// evaluated through the closed forms ((beta^{k+1}-gamma^{k+1})/(beta-gamma),
/// or 2(k+1)gamma^k when beta = gamma).
inline double g2(int k, double gamma, double beta, double v_max_tau) {
    if (k < 0) throw std::invalid_argument("g2: k must be >= 0");
    if (beta < 0.0 || beta > 1.0) throw std::invalid_argument("g2: beta must lie in [0, 1]");
    if (std::abs(beta - gamma) <= 1e-12)
        return 2.0 * static_cast<double>(k + 1) * std::pow(gamma, k) * v_max_tau;
    const double factor = 1.0 + (1.0 - beta) / (1.0 - gamma);
    return factor * (std::pow(beta, k + 1) - std::pow(gamma, k + 1)) / (beta - gamma) * v_max_tau;
}

/// One certified iteration: component-wise lhs <= rhs with slack tables and
/// the l-infinity corollary pair.
struct BoundCheck {
    int k = 0;
    QTable lhs;
    QTable rhs;
    QTable slack;  // rhs - lhs
    double min_slack = 0.0;
    bool certified = false;
    double rate = 0.0;  // g1(k) or g2(k)
    double linf_lhs = 0.0;
    double linf_rhs = 0.0;
};

struct BoundReport {
    int theorem = 0;
    double atol = kCertifyAtol;
    bool certified = false;
    double min_slack = 0.0;
    bool lhs_nonnegative = false;  // min lhs entry >= -1e-9 (optimality sanity)
    std::vector<BoundCheck> checks;
};

/// Normalized l1 performance gap ||q_opt - q^tau_pi||_1 / ||q_opt||_1.
inline double normalized_error(const TabularMdp& mdp, const Policy& pi, const QTable& q_opt,
                               double tau) {
    const double denom = q_opt.cwiseAbs().sum();
    if (denom == 0.0)
        throw std::domain_error("normalized_error: ||q_opt||_1 = 0 (degenerate MDP)");
    const QTable q_pi = regularized_policy_value(mdp, pi, tau);
    return (q_opt - q_pi).cwiseAbs().sum() / denom;
}

/// Solve and cache the exact targets a trace is certified against.
inline void attach_targets(RunTrace& trace) {
    if (!trace.target_plain) trace.target_plain = optimal_value(trace.mdp, 0.0);
    if (trace.config.tau > 0.0 && !trace.target_regularized)
        trace.target_regularized = optimal_value(trace.mdp, trace.config.tau);
}

inline double normalized_error(const RunTrace& trace, int k, double tau) {
    if (k < 0 || k >= static_cast<int>(trace.policies.size()))
        throw std::out_of_range("normalized_error: iteration index outside trace");
    const QTable* q_opt = nullptr;
    QTable computed;
    if (tau == 0.0 && trace.target_plain) {
        q_opt = &trace.target_plain->q;
    } else if (tau > 0.0 && trace.target_regularized && trace.config.tau == tau) {
        q_opt = &trace.target_regularized->q;
    } else {
        computed = optimal_value(trace.mdp, tau).q;
        q_opt = &computed;
    }
    return normalized_error(trace.mdp, trace.policies[k], *q_opt, tau);
}

namespace detail {

inline void require_certifiable(const RunTrace& trace, bool want_tau_positive, int theorem) {
    const SchemeConfig& cfg = trace.config;
    const std::string who = "certify_thm" + std::to_string(theorem);
    if (cfg.variant != Variant::MD && cfg.variant != Variant::DA)
        throw std::invalid_argument(who + ": trace variant not covered (need MD or DA)");
    if (want_tau_positive ? cfg.tau <= 0.0 : cfg.tau != 0.0)
        throw std::invalid_argument(who + ": trace tau not in the theorem's scope");
    if (cfg.m != 1) throw std::invalid_argument(who + ": theorem covers m = 1 only");
    if (!cfg.regularized_evaluation)
        throw std::invalid_argument(who + ": theorem requires regularized evaluation");
    const std::size_t want = static_cast<std::size_t>(cfg.iterations) + 1;
    if (trace.policies.size() != want || trace.epsilon.size() != want)
        throw std::runtime_error(who + ": trace is missing policies or error tables");
}

}  // namespace detail

/// Certify 0 <= q* - q_{pi_k} <= |A^1_k E_k / k| + g1(k) 1 at every stride-th
/// k >= 1 of a tau = 0 trace, with A^1_k applied through two linear solves
/// and E_k = -sum_{j<=k} eps_j.
inline BoundReport certify_thm1(const RunTrace& trace, int stride = 1) {
    detail::require_certifiable(trace, false, 1);
    if (trace.config.lambda <= 0.0)
        throw std::invalid_argument("certify_thm1: trace lambda must be positive");
    if (stride < 1) throw std::invalid_argument("certify_thm1: stride must be >= 1");
    const TabularMdp& mdp = trace.mdp;
    const OptimalSolution target =
        trace.target_plain ? *trace.target_plain : optimal_value(mdp, 0.0);
    PolicyResolvent resolvent_star(mdp, target.pi);

    BoundReport report;
    report.theorem = 1;
    report.min_slack = std::numeric_limits<double>::infinity();
    double lhs_min = std::numeric_limits<double>::infinity();
    const int iterations = trace.config.iterations;
    QTable cumulative = QTable::Zero(mdp.num_states, mdp.num_actions);
    for (int k = 1; k <= iterations; ++k) {
        cumulative -= trace.epsilon[static_cast<std::size_t>(k)];
        if (k % stride != 0 && k != iterations) continue;
        PolicyResolvent resolvent_k(mdp, trace.policies[static_cast<std::size_t>(k)]);
        const QTable scaled = cumulative / static_cast<double>(k);
        BoundCheck check;
        check.k = k;
        check.rate = g1(k, mdp.discount, trace.config.lambda, mdp.r_max, mdp.num_actions);
        check.lhs = target.q - resolvent_k.apply(mdp.reward);
        check.rhs = (resolvent_star.apply(scaled) - resolvent_k.apply(scaled)).cwiseAbs().eval();
        check.rhs.array() += check.rate;
        check.slack = check.rhs - check.lhs;
        check.min_slack = check.slack.minCoeff();
        check.certified = check.min_slack >= -report.atol;
        check.linf_lhs = check.lhs.cwiseAbs().maxCoeff();
        check.linf_rhs = 2.0 / (1.0 - mdp.discount) * scaled.cwiseAbs().maxCoeff() + check.rate;
        report.min_slack = std::min(report.min_slack, check.min_slack);
        lhs_min = std::min(lhs_min, check.lhs.minCoeff());
        report.checks.push_back(std::move(check));
    }
    report.certified = report.min_slack >= -report.atol;
    report.lhs_nonnegative = lhs_min >= -1e-9;
    return report;
}

/// Certify 0 <= q*^tau - q^tau_{pi_{k+1}} <= sum_j gamma^{k-j} |A^2_{k:j} E^beta_j| + g2(k) 1
/// at every stride-th k of a tau > 0 trace.
///
/// A^2_{k:j} = P_{pi*^tau}^{k-j} - (I - gamma P_{pi_{k+1}})^{-1} P_{k:j+1} (I - gamma P_{pi_j});
/// the minus sign is what the telescoping derivation yields (expanding
/// T_pi(y - e) - (y - e) produces + (I - gamma P_pi) e), and the version with
/// a plus admits numerical counterexamples. E^beta_j is the beta moving
/// average of the error tables. Kernel products are applied vector-wise,
/// never formed as matrices; cost is O(k) kernel applications per j.
inline BoundReport certify_thm2(const RunTrace& trace, int stride = 1) {
    detail::require_certifiable(trace, true, 2);
    if (stride < 1) throw std::invalid_argument("certify_thm2: stride must be >= 1");
    const TabularMdp& mdp = trace.mdp;
    const double tau = trace.config.tau;
    const double beta = trace.config.beta();
    const double gamma = mdp.discount;
    const OptimalSolution target =
        trace.target_regularized ? *trace.target_regularized : optimal_value(mdp, tau);

    const int iterations = trace.config.iterations;
    std::vector<QTable> weighted_errors(static_cast<std::size_t>(iterations) + 1);
    weighted_errors[0] = QTable::Zero(mdp.num_states, mdp.num_actions);
    for (int j = 1; j <= iterations; ++j)
        weighted_errors[static_cast<std::size_t>(j)] =
            beta * weighted_errors[static_cast<std::size_t>(j - 1)] +
            (1.0 - beta) * trace.epsilon[static_cast<std::size_t>(j)];

    BoundReport report;
    report.theorem = 2;
    report.min_slack = std::numeric_limits<double>::infinity();
    double lhs_min = std::numeric_limits<double>::infinity();
    const double v_tau = v_max_tau(mdp, tau);
    for (int k = 0; k < iterations; ++k) {
        if (k % stride != 0) continue;
        const Policy& pi_next = trace.policies[static_cast<std::size_t>(k + 1)];
        PolicyResolvent resolvent_next(mdp, pi_next);
        QTable error_term = QTable::Zero(mdp.num_states, mdp.num_actions);
        double linf_error = 0.0;
        for (int j = 1; j <= k; ++j) {
            const QTable& ej = weighted_errors[static_cast<std::size_t>(j)];
            QTable chained = ej;  // becomes P_{k:j+1} E^beta_j
            QTable shifted =
                apply_transition(mdp, trace.policies[static_cast<std::size_t>(j)], ej);
            for (int i = j + 1; i <= k; ++i) {
                const Policy& pi_i = trace.policies[static_cast<std::size_t>(i)];
                chained = apply_transition(mdp, pi_i, chained);
                shifted = apply_transition(mdp, pi_i, shifted);
            }
            QTable direct = ej;  // becomes P_{pi*^tau}^{k-j} E^beta_j
            for (int i = 0; i < k - j; ++i) direct = apply_transition(mdp, target.pi, direct);
            const QTable applied = direct - resolvent_next.apply(chained - gamma * shifted);
            const double weight = std::pow(gamma, k - j);
            error_term += weight * applied.cwiseAbs();
            linf_error += weight * ej.cwiseAbs().maxCoeff();
        }
        BoundCheck check;
        check.k = k;
        check.rate = g2(k, gamma, beta, v_tau);
        QTable rhs_reg = mdp.reward + mdp.discount * apply_kernel(mdp, tau * entropy(pi_next));
        check.lhs = target.q - resolvent_next.apply(rhs_reg);
        check.rhs = error_term;
        check.rhs.array() += check.rate;
        check.slack = check.rhs - check.lhs;
        check.min_slack = check.slack.minCoeff();
        check.certified = check.min_slack >= -report.atol;
        check.linf_lhs = check.lhs.cwiseAbs().maxCoeff();
        check.linf_rhs = 2.0 / ((1.0 - gamma) * (1.0 - gamma)) * (1.0 - gamma) * linf_error +
                         check.rate;
        report.min_slack = std::min(report.min_slack, check.min_slack);
        lhs_min = std::min(lhs_min, check.lhs.minCoeff());
        report.checks.push_back(std::move(check));
    }
    report.certified = report.min_slack >= -report.atol;
    report.lhs_nonnegative = lhs_min >= -1e-9;
    return report;
}

}  // namespace mdvi
