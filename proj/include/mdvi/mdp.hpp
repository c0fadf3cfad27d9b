#pragma once

#include "mdvi/regularization.hpp"
#include "mdvi/rng.hpp"
#include "mdvi/types.hpp"

#include <Eigen/LU>

#include <utility>

namespace mdvi {

namespace detail {

/// Regularized one-step payoff per state,
///   w(s) = sum_a pi'(a|s) (q(s,a) - lambda (ln pi'(a|s) - ln mu(a|s)) - tau ln pi'(a|s)),
/// computed from explicit log-policies. Finite logs keep the sum well defined
/// even where probabilities have underflowed to zero (those terms are 0 by
/// the 0 ln 0 convention).
inline Eigen::VectorXd payoff_from_logs(const QTable& q, const Eigen::MatrixXd& probs,
                                        const Eigen::MatrixXd& logs,
                                        const Eigen::MatrixXd* anchor_logs, double lambda,
                                        double tau) {
    Eigen::VectorXd w(q.rows());
    for (Eigen::Index s = 0; s < q.rows(); ++s) {
        double acc = 0.0;
        for (Eigen::Index a = 0; a < q.cols(); ++a) {
            const double p = probs(s, a);
            if (p <= kZeroProb) continue;
            double term = q(s, a);
            if (lambda > 0.0) term -= lambda * (logs(s, a) - (*anchor_logs)(s, a));
            if (tau > 0.0) term -= tau * logs(s, a);
            acc += p * term;
        }
        w[s] = acc;
    }
    return w;
}

/// Log-policy for an externally supplied Policy; zero probabilities map to
/// -inf, which payoff_from_logs never touches (their weight is zero) unless
/// they violate the KL support precondition, checked by callers.
inline Eigen::MatrixXd logs_of(const Policy& pi) {
    return pi.probs.array().log().matrix();
}

inline void check_kl_support(const Policy& pi, const Policy& mu, const char* who) {
    for (Eigen::Index s = 0; s < pi.probs.rows(); ++s)
        for (Eigen::Index a = 0; a < pi.probs.cols(); ++a)
            if (pi.probs(s, a) > kZeroProb && mu.probs(s, a) <= kZeroProb)
                throw std::domain_error(std::string(who) +
                                        ": KL undefined, pi puts mass where mu is zero (state " +
                                        std::to_string(s) + ")");
}

/// One next-state draw from kernel row (s, a) by inverse CDF walk.
inline Eigen::Index sample_next_state(const TabularMdp& mdp, Eigen::Index row, Rng& rng) {
    const double u = rng.uniform01();
    double acc = 0.0;
    Eigen::Index last_positive = 0;
    for (Eigen::Index sp = 0; sp < mdp.num_states; ++sp) {
        const double p = mdp.kernel(row, sp);
        if (p <= 0.0) continue;
        last_positive = sp;
        acc += p;
        if (u < acc) return sp;
    }
    return last_positive;  // guards against acc summing to 1 - ulp
}

}  // namespace detail

/// T_pi q = r + gamma P <pi, q>.
inline QTable bellman_apply(const TabularMdp& mdp, const Policy& pi, const QTable& q) {
    check_shape(mdp, pi, "bellman_apply");
    check_shape(mdp, q, "bellman_apply");
    return mdp.reward + mdp.discount * apply_transition(mdp, pi, q);
}

/// T^{lambda,tau}_{pi|mu} q = r + gamma P (<pi,q> - lambda KL(pi||mu) + tau H(pi)).
/// Reduces to bellman_apply when lambda = tau = 0.
inline QTable regularized_bellman_apply(const TabularMdp& mdp, const Policy& pi, const Policy& mu,
                                        double lambda, double tau, const QTable& q) {
    check_shape(mdp, pi, "regularized_bellman_apply");
    check_shape(mdp, q, "regularized_bellman_apply");
    if (lambda > 0.0) {
        check_shape(mdp, mu, "regularized_bellman_apply");
        detail::check_kl_support(pi, mu, "regularized_bellman_apply");
    }
    Eigen::MatrixXd logs = detail::logs_of(pi);
    Eigen::MatrixXd anchor_logs;
    if (lambda > 0.0) anchor_logs = detail::logs_of(mu);
    Eigen::VectorXd w = detail::payoff_from_logs(q, pi.probs, logs,
                                                 lambda > 0.0 ? &anchor_logs : nullptr, lambda,
                                                 tau);
    return mdp.reward + mdp.discount * apply_kernel(mdp, w);
}

/// LU factorization of (I - gamma P_pi), reusable across right-hand sides.
class PolicyResolvent {
  public:
    PolicyResolvent(const TabularMdp& mdp, const Policy& pi)
        : num_states_(mdp.num_states), num_actions_(mdp.num_actions) {
        const Eigen::Index sa = static_cast<Eigen::Index>(mdp.num_states) * mdp.num_actions;
        Eigen::MatrixXd system = Eigen::MatrixXd::Identity(sa, sa) -
                                 mdp.discount * transition_matrix(mdp, pi);
        lu_.compute(system);
    }

    /// (I - gamma P_pi)^{-1} rhs.
    QTable apply(const QTable& rhs) const {
        Eigen::VectorXd x = lu_.solve(table_to_flat(rhs));
        return flat_to_table(x, num_states_, num_actions_);
    }

  private:
    Eigen::Index num_states_;
    Eigen::Index num_actions_;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

/// Exact fixed point of T_pi: solves (I - gamma P_pi) q = r directly.
inline QTable policy_value(const TabularMdp& mdp, const Policy& pi) {
    check_shape(mdp, pi, "policy_value");
    return PolicyResolvent(mdp, pi).apply(mdp.reward);
}

/// Exact fixed point of T^{0,tau}_pi: solves
/// (I - gamma P_pi) q = r + gamma tau P H(pi).
inline QTable regularized_policy_value(const TabularMdp& mdp, const Policy& pi, double tau) {
    check_shape(mdp, pi, "regularized_policy_value");
    if (tau == 0.0) return policy_value(mdp, pi);
    QTable rhs = mdp.reward + mdp.discount * apply_kernel(mdp, tau * entropy(pi));
    return PolicyResolvent(mdp, pi).apply(rhs);
}

struct OptimalSolution {
    QTable q;
    Policy pi;
};

/// Optimal q-function and greedy policy of the (tau-regularized) MDP.
///
/// Iterates q <- r + gamma P Omega_tau(q), with Omega_0 the row max and
/// Omega_tau the tau-scaled log-sum-exp, until the sup-norm change is at most
/// tol (1-gamma) / (2 gamma), which pins the distance to the fixed point to
/// tol/2; a Bellman-residual check certifies the result.
inline OptimalSolution optimal_value(const TabularMdp& mdp, double tau, double tol = 1e-10) {
    if (tol <= 0.0) throw std::invalid_argument("optimal_value: tol must be positive");
    const double gamma = mdp.discount;
    const double stop = tol * (1.0 - gamma) / (2.0 * gamma);
    auto omega = [&](const QTable& q) -> Eigen::VectorXd {
        if (tau == 0.0) return q.rowwise().maxCoeff();
        return tau * detail::logsumexp_rows(q / tau);
    };
    QTable q = QTable::Zero(mdp.num_states, mdp.num_actions);
    constexpr long kMaxIterations = 5'000'000;
    for (long it = 0; it < kMaxIterations; ++it) {
        QTable next = mdp.reward + gamma * apply_kernel(mdp, omega(q));
        const double change = (next - q).cwiseAbs().maxCoeff();
        q = std::move(next);
        if (change <= stop) break;
    }
    const double residual =
        (mdp.reward + gamma * apply_kernel(mdp, omega(q)) - q).cwiseAbs().maxCoeff();
    if (residual > tol)
        throw std::runtime_error("optimal_value: Bellman residual " + std::to_string(residual) +
                                 " exceeds tolerance");
    Policy pi = (tau == 0.0) ? hard_greedy(q)
                             : regularized_greedy(q, uniform_policy(mdp.num_states,
                                                                    mdp.num_actions),
                                                  GreedyParams{0.0, tau});
    return OptimalSolution{std::move(q), std::move(pi)};
}

struct SampledBackup {
    QTable value;  // one-sample estimate of the regularized backup
    QTable error;  // value - exact backup on the same inputs
};

/// One-sample generative-model version of regularized_bellman_apply: for each
/// (s, a) a single next state is drawn and the per-state payoff is evaluated
/// there instead of in expectation. The returned error table is exactly
/// sampled minus exact, a martingale difference across iterations.
inline SampledBackup sampled_regularized_bellman(const TabularMdp& mdp, const Policy& pi,
                                                 const Policy& mu, double lambda, double tau,
                                                 const QTable& q, Rng& rng) {
    check_shape(mdp, pi, "sampled_regularized_bellman");
    check_shape(mdp, q, "sampled_regularized_bellman");
    if (lambda > 0.0) {
        check_shape(mdp, mu, "sampled_regularized_bellman");
        detail::check_kl_support(pi, mu, "sampled_regularized_bellman");
    }
    Eigen::MatrixXd logs = detail::logs_of(pi);
    Eigen::MatrixXd anchor_logs;
    if (lambda > 0.0) anchor_logs = detail::logs_of(mu);
    Eigen::VectorXd w = detail::payoff_from_logs(q, pi.probs, logs,
                                                 lambda > 0.0 ? &anchor_logs : nullptr, lambda,
                                                 tau);
    QTable exact = mdp.reward + mdp.discount * apply_kernel(mdp, w);
    QTable sampled(mdp.num_states, mdp.num_actions);
    for (Eigen::Index s = 0; s < mdp.num_states; ++s)
        for (Eigen::Index a = 0; a < mdp.num_actions; ++a) {
            const Eigen::Index sp =
                detail::sample_next_state(mdp, flat_index(s, a, mdp.num_actions), rng);
            sampled(s, a) = mdp.reward(s, a) + mdp.discount * w[sp];
        }
    return SampledBackup{sampled, sampled - exact};
}

}  // namespace mdvi
