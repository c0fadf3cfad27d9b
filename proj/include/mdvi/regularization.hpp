#pragma once

#include "mdvi/types.hpp"

#include <atomic>
#include <cstdio>
#include <limits>

namespace mdvi {

/// Scales of the two greedy-step penalties: lambda for the KL to the anchor
/// policy, tau for the entropy bonus.
struct GreedyParams {
    double lambda = 0.0;
    double tau = 0.0;

    /// Mixing weight lambda / (lambda + tau); only defined when lambda+tau > 0.
    double beta() const {
        if (lambda + tau <= 0.0)
            throw std::invalid_argument("GreedyParams::beta: lambda + tau must be positive");
        return lambda / (lambda + tau);
    }
};

/// Probabilities at or below this threshold are treated as exact zeros in
/// entropy/KL sums and support checks.
inline constexpr double kZeroProb = 1e-300;

/// Absolute tolerance for argmax ties in hard_greedy.
inline constexpr double kTieTol = 1e-12;

/// Below this temperature the regularized greedy step degenerates to the
/// hard one and is routed there instead of dividing by a denormal.
inline constexpr double kMinTemperature = 1e-12;

namespace detail {

struct SoftmaxRows {
    Eigen::MatrixXd probs;
    Eigen::MatrixXd log_probs;
};

/// Row-wise stabilized softmax plus exact log-probabilities. Logits may
/// contain -inf (excluded actions); each row must have at least one finite
/// entry. Probabilities are renormalized after exponentiation to kill 1-ulp
/// drift.
inline SoftmaxRows log_softmax_rows(const Eigen::MatrixXd& logits) {
    SoftmaxRows out;
    out.probs.resize(logits.rows(), logits.cols());
    out.log_probs.resize(logits.rows(), logits.cols());
    for (Eigen::Index s = 0; s < logits.rows(); ++s) {
        const double m = logits.row(s).maxCoeff();
        Eigen::ArrayXd shifted = logits.row(s).array() - m;
        Eigen::ArrayXd e = shifted.exp();
        const double z = e.sum();
        out.probs.row(s) = (e / z).matrix();
        out.log_probs.row(s) = (shifted - std::log(z)).matrix();
        const double total = out.probs.row(s).sum();
        out.probs.row(s) /= total;
    }
    return out;
}

/// log sum_a exp(logits(s,a)) per state, max-subtracted.
inline Eigen::VectorXd logsumexp_rows(const Eigen::MatrixXd& logits) {
    Eigen::VectorXd out(logits.rows());
    for (Eigen::Index s = 0; s < logits.rows(); ++s) {
        const double m = logits.row(s).maxCoeff();
        out[s] = m + std::log((logits.row(s).array() - m).exp().sum());
    }
    return out;
}

inline void warn_temperature_underflow() {
    static std::atomic<bool> warned{false};
    if (!warned.exchange(true))
        std::fprintf(stderr,
                     "mdvi: regularized_greedy called with 0 < lambda+tau < 1e-12; "
                     "falling back to hard_greedy\n");
}

inline void require_positive_anchor(const Policy& mu, const char* who) {
    if ((mu.probs.array() <= kZeroProb).any())
        throw std::domain_error(std::string(who) +
                                ": anchor policy has zero-probability actions while lambda > 0");
}

}  // namespace detail

/// Shannon entropy per state, H(pi)(s) = -sum_a pi(a|s) ln pi(a|s), with
/// 0 ln 0 := 0.
inline Eigen::VectorXd entropy(const Policy& pi) {
    Eigen::VectorXd out(pi.num_states());
    for (Eigen::Index s = 0; s < pi.num_states(); ++s) {
        double h = 0.0;
        for (Eigen::Index a = 0; a < pi.num_actions(); ++a) {
            const double p = pi.probs(s, a);
            if (p > kZeroProb) h -= p * std::log(p);
        }
        out[s] = h;
    }
    return out;
}

/// KL(p1 || p2) per state. Requires p2 > 0 wherever p1 > 0.
inline Eigen::VectorXd kl_divergence(const Policy& p1, const Policy& p2) {
    if (p1.probs.rows() != p2.probs.rows() || p1.probs.cols() != p2.probs.cols())
        throw std::invalid_argument("kl_divergence: shape mismatch");
    Eigen::VectorXd out(p1.num_states());
    for (Eigen::Index s = 0; s < p1.num_states(); ++s) {
        double kl = 0.0;
        for (Eigen::Index a = 0; a < p1.num_actions(); ++a) {
            const double p = p1.probs(s, a);
            if (p <= kZeroProb) continue;
            const double q = p2.probs(s, a);
            if (q <= kZeroProb)
                throw std::domain_error("kl_divergence: support violation at state " +
                                        std::to_string(s));
            kl += p * (std::log(p) - std::log(q));
        }
        out[s] = kl;
    }
    return out;
}

/// Unregularized greedy step: uniform distribution over the per-state argmax
/// set (ties within kTieTol).
inline Policy hard_greedy(const QTable& q) {
    Policy pi{Eigen::MatrixXd::Zero(q.rows(), q.cols())};
    for (Eigen::Index s = 0; s < q.rows(); ++s) {
        const double m = q.row(s).maxCoeff();
        Eigen::Index ties = 0;
        for (Eigen::Index a = 0; a < q.cols(); ++a)
            if (q(s, a) >= m - kTieTol) ++ties;
        for (Eigen::Index a = 0; a < q.cols(); ++a)
            if (q(s, a) >= m - kTieTol) pi.probs(s, a) = 1.0 / static_cast<double>(ties);
    }
    return pi;
}

/// Maximizer of <pi, q> - lambda KL(pi||mu) + tau H(pi) over per-state
/// simplices. Closed form: softmax of (lambda ln mu + q) / (lambda + tau),
/// computed in log space.
inline Policy regularized_greedy(const QTable& q, const Policy& mu, const GreedyParams& params) {
    const double temp = params.lambda + params.tau;
    if (temp == 0.0)
        throw std::invalid_argument("regularized_greedy: lambda + tau = 0, use hard_greedy");
    if (temp < kMinTemperature) {
        detail::warn_temperature_underflow();
        return hard_greedy(q);
    }
    Eigen::MatrixXd logits;
    if (params.lambda > 0.0) {
        detail::require_positive_anchor(mu, "regularized_greedy");
        logits = (params.lambda * mu.probs.array().log() + q.array()) / temp;
    } else {
        logits = q / temp;
    }
    return Policy{detail::log_softmax_rows(logits).probs};
}

/// Maximum of the regularized objective,
/// (lambda + tau) ln < mu^{lambda/(lambda+tau)}, exp(q / (lambda+tau)) >.
inline Eigen::VectorXd regularized_max(const QTable& q, const Policy& mu,
                                       const GreedyParams& params) {
    const double temp = params.lambda + params.tau;
    if (temp == 0.0)
        throw std::invalid_argument("regularized_max: lambda + tau = 0");
    if (temp < kMinTemperature) {
        detail::warn_temperature_underflow();
        return q.rowwise().maxCoeff();
    }
    Eigen::MatrixXd logits;
    if (params.lambda > 0.0) {
        detail::require_positive_anchor(mu, "regularized_max");
        logits = (params.lambda * mu.probs.array().log() + q.array()) / temp;
    } else {
        logits = q / temp;
    }
    return temp * detail::logsumexp_rows(logits);
}

/// mm_tau(q) = tau ln <1, exp(q/tau)/|A|>: the convex conjugate of
/// tau KL(. || uniform), i.e. regularized_max with a uniform anchor and the
/// whole scale on the KL term.
inline Eigen::VectorXd mellowmax(const QTable& q, double tau) {
    if (tau <= 0.0) throw std::invalid_argument("mellowmax: tau must be positive");
    const double log_a = std::log(static_cast<double>(q.cols()));
    return tau * (detail::logsumexp_rows(q / tau).array() - log_a).matrix();
}

/// The objective <pi, q> - lambda KL(pi||mu) + tau H(pi) per state, for
/// arbitrary feasible pi (not necessarily the maximizer).
inline Eigen::VectorXd regularized_objective(const QTable& q, const Policy& pi, const Policy& mu,
                                             const GreedyParams& params) {
    Eigen::VectorXd value = expectation_over_actions(pi, q);
    if (params.lambda > 0.0) value -= params.lambda * kl_divergence(pi, mu);
    if (params.tau > 0.0) value += params.tau * entropy(pi);
    return value;
}

}  // namespace mdvi
