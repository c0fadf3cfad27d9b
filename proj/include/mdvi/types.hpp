#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

namespace mdvi {

/// State-action table (S rows, A columns). Houses q-functions, their moving
/// averages and per-iteration error tables alike.
using QTable = Eigen::MatrixXd;

/// Row-stochastic matrix over actions, one row per state.
struct Policy {
    Eigen::MatrixXd probs;

    Eigen::Index num_states() const { return probs.rows(); }
    Eigen::Index num_actions() const { return probs.cols(); }
};

/// Finite MDP with dense transition kernel.
///
/// kernel is (S*A) x S with row index s*A + a, so kernel.row(s*A+a) is the
/// distribution of the next state under (s, a). r_max is recorded explicitly
/// (it feeds the value bounds) rather than recomputed from the reward table.
struct TabularMdp {
    int num_states = 0;
    int num_actions = 0;
    Eigen::MatrixXd kernel;  // (S*A) x S
    Eigen::MatrixXd reward;  // S x A
    double discount = 0.0;
    double r_max = 0.0;
};

inline constexpr double kRowSumTol = 1e-12;

inline Eigen::Index flat_index(Eigen::Index s, Eigen::Index a, Eigen::Index num_actions) {
    return s * num_actions + a;
}

/// S x A table -> length-S*A vector in row-major (s, a) order, matching the
/// kernel's row indexing.
inline Eigen::VectorXd table_to_flat(const QTable& table) {
    Eigen::VectorXd flat(table.size());
    for (Eigen::Index s = 0; s < table.rows(); ++s)
        for (Eigen::Index a = 0; a < table.cols(); ++a)
            flat[flat_index(s, a, table.cols())] = table(s, a);
    return flat;
}

inline QTable flat_to_table(const Eigen::VectorXd& flat, Eigen::Index num_states,
                            Eigen::Index num_actions) {
    QTable table(num_states, num_actions);
    for (Eigen::Index s = 0; s < num_states; ++s)
        for (Eigen::Index a = 0; a < num_actions; ++a)
            table(s, a) = flat[flat_index(s, a, num_actions)];
    return table;
}

inline Policy uniform_policy(Eigen::Index num_states, Eigen::Index num_actions) {
    return Policy{Eigen::MatrixXd::Constant(num_states, num_actions,
                                            1.0 / static_cast<double>(num_actions))};
}

inline void validate(const Policy& pi) {
    if (pi.probs.rows() == 0 || pi.probs.cols() == 0)
        throw std::invalid_argument("policy: empty probability matrix");
    if ((pi.probs.array() < 0.0).any())
        throw std::invalid_argument("policy: negative probability");
    for (Eigen::Index s = 0; s < pi.probs.rows(); ++s) {
        if (std::abs(pi.probs.row(s).sum() - 1.0) > kRowSumTol)
            throw std::invalid_argument("policy: row " + std::to_string(s) +
                                        " does not sum to 1");
    }
}

inline void validate(const TabularMdp& mdp) {
    if (mdp.num_states <= 0 || mdp.num_actions <= 0)
        throw std::invalid_argument("mdp: state and action counts must be positive");
    if (!(mdp.discount > 0.0 && mdp.discount < 1.0))
        throw std::invalid_argument("mdp: discount must lie in (0, 1)");
    const Eigen::Index sa = static_cast<Eigen::Index>(mdp.num_states) * mdp.num_actions;
    if (mdp.kernel.rows() != sa || mdp.kernel.cols() != mdp.num_states)
        throw std::invalid_argument("mdp: kernel shape mismatch");
    if (mdp.reward.rows() != mdp.num_states || mdp.reward.cols() != mdp.num_actions)
        throw std::invalid_argument("mdp: reward shape mismatch");
    if ((mdp.kernel.array() < 0.0).any())
        throw std::invalid_argument("mdp: negative transition probability");
    for (Eigen::Index row = 0; row < sa; ++row) {
        if (std::abs(mdp.kernel.row(row).sum() - 1.0) > kRowSumTol)
            throw std::invalid_argument("mdp: kernel row " + std::to_string(row) +
                                        " does not sum to 1");
    }
    if ((mdp.reward.array().abs() > mdp.r_max).any())
        throw std::invalid_argument("mdp: reward magnitude exceeds recorded r_max");
}

inline void check_shape(const TabularMdp& mdp, const QTable& q, const char* what) {
    if (q.rows() != mdp.num_states || q.cols() != mdp.num_actions)
        throw std::invalid_argument(std::string(what) + ": shape mismatch with MDP");
}

inline void check_shape(const TabularMdp& mdp, const Policy& pi, const char* what) {
    if (pi.probs.rows() != mdp.num_states || pi.probs.cols() != mdp.num_actions)
        throw std::invalid_argument(std::string(what) + ": shape mismatch with MDP");
}

/// Sup-norm bound on plain values, r_max / (1 - gamma).
inline double v_max(const TabularMdp& mdp) { return mdp.r_max / (1.0 - mdp.discount); }

/// Sup-norm bound on tau-entropy-regularized values,
/// (r_max + tau ln|A|) / (1 - gamma).
inline double v_max_tau(const TabularMdp& mdp, double tau) {
    return (mdp.r_max + tau * std::log(static_cast<double>(mdp.num_actions))) /
           (1.0 - mdp.discount);
}

/// <pi, q> per state: expectation of q over actions under pi.
inline Eigen::VectorXd expectation_over_actions(const Policy& pi, const QTable& q) {
    return (pi.probs.array() * q.array()).rowwise().sum();
}

/// P v for a per-state vector v: the S x A table of E[v(s') | s, a].
inline QTable apply_kernel(const TabularMdp& mdp, const Eigen::VectorXd& state_values) {
    Eigen::VectorXd flat = mdp.kernel * state_values;
    return flat_to_table(flat, mdp.num_states, mdp.num_actions);
}

/// P_pi q = P <pi, q> as a table.
inline QTable apply_transition(const TabularMdp& mdp, const Policy& pi, const QTable& q) {
    return apply_kernel(mdp, expectation_over_actions(pi, q));
}

/// Dense (S*A) x (S*A) matrix of the stochastic kernel P_pi, for direct
/// linear solves.
inline Eigen::MatrixXd transition_matrix(const TabularMdp& mdp, const Policy& pi) {
    const Eigen::Index sa = static_cast<Eigen::Index>(mdp.num_states) * mdp.num_actions;
    Eigen::MatrixXd out(sa, sa);
    for (Eigen::Index sp = 0; sp < mdp.num_states; ++sp)
        for (Eigen::Index ap = 0; ap < mdp.num_actions; ++ap)
            out.col(flat_index(sp, ap, mdp.num_actions)) = mdp.kernel.col(sp) * pi.probs(sp, ap);
    return out;
}

}  // namespace mdvi
