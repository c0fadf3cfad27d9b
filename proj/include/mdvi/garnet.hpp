#pragma once

#include "mdvi/rng.hpp"
#include "mdvi/types.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace mdvi {

/// Parameters of the Garnet random-MDP family (N_S, N_A, N_B): each kernel
/// row branches to exactly N_B states, rewards are state-dependent and
/// nonzero on a reward_fraction share of the states.
struct GarnetParams {
    int num_states = 0;
    int num_actions = 0;
    int branching = 0;
    double reward_fraction = 0.1;
    double discount = 0.9;
};

inline void validate(const GarnetParams& params) {
    if (params.num_states <= 0 || params.num_actions <= 0)
        throw std::invalid_argument("garnet: state and action counts must be positive");
    if (params.branching < 1 || params.branching > params.num_states)
        throw std::invalid_argument("garnet: branching must lie in [1, num_states]");
    if (!(params.reward_fraction > 0.0 && params.reward_fraction <= 1.0))
        throw std::invalid_argument("garnet: reward_fraction must lie in (0, 1]");
    if (!(params.discount > 0.0 && params.discount < 1.0))
        throw std::invalid_argument("garnet: discount must lie in (0, 1)");
}

namespace detail {

/// First k entries of a partial Fisher-Yates shuffle of 0..n-1: a uniform
/// draw of k distinct indices.
inline std::vector<int> sample_without_replacement(int n, int k, Rng& rng) {
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (int i = 0; i < k; ++i)
        std::swap(idx[i], idx[i + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - i)))]);
    idx.resize(k);
    return idx;
}

/// n sorted cut points, strictly inside (0,1) and pairwise distinct, so the
/// induced gaps are all strictly positive. Duplicates are astronomically
/// rare but would break the exact support-size invariant, hence the redraw.
inline std::vector<double> distinct_sorted_cuts(int n, Rng& rng) {
    std::vector<double> cuts(n);
    for (;;) {
        for (double& c : cuts) c = rng.uniform_open01();
        std::sort(cuts.begin(), cuts.end());
        if (std::adjacent_find(cuts.begin(), cuts.end()) == cuts.end()) return cuts;
    }
}

}  // namespace detail

/// Draw one Garnet. Each kernel row picks branching distinct successor
/// states and splits the unit mass by the gaps of a sorted uniform sample;
/// rewards are uniform in (0,1) on max(1, floor(reward_fraction * N_S))
/// distinct states, identical across the actions of a rewarding state.
/// r_max is recorded as 1.
inline TabularMdp generate_garnet(const GarnetParams& params, Rng& rng) {
    validate(params);
    TabularMdp mdp;
    mdp.num_states = params.num_states;
    mdp.num_actions = params.num_actions;
    mdp.discount = params.discount;
    mdp.r_max = 1.0;
    mdp.kernel = Eigen::MatrixXd::Zero(
        static_cast<Eigen::Index>(params.num_states) * params.num_actions, params.num_states);
    mdp.reward = Eigen::MatrixXd::Zero(params.num_states, params.num_actions);

    for (int s = 0; s < params.num_states; ++s)
        for (int a = 0; a < params.num_actions; ++a) {
            const Eigen::Index row = flat_index(s, a, params.num_actions);
            std::vector<int> successors =
                detail::sample_without_replacement(params.num_states, params.branching, rng);
            std::vector<double> cuts = detail::distinct_sorted_cuts(params.branching - 1, rng);
            double prev = 0.0;
            for (int b = 0; b < params.branching; ++b) {
                const double next = (b + 1 < params.branching) ? cuts[b] : 1.0;
                mdp.kernel(row, successors[b]) = next - prev;
                prev = next;
            }
        }

    const int num_rewarding = std::max(
        1, static_cast<int>(std::floor(params.reward_fraction * params.num_states)));
    std::vector<int> rewarding =
        detail::sample_without_replacement(params.num_states, num_rewarding, rng);
    for (int s : rewarding) mdp.reward.row(s).setConstant(rng.uniform_open01());

    return mdp;
}

}  // namespace mdvi
