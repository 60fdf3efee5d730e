#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "teachdim/errors.hpp"
#include "teachdim/rng.hpp"

namespace teachdim {

struct Transition {
    int next = 0;
    double prob = 0.0;

    friend bool operator==(const Transition&, const Transition&) = default;
};

// Episodic tabular MDP. Transition rows are sparse: only positive-probability
// successors are stored, sorted by successor index, no duplicates.
// Immutable after construction; safe to share across sessions.
class Mdp {
public:
    Mdp(int num_states, int num_actions, int horizon,
        std::vector<double> initial_dist,
        std::vector<std::vector<Transition>> rows,  // indexed s * A + a
        std::optional<std::vector<double>> base_reward = std::nullopt);

    int num_states() const { return num_states_; }
    int num_actions() const { return num_actions_; }
    int horizon() const { return horizon_; }

    std::span<const double> initial_dist() const { return initial_dist_; }

    std::span<const Transition> transitions(int s, int a) const {
        return rows_[static_cast<std::size_t>(s) * num_actions_ + a];
    }

    bool supports(int s, int a, int next) const;

    double base_reward(int s, int a) const {
        if (base_reward_.empty()) return 0.0;
        return base_reward_[static_cast<std::size_t>(s) * num_actions_ + a];
    }
    bool has_base_reward() const { return !base_reward_.empty(); }

    // States s with initial_dist[s] > 0, ascending.
    std::span<const int> supported_starts() const { return starts_; }

    friend bool operator==(const Mdp& a, const Mdp& b);

private:
    int num_states_;
    int num_actions_;
    int horizon_;
    std::vector<double> initial_dist_;
    std::vector<std::vector<Transition>> rows_;
    std::vector<double> base_reward_;  // empty when absent
    std::vector<int> starts_;
};

// Convenience builder used by the generators: collects (s, a, next, prob)
// entries and sorts each row before constructing the Mdp.
class MdpBuilder {
public:
    MdpBuilder(int num_states, int num_actions, int horizon);

    void add(int s, int a, int next, double prob);
    void set_initial(int s, double prob);
    Mdp build() &&;

private:
    int num_states_;
    int num_actions_;
    int horizon_;
    std::vector<double> initial_dist_;
    std::vector<std::vector<Transition>> rows_;
};

// Max over states of the shortest supported path from the nearest supported
// initial state. Throws UnreachableState if some state has no such path.
int diameter(const Mdp& mdp);

// Smallest stored (positive) transition probability.
double min_transition_prob(const Mdp& mdp);

// Hard instance for level-3 lower bounds: a chain of D "neck" states, a
// fan-out from the last neck state to S-D-1 "tail" states, and one absorbing
// state. Action 0 advances with probability p (remainder to the absorbing
// state); every other action, every tail action and the absorbing state lead
// to the absorbing state with probability 1.
Mdp make_peacock(int num_states, int diameter_d, int num_actions, int horizon,
                 double p);

// Hard instance for level-4 lower bounds: a chain followed by a full binary
// tree. The tree depth d is the largest value admitted by num_states; the
// instance is completed to exactly 2^(d+1) + (diameter_d - d) states, so the
// returned Mdp may have fewer states than requested. Action 0 moves to the
// next chain state / top child and action 1 to the bottom child, each with
// probability p_min (remainder to the absorbing state).
Mdp make_peacock_tree(int num_states, int diameter_d, int num_actions,
                      int horizon, double p_min);

// Deterministic chain s0 -> s1 -> ... under action 0 (last state self-loops);
// all other actions self-loop.
Mdp make_chain(int num_states, int num_actions, int horizon);

// Seeded sparse random MDP with mu0 concentrated on state 0 and every state
// reachable from it.
Mdp make_random_sparse(int num_states, int num_actions, int horizon,
                       double density, std::uint64_t seed);

// JSON (de)serialization; round-trips exactly.
void save_mdp(const Mdp& mdp, const std::string& path);
Mdp load_mdp(const std::string& path);
std::string mdp_to_json(const Mdp& mdp);
Mdp mdp_from_json(const std::string& text);

}  // namespace teachdim
