#pragma once

#include <optional>
#include <string>
#include <vector>

#include "teachdim/errors.hpp"
#include "teachdim/rng.hpp"

namespace teachdim {

enum class UpdateRule { StandardQ, Sarsa };

std::string to_string(UpdateRule rule);
UpdateRule update_rule_from_string(const std::string& name);

// Epsilon-greedy temporal-difference learner parameters. gamma < 1 keeps
// reward inversion well-posed.
struct LearnerSpec {
    double epsilon = 0.0;
    double alpha = 0.5;
    double gamma = 0.9;
    UpdateRule rule = UpdateRule::StandardQ;

    void validate() const;
};

// Dense S x A action-value table; the learner's entire internal state.
class QTable {
public:
    QTable(int num_states, int num_actions, double fill = 0.0)
        : num_states_(num_states),
          num_actions_(num_actions),
          values_(static_cast<std::size_t>(num_states) * num_actions, fill) {}

    int num_states() const { return num_states_; }
    int num_actions() const { return num_actions_; }

    double operator()(int s, int a) const {
        return values_[static_cast<std::size_t>(s) * num_actions_ + a];
    }
    double& operator()(int s, int a) {
        return values_[static_cast<std::size_t>(s) * num_actions_ + a];
    }

    const std::vector<double>& values() const { return values_; }

    // Highest value among actions at s other than `excluded`.
    double max_excluding(int s, int excluded) const;
    // Lowest value among actions at s other than `excluded`.
    double min_excluding(int s, int excluded) const;
    double row_max(int s) const;
    // Lowest-index argmax of the row.
    int row_argmax(int s) const;
    // True when the row argmax is unique.
    bool row_strict(int s) const;

    friend bool operator==(const QTable&, const QTable&) = default;

private:
    int num_states_;
    int num_actions_;
    std::vector<double> values_;
};

// One interaction step. a_next is present only for SARSA's 5-tuple.
struct Experience {
    int s = 0;
    int a = 0;
    double r = 0.0;
    int s_next = 0;
    std::optional<int> a_next;
};

enum class Goal { Promote, Demote, Maintain };

std::string to_string(Goal g);

// Epsilon-greedy draw: the row argmax (lowest index on ties) with
// probability 1 - epsilon, otherwise uniform over the other A-1 actions.
// The exploration branch never re-selects the argmax.
int sample_action(const QTable& q, int s, const LearnerSpec& spec, Rng& rng);

// Applies the TD update for the spec's rule to entry (e.s, e.a) in place.
// StandardQ bootstraps on max_b q(s', b); Sarsa on q(s', a').
void apply_update(QTable& q, const Experience& e, const LearnerSpec& spec);

// Reward inversion ("CarrotStick"): the unique r such that after
// apply_update the entry (s, a) lands exactly at
//   Promote:  max_{b != a} q(s, b) + delta
//   Demote:   min_{b != a} q(s, b) - delta
//   Maintain: q(s, a)
double solve_reward(const QTable& q, int s, int a, int s_next, Goal goal,
                    double delta, const LearnerSpec& spec,
                    std::optional<int> a_next = std::nullopt);

// Per-state greedy actions (lowest index on ties) with strictness flags.
struct GreedyPolicy {
    std::vector<int> actions;
    std::vector<bool> strict;
};

GreedyPolicy greedy_policy(const QTable& q);

}  // namespace teachdim
