#include "teachdim/learner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace teachdim {

std::string to_string(UpdateRule rule) {
    return rule == UpdateRule::StandardQ ? "standard_q" : "sarsa";
}

UpdateRule update_rule_from_string(const std::string& name) {
    if (name == "standard_q" || name == "q") return UpdateRule::StandardQ;
    if (name == "sarsa") return UpdateRule::Sarsa;
    throw DomainError("unknown learner rule: " + name);
}

std::string to_string(Goal g) {
    switch (g) {
        case Goal::Promote: return "promote";
        case Goal::Demote: return "demote";
        default: return "maintain";
    }
}

void LearnerSpec::validate() const {
    if (!(epsilon >= 0.0 && epsilon <= 1.0))
        throw InvariantViolation("epsilon must be in [0,1]");
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw InvariantViolation("alpha must be in (0,1]");
    if (!(gamma >= 0.0 && gamma < 1.0))
        throw InvariantViolation("gamma must be in [0,1)");
}

double QTable::max_excluding(int s, int excluded) const {
    double best = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < num_actions_; ++a)
        if (a != excluded) best = std::max(best, (*this)(s, a));
    return best;
}

double QTable::min_excluding(int s, int excluded) const {
    double best = std::numeric_limits<double>::infinity();
    for (int a = 0; a < num_actions_; ++a)
        if (a != excluded) best = std::min(best, (*this)(s, a));
    return best;
}

double QTable::row_max(int s) const {
    double best = (*this)(s, 0);
    for (int a = 1; a < num_actions_; ++a) best = std::max(best, (*this)(s, a));
    return best;
}

int QTable::row_argmax(int s) const {
    int best = 0;
    for (int a = 1; a < num_actions_; ++a)
        if ((*this)(s, a) > (*this)(s, best)) best = a;
    return best;
}

bool QTable::row_strict(int s) const {
    int best = row_argmax(s);
    for (int a = 0; a < num_actions_; ++a)
        if (a != best && (*this)(s, a) == (*this)(s, best)) return false;
    return true;
}

int sample_action(const QTable& q, int s, const LearnerSpec& spec, Rng& rng) {
    int greedy = q.row_argmax(s);
    if (spec.epsilon > 0.0 && rng.next_double() < spec.epsilon) {
        int k = rng.uniform_int(q.num_actions() - 1);
        return k >= greedy ? k + 1 : k;
    }
    return greedy;
}

namespace {

double bootstrap_value(const QTable& q, const LearnerSpec& spec, int s_next,
                       std::optional<int> a_next) {
    if (spec.rule == UpdateRule::Sarsa) {
        if (!a_next.has_value()) throw MissingNextAction();
        return q(s_next, *a_next);
    }
    return q.row_max(s_next);
}

}  // namespace

void apply_update(QTable& q, const Experience& e, const LearnerSpec& spec) {
    double boot = bootstrap_value(q, spec, e.s_next, e.a_next);
    q(e.s, e.a) =
        (1.0 - spec.alpha) * q(e.s, e.a) + spec.alpha * (e.r + spec.gamma * boot);
}

double solve_reward(const QTable& q, int s, int a, int s_next, Goal goal,
                    double delta, const LearnerSpec& spec,
                    std::optional<int> a_next) {
    double target;
    switch (goal) {
        case Goal::Promote: target = q.max_excluding(s, a) + delta; break;
        case Goal::Demote: target = q.min_excluding(s, a) - delta; break;
        default: target = q(s, a); break;
    }
    double boot = bootstrap_value(q, spec, s_next, a_next);
    return (target - (1.0 - spec.alpha) * q(s, a)) / spec.alpha -
           spec.gamma * boot;
}

GreedyPolicy greedy_policy(const QTable& q) {
    GreedyPolicy p;
    p.actions.resize(q.num_states());
    p.strict.resize(q.num_states());
    for (int s = 0; s < q.num_states(); ++s) {
        p.actions[s] = q.row_argmax(s);
        p.strict[s] = q.row_strict(s);
    }
    return p;
}

}  // namespace teachdim
