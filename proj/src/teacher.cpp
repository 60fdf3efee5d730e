#include "teachdim/teacher.hpp"

#include <algorithm>

namespace teachdim {

void TeachingProblem::validate() const {
    spec.validate();
    if (q0.num_states() != mdp.num_states() ||
        q0.num_actions() != mdp.num_actions())
        throw InvariantViolation("Q0 dimensions must match the MDP");
    if (static_cast<int>(target.size()) != mdp.num_states())
        throw InvariantViolation("target policy length must equal num_states");
    for (int a : target)
        if (a < 0 || a >= mdp.num_actions())
            throw InvariantViolation("target action out of range");
}

QTable adversarial_q0(const Mdp& mdp, const std::vector<int>& target) {
    QTable q(mdp.num_states(), mdp.num_actions());
    for (int s = 0; s < mdp.num_states(); ++s) {
        int rank = 1;
        for (int a = 0; a < mdp.num_actions(); ++a) {
            if (a == target[s]) continue;
            q(s, a) = 1.0 + rank;
            ++rank;
        }
    }
    return q;
}

bool needs_teaching(const QTable& q, int s, int target_action) {
    return q(s, target_action) <= q.max_excluding(s, target_action);
}

// ---------------------------------------------------------------------------
// DirectTeacher (levels 1-2)

DirectTeacher::DirectTeacher(const TeachingProblem& problem, int level,
                             double delta)
    : problem_(&problem), level_(level), delta_(delta) {
    if (level != 1 && level != 2)
        throw DomainError("DirectTeacher handles levels 1 and 2");
    const int S = problem.mdp.num_states();
    const int A = problem.mdp.num_actions();
    done_.assign(S, true);
    blockers_left_.assign(S, 0);
    handled_.assign(S, std::vector<bool>(A, false));
    for (int s = 0; s < S; ++s) {
        if (!needs_teaching(problem.q0, s, problem.target[s])) continue;
        done_[s] = false;
        ++initial_needs_;
        for (int a = 0; a < A; ++a)
            if (a != problem.target[s] &&
                problem.q0(s, a) >= problem.q0(s, problem.target[s]))
                ++blockers_left_[s];
    }
    remaining_ = initial_needs_;
}

std::optional<int> DirectTeacher::action_override(int s) const {
    if (level_ == 1) return problem_->target[s];
    return std::nullopt;
}

std::optional<int> DirectTeacher::initial_state() const {
    for (int s = 0; s < problem_->mdp.num_states(); ++s)
        if (!done_[s]) return s;
    return 0;
}

int DirectTeacher::next_scheduled(int after) const {
    const int S = problem_->mdp.num_states();
    for (int k = 1; k <= S; ++k) {
        int s = (after + k) % S;
        if (!done_[s]) return s;
    }
    return after;  // nothing left: park (a pending lesson may still flush)
}

TeacherDecision DirectTeacher::decide(const QTable& q, int s, int a,
                                      std::optional<int> /*sampled_next*/,
                                      Rng& /*rng*/) {
    TeacherDecision d;
    d.delta = delta_;
    d.branch = "teach";
    d.subtask = s;
    if (level_ == 1) d.override_action = a;

    const int target = problem_->target[s];
    if (a == target) {
        d.goal = Goal::Promote;
        if (!done_[s]) {
            done_[s] = true;
            --remaining_;
        }
    } else {
        d.goal = Goal::Demote;
        if (!done_[s] && !handled_[s][a] && q(s, a) >= q(s, target)) {
            handled_[s][a] = true;
            if (--blockers_left_[s] == 0) {
                done_[s] = true;
                --remaining_;
            }
        }
    }

    // StandardQ sits on a state until it is finished; the SARSA schedule
    // rotates so no state is visited twice in a row while work remains
    // elsewhere (the delayed update would waste the second visit).
    int next;
    if (done_[s] || problem_->spec.rule == UpdateRule::Sarsa)
        next = next_scheduled(s);
    else
        next = s;
    d.next_state = next;

    if (problem_->spec.rule == UpdateRule::StandardQ)
        d.reward = solve_reward(q, s, a, next, d.goal, delta_, problem_->spec);
    return d;
}

// ---------------------------------------------------------------------------
// NavTeacher (levels 3-4)

NavTeacher::NavTeacher(const TeachingProblem& problem, const NavPlan& plan,
                       int level, double delta)
    : problem_(&problem), plan_(&plan), level_(level), delta_(delta) {
    if (level != 3 && level != 4)
        throw DomainError("NavTeacher handles levels 3 and 4");
    const int S = problem.mdp.num_states();
    taught_.assign(S, false);
    path_next_.assign(S, -1);

    // Post-order guarantee: every proper ancestor of a state is scheduled
    // after it, so a completed subtask is never an interior node of a later
    // navigation path.
    std::vector<int> pos(S, -1);
    for (int i = 0; i < S; ++i) pos[plan.subtask_order[i]] = i;
    for (int s = 0; s < S; ++s) {
        if (pos[s] < 0) throw InvariantViolation("subtask order misses a state");
        for (int u = s; u != plan.root;) {
            u = plan.parent_edge[u].first;
            if (pos[u] < pos[s])
                throw InvariantViolation(
                    "subtask order is not a post-order traversal");
        }
    }
    rebuild_path();
}

std::optional<int> NavTeacher::initial_state() const {
    if (level_ == 3) return plan_->root;
    return std::nullopt;
}

void NavTeacher::rebuild_path() {
    std::fill(path_next_.begin(), path_next_.end(), -1);
    const int S = problem_->mdp.num_states();
    if (subtask_idx_ >= S) return;
    int target_state = plan_->subtask_order[subtask_idx_];
    int child = target_state;
    while (child != plan_->root) {
        auto [p, a] = plan_->parent_edge[child];
        path_next_[p] = child;
        child = p;
    }
}

void NavTeacher::refresh(const QTable& q) {
    const int S = problem_->mdp.num_states();
    bool moved = false;
    while (subtask_idx_ < S) {
        int s = plan_->subtask_order[subtask_idx_];
        if (q.row_argmax(s) != problem_->target[s] || !q.row_strict(s)) break;
        taught_[s] = true;
        ++subtask_idx_;
        moved = true;
    }
    if (moved) rebuild_path();
}

int NavTeacher::random_supported_next(int s, int a, Rng& rng) const {
    auto row = problem_->mdp.transitions(s, a);
    return row[rng.uniform_int(static_cast<int>(row.size()))].next;
}

TeacherDecision NavTeacher::decide(const QTable& q, int s, int a,
                                   std::optional<int> sampled_next, Rng& rng) {
    refresh(q);
    TeacherDecision d;
    d.delta = delta_;
    d.subtask = subtask_idx_;

    const int S = problem_->mdp.num_states();
    if (subtask_idx_ >= S) {
        d.branch = "offpath";
        d.goal = Goal::Maintain;
        if (level_ == 3) d.next_state = random_supported_next(s, a, rng);
    } else if (int target_state = plan_->subtask_order[subtask_idx_];
               s == target_state) {
        d.branch = "target";
        d.goal = (a == problem_->target[s]) ? Goal::Promote : Goal::Demote;
        if (level_ == 3) d.next_state = random_supported_next(s, a, rng);
    } else if (path_next_[s] >= 0) {
        d.branch = "nav";
        int u = path_next_[s];
        bool can_reach = problem_->mdp.supports(s, a, u);
        d.goal = can_reach ? Goal::Promote : Goal::Demote;
        if (level_ == 3)
            d.next_state = can_reach ? u : random_supported_next(s, a, rng);
    } else {
        d.branch = "offpath";
        d.goal = Goal::Maintain;
        if (level_ == 3) d.next_state = random_supported_next(s, a, rng);
    }

    if (problem_->spec.rule == UpdateRule::StandardQ) {
        int s_next = level_ == 3 ? *d.next_state : *sampled_next;
        d.reward = solve_reward(q, s, a, s_next, d.goal, delta_,
                                problem_->spec);
    }
    return d;
}

std::unique_ptr<Teacher> make_teacher(const TeachingProblem& problem,
                                      const NavPlan* plan, int level,
                                      double delta) {
    if (level == 1 || level == 2)
        return std::make_unique<DirectTeacher>(problem, level, delta);
    if (plan == nullptr)
        throw DomainError("levels 3 and 4 require a navigation plan");
    return std::make_unique<NavTeacher>(problem, *plan, level, delta);
}

}  // namespace teachdim
