#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "teachdim/learner.hpp"
#include "teachdim/mdp.hpp"
#include "teachdim/nav_plan.hpp"

namespace teachdim {

// One teaching problem instance: environment, learner, initial table and the
// policy the teacher wants installed.
struct TeachingProblem {
    Mdp mdp;
    LearnerSpec spec;
    QTable q0;
    std::vector<int> target;  // state -> action

    void validate() const;
};

// Initial table that places the target action strictly last in every row:
// q0(s, target(s)) = 0 and the remaining actions take 2, 3, ... in index
// order, so rows are totally ordered with no ties.
QTable adversarial_q0(const Mdp& mdp, const std::vector<int>& target);

// A state needs teaching when the target action is not strictly on top.
bool needs_teaching(const QTable& q, int s, int target_action);

// What a teacher wants from one step. `reward` is materialized immediately
// for StandardQ learners; for SARSA the harness solves it from `goal` when
// the delayed 5-tuple completes. `next_state` is absent at level 4, where the
// environment samples the transition.
struct TeacherDecision {
    std::optional<int> override_action;  // level 1 only
    Goal goal = Goal::Maintain;
    double delta = 1.0;
    std::optional<double> reward;
    std::optional<int> next_state;
    const char* branch = "";  // trace tag: teach / target / nav / offpath
    int subtask = -1;
};

class Teacher {
public:
    virtual ~Teacher() = default;

    virtual int level() const = 0;

    // Levels 1-2 relocate the agent freely, so episode resets are invisible
    // and the horizon has no effect on the session.
    virtual bool absorbs_resets() const { return false; }

    // Level-1 action replacement, applied before the learner update.
    virtual std::optional<int> action_override(int /*s*/) const {
        return std::nullopt;
    }

    // Where the teacher wants the agent at session/episode start; nullopt
    // means the environment draws from mu0 (level 4).
    virtual std::optional<int> initial_state() const = 0;

    // Decision for the current step. `a` is the executed action (after any
    // level-1 override); `sampled_next` is the environment-sampled successor,
    // present only at level 4.
    virtual TeacherDecision decide(const QTable& q, int s, int a,
                                   std::optional<int> sampled_next,
                                   Rng& rng) = 0;
};

// Levels 1 and 2: schedules needs-teaching states directly (the MDP imposes
// no constraints). Level 1 overrides the agent's action with the target and
// promotes; level 2 promotes the agent's own target picks and demotes
// everything else, leaving a state once no action outranks the target.
// For SARSA learners the schedule round-robins across unfinished states so
// that consecutive steps land on different states whenever possible; the
// one-step update delay then costs exactly one extra flush step.
class DirectTeacher : public Teacher {
public:
    DirectTeacher(const TeachingProblem& problem, int level,
                  double delta = 1.0);

    int level() const override { return level_; }
    bool absorbs_resets() const override { return true; }
    std::optional<int> action_override(int s) const override;
    std::optional<int> initial_state() const override;
    TeacherDecision decide(const QTable& q, int s, int a,
                           std::optional<int> sampled_next, Rng& rng) override;

    int states_needing_teaching() const { return initial_needs_; }

private:
    int next_scheduled(int after) const;

    const TeachingProblem* problem_;
    int level_;
    double delta_;
    int initial_needs_ = 0;
    int remaining_ = 0;
    std::vector<bool> done_;
    std::vector<int> blockers_left_;
    std::vector<std::vector<bool>> handled_;
};

// Levels 3 and 4: NavTeach. Works through the plan's post-order subtasks;
// for each target state it first establishes the ancestral navigation path,
// promoting on-path actions that can reach the next path node and demoting
// the rest, and keeps all other states untouched with maintain rewards.
class NavTeacher : public Teacher {
public:
    NavTeacher(const TeachingProblem& problem, const NavPlan& plan, int level,
               double delta = 1.0);

    int level() const override { return level_; }
    std::optional<int> initial_state() const override;
    TeacherDecision decide(const QTable& q, int s, int a,
                           std::optional<int> sampled_next, Rng& rng) override;

    // Advances past subtasks whose target state already holds the target
    // action strictly; called internally before every decision.
    void refresh(const QTable& q);

    int current_subtask() const { return subtask_idx_; }
    const std::vector<bool>& taught() const { return taught_; }

private:
    void rebuild_path();
    int random_supported_next(int s, int a, Rng& rng) const;

    const TeachingProblem* problem_;
    const NavPlan* plan_;
    int level_;
    double delta_;
    int subtask_idx_ = 0;
    std::vector<bool> taught_;
    std::vector<int> path_next_;  // node -> following path node, -1 off path
};

std::unique_ptr<Teacher> make_teacher(const TeachingProblem& problem,
                                      const NavPlan* plan, int level,
                                      double delta = 1.0);

}  // namespace teachdim
