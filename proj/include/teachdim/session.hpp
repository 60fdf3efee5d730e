#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "teachdim/teacher.hpp"

namespace teachdim {

// One recorded interaction step. `a` is the executed action (post override),
// `a_agent` the learner's own pick. The terminal step of a SARSA session may
// carry no decision (the pending lesson terminated teaching mid-step); it is
// tagged branch "end".
struct StepRecord {
    long long t = 0;
    int episode = 0;
    int s = 0;
    int a_agent = 0;
    int a = 0;
    double r = 0.0;
    int s_next = 0;
    std::string branch;
    int subtask = -1;
    Goal goal = Goal::Maintain;
    bool episode_start = false;
};

struct SessionResult {
    long long total_steps = 0;
    long long total_episodes = 0;
    std::vector<long long> per_state_visit_counts;
    bool terminated = false;
    QTable final_q{1, 2};
    std::vector<StepRecord> records;  // only when recording was requested
};

// Runs one teaching session under the interaction protocol: the learner
// samples an action (overridable at level 1), rewards and successor states
// follow the teacher's level powers (level 4 samples successors from the
// MDP), episodes reset every H steps, and the session ends as soon as the
// greedy policy strictly equals the target everywhere, or when step_budget
// is exhausted (terminated = false). SARSA learners apply each experience
// one step late; the first step of an episode performs no update and a
// pending experience is discarded at an episode reset (levels 3-4).
SessionResult run_session(const TeachingProblem& problem, Teacher& teacher,
                          std::uint64_t seed, long long step_budget,
                          bool record = false);

// Convenience wrapper that builds the level's teacher (and navigation plan
// for levels 3-4) internally.
SessionResult run_session(const TeachingProblem& problem, int level,
                          std::uint64_t seed, long long step_budget,
                          double delta = 1.0, bool record = false);

struct TrialStats {
    long long trial_count = 0;  // completed (terminated) trials
    long long failures = 0;     // budget-exhausted trials
    double mean_steps = 0.0;
    double std_error = 0.0;
    double ci95_low = 0.0;
    double ci95_high = 0.0;
    std::vector<std::uint64_t> seeds;
};

// Independent sessions with seeds base_seed, base_seed+1, ...; statistics are
// accumulated in ascending seed order regardless of `threads`, so results are
// identical at any parallelism.
TrialStats run_trials(const TeachingProblem& problem, int level,
                      long long n_trials, std::uint64_t base_seed,
                      long long step_budget, double delta = 1.0,
                      int threads = 1);

// Default session budget: 100x the analytic upper bound for the level
// (doubled for SARSA's delayed updates).
long long default_step_budget(const TeachingProblem& problem, int level,
                              double multiplier = 100.0);

// Monte Carlo estimate of the expected visits to a single state until the
// target action is strictly on top, starting with n_blockers better-ranked
// actions: simulates the level-2 subgame on a one-state MDP.
TrialStats expected_visits_mc_stats(int num_actions, double epsilon,
                                    int n_blockers, UpdateRule rule,
                                    long long trials, std::uint64_t seed);
double expected_visits_mc(int num_actions, double epsilon, int n_blockers,
                          UpdateRule rule, long long trials,
                          std::uint64_t seed);

// True when every record satisfies the movement constraints of `level`
// (level >= 3: successors and episode starts inside the MDP support;
// level >= 2: no action overrides). Weaker levels impose fewer constraints,
// so a session legal at level k is legal at every level below it.
bool records_satisfy_level(const Mdp& mdp, const std::vector<StepRecord>& recs,
                           int level);

// JSON-lines trace: {t, episode, s, a, r, s_next, branch, subtask} per step.
void write_trace(const std::vector<StepRecord>& records,
                 const std::string& path);

// Results CSV (one row per experiment/parameter point).
struct ResultRow {
    std::string experiment_id;
    int level = 1;
    UpdateRule rule = UpdateRule::StandardQ;
    int num_states = 0;
    int num_actions = 0;
    int horizon = 0;
    int diameter = 0;
    double epsilon = 0.0;
    double p_min = 1.0;
    double delta = 1.0;
    long long trials = 0;
    long long failures = 0;
    double mean_steps = 0.0;
    double std_error = 0.0;
    double ci95_low = 0.0;
    double ci95_high = 0.0;
    double bound_lower = 0.0;
    double bound_upper = 0.0;
    std::uint64_t base_seed = 0;
};

std::string results_csv_header();
std::string to_csv_row(const ResultRow& row);
// Shortest round-trip decimal representation.
std::string format_double(double x);

}  // namespace teachdim
