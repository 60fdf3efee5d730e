#include "teachdim/session.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include "teachdim/bounds.hpp"

namespace teachdim {

namespace {

// Count of states whose greedy action strictly equals the target; updated
// per touched row so the per-step termination check is O(A).
class TaughtTracker {
public:
    TaughtTracker(const QTable& q, const std::vector<int>& target)
        : target_(&target), ok_(q.num_states(), false) {
        for (int s = 0; s < q.num_states(); ++s) refresh(q, s);
    }

    void refresh(const QTable& q, int s) {
        bool now = q.row_argmax(s) == (*target_)[s] && q.row_strict(s);
        if (now != ok_[s]) {
            ok_[s] = now;
            count_ += now ? 1 : -1;
        }
    }

    bool all_taught() const {
        return count_ == static_cast<int>(ok_.size());
    }

private:
    const std::vector<int>* target_;
    std::vector<bool> ok_;
    int count_ = 0;
};

int sample_mu0(const Mdp& mdp, Rng& rng) {
    return rng.sample_discrete(mdp.initial_dist(),
                               [](double p) { return p; });
}

int sample_transition(const Mdp& mdp, int s, int a, Rng& rng) {
    auto row = mdp.transitions(s, a);
    int idx = rng.sample_discrete(row, [](const Transition& t) { return t.prob; });
    return row[idx].next;
}

struct Pending {
    int s = 0;
    int a = 0;
    Goal goal = Goal::Maintain;
    double delta = 1.0;
    int s_next = 0;
    std::size_t record_idx = 0;
};

}  // namespace

SessionResult run_session(const TeachingProblem& problem, Teacher& teacher,
                          std::uint64_t seed, long long step_budget,
                          bool record) {
    problem.validate();
    if (step_budget <= 0) throw DomainError("step budget must be positive");

    const Mdp& mdp = problem.mdp;
    const LearnerSpec& spec = problem.spec;
    const bool sarsa = spec.rule == UpdateRule::Sarsa;
    const int level = teacher.level();
    const int H = mdp.horizon();

    Rng rng(seed);
    SessionResult result;
    result.final_q = problem.q0;
    result.per_state_visit_counts.assign(mdp.num_states(), 0);
    QTable& q = result.final_q;

    TaughtTracker tracker(q, problem.target);
    if (tracker.all_taught()) {
        result.terminated = true;
        return result;
    }

    int s;
    if (auto init = teacher.initial_state())
        s = *init;
    else
        s = sample_mu0(mdp, rng);
    result.total_episodes = 1;
    int ep_steps = 0;
    bool at_episode_start = true;
    Pending pending;
    bool has_pending = false;

    while (true) {
        if (result.total_steps >= step_budget) {
            result.terminated = false;
            return result;
        }

        int a_agent = sample_action(q, s, spec, rng);
        int a = a_agent;
        if (auto ov = teacher.action_override(s)) a = *ov;

        ++result.total_steps;
        ++result.per_state_visit_counts[s];
        std::size_t rec_idx = result.records.size();
        if (record) {
            StepRecord rec;
            rec.t = result.total_steps - 1;
            rec.episode = static_cast<int>(result.total_episodes) - 1;
            rec.s = s;
            rec.a_agent = a_agent;
            rec.a = a;
            rec.episode_start = at_episode_start;
            result.records.push_back(std::move(rec));
        }
        at_episode_start = false;

        // SARSA: the previous step's experience completes with this step's
        // (s, a) pair; the reward is solved against the current table so the
        // promote/demote margin is exact at application time.
        if (sarsa && has_pending) {
            double r = solve_reward(q, pending.s, pending.a, pending.s_next,
                                    pending.goal, pending.delta, spec, a);
            Experience e{pending.s, pending.a, r, pending.s_next, a};
            apply_update(q, e, spec);
            tracker.refresh(q, pending.s);
            if (record) result.records[pending.record_idx].r = r;
            has_pending = false;
            if (tracker.all_taught()) {
                result.terminated = true;
                if (record) {
                    auto& rec = result.records[rec_idx];
                    rec.branch = "end";
                    rec.s_next = s;
                }
                return result;
            }
        }

        std::optional<int> sampled;
        if (level == 4) sampled = sample_transition(mdp, s, a, rng);

        TeacherDecision d = teacher.decide(q, s, a, sampled, rng);
        if (level == 4 && d.next_state.has_value())
            throw LevelViolation("level-4 decision carries a next state");
        if (level == 3) {
            if (!d.next_state.has_value())
                throw LevelViolation("level-3 decision must pick a next state");
            if (!mdp.supports(s, a, *d.next_state))
                throw LevelViolation("level-3 next state outside support");
        }
        int s_next = level == 4 ? *sampled : d.next_state.value_or(s);

        if (record) {
            auto& rec = result.records[rec_idx];
            rec.s_next = s_next;
            rec.branch = d.branch;
            rec.subtask = d.subtask;
            rec.goal = d.goal;
        }

        if (!sarsa) {
            double r = d.reward.has_value()
                           ? *d.reward
                           : solve_reward(q, s, a, s_next, d.goal, d.delta,
                                          spec);
            apply_update(q, Experience{s, a, r, s_next, std::nullopt}, spec);
            tracker.refresh(q, s);
            if (record) result.records[rec_idx].r = r;
            if (tracker.all_taught()) {
                result.terminated = true;
                return result;
            }
        } else {
            pending = Pending{s, a, d.goal, d.delta, s_next, rec_idx};
            has_pending = true;
        }

        if (++ep_steps == H) {
            ep_steps = 0;
            ++result.total_episodes;
            at_episode_start = true;
            if (!teacher.absorbs_resets()) {
                has_pending = false;  // dangling 5-tuple dies with the episode
                if (auto init = teacher.initial_state())
                    s = *init;
                else
                    s = sample_mu0(mdp, rng);
                continue;
            }
        }
        s = s_next;
    }
}

SessionResult run_session(const TeachingProblem& problem, int level,
                          std::uint64_t seed, long long step_budget,
                          double delta, bool record) {
    if (level >= 3) {
        NavPlan plan = build_nav_plan(problem.mdp);
        NavTeacher teacher(problem, plan, level, delta);
        return run_session(problem, teacher, seed, step_budget, record);
    }
    DirectTeacher teacher(problem, level, delta);
    return run_session(problem, teacher, seed, step_budget, record);
}

long long default_step_budget(const TeachingProblem& problem, int level,
                              double multiplier) {
    BoundInputs in;
    in.num_states = problem.mdp.num_states();
    in.num_actions = problem.mdp.num_actions();
    in.horizon = problem.mdp.horizon();
    in.diameter = level >= 3 ? diameter(problem.mdp) : 0;
    in.epsilon = problem.spec.epsilon;
    in.p_min = min_transition_prob(problem.mdp);
    if (level <= 2) in.epsilon = 0.0;  // levels 1-2 bounds are epsilon-free
    double upper = tdim_bounds(level, in).upper;
    if (problem.spec.rule == UpdateRule::Sarsa) upper *= 2.0;
    double budget = std::ceil(multiplier * upper) + 1.0;
    return static_cast<long long>(
        std::min(budget, 9.0e18));
}

TrialStats run_trials(const TeachingProblem& problem, int level,
                      long long n_trials, std::uint64_t base_seed,
                      long long step_budget, double delta, int threads) {
    if (n_trials < 1) throw DomainError("n_trials must be at least 1");
    problem.validate();

    std::optional<NavPlan> plan;
    if (level >= 3) plan = build_nav_plan(problem.mdp);

    std::vector<long long> steps(n_trials, 0);
    std::vector<char> completed(n_trials, 0);
    auto worker = [&](long long begin, long long end) {
        for (long long i = begin; i < end; ++i) {
            auto teacher = make_teacher(problem, plan ? &*plan : nullptr,
                                        level, delta);
            SessionResult r = run_session(problem, *teacher,
                                          base_seed + static_cast<std::uint64_t>(i),
                                          step_budget);
            steps[i] = r.total_steps;
            completed[i] = r.terminated ? 1 : 0;
        }
    };

    threads = std::max(1, threads);
    if (threads == 1 || n_trials < 2 * threads) {
        worker(0, n_trials);
    } else {
        std::vector<std::thread> pool;
        long long chunk = (n_trials + threads - 1) / threads;
        for (int t = 0; t < threads; ++t) {
            long long begin = t * chunk;
            long long end = std::min<long long>(n_trials, begin + chunk);
            if (begin >= end) break;
            pool.emplace_back(worker, begin, end);
        }
        for (auto& th : pool) th.join();
    }

    // Welford accumulation in ascending seed order: identical statistics at
    // any thread count.
    TrialStats stats;
    stats.seeds.reserve(n_trials);
    double mean = 0.0, m2 = 0.0;
    long long n = 0;
    for (long long i = 0; i < n_trials; ++i) {
        stats.seeds.push_back(base_seed + static_cast<std::uint64_t>(i));
        if (!completed[i]) {
            ++stats.failures;
            continue;
        }
        ++n;
        double x = static_cast<double>(steps[i]);
        double d1 = x - mean;
        mean += d1 / n;
        m2 += d1 * (x - mean);
    }
    stats.trial_count = n;
    stats.mean_steps = mean;
    stats.std_error = n > 1 ? std::sqrt(m2 / (n - 1) / n) : 0.0;
    stats.ci95_low = mean - 1.96 * stats.std_error;
    stats.ci95_high = mean + 1.96 * stats.std_error;
    return stats;
}

TrialStats expected_visits_mc_stats(int num_actions, double epsilon,
                                    int n_blockers, UpdateRule rule,
                                    long long trials, std::uint64_t seed) {
    const int A = num_actions;
    if (A < 2 || n_blockers < 1 || n_blockers > A - 1)
        throw DomainError("expected visits require 1 <= n_blockers <= A-1");

    // One-state MDP: the level-2 subgame in isolation. Target is action 0;
    // actions 1..n are the blockers (descending values), the rest sit below.
    MdpBuilder b(1, A, 64);
    b.set_initial(0, 1.0);
    for (int a = 0; a < A; ++a) b.add(0, a, 0, 1.0);
    TeachingProblem problem{std::move(b).build(),
                            LearnerSpec{epsilon, 0.5, 0.9, rule},
                            QTable(1, A), {0}};
    for (int a = 1; a < A; ++a)
        problem.q0(0, a) = a <= n_blockers
                               ? static_cast<double>(n_blockers - a + 1)
                               : static_cast<double>(n_blockers - a);

    long long budget = 200 * (2 * A);
    return run_trials(problem, 2, trials, seed, budget);
}

double expected_visits_mc(int num_actions, double epsilon, int n_blockers,
                          UpdateRule rule, long long trials,
                          std::uint64_t seed) {
    return expected_visits_mc_stats(num_actions, epsilon, n_blockers, rule,
                                    trials, seed)
        .mean_steps;
}

bool records_satisfy_level(const Mdp& mdp, const std::vector<StepRecord>& recs,
                           int level) {
    for (const StepRecord& rec : recs) {
        if (rec.s < 0 || rec.s >= mdp.num_states()) return false;
        if (rec.a < 0 || rec.a >= mdp.num_actions()) return false;
        if (level >= 2 && rec.a != rec.a_agent) return false;
        if (level >= 3) {
            if (rec.episode_start && mdp.initial_dist()[rec.s] <= 0.0)
                return false;
            if (rec.branch != "end" && !mdp.supports(rec.s, rec.a, rec.s_next))
                return false;
        }
    }
    return true;
}

void write_trace(const std::vector<StepRecord>& records,
                 const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    for (const StepRecord& rec : records) {
        out << "{\"t\":" << rec.t << ",\"episode\":" << rec.episode
            << ",\"s\":" << rec.s << ",\"a\":" << rec.a
            << ",\"r\":" << format_double(rec.r) << ",\"s_next\":" << rec.s_next
            << ",\"branch\":\"" << rec.branch << "\",\"subtask\":" << rec.subtask
            << "}\n";
    }
}

std::string format_double(double x) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, ptr);
}

std::string results_csv_header() {
    return "experiment_id,level,learner_rule,S,A,H,D,epsilon,p_min,delta,"
           "trials,failures,mean_steps,std_error,ci95_low,ci95_high,"
           "bound_lower,bound_upper,base_seed";
}

std::string to_csv_row(const ResultRow& row) {
    std::ostringstream out;
    out << row.experiment_id << ',' << row.level << ',' << to_string(row.rule)
        << ',' << row.num_states << ',' << row.num_actions << ','
        << row.horizon << ',' << row.diameter << ','
        << format_double(row.epsilon) << ',' << format_double(row.p_min) << ','
        << format_double(row.delta) << ',' << row.trials << ','
        << row.failures << ',' << format_double(row.mean_steps) << ','
        << format_double(row.std_error) << ',' << format_double(row.ci95_low)
        << ',' << format_double(row.ci95_high) << ','
        << format_double(row.bound_lower) << ','
        << format_double(row.bound_upper) << ',' << row.base_seed;
    return out.str();
}

}  // namespace teachdim
