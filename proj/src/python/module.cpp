#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "teachdim/bounds.hpp"
#include "teachdim/mdp.hpp"
#include "teachdim/nav_plan.hpp"
#include "teachdim/oracle.hpp"
#include "teachdim/session.hpp"

namespace py = pybind11;
using namespace teachdim;

namespace {

std::vector<std::vector<double>> qtable_rows(const QTable& q) {
    std::vector<std::vector<double>> rows(q.num_states());
    for (int s = 0; s < q.num_states(); ++s) {
        rows[s].resize(q.num_actions());
        for (int a = 0; a < q.num_actions(); ++a) rows[s][a] = q(s, a);
    }
    return rows;
}

QTable qtable_from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty() || rows[0].empty())
        throw InvariantViolation("Q-table must be a nonempty matrix");
    QTable q(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
    for (int s = 0; s < q.num_states(); ++s) {
        if (static_cast<int>(rows[s].size()) != q.num_actions())
            throw InvariantViolation("ragged Q-table rows");
        for (int a = 0; a < q.num_actions(); ++a) q(s, a) = rows[s][a];
    }
    return q;
}

}  // namespace

PYBIND11_MODULE(_teachdim, m) {
    m.doc() = "teaching-by-reinforcement simulator core";

    py::register_exception<Error>(m, "TeachdimError");

    py::enum_<UpdateRule>(m, "UpdateRule")
        .value("STANDARD_Q", UpdateRule::StandardQ)
        .value("SARSA", UpdateRule::Sarsa);

    py::enum_<Goal>(m, "Goal")
        .value("PROMOTE", Goal::Promote)
        .value("DEMOTE", Goal::Demote)
        .value("MAINTAIN", Goal::Maintain);

    py::class_<Mdp>(m, "Mdp")
        .def_property_readonly("num_states", &Mdp::num_states)
        .def_property_readonly("num_actions", &Mdp::num_actions)
        .def_property_readonly("horizon", &Mdp::horizon)
        .def_property_readonly("mu0",
                               [](const Mdp& mdp) {
                                   return std::vector<double>(
                                       mdp.initial_dist().begin(),
                                       mdp.initial_dist().end());
                               })
        .def("transitions",
             [](const Mdp& mdp, int s, int a) {
                 std::vector<std::pair<int, double>> out;
                 for (const Transition& t : mdp.transitions(s, a))
                     out.emplace_back(t.next, t.prob);
                 return out;
             },
             py::arg("s"), py::arg("a"))
        .def("supports", &Mdp::supports, py::arg("s"), py::arg("a"),
             py::arg("next"))
        .def("__eq__",
             [](const Mdp& a, const Mdp& b) { return a == b; })
        .def("to_json", &mdp_to_json);

    m.def("make_peacock", &make_peacock, py::arg("num_states"),
          py::arg("diameter"), py::arg("num_actions"), py::arg("horizon"),
          py::arg("p"));
    m.def("make_peacock_tree", &make_peacock_tree, py::arg("num_states"),
          py::arg("diameter"), py::arg("num_actions"), py::arg("horizon"),
          py::arg("p_min"));
    m.def("make_chain", &make_chain, py::arg("num_states"),
          py::arg("num_actions"), py::arg("horizon"));
    m.def("make_random_sparse", &make_random_sparse, py::arg("num_states"),
          py::arg("num_actions"), py::arg("horizon"), py::arg("density"),
          py::arg("seed"));
    m.def("diameter", &diameter);
    m.def("min_transition_prob", &min_transition_prob);
    m.def("save_mdp", &save_mdp, py::arg("mdp"), py::arg("path"));
    m.def("load_mdp", &load_mdp, py::arg("path"));
    m.def("mdp_from_json", &mdp_from_json);

    py::class_<NavPlan>(m, "NavPlan")
        .def_readonly("root", &NavPlan::root)
        .def_readonly("depth", &NavPlan::depth)
        .def_readonly("subtask_order", &NavPlan::subtask_order)
        .def_property_readonly("parent_edge",
                               [](const NavPlan& p) { return p.parent_edge; })
        .def("max_depth", &NavPlan::max_depth)
        .def("ancestral_path", [](const NavPlan& p, int s) {
            std::vector<std::pair<int, int>> out;
            for (const NavEdge& e : p.ancestral_path(s))
                out.emplace_back(e.state, e.action);
            return out;
        });
    m.def("build_nav_plan", &build_nav_plan);

    py::class_<LearnerSpec>(m, "LearnerSpec")
        .def(py::init([](double epsilon, double alpha, double gamma,
                         UpdateRule rule) {
                 LearnerSpec spec{epsilon, alpha, gamma, rule};
                 spec.validate();
                 return spec;
             }),
             py::arg("epsilon") = 0.0, py::arg("alpha") = 0.5,
             py::arg("gamma") = 0.9,
             py::arg("rule") = UpdateRule::StandardQ)
        .def_readonly("epsilon", &LearnerSpec::epsilon)
        .def_readonly("alpha", &LearnerSpec::alpha)
        .def_readonly("gamma", &LearnerSpec::gamma)
        .def_readonly("rule", &LearnerSpec::rule);

    py::class_<QTable>(m, "QTable")
        .def(py::init<int, int, double>(), py::arg("num_states"),
             py::arg("num_actions"), py::arg("fill") = 0.0)
        .def(py::init(&qtable_from_rows), py::arg("rows"))
        .def_property_readonly("num_states", &QTable::num_states)
        .def_property_readonly("num_actions", &QTable::num_actions)
        .def("get", [](const QTable& q, int s, int a) { return q(s, a); })
        .def("set",
             [](QTable& q, int s, int a, double v) { q(s, a) = v; })
        .def("rows", &qtable_rows)
        .def("__eq__",
             [](const QTable& a, const QTable& b) { return a == b; });

    py::class_<Rng>(m, "Rng").def(py::init<std::uint64_t>(), py::arg("seed"));

    m.def("sample_action", &sample_action, py::arg("q"), py::arg("s"),
          py::arg("spec"), py::arg("rng"));
    m.def("apply_update",
          [](QTable& q, int s, int a, double r, int s_next,
             std::optional<int> a_next, const LearnerSpec& spec) {
              apply_update(q, Experience{s, a, r, s_next, a_next}, spec);
          },
          py::arg("q"), py::arg("s"), py::arg("a"), py::arg("r"),
          py::arg("s_next"), py::arg("a_next"), py::arg("spec"));
    m.def("solve_reward", &solve_reward, py::arg("q"), py::arg("s"),
          py::arg("a"), py::arg("s_next"), py::arg("goal"), py::arg("delta"),
          py::arg("spec"), py::arg("a_next") = std::nullopt);
    m.def("greedy_policy", [](const QTable& q) {
        GreedyPolicy p = greedy_policy(q);
        return std::make_pair(p.actions,
                              std::vector<bool>(p.strict.begin(),
                                                p.strict.end()));
    });

    py::class_<TeachingProblem>(m, "TeachingProblem")
        .def(py::init<Mdp, LearnerSpec, QTable, std::vector<int>>(),
             py::arg("mdp"), py::arg("spec"), py::arg("q0"), py::arg("target"))
        .def_readonly("mdp", &TeachingProblem::mdp)
        .def_readonly("spec", &TeachingProblem::spec)
        .def_readonly("q0", &TeachingProblem::q0)
        .def_readonly("target", &TeachingProblem::target);
    m.def("adversarial_q0", &adversarial_q0, py::arg("mdp"), py::arg("target"));
    m.def("needs_teaching", &needs_teaching, py::arg("q"), py::arg("s"),
          py::arg("target_action"));

    py::class_<SessionResult>(m, "SessionResult")
        .def_readonly("total_steps", &SessionResult::total_steps)
        .def_readonly("total_episodes", &SessionResult::total_episodes)
        .def_readonly("per_state_visit_counts",
                      &SessionResult::per_state_visit_counts)
        .def_readonly("terminated", &SessionResult::terminated)
        .def_readonly("final_q", &SessionResult::final_q);

    py::class_<TrialStats>(m, "TrialStats")
        .def_readonly("trial_count", &TrialStats::trial_count)
        .def_readonly("failures", &TrialStats::failures)
        .def_readonly("mean_steps", &TrialStats::mean_steps)
        .def_readonly("std_error", &TrialStats::std_error)
        .def_readonly("ci95_low", &TrialStats::ci95_low)
        .def_readonly("ci95_high", &TrialStats::ci95_high)
        .def_readonly("seeds", &TrialStats::seeds);

    m.def("run_session",
          [](const TeachingProblem& problem, int level, std::uint64_t seed,
             long long step_budget, double delta) {
              return run_session(problem, level, seed, step_budget, delta);
          },
          py::arg("problem"), py::arg("level"), py::arg("seed"),
          py::arg("step_budget"), py::arg("delta") = 1.0);
    m.def("run_trials", &run_trials, py::arg("problem"), py::arg("level"),
          py::arg("n_trials"), py::arg("base_seed"), py::arg("step_budget"),
          py::arg("delta") = 1.0, py::arg("threads") = 1);
    m.def("default_step_budget", &default_step_budget, py::arg("problem"),
          py::arg("level"), py::arg("multiplier") = 100.0);
    m.def("expected_visits_mc", &expected_visits_mc, py::arg("num_actions"),
          py::arg("epsilon"), py::arg("n_blockers"), py::arg("rule"),
          py::arg("trials"), py::arg("seed"));

    py::class_<BoundInputs>(m, "BoundInputs")
        .def(py::init([](int S, int A, int H, int D, double epsilon,
                         double p_min) {
                 return BoundInputs{S, A, H, D, epsilon, p_min};
             }),
             py::arg("num_states"), py::arg("num_actions"), py::arg("horizon"),
             py::arg("diameter"), py::arg("epsilon") = 0.0,
             py::arg("p_min") = 1.0);
    m.def("expected_visits_closed", &expected_visits_closed, py::arg("n"),
          py::arg("num_actions"), py::arg("epsilon"));
    m.def("expected_visits_recursion", &expected_visits_recursion,
          py::arg("n"), py::arg("num_actions"), py::arg("epsilon"));
    m.def("tdim_bounds",
          [](int level, const BoundInputs& in) {
              BoundPair b = tdim_bounds(level, in);
              return std::make_pair(b.lower, b.upper);
          },
          py::arg("level"), py::arg("inputs"));
    m.def("tight_theta_level3",
          [](const BoundInputs& in) {
              BoundPair b = tight_theta_level3(in);
              return std::make_pair(b.lower, b.upper);
          },
          py::arg("inputs"));
    m.def("sarsa_worstcase_visits", &sarsa_worstcase_visits,
          py::arg("num_actions"));

    py::class_<Digraph>(m, "Digraph")
        .def(py::init([](int n, int start,
                         const std::vector<std::tuple<int, int, int>>& edges) {
                 Digraph g;
                 g.vertex_count = n;
                 g.start = start;
                 for (auto [u, v, w] : edges) g.edges.push_back({u, v, w});
                 g.validate();
                 return g;
             }),
             py::arg("n"), py::arg("start"), py::arg("edges"))
        .def_readonly("vertex_count", &Digraph::vertex_count)
        .def_readonly("start", &Digraph::start);

    m.def("atsp_held_karp", [](const Digraph& g) {
        CoveringWalk walk = atsp_held_karp(g);
        return std::make_pair(walk.length, walk.vertices);
    });
    m.def("atsp_brute_force", &atsp_brute_force);

    py::class_<ReducedInstance>(m, "ReducedInstance")
        .def_readonly("problem", &ReducedInstance::problem)
        .def_readonly("diameter", &ReducedInstance::diameter);
    m.def("reduce_atsp_to_teaching", &reduce_atsp_to_teaching);

    py::class_<MetalCertificate>(m, "MetalCertificate")
        .def_readonly("atsp_length", &MetalCertificate::atsp_length)
        .def_readonly("metal_steps", &MetalCertificate::metal_steps)
        .def_readonly("walk", &MetalCertificate::walk)
        .def_readonly("certified_epsilons",
                      &MetalCertificate::certified_epsilons)
        .def_readonly("horizon_raised", &MetalCertificate::horizon_raised);
    m.def("exact_metal", &exact_metal, py::arg("instance"),
          py::arg("epsilons") = std::vector<double>{0.0, 0.3, 0.7});
    m.def("min_session_dp", &min_session_dp);
}
