"""Teaching-by-reinforcement simulator: tabular Q-learning teachers at four
power levels, hard-instance generators, analytic teaching-dimension bounds,
and exact covering-walk oracles."""

from ._teachdim import (
    BoundInputs,
    Digraph,
    Goal,
    LearnerSpec,
    Mdp,
    MetalCertificate,
    NavPlan,
    QTable,
    ReducedInstance,
    Rng,
    SessionResult,
    TeachdimError,
    TeachingProblem,
    TrialStats,
    UpdateRule,
    adversarial_q0,
    apply_update,
    atsp_brute_force,
    atsp_held_karp,
    build_nav_plan,
    default_step_budget,
    diameter,
    exact_metal,
    expected_visits_closed,
    expected_visits_mc,
    expected_visits_recursion,
    greedy_policy,
    load_mdp,
    make_chain,
    make_peacock,
    make_peacock_tree,
    make_random_sparse,
    mdp_from_json,
    min_session_dp,
    min_transition_prob,
    needs_teaching,
    reduce_atsp_to_teaching,
    run_session,
    run_trials,
    sample_action,
    sarsa_worstcase_visits,
    save_mdp,
    solve_reward,
    tdim_bounds,
    tight_theta_level3,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
