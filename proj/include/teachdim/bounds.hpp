#pragma once

#include "teachdim/errors.hpp"

namespace teachdim {

// Parameters of the teaching-dimension bound formulas.
struct BoundInputs {
    int num_states = 0;    // S
    int num_actions = 0;   // A
    int horizon = 0;       // H
    int diameter = 0;      // D
    double epsilon = 0.0;  // in [0,1)
    double p_min = 1.0;    // in (0,1]

    void validate(int level) const;
};

struct BoundPair {
    double lower = 0.0;
    double upper = 0.0;
};

// Expected visits to one state until the target action is strictly on top,
// starting with n higher-ranked actions:  n / (1 - ((A-1-n)/(A-1)) eps).
double expected_visits_closed(int n, int num_actions, double epsilon);

// Same quantity obtained by solving the one-step visit recursion upward from
// T(0) = 0; agrees with the closed form to 1e-12 and serves as its oracle.
double expected_visits_recursion(int n, int num_actions, double epsilon);

// Teaching-dimension sandwich per teacher level. Levels 1 and 2 are exact
// (S and S(A-1)); level 3 is
//   [(S-D-1)(A-1)H k^D, (2S-1)(A-1)H k^D]  with  k = 1/(1-eps);
// level 4 replaces k by 1/(p_min (1-eps)) and halves the lower constant.
BoundPair tdim_bounds(int level, const BoundInputs& in);

// The tighter level-3 sandwich, matching up to a constant of 2:
//   lower = (S-D-1)(A-1)H k^D + tail,  upper = (2S-1-2D)(A-1)H k^D + tail,
//   tail  = H ((1-eps)/eps) (k^D - 1), evaluated as H*D in the eps -> 0 limit.
BoundPair tight_theta_level3(const BoundInputs& in);

// Worst-case expected visits per state for a SARSA learner: 2A - 2.
double sarsa_worstcase_visits(int num_actions);

}  // namespace teachdim
