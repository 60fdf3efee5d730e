#include "teachdim/bounds.hpp"

#include <cmath>
#include <string>

namespace teachdim {

void BoundInputs::validate(int level) const {
    if (level < 1 || level > 4) throw DomainError("level must be 1..4");
    if (num_states < 1 || num_actions < 2 || horizon < 1 || diameter < 0)
        throw DomainError("bound inputs require S >= 1, A >= 2, H >= 1, D >= 0");
    if (diameter > horizon) throw DomainError("bounds require D <= H");
    if (!(epsilon >= 0.0 && epsilon < 1.0))
        throw DomainError("bounds require epsilon in [0,1)");
    if (!(p_min > 0.0 && p_min <= 1.0))
        throw DomainError("bounds require p_min in (0,1]");
    if (level >= 3 && num_states < diameter + 2)
        throw DomainError("levels 3 and 4 require S >= D+2");
}

double expected_visits_closed(int n, int num_actions, double epsilon) {
    const int A = num_actions;
    if (A < 2 || n < 0 || n > A - 1)
        throw DomainError("expected visits require A >= 2 and 0 <= n <= A-1");
    if (!(epsilon >= 0.0 && epsilon <= 1.0))
        throw DomainError("expected visits require epsilon in [0,1]");
    if (n == 0) return 0.0;
    return n / (1.0 - (static_cast<double>(A - 1 - n) / (A - 1)) * epsilon);
}

double expected_visits_recursion(int n, int num_actions, double epsilon) {
    const int A = num_actions;
    if (A < 2 || n < 0 || n > A - 1)
        throw DomainError("expected visits require A >= 2 and 0 <= n <= A-1");
    if (!(epsilon >= 0.0 && epsilon <= 1.0))
        throw DomainError("expected visits require epsilon in [0,1]");
    // T(k) = 1 + (1-eps+(k-1)eps/(A-1)) T(k-1) + (eps/(A-1)) T(0)
    //          + (A-k-1)(eps/(A-1)) T(k),  T(0) = 0.
    double per = epsilon / (A - 1);
    double t_prev = 0.0;
    for (int k = 1; k <= n; ++k) {
        double stay = (A - k - 1) * per;
        double down = 1.0 - epsilon + (k - 1) * per;
        t_prev = (1.0 + down * t_prev) / (1.0 - stay);
    }
    return t_prev;
}

namespace {

double pow_int(double base, int exp) {
    double r = 1.0;
    for (int i = 0; i < exp; ++i) r *= base;
    return r;
}

}  // namespace

BoundPair tdim_bounds(int level, const BoundInputs& in) {
    in.validate(level);
    const double S = in.num_states, A1 = in.num_actions - 1, H = in.horizon;
    switch (level) {
        case 1: return {S, S};
        case 2: return {S * A1, S * A1};
        case 3: {
            double k = pow_int(1.0 / (1.0 - in.epsilon), in.diameter);
            return {(S - in.diameter - 1) * A1 * H * k,
                    (2 * S - 1) * A1 * H * k};
        }
        default: {
            double k =
                pow_int(1.0 / (in.p_min * (1.0 - in.epsilon)), in.diameter);
            return {0.5 * (S - in.diameter) * A1 * H * k,
                    (2 * S - 1) * A1 * H * k};
        }
    }
}

BoundPair tight_theta_level3(const BoundInputs& in) {
    in.validate(3);
    const double S = in.num_states, A1 = in.num_actions - 1, H = in.horizon;
    const int D = in.diameter;
    double k = pow_int(1.0 / (1.0 - in.epsilon), D);
    // H ((1-eps)/eps) (k^D - 1); the eps -> 0 limit is H*D.
    double tail = in.epsilon == 0.0
                      ? H * static_cast<double>(D)
                      : H * ((1.0 - in.epsilon) / in.epsilon) * (k - 1.0);
    return {(S - D - 1) * A1 * H * k + tail,
            (2 * S - 1 - 2 * D) * A1 * H * k + tail};
}

double sarsa_worstcase_visits(int num_actions) {
    if (num_actions < 2) throw DomainError("A must be at least 2");
    return 2.0 * num_actions - 2.0;
}

}  // namespace teachdim
