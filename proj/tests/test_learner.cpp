#include <doctest.h>

#include <cmath>

#include "teachdim/learner.hpp"

using namespace teachdim;

TEST_CASE("sample_action is greedy at epsilon zero") {
    QTable q(1, 2);
    q(0, 1) = 1.0;
    LearnerSpec spec{0.0, 0.5, 0.9, UpdateRule::StandardQ};
    Rng rng(1);
    for (int i = 0; i < 50; ++i) CHECK(sample_action(q, 0, spec, rng) == 1);
}

TEST_CASE("sample_action exploration frequencies") {
    SUBCASE("epsilon one splits over the non-greedy actions") {
        QTable q(1, 3);
        q(0, 0) = 5.0;  // argmax is a0
        LearnerSpec spec{1.0, 0.5, 0.9, UpdateRule::StandardQ};
        Rng rng(7);
        int counts[3] = {0, 0, 0};
        const int n = 100000;
        for (int i = 0; i < n; ++i) ++counts[sample_action(q, 0, spec, rng)];
        CHECK(counts[0] == 0);
        // each of a1, a2 with prob 1/2; 3 sigma of a binomial(n, 1/2)
        double sigma = std::sqrt(n * 0.5 * 0.5);
        CHECK(std::abs(counts[1] - n * 0.5) < 3 * sigma);
    }
    SUBCASE("greedy mass at epsilon 0.3") {
        QTable q(1, 4);
        q(0, 2) = 2.0;
        LearnerSpec spec{0.3, 0.5, 0.9, UpdateRule::StandardQ};
        Rng rng(11);
        int greedy = 0;
        const int n = 100000;
        int counts[4] = {0, 0, 0, 0};
        for (int i = 0; i < n; ++i) {
            int a = sample_action(q, 0, spec, rng);
            ++counts[a];
            if (a == 2) ++greedy;
        }
        double sigma = std::sqrt(n * 0.7 * 0.3);
        CHECK(std::abs(greedy - n * 0.7) < 3 * sigma);
        // every action has positive probability
        for (int a = 0; a < 4; ++a) CHECK(counts[a] > 0);
    }
    SUBCASE("argmax ties break to the lowest index") {
        QTable q(1, 3);  // all zero
        LearnerSpec spec{0.0, 0.5, 0.9, UpdateRule::StandardQ};
        Rng rng(3);
        CHECK(sample_action(q, 0, spec, rng) == 0);
    }
}

TEST_CASE("apply_update arithmetic") {
    LearnerSpec spec{0.0, 0.5, 0.9, UpdateRule::StandardQ};
    SUBCASE("standard update") {
        QTable q(2, 2);
        apply_update(q, {0, 0, 2.2, 1, std::nullopt}, spec);
        CHECK(q(0, 0) == doctest::Approx(1.1).epsilon(1e-12));
    }
    SUBCASE("degenerate rates write the reward") {
        LearnerSpec hard{0.0, 1.0, 0.0, UpdateRule::StandardQ};
        QTable q(2, 2);
        q(0, 0) = 123.0;
        apply_update(q, {0, 0, -4.5, 1, std::nullopt}, hard);
        CHECK(q(0, 0) == -4.5);
    }
    SUBCASE("only the touched entry changes") {
        QTable q(3, 3);
        for (int s = 0; s < 3; ++s)
            for (int a = 0; a < 3; ++a) q(s, a) = s * 3.0 + a;
        QTable before = q;
        apply_update(q, {1, 2, 0.7, 0, std::nullopt}, spec);
        for (int s = 0; s < 3; ++s)
            for (int a = 0; a < 3; ++a)
                if (s != 1 || a != 2) CHECK(q(s, a) == before(s, a));
    }
    SUBCASE("sarsa bootstraps on the 5-tuple pair") {
        LearnerSpec sarsa{0.0, 0.5, 0.9, UpdateRule::Sarsa};
        QTable q(2, 2);
        q(1, 0) = 10.0;
        q(1, 1) = -10.0;
        apply_update(q, {0, 0, 2.0, 1, 1}, sarsa);
        // (1-a)*0 + a*(2 + 0.9*(-10)) = 0.5 * -7 = -3.5
        CHECK(q(0, 0) == doctest::Approx(-3.5));
        CHECK_THROWS_AS(apply_update(q, {0, 0, 2.0, 1, std::nullopt}, sarsa),
                        MissingNextAction);
    }
}

TEST_CASE("solve_reward hits the named examples") {
    LearnerSpec spec{0.0, 0.5, 0.9, UpdateRule::StandardQ};
    QTable q(2, 2);
    q(0, 0) = 1.0;  // row [1, 0]
    SUBCASE("promote") {
        double r = solve_reward(q, 0, 1, 1, Goal::Promote, 0.1, spec);
        CHECK(r == doctest::Approx(2.2));
        apply_update(q, {0, 1, r, 1, std::nullopt}, spec);
        CHECK(q(0, 1) == doctest::Approx(1.1));
    }
    SUBCASE("demote") {
        double r = solve_reward(q, 0, 0, 1, Goal::Demote, 0.1, spec);
        CHECK(r == doctest::Approx(-1.2));
        apply_update(q, {0, 0, r, 1, std::nullopt}, spec);
        CHECK(q(0, 0) == doctest::Approx(-0.1));
    }
    SUBCASE("maintain keeps the entry") {
        double r = solve_reward(q, 0, 0, 1, Goal::Maintain, 0.1, spec);
        CHECK(r == doctest::Approx(1.0));
        apply_update(q, {0, 0, r, 1, std::nullopt}, spec);
        CHECK(q(0, 0) == doctest::Approx(1.0));
    }
}

TEST_CASE("reward inversion is exact on random tuples") {
    Rng rng(99);
    for (int trial = 0; trial < 1000; ++trial) {
        int S = 2 + rng.uniform_int(5);
        int A = 2 + rng.uniform_int(5);
        bool sarsa = rng.uniform_int(2) == 1;
        LearnerSpec spec{0.0, 0.05 + 0.95 * rng.next_double(),
                         0.99 * rng.next_double(),
                         sarsa ? UpdateRule::Sarsa : UpdateRule::StandardQ};
        QTable q(S, A);
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a) q(s, a) = 20.0 * rng.next_double() - 10.0;
        int s = rng.uniform_int(S), a = rng.uniform_int(A);
        int s_next = rng.uniform_int(S);
        std::optional<int> a_next;
        if (sarsa) a_next = rng.uniform_int(A);
        Goal goal = static_cast<Goal>(rng.uniform_int(3));
        double delta = 0.01 + rng.next_double();

        QTable before = q;
        double r = solve_reward(q, s, a, s_next, goal, delta, spec, a_next);
        apply_update(q, {s, a, r, s_next, a_next}, spec);

        double want;
        switch (goal) {
            case Goal::Promote: want = before.max_excluding(s, a) + delta; break;
            case Goal::Demote: want = before.min_excluding(s, a) - delta; break;
            default: want = before(s, a); break;
        }
        CHECK(std::abs(q(s, a) - want) <= 1e-9);
        for (int ss = 0; ss < S; ++ss)
            for (int aa = 0; aa < A; ++aa)
                if (ss != s || aa != a) CHECK(q(ss, aa) == before(ss, aa));

        // Promote / demote leave the action strictly first / last.
        if (goal == Goal::Promote) {
            CHECK(q.row_argmax(s) == a);
            CHECK(q.row_strict(s));
        } else if (goal == Goal::Demote) {
            for (int aa = 0; aa < A; ++aa)
                if (aa != a) CHECK(q(s, aa) > q(s, a));
        }
    }
}

TEST_CASE("greedy_policy argmax and strictness") {
    QTable q(2, 2);
    q(0, 1) = 1.0;
    q(1, 0) = 2.0;
    GreedyPolicy p = greedy_policy(q);
    CHECK(p.actions == std::vector<int>{1, 0});
    CHECK(p.strict == std::vector<bool>{true, true});

    QTable flat(1, 3);
    GreedyPolicy fp = greedy_policy(flat);
    CHECK(fp.actions[0] == 0);
    CHECK_FALSE(fp.strict[0]);

    // After a promote the greedy action is the promoted one, strictly.
    LearnerSpec spec{0.0, 0.5, 0.9, UpdateRule::StandardQ};
    QTable q2(1, 4);
    q2(0, 2) = 3.0;
    double r = solve_reward(q2, 0, 1, 0, Goal::Promote, 0.1, spec);
    apply_update(q2, {0, 1, r, 0, std::nullopt}, spec);
    GreedyPolicy gp = greedy_policy(q2);
    CHECK(gp.actions[0] == 1);
    CHECK(gp.strict[0]);
}

TEST_CASE("learner spec validation") {
    CHECK_THROWS_AS((LearnerSpec{-0.1, 0.5, 0.9, UpdateRule::StandardQ})
                        .validate(),
                    InvariantViolation);
    CHECK_THROWS_AS((LearnerSpec{0.0, 0.0, 0.9, UpdateRule::StandardQ})
                        .validate(),
                    InvariantViolation);
    CHECK_THROWS_AS((LearnerSpec{0.0, 0.5, 1.0, UpdateRule::StandardQ})
                        .validate(),
                    InvariantViolation);
    CHECK_NOTHROW((LearnerSpec{0.3, 1.0, 0.0, UpdateRule::Sarsa}).validate());
}
