#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "helpers.hpp"
#include "teachdim/oracle.hpp"
#include "teachdim/session.hpp"

using namespace teachdim;
namespace tt = teachdim::testing;

namespace {

Digraph complete_k3() {
    Digraph g;
    g.vertex_count = 3;
    g.start = 0;
    for (int u = 0; u < 3; ++u)
        for (int v = 0; v < 3; ++v)
            if (u != v) g.edges.push_back({u, v, 1});
    return g;
}

Digraph directed_cycle(int n) {
    Digraph g;
    g.vertex_count = n;
    g.start = 0;
    for (int v = 0; v < n; ++v) g.edges.push_back({v, (v + 1) % n, 1});
    return g;
}

long long walk_weight(const Digraph& g, const std::vector<int>& walk) {
    long long total = 0;
    for (std::size_t i = 0; i + 1 < walk.size(); ++i) {
        bool found = false;
        for (const auto& e : g.edges)
            if (e.from == walk[i] && e.to == walk[i + 1]) {
                total += e.weight;
                found = true;
                break;
            }
        REQUIRE(found);
    }
    return total;
}

}  // namespace

TEST_CASE("held-karp on the tiny instances") {
    CoveringWalk k3 = atsp_held_karp(complete_k3());
    CHECK(k3.length == 2);
    CHECK(k3.vertices.size() == 3);

    CoveringWalk cycle = atsp_held_karp(directed_cycle(4));
    CHECK(cycle.length == 3);
    CHECK(cycle.vertices == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("held-karp equals brute force on weighted graphs") {
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        int n = 3 + static_cast<int>(seed % 6);  // up to 8 vertices
        Digraph g = tt::random_strongly_connected(n, n, seed, 9);
        CoveringWalk walk = atsp_held_karp(g);
        CHECK(walk.length == atsp_brute_force(g));
        // The walk starts at the start vertex, uses only graph edges, covers
        // every vertex, and its edge weights add up to the length.
        CHECK(walk.vertices.front() == g.start);
        std::vector<bool> seen(n, false);
        for (int v : walk.vertices) seen[v] = true;
        for (int v = 0; v < n; ++v) CHECK(seen[v]);
        CHECK(walk_weight(g, walk.vertices) == walk.length);
    }
}

TEST_CASE("held-karp guards its domain") {
    Digraph g = directed_cycle(21);
    CHECK_THROWS_AS(atsp_held_karp(g), TooLarge);
    Digraph big = directed_cycle(10);
    CHECK_THROWS_AS(atsp_brute_force(big), TooLarge);
    Digraph disconnected;
    disconnected.vertex_count = 2;
    disconnected.start = 0;
    disconnected.edges.push_back({1, 0, 1});
    CHECK_THROWS_AS(atsp_held_karp(disconnected), UnreachableState);
}

TEST_CASE("reduction builds the two-action teaching instance") {
    SUBCASE("complete graph on three vertices") {
        ReducedInstance inst = reduce_atsp_to_teaching(complete_k3());
        CHECK(inst.problem.mdp.num_states() == 3);
        CHECK(inst.problem.mdp.num_actions() == 2);
        CHECK(inst.diameter == 1);
        CHECK(inst.problem.mdp.horizon() == 1);  // D^2
        for (int s = 0; s < 3; ++s) {
            CHECK(inst.problem.target[s] == 1);
            CHECK(greedy_policy(inst.problem.q0).actions[s] == 0);
        }
    }
    SUBCASE("four-cycle has quadratic horizon") {
        ReducedInstance inst = reduce_atsp_to_teaching(directed_cycle(4));
        CHECK(inst.diameter == 3);
        CHECK(inst.problem.mdp.horizon() == 9);
    }
    SUBCASE("both actions share each vertex's support") {
        ReducedInstance inst = reduce_atsp_to_teaching(
            tt::random_strongly_connected(6, 8, 17));
        const Mdp& mdp = inst.problem.mdp;
        for (int s = 0; s < mdp.num_states(); ++s) {
            auto a0 = mdp.transitions(s, 0);
            auto a1 = mdp.transitions(s, 1);
            REQUIRE(a0.size() == a1.size());
            for (std::size_t i = 0; i < a0.size(); ++i) {
                CHECK(a0[i].next == a1[i].next);
                CHECK(a0[i].prob == a1[i].prob);
            }
        }
    }
    SUBCASE("weighted graphs are rejected") {
        Digraph g = complete_k3();
        g.edges[0].weight = 2;
        CHECK_THROWS_AS(reduce_atsp_to_teaching(g), DomainError);
    }
}

TEST_CASE("exact metal certifies the covering-walk replay") {
    SUBCASE("triangle") {
        MetalCertificate cert = exact_metal(reduce_atsp_to_teaching(complete_k3()));
        CHECK(cert.atsp_length == 2);
        CHECK(cert.metal_steps == 3);
        CHECK(cert.certified_epsilons == std::vector<double>{0.0, 0.3, 0.7});
        CHECK(cert.horizon_raised);  // D^2 = 1 cannot hold the walk
    }
    SUBCASE("four-cycle") {
        MetalCertificate cert =
            exact_metal(reduce_atsp_to_teaching(directed_cycle(4)));
        CHECK(cert.atsp_length == 3);
        CHECK(cert.metal_steps == 4);
        CHECK_FALSE(cert.horizon_raised);  // D^2 = 9 >= 4
    }
}

TEST_CASE("walk replay, brute force and the session DP agree") {
    for (std::uint64_t seed = 100; seed < 120; ++seed) {
        int n = 3 + static_cast<int>(seed % 4);  // up to 6: DP-checkable
        Digraph g = tt::random_strongly_connected(n, n, seed);
        long long hk = atsp_held_karp(g).length;
        CHECK(hk == atsp_brute_force(g));
        MetalCertificate cert = exact_metal(reduce_atsp_to_teaching(g));
        CHECK(cert.atsp_length == hk);
        CHECK(cert.metal_steps == hk + 1);
        // Exhaustive search over teacher choices finds nothing shorter.
        CHECK(min_session_dp(g) == cert.metal_steps);
    }
}

TEST_CASE("digraph json round trip and certificates") {
    Digraph g = tt::random_strongly_connected(5, 4, 3, 5);
    std::string path =
        (std::filesystem::temp_directory_path() / "teachdim_graph.json")
            .string();
    save_digraph(g, path);
    Digraph back = load_digraph(path);
    CHECK(back.vertex_count == g.vertex_count);
    CHECK(back.start == g.start);
    CHECK(back.edges.size() == g.edges.size());
    std::remove(path.c_str());

    MetalCertificate cert =
        exact_metal(reduce_atsp_to_teaching(directed_cycle(4)));
    std::string j = certificate_to_json(cert);
    CHECK(j.find("\"length\": 3") != std::string::npos);
    CHECK(j.find("\"walk\"") != std::string::npos);
    CHECK(j.find("\"certified_epsilons\"") != std::string::npos);
}
