#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "teachdim/mdp.hpp"
#include "teachdim/oracle.hpp"
#include "teachdim/rng.hpp"

namespace teachdim::testing {

// The four-state walkthrough MDP: two deterministic actions, a0 edges
// s0->s2->s1->s3 (s3 self-loops) and a1 edges s0->s1 plus back/self edges.
// Its BFS tree from s0 has depth 2 and post-order (s3, s1, s2, s0).
inline Mdp fig2_mdp(int horizon = 6) {
    MdpBuilder b(4, 2, horizon);
    b.set_initial(0, 1.0);
    b.add(0, 0, 2, 1.0);
    b.add(0, 1, 1, 1.0);
    b.add(1, 0, 3, 1.0);
    b.add(1, 1, 0, 1.0);
    b.add(2, 0, 1, 1.0);
    b.add(2, 1, 2, 1.0);
    b.add(3, 0, 3, 1.0);
    b.add(3, 1, 0, 1.0);
    return std::move(b).build();
}

// Independent all-pairs oracle for the diameter: Floyd-Warshall unit-distance
// closure over the support digraph, then max over states of the min distance
// from a supported start.
inline int diameter_floyd_warshall(const Mdp& mdp) {
    const int S = mdp.num_states();
    const int inf = 1 << 28;
    std::vector<std::vector<int>> d(S, std::vector<int>(S, inf));
    for (int s = 0; s < S; ++s) d[s][s] = 0;
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < mdp.num_actions(); ++a)
            for (const Transition& t : mdp.transitions(s, a))
                if (t.next != s) d[s][t.next] = 1;
    for (int k = 0; k < S; ++k)
        for (int i = 0; i < S; ++i)
            for (int j = 0; j < S; ++j)
                d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
    int best = 0;
    for (int t = 0; t < S; ++t) {
        int nearest = inf;
        for (int s : mdp.supported_starts())
            nearest = std::min(nearest, d[s][t]);
        if (nearest >= inf) throw UnreachableState(t);
        best = std::max(best, nearest);
    }
    return best;
}

// Random strongly connected digraph: a random Hamiltonian cycle plus extra
// random edges. Unit weights by default.
inline Digraph random_strongly_connected(int n, int extra_edges,
                                         std::uint64_t seed,
                                         int max_weight = 1) {
    Rng rng(seed);
    Digraph g;
    g.vertex_count = n;
    g.start = 0;
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = n - 1; i > 0; --i)
        std::swap(perm[i], perm[rng.uniform_int(i + 1)]);
    auto weight = [&] {
        return max_weight <= 1 ? 1 : 1 + rng.uniform_int(max_weight);
    };
    for (int i = 0; i < n; ++i)
        g.edges.push_back({perm[i], perm[(i + 1) % n], weight()});
    for (int i = 0; i < extra_edges; ++i) {
        int u = rng.uniform_int(n), v = rng.uniform_int(n);
        if (u == v || g.has_edge(u, v)) continue;
        g.edges.push_back({u, v, weight()});
    }
    return g;
}

}  // namespace teachdim::testing
