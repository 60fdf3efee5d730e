#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "teachdim/teacher.hpp"

namespace teachdim {

// Directed graph with positive integer edge weights and a start vertex.
struct Digraph {
    int vertex_count = 0;
    int start = 0;
    struct Edge {
        int from = 0;
        int to = 0;
        int weight = 1;
    };
    std::vector<Edge> edges;

    void validate() const;
    bool has_edge(int u, int v) const;
    bool unit_weights() const;
};

void save_digraph(const Digraph& g, const std::string& path);
Digraph load_digraph(const std::string& path);

struct CoveringWalk {
    long long length = 0;        // edge-weight sum of the walk
    std::vector<int> vertices;   // starts at g.start, visits every vertex
};

// Minimum-weight covering walk from the start vertex (visit every vertex at
// least once): Held-Karp subset DP for a Hamiltonian path over the metric
// closure, with closure edges expanded back to graph edges. |V| <= 20.
CoveringWalk atsp_held_karp(const Digraph& g);

// Exhaustive minimum over all visit orders on the metric closure; the
// independent oracle for atsp_held_karp. |V| <= 9.
long long atsp_brute_force(const Digraph& g);

// The reduction: vertices become states, two actions share each vertex's
// out-edge support (uniform probabilities), mu0 sits on the start vertex,
// the initial table favors action 0 everywhere and the target plays action 1
// everywhere. The nominal horizon is D^2 (D = eccentricity of the start).
struct ReducedInstance {
    TeachingProblem problem;
    Digraph graph;
    int diameter = 0;
    bool horizon_raised = false;  // H lifted above D^2 to fit the optimal walk
};

ReducedInstance reduce_atsp_to_teaching(const Digraph& g);

// Exact METaL of a reduction instance. The optimal covering walk has
// atsp_length + 1 vertices and teaching consumes exactly one step per walk
// vertex (each state is completed in a single visit when A = 2), so
// metal_steps = atsp_length + 1. Certifies the value by replaying the walk
// as a level-3 teacher at each epsilon in `epsilons` and throws
// CertificationFailure if any session deviates. Certification runs in the
// no-reset regime: the horizon is raised to metal_steps when D^2 is smaller.
struct MetalCertificate {
    long long atsp_length = 0;
    long long metal_steps = 0;
    std::vector<int> walk;
    std::vector<double> certified_epsilons;
    bool horizon_raised = false;
};

MetalCertificate exact_metal(const ReducedInstance& inst,
                             const std::vector<double>& epsilons = {0.0, 0.3,
                                                                    0.7});

std::string certificate_to_json(const MetalCertificate& cert);

// Exhaustive minimum session length over all teacher next-state choices,
// from a DP over (current vertex, set of untaught vertices). Valid because
// with two actions a single visit always finishes a state and repeat visits
// never help. |V| <= 6.
long long min_session_dp(const Digraph& g);

}  // namespace teachdim
