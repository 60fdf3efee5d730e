#pragma once

#include <utility>
#include <vector>

#include "teachdim/mdp.hpp"

namespace teachdim {

// One edge of a navigation path: take `action` in `state`.
struct NavEdge {
    int state = 0;
    int action = 0;

    friend bool operator==(const NavEdge&, const NavEdge&) = default;
};

// Minimum-depth breadth-first tree over the support digraph plus the
// post-order subtask schedule NavTeach consumes. Deterministic: the root is
// the supported initial state with the shallowest tree (lowest index on
// ties), BFS expands actions and successor states in ascending order, and the
// post-order traversal visits children in ascending state index.
struct NavPlan {
    int root = 0;
    std::vector<std::pair<int, int>> parent_edge;  // (parent, action); (-1,-1) at root
    std::vector<int> depth;
    std::vector<int> subtask_order;  // post-order, root last

    int max_depth() const;
    bool is_root(int s) const { return s == root; }

    // Edges from the root to s, in travel order; empty for the root.
    std::vector<NavEdge> ancestral_path(int s) const;
};

NavPlan build_nav_plan(const Mdp& mdp);

}  // namespace teachdim
