#include "teachdim/nav_plan.hpp"

#include <algorithm>
#include <deque>

namespace teachdim {

namespace {

struct BfsTree {
    std::vector<std::pair<int, int>> parent;
    std::vector<int> depth;
    int max_depth = -1;  // -1 when some state is unreachable
    int unreachable = -1;
};

BfsTree bfs_tree(const Mdp& mdp, int root) {
    BfsTree t;
    t.parent.assign(mdp.num_states(), {-1, -1});
    t.depth.assign(mdp.num_states(), -1);
    t.depth[root] = 0;
    std::deque<int> queue{root};
    int reached = 1;
    int max_depth = 0;
    while (!queue.empty()) {
        int s = queue.front();
        queue.pop_front();
        for (int a = 0; a < mdp.num_actions(); ++a) {
            for (const Transition& tr : mdp.transitions(s, a)) {
                if (t.depth[tr.next] >= 0) continue;
                t.depth[tr.next] = t.depth[s] + 1;
                t.parent[tr.next] = {s, a};
                max_depth = std::max(max_depth, t.depth[tr.next]);
                ++reached;
                queue.push_back(tr.next);
            }
        }
    }
    if (reached == mdp.num_states()) {
        t.max_depth = max_depth;
    } else {
        for (int s = 0; s < mdp.num_states(); ++s)
            if (t.depth[s] < 0) {
                t.unreachable = s;
                break;
            }
    }
    return t;
}

}  // namespace

int NavPlan::max_depth() const {
    int d = 0;
    for (int x : depth) d = std::max(d, x);
    return d;
}

std::vector<NavEdge> NavPlan::ancestral_path(int s) const {
    std::vector<NavEdge> path;
    while (s != root) {
        auto [p, a] = parent_edge[s];
        path.push_back({p, a});
        s = p;
    }
    std::reverse(path.begin(), path.end());
    return path;
}

NavPlan build_nav_plan(const Mdp& mdp) {
    BfsTree best;
    int best_root = -1;
    int first_unreachable = -1;
    for (int s : mdp.supported_starts()) {
        BfsTree t = bfs_tree(mdp, s);
        if (t.max_depth < 0) {
            if (first_unreachable < 0) first_unreachable = t.unreachable;
            continue;
        }
        if (best_root < 0 || t.max_depth < best.max_depth) {
            best = std::move(t);
            best_root = s;
        }
    }
    if (best_root < 0)
        throw UnreachableState(first_unreachable >= 0 ? first_unreachable : 0);

    NavPlan plan;
    plan.root = best_root;
    plan.parent_edge = std::move(best.parent);
    plan.depth = std::move(best.depth);

    std::vector<std::vector<int>> children(mdp.num_states());
    for (int s = 0; s < mdp.num_states(); ++s)
        if (s != plan.root) children[plan.parent_edge[s].first].push_back(s);
    for (auto& c : children) std::sort(c.begin(), c.end());

    // Iterative post-order, children in ascending index.
    plan.subtask_order.reserve(mdp.num_states());
    std::vector<std::pair<int, bool>> stack{{plan.root, false}};
    while (!stack.empty()) {
        auto [s, expanded] = stack.back();
        stack.pop_back();
        if (expanded) {
            plan.subtask_order.push_back(s);
        } else {
            stack.push_back({s, true});
            for (auto it = children[s].rbegin(); it != children[s].rend(); ++it)
                stack.push_back({*it, false});
        }
    }
    return plan;
}

}  // namespace teachdim
