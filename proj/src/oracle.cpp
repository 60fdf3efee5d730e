#include "teachdim/oracle.hpp"

#include <algorithm>
#include <bit>
#include <deque>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "teachdim/session.hpp"

namespace teachdim {

namespace {

constexpr long long kInf = 1e18;

}  // namespace

void Digraph::validate() const {
    if (vertex_count < 1) throw InvariantViolation("digraph needs a vertex");
    if (start < 0 || start >= vertex_count)
        throw InvariantViolation("start vertex out of range");
    for (const Edge& e : edges) {
        if (e.from < 0 || e.from >= vertex_count || e.to < 0 ||
            e.to >= vertex_count)
            throw InvariantViolation("edge endpoint out of range");
        if (e.weight < 1) throw InvariantViolation("edge weight must be >= 1");
    }
    std::vector<char> seen(vertex_count, 0);
    std::deque<int> queue{start};
    seen[start] = 1;
    int reached = 1;
    std::vector<std::vector<int>> out(vertex_count);
    for (const Edge& e : edges) out[e.from].push_back(e.to);
    while (!queue.empty()) {
        int v = queue.front();
        queue.pop_front();
        for (int u : out[v])
            if (!seen[u]) {
                seen[u] = 1;
                ++reached;
                queue.push_back(u);
            }
    }
    if (reached != vertex_count)
        for (int v = 0; v < vertex_count; ++v)
            if (!seen[v]) throw UnreachableState(v);
}

bool Digraph::has_edge(int u, int v) const {
    for (const Edge& e : edges)
        if (e.from == u && e.to == v) return true;
    return false;
}

bool Digraph::unit_weights() const {
    for (const Edge& e : edges)
        if (e.weight != 1) return false;
    return true;
}

void save_digraph(const Digraph& g, const std::string& path) {
    nlohmann::json j;
    j["n"] = g.vertex_count;
    j["start"] = g.start;
    auto edges = nlohmann::json::array();
    for (const auto& e : g.edges)
        edges.push_back(nlohmann::json::array({e.from, e.to, e.weight}));
    j["edges"] = std::move(edges);
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    out << j.dump(2) << "\n";
}

Digraph load_digraph(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("invalid digraph JSON: ") + e.what());
    }
    Digraph g;
    try {
        g.vertex_count = j.at("n").get<int>();
        g.start = j.at("start").get<int>();
        for (const auto& e : j.at("edges"))
            g.edges.push_back({e.at(0).get<int>(), e.at(1).get<int>(),
                               e.at(2).get<int>()});
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("digraph JSON schema error: ") + e.what());
    }
    g.validate();
    return g;
}

namespace {

struct Closure {
    int n = 0;
    std::vector<long long> dist;      // n x n
    std::vector<int> first_hop;       // first vertex after u on a shortest u->v path
    long long d(int u, int v) const { return dist[u * n + v]; }
};

Closure metric_closure(const Digraph& g) {
    Closure c;
    c.n = g.vertex_count;
    c.dist.assign(static_cast<std::size_t>(c.n) * c.n, kInf);
    c.first_hop.assign(static_cast<std::size_t>(c.n) * c.n, -1);
    for (int v = 0; v < c.n; ++v) c.dist[v * c.n + v] = 0;
    for (const auto& e : g.edges) {
        if (e.weight < c.dist[e.from * c.n + e.to]) {
            c.dist[e.from * c.n + e.to] = e.weight;
            c.first_hop[e.from * c.n + e.to] = e.to;
        }
    }
    for (int k = 0; k < c.n; ++k)
        for (int i = 0; i < c.n; ++i) {
            if (c.d(i, k) >= kInf) continue;
            for (int j = 0; j < c.n; ++j) {
                long long via = c.d(i, k) + c.d(k, j);
                if (via < c.d(i, j)) {
                    c.dist[i * c.n + j] = via;
                    c.first_hop[i * c.n + j] = c.first_hop[i * c.n + k];
                }
            }
        }
    return c;
}

}  // namespace

CoveringWalk atsp_held_karp(const Digraph& g) {
    g.validate();
    const int n = g.vertex_count;
    if (n > 20) throw TooLarge("held-karp handles up to 20 vertices");
    Closure c = metric_closure(g);

    if (n == 1) return {0, {g.start}};

    const int full = (1 << n) - 1;
    std::vector<long long> dp(static_cast<std::size_t>(full + 1) * n, kInf);
    std::vector<int> prev(static_cast<std::size_t>(full + 1) * n, -1);
    dp[(1LL << g.start) * n + g.start] = 0;
    for (int mask = 1; mask <= full; ++mask) {
        if (!(mask & (1 << g.start))) continue;
        for (int v = 0; v < n; ++v) {
            if (!(mask & (1 << v))) continue;
            long long base = dp[static_cast<std::size_t>(mask) * n + v];
            if (base >= kInf) continue;
            for (int u = 0; u < n; ++u) {
                if (mask & (1 << u)) continue;
                if (c.d(v, u) >= kInf) continue;
                int nmask = mask | (1 << u);
                long long cand = base + c.d(v, u);
                if (cand < dp[static_cast<std::size_t>(nmask) * n + u]) {
                    dp[static_cast<std::size_t>(nmask) * n + u] = cand;
                    prev[static_cast<std::size_t>(nmask) * n + u] = v;
                }
            }
        }
    }

    int best_end = -1;
    long long best = kInf;
    for (int v = 0; v < n; ++v) {
        long long cand = dp[static_cast<std::size_t>(full) * n + v];
        if (cand < best) {
            best = cand;
            best_end = v;
        }
    }
    if (best_end < 0) throw Error("covering walk does not exist");

    // Visit order over the closure, then expansion into graph edges.
    std::vector<int> order;
    int mask = full, v = best_end;
    while (v >= 0) {
        order.push_back(v);
        int p = prev[static_cast<std::size_t>(mask) * n + v];
        mask &= ~(1 << v);
        v = p;
    }
    std::reverse(order.begin(), order.end());

    CoveringWalk walk;
    walk.length = best;
    walk.vertices.push_back(g.start);
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        int from = order[i], to = order[i + 1];
        while (from != to) {
            from = c.first_hop[from * n + to];
            walk.vertices.push_back(from);
        }
    }
    return walk;
}

long long atsp_brute_force(const Digraph& g) {
    g.validate();
    const int n = g.vertex_count;
    if (n > 9) throw TooLarge("brute force handles up to 9 vertices");
    Closure c = metric_closure(g);
    if (n == 1) return 0;

    std::vector<int> rest;
    for (int v = 0; v < n; ++v)
        if (v != g.start) rest.push_back(v);
    long long best = kInf;
    do {
        long long total = 0;
        int at = g.start;
        for (int v : rest) {
            long long d = c.d(at, v);
            if (d >= kInf) {
                total = kInf;
                break;
            }
            total += d;
            at = v;
        }
        best = std::min(best, total);
    } while (std::next_permutation(rest.begin(), rest.end()));
    if (best >= kInf) throw Error("covering walk does not exist");
    return best;
}

ReducedInstance reduce_atsp_to_teaching(const Digraph& g) {
    g.validate();
    if (g.vertex_count > 20) throw TooLarge("reduction handles up to 20 vertices");
    if (!g.unit_weights())
        throw DomainError("the reduction is over hop counts: unit weights only");

    const int n = g.vertex_count;
    std::vector<std::vector<int>> out(n);
    for (const auto& e : g.edges) out[e.from].push_back(e.to);
    for (int v = 0; v < n; ++v) {
        std::sort(out[v].begin(), out[v].end());
        out[v].erase(std::unique(out[v].begin(), out[v].end()), out[v].end());
        if (out[v].empty())
            throw InvalidShape("vertex " + std::to_string(v) +
                               " has no outgoing edge");
    }

    // Diameter of the graph from the start vertex (unit weights).
    std::vector<int> dist(n, -1);
    std::deque<int> queue{g.start};
    dist[g.start] = 0;
    int d_max = 0;
    while (!queue.empty()) {
        int v = queue.front();
        queue.pop_front();
        for (int u : out[v])
            if (dist[u] < 0) {
                dist[u] = dist[v] + 1;
                d_max = std::max(d_max, dist[u]);
                queue.push_back(u);
            }
    }

    int horizon = std::max(1, d_max * d_max);
    MdpBuilder b(n, 2, horizon);
    b.set_initial(g.start, 1.0);
    for (int v = 0; v < n; ++v) {
        double p = 1.0 / static_cast<double>(out[v].size());
        for (std::size_t i = 0; i < out[v].size(); ++i) {
            // Uniform, with the last entry absorbing rounding error.
            double prob = i + 1 == out[v].size()
                              ? 1.0 - p * static_cast<double>(out[v].size() - 1)
                              : p;
            b.add(v, 0, out[v][i], prob);
            b.add(v, 1, out[v][i], prob);
        }
    }
    Mdp mdp = std::move(b).build();
    std::vector<int> target(n, 1);
    QTable q0 = adversarial_q0(mdp, target);
    ReducedInstance inst{
        TeachingProblem{std::move(mdp), LearnerSpec{}, std::move(q0),
                        std::move(target)},
        g, d_max, false};
    return inst;
}

namespace {

// Scripted level-3 teacher that replays a covering walk: promote the target
// action on every visit it is played, demote otherwise. With two actions
// either reward finishes the state, and on revisits it keeps the state
// taught.
class WalkTeacher : public Teacher {
public:
    WalkTeacher(const TeachingProblem& problem, std::vector<int> walk)
        : problem_(&problem), walk_(std::move(walk)) {}

    int level() const override { return 3; }
    std::optional<int> initial_state() const override { return walk_.front(); }

    TeacherDecision decide(const QTable& q, int s, int a,
                           std::optional<int>, Rng&) override {
        if (k_ >= walk_.size() || walk_[k_] != s)
            throw CertificationFailure("walk replay left the planned route");
        TeacherDecision d;
        d.branch = "walk";
        d.subtask = static_cast<int>(k_);
        d.goal = a == problem_->target[s] ? Goal::Promote : Goal::Demote;
        int next = k_ + 1 < walk_.size()
                       ? walk_[k_ + 1]
                       : problem_->mdp.transitions(s, a).front().next;
        d.next_state = next;
        if (problem_->spec.rule == UpdateRule::StandardQ)
            d.reward = solve_reward(q, s, a, next, d.goal, d.delta,
                                    problem_->spec);
        ++k_;
        return d;
    }

private:
    const TeachingProblem* problem_;
    std::vector<int> walk_;
    std::size_t k_ = 0;
};

}  // namespace

MetalCertificate exact_metal(const ReducedInstance& inst,
                             const std::vector<double>& epsilons) {
    CoveringWalk walk = atsp_held_karp(inst.graph);
    MetalCertificate cert;
    cert.atsp_length = walk.length;
    cert.metal_steps = walk.length + 1;
    cert.walk = walk.vertices;

    // Certification needs the no-reset regime: raise the horizon when the
    // nominal D^2 cannot fit the optimal walk in one episode.
    TeachingProblem problem = inst.problem;
    if (problem.mdp.horizon() < cert.metal_steps) {
        cert.horizon_raised = true;
        MdpBuilder b(problem.mdp.num_states(), 2,
                     static_cast<int>(cert.metal_steps));
        b.set_initial(inst.graph.start, 1.0);
        for (int s = 0; s < problem.mdp.num_states(); ++s)
            for (int a = 0; a < 2; ++a)
                for (const Transition& t : inst.problem.mdp.transitions(s, a))
                    b.add(s, a, t.next, t.prob);
        problem.mdp = std::move(b).build();
    }

    for (double eps : epsilons) {
        problem.spec.epsilon = eps;
        WalkTeacher teacher(problem, walk.vertices);
        SessionResult r =
            run_session(problem, teacher, /*seed=*/1234, cert.metal_steps + 1);
        if (!r.terminated || r.total_steps != cert.metal_steps) {
            std::ostringstream msg;
            msg << "walk replay at epsilon " << eps << " took "
                << r.total_steps << " steps (terminated=" << r.terminated
                << "), expected " << cert.metal_steps;
            throw CertificationFailure(msg.str());
        }
        cert.certified_epsilons.push_back(eps);
    }
    return cert;
}

std::string certificate_to_json(const MetalCertificate& cert) {
    nlohmann::json j;
    j["length"] = cert.atsp_length;
    j["metal_steps"] = cert.metal_steps;
    j["walk"] = cert.walk;
    j["certified_epsilons"] = cert.certified_epsilons;
    j["horizon_raised"] = cert.horizon_raised;
    return j.dump(2) + "\n";
}

long long min_session_dp(const Digraph& g) {
    g.validate();
    const int n = g.vertex_count;
    if (n > 6) throw TooLarge("the session DP handles up to 6 vertices");
    std::vector<std::vector<int>> out(n);
    for (const auto& e : g.edges) out[e.from].push_back(e.to);
    for (auto& o : out) {
        std::sort(o.begin(), o.end());
        o.erase(std::unique(o.begin(), o.end()), o.end());
        if (o.empty()) throw InvalidShape("vertex without outgoing edge");
    }

    const int full = (1 << n) - 1;
    // f[mask][v]: steps to finish when at v with untaught set mask. A step
    // teaches the current vertex and moves along an out-edge.
    std::vector<std::vector<long long>> f(
        full + 1, std::vector<long long>(n, kInf));
    for (int v = 0; v < n; ++v) f[0][v] = 0;

    std::vector<int> masks(full);
    std::iota(masks.begin(), masks.end(), 1);
    std::sort(masks.begin(), masks.end(), [](int a, int b) {
        return std::popcount(static_cast<unsigned>(a)) <
               std::popcount(static_cast<unsigned>(b));
    });

    for (int mask : masks) {
        // Vertices inside the mask shrink it; known from earlier layers.
        for (int v = 0; v < n; ++v) {
            if (!(mask & (1 << v))) continue;
            int smaller = mask & ~(1 << v);
            for (int u : out[v])
                f[mask][v] = std::min(f[mask][v], 1 + f[smaller][u]);
        }
        // Vertices outside the mask move within the same layer: relax to a
        // fixed point (at most n rounds on unit steps).
        for (int round = 0; round < n; ++round) {
            bool changed = false;
            for (int v = 0; v < n; ++v) {
                if (mask & (1 << v)) continue;
                for (int u : out[v]) {
                    long long cand = f[mask][u] >= kInf ? kInf : 1 + f[mask][u];
                    if (cand < f[mask][v]) {
                        f[mask][v] = cand;
                        changed = true;
                    }
                }
            }
            if (!changed) break;
        }
    }
    return f[full][g.start];
}

}  // namespace teachdim
