#include "teachdim/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace teachdim {

namespace {

constexpr double kProbTol = 1e-9;

void check(bool cond, const std::string& msg) {
    if (!cond) throw InvariantViolation(msg);
}

}  // namespace

Mdp::Mdp(int num_states, int num_actions, int horizon,
         std::vector<double> initial_dist,
         std::vector<std::vector<Transition>> rows,
         std::optional<std::vector<double>> base_reward)
    : num_states_(num_states),
      num_actions_(num_actions),
      horizon_(horizon),
      initial_dist_(std::move(initial_dist)),
      rows_(std::move(rows)) {
    check(num_states_ >= 1, "num_states must be positive");
    check(num_actions_ >= 2, "num_actions must be at least 2");
    check(horizon_ >= 1, "horizon must be positive");
    check(static_cast<int>(initial_dist_.size()) == num_states_,
          "initial distribution length must equal num_states");
    check(rows_.size() ==
              static_cast<std::size_t>(num_states_) * num_actions_,
          "transition table must have one row per (state, action)");

    double mu_sum = 0.0;
    for (int s = 0; s < num_states_; ++s) {
        check(initial_dist_[s] >= 0.0, "mu0 entries must be nonnegative");
        mu_sum += initial_dist_[s];
        if (initial_dist_[s] > 0.0) starts_.push_back(s);
    }
    check(std::abs(mu_sum - 1.0) <= kProbTol, "mu0 must sum to 1");
    check(!starts_.empty(), "mu0 must have a positive entry");

    for (int s = 0; s < num_states_; ++s) {
        for (int a = 0; a < num_actions_; ++a) {
            const auto& row = rows_[static_cast<std::size_t>(s) * num_actions_ + a];
            std::ostringstream where;
            where << "(s=" << s << ", a=" << a << ")";
            check(!row.empty(), "empty transition row at " + where.str());
            double sum = 0.0;
            int prev = -1;
            for (const Transition& t : row) {
                check(t.next >= 0 && t.next < num_states_,
                      "next state out of range at " + where.str());
                check(t.next > prev,
                      "duplicate or unsorted next state at " + where.str());
                check(t.prob > 0.0 && t.prob <= 1.0,
                      "transition probability outside (0,1] at " + where.str());
                prev = t.next;
                sum += t.prob;
            }
            check(std::abs(sum - 1.0) <= kProbTol,
                  "transition probabilities must sum to 1 at " + where.str());
        }
    }

    if (base_reward.has_value()) {
        check(base_reward->size() ==
                  static_cast<std::size_t>(num_states_) * num_actions_,
              "base reward table must be S x A");
        base_reward_ = std::move(*base_reward);
    }
}

bool Mdp::supports(int s, int a, int next) const {
    auto row = transitions(s, a);
    auto it = std::lower_bound(
        row.begin(), row.end(), next,
        [](const Transition& t, int v) { return t.next < v; });
    return it != row.end() && it->next == next;
}

bool operator==(const Mdp& a, const Mdp& b) {
    return a.num_states_ == b.num_states_ && a.num_actions_ == b.num_actions_ &&
           a.horizon_ == b.horizon_ && a.initial_dist_ == b.initial_dist_ &&
           a.rows_ == b.rows_ && a.base_reward_ == b.base_reward_;
}

MdpBuilder::MdpBuilder(int num_states, int num_actions, int horizon)
    : num_states_(num_states),
      num_actions_(num_actions),
      horizon_(horizon),
      initial_dist_(static_cast<std::size_t>(num_states), 0.0),
      rows_(static_cast<std::size_t>(num_states) * num_actions) {}

void MdpBuilder::add(int s, int a, int next, double prob) {
    rows_[static_cast<std::size_t>(s) * num_actions_ + a].push_back(
        {next, prob});
}

void MdpBuilder::set_initial(int s, double prob) { initial_dist_[s] = prob; }

Mdp MdpBuilder::build() && {
    for (auto& row : rows_) {
        std::sort(row.begin(), row.end(),
                  [](const Transition& x, const Transition& y) {
                      return x.next < y.next;
                  });
    }
    return Mdp(num_states_, num_actions_, horizon_, std::move(initial_dist_),
               std::move(rows_));
}

namespace {

// Multi-source BFS over the support digraph; distance from the nearest
// supported start to each state.
std::vector<int> bfs_from_starts(const Mdp& mdp) {
    std::vector<int> dist(mdp.num_states(), -1);
    std::deque<int> queue;
    for (int s : mdp.supported_starts()) {
        dist[s] = 0;
        queue.push_back(s);
    }
    while (!queue.empty()) {
        int s = queue.front();
        queue.pop_front();
        for (int a = 0; a < mdp.num_actions(); ++a) {
            for (const Transition& t : mdp.transitions(s, a)) {
                if (dist[t.next] < 0) {
                    dist[t.next] = dist[s] + 1;
                    queue.push_back(t.next);
                }
            }
        }
    }
    return dist;
}

}  // namespace

int diameter(const Mdp& mdp) {
    std::vector<int> dist = bfs_from_starts(mdp);
    int best = 0;
    for (int s = 0; s < mdp.num_states(); ++s) {
        if (dist[s] < 0) throw UnreachableState(s);
        best = std::max(best, dist[s]);
    }
    return best;
}

double min_transition_prob(const Mdp& mdp) {
    double best = std::numeric_limits<double>::infinity();
    for (int s = 0; s < mdp.num_states(); ++s)
        for (int a = 0; a < mdp.num_actions(); ++a)
            for (const Transition& t : mdp.transitions(s, a))
                best = std::min(best, t.prob);
    return best;
}

Mdp make_peacock(int num_states, int diameter_d, int num_actions, int horizon,
                 double p) {
    const int S = num_states, D = diameter_d, A = num_actions;
    const int tails = S - D - 1;
    if (D < 1 || S < D + 2 || A < 2)
        throw InvalidShape("peacock needs D >= 1, S >= D+2, A >= 2");
    if (horizon < D + 1) throw InvalidShape("peacock needs H >= D+1");
    if (!(p > 0.0) || p * tails > 1.0 + 1e-12)
        throw InvalidShape("peacock needs 0 < p <= 1/(S-D-1)");

    // Layout: neck 0..D-1, tails D..S-2, absorbing S-1.
    const int absorbing = S - 1;
    MdpBuilder b(S, A, horizon);
    b.set_initial(0, 1.0);
    for (int i = 0; i < D; ++i) {
        if (i + 1 < D) {
            b.add(i, 0, i + 1, p);
            if (p < 1.0) b.add(i, 0, absorbing, 1.0 - p);
        } else {
            double rest = 1.0 - p * tails;
            if (std::abs(rest - p) < 1e-12) rest = p;  // uniform fan-out
            for (int t = 0; t < tails; ++t) b.add(i, 0, D + t, p);
            if (rest > 1e-12) b.add(i, 0, absorbing, rest);
        }
        for (int a = 1; a < A; ++a) b.add(i, a, absorbing, 1.0);
    }
    for (int t = 0; t < tails; ++t)
        for (int a = 0; a < A; ++a) b.add(D + t, a, absorbing, 1.0);
    for (int a = 0; a < A; ++a) b.add(absorbing, a, absorbing, 1.0);
    return std::move(b).build();
}

Mdp make_peacock_tree(int num_states, int diameter_d, int num_actions,
                      int horizon, double p_min) {
    const int D = diameter_d, A = num_actions;
    if (D < 1 || A < 2) throw InvalidShape("peacock tree needs D >= 1, A >= 2");
    if (horizon < D + 1) throw InvalidShape("peacock tree needs H >= D+1");
    if (!(p_min > 0.0) || p_min > 1.0)
        throw InvalidShape("peacock tree needs p_min in (0,1]");

    // Largest tree depth d with 2^d + (D - d + 1) <= num_states, d <= D - 1.
    int d = -1;
    for (int cand = 0; cand <= std::min(D - 1, 29); ++cand) {
        if ((1 << cand) + (D - cand + 1) <= num_states) d = cand;
    }
    if (d < 0)
        throw InvalidShape("num_states admits no tree depth for this diameter");
    const int S = (1 << (d + 1)) + (D - d);  // completed full binary tree

    // Layout: chain 0..D-d-1 (D-d states), tree in heap order starting at
    // chain_len, absorbing last. Tree node k (0-based heap index) has
    // children 2k+1 and 2k+2; leaves are the last 2^d nodes.
    const int chain_states = D - d;
    const int tree_nodes = (1 << (d + 1)) - 1;
    const int tree_base = chain_states;
    const int absorbing = S - 1;
    const double rest = 1.0 - p_min;

    MdpBuilder b(S, A, horizon);
    b.set_initial(0, 1.0);
    for (int i = 0; i < chain_states; ++i) {
        int next = (i + 1 < chain_states) ? i + 1 : tree_base;
        b.add(i, 0, next, p_min);
        if (rest > 1e-12) b.add(i, 0, absorbing, rest);
        for (int a = 1; a < A; ++a) b.add(i, a, absorbing, 1.0);
    }
    const int first_leaf = tree_nodes - (1 << d);
    for (int k = 0; k < tree_nodes; ++k) {
        int s = tree_base + k;
        if (k < first_leaf) {
            b.add(s, 0, tree_base + 2 * k + 1, p_min);
            if (rest > 1e-12) b.add(s, 0, absorbing, rest);
            b.add(s, 1, tree_base + 2 * k + 2, p_min);
            if (rest > 1e-12) b.add(s, 1, absorbing, rest);
            for (int a = 2; a < A; ++a) b.add(s, a, absorbing, 1.0);
        } else {
            for (int a = 0; a < A; ++a) b.add(s, a, absorbing, 1.0);
        }
    }
    for (int a = 0; a < A; ++a) b.add(absorbing, a, absorbing, 1.0);
    return std::move(b).build();
}

Mdp make_chain(int num_states, int num_actions, int horizon) {
    if (num_states < 1 || num_actions < 2)
        throw InvalidShape("chain needs S >= 1, A >= 2");
    MdpBuilder b(num_states, num_actions, horizon);
    b.set_initial(0, 1.0);
    for (int s = 0; s < num_states; ++s) {
        int next = (s + 1 < num_states) ? s + 1 : s;
        b.add(s, 0, next, 1.0);
        for (int a = 1; a < num_actions; ++a) b.add(s, a, s, 1.0);
    }
    return std::move(b).build();
}

Mdp make_random_sparse(int num_states, int num_actions, int horizon,
                       double density, std::uint64_t seed) {
    if (num_states < 1 || num_actions < 2)
        throw InvalidShape("random MDP needs S >= 1, A >= 2");
    if (!(density > 0.0) || density > 1.0)
        throw InvalidShape("density must be in (0,1]");
    Rng rng(seed);
    const int S = num_states, A = num_actions;
    int fan = std::max(1, static_cast<int>(std::lround(density * S)));
    fan = std::min(fan, S);

    std::vector<std::vector<int>> support(
        static_cast<std::size_t>(S) * A);
    // Reachability spine: every state s >= 1 is a successor of some earlier
    // state under some action.
    for (int s = 1; s < S; ++s) {
        int parent = rng.uniform_int(s);
        int action = rng.uniform_int(A);
        support[static_cast<std::size_t>(parent) * A + action].push_back(s);
    }
    for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) {
            auto& out = support[static_cast<std::size_t>(s) * A + a];
            std::sort(out.begin(), out.end());
            out.erase(std::unique(out.begin(), out.end()), out.end());
            while (static_cast<int>(out.size()) < fan) {
                int cand = rng.uniform_int(S);
                if (std::find(out.begin(), out.end(), cand) == out.end())
                    out.push_back(cand);
            }
            std::sort(out.begin(), out.end());
        }
    }

    MdpBuilder b(S, A, horizon);
    b.set_initial(0, 1.0);
    for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) {
            const auto& out = support[static_cast<std::size_t>(s) * A + a];
            // Integer weights in [1,9] keep probabilities exactly representable
            // as small rationals and p_min bounded away from zero.
            std::vector<int> w(out.size());
            int total = 0;
            for (auto& x : w) {
                x = 1 + rng.uniform_int(9);
                total += x;
            }
            for (std::size_t i = 0; i < out.size(); ++i)
                b.add(s, a, out[i], static_cast<double>(w[i]) / total);
        }
    }
    return std::move(b).build();
}

namespace {

using nlohmann::json;

json mdp_to_json_value(const Mdp& mdp) {
    json j;
    j["num_states"] = mdp.num_states();
    j["num_actions"] = mdp.num_actions();
    j["horizon"] = mdp.horizon();
    j["mu0"] = std::vector<double>(mdp.initial_dist().begin(),
                                   mdp.initial_dist().end());
    json rows = json::array();
    for (int s = 0; s < mdp.num_states(); ++s) {
        for (int a = 0; a < mdp.num_actions(); ++a) {
            json row;
            row["s"] = s;
            row["a"] = a;
            json next = json::array();
            for (const Transition& t : mdp.transitions(s, a))
                next.push_back(json::array({t.next, t.prob}));
            row["next"] = std::move(next);
            rows.push_back(std::move(row));
        }
    }
    j["transitions"] = std::move(rows);
    if (mdp.has_base_reward()) {
        json br = json::array();
        for (int s = 0; s < mdp.num_states(); ++s) {
            json brr = json::array();
            for (int a = 0; a < mdp.num_actions(); ++a)
                brr.push_back(mdp.base_reward(s, a));
            br.push_back(std::move(brr));
        }
        j["base_reward"] = std::move(br);
    }
    return j;
}

Mdp mdp_from_json_value(const json& j) {
    int S = j.at("num_states").get<int>();
    int A = j.at("num_actions").get<int>();
    int H = j.at("horizon").get<int>();
    auto mu0 = j.at("mu0").get<std::vector<double>>();
    if (S < 1 || A < 1)
        throw ParseError("num_states and num_actions must be positive");
    std::vector<std::vector<Transition>> rows(
        static_cast<std::size_t>(S) * A);
    for (const json& row : j.at("transitions")) {
        int s = row.at("s").get<int>();
        int a = row.at("a").get<int>();
        if (s < 0 || s >= S || a < 0 || a >= A)
            throw ParseError("transition row has out-of-range s or a");
        auto& out = rows[static_cast<std::size_t>(s) * A + a];
        for (const json& entry : row.at("next")) {
            if (!entry.is_array() || entry.size() != 2)
                throw ParseError("transition entries must be [next, prob]");
            out.push_back({entry[0].get<int>(), entry[1].get<double>()});
        }
        std::sort(out.begin(), out.end(),
                  [](const Transition& x, const Transition& y) {
                      return x.next < y.next;
                  });
    }
    std::optional<std::vector<double>> base_reward;
    if (j.contains("base_reward")) {
        std::vector<double> br;
        br.reserve(static_cast<std::size_t>(S) * A);
        for (const json& brr : j.at("base_reward"))
            for (const json& v : brr) br.push_back(v.get<double>());
        base_reward = std::move(br);
    }
    return Mdp(S, A, H, std::move(mu0), std::move(rows),
               std::move(base_reward));
}

}  // namespace

std::string mdp_to_json(const Mdp& mdp) {
    return mdp_to_json_value(mdp).dump(2) + "\n";
}

Mdp mdp_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid MDP JSON: ") + e.what());
    }
    try {
        return mdp_from_json_value(j);
    } catch (const json::exception& e) {
        throw ParseError(std::string("MDP JSON schema error: ") + e.what());
    }
}

void save_mdp(const Mdp& mdp, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    out << mdp_to_json(mdp);
}

Mdp load_mdp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return mdp_from_json(buf.str());
}

}  // namespace teachdim
