// teachdim: generate hard MDP instances, run teaching sessions at the four
// teacher power levels, evaluate the analytic bounds, and certify exact
// teaching lengths through the covering-walk oracle.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "teachdim/bounds.hpp"
#include "teachdim/mdp.hpp"
#include "teachdim/oracle.hpp"
#include "teachdim/session.hpp"

namespace td = teachdim;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitInvariant = 3;
constexpr int kExitBudget = 4;
constexpr int kExitCertification = 5;

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
    return out;
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
    return out;
}

bool filesystem_safe(const std::string& id) {
    if (id.empty()) return false;
    for (char c : id)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' ||
              c == '_' || c == '.'))
            return false;
    return true;
}

struct GenOptions {
    std::string family = "peacock";
    int S = 8, D = 3, A = 3, H = 6;
    double p = 0.2;
    double density = 0.3;
    std::uint64_t seed = 1;
    std::string out;
};

int cmd_gen(const GenOptions& opt) {
    td::Mdp mdp = [&] {
        if (opt.family == "peacock")
            return td::make_peacock(opt.S, opt.D, opt.A, opt.H, opt.p);
        if (opt.family == "peacock-tree")
            return td::make_peacock_tree(opt.S, opt.D, opt.A, opt.H, opt.p);
        if (opt.family == "chain")
            return td::make_chain(opt.S, opt.A, opt.H);
        if (opt.family == "random")
            return td::make_random_sparse(opt.S, opt.A, opt.H, opt.density,
                                          opt.seed);
        throw td::DomainError("unknown family: " + opt.family);
    }();
    td::save_mdp(mdp, opt.out);
    std::cout << "wrote " << opt.out << ": S=" << mdp.num_states()
              << " A=" << mdp.num_actions() << " H=" << mdp.horizon()
              << " D=" << td::diameter(mdp)
              << " p_min=" << td::format_double(td::min_transition_prob(mdp))
              << " seed=" << opt.seed << "\n";
    return 0;
}

struct TeachOptions {
    std::string experiment_id = "exp";
    int level = 1;
    std::string rule = "standard_q";
    std::string mdp_file;
    GenOptions gen;  // used when no file is given
    std::string epsilons = "0";
    double alpha = 0.5;
    double gamma = 0.9;
    double delta = 1.0;
    std::string q0_file;      // default: adversarial
    std::string target_file;  // default: constant action
    int target_action = 0;
    long long trials = 100;
    std::uint64_t base_seed = 1;
    double budget_multiplier = 100.0;
    int threads = 1;
    std::string out;    // CSV path (append); stdout when empty
    std::string trace;  // JSONL trace of the first trial
};

td::QTable load_qtable(const std::string& path, int S, int A) {
    std::ifstream in(path);
    if (!in) throw td::Error("cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw td::ParseError(std::string("invalid Q-table JSON: ") + e.what());
    }
    if (static_cast<int>(j.size()) != S)
        throw td::InvariantViolation("Q-table rows must equal num_states");
    td::QTable q(S, A);
    for (int s = 0; s < S; ++s) {
        if (static_cast<int>(j[s].size()) != A)
            throw td::InvariantViolation("Q-table columns must equal num_actions");
        for (int a = 0; a < A; ++a) q(s, a) = j[s][a].get<double>();
    }
    return q;
}

std::vector<int> load_policy(const std::string& path, int S) {
    std::ifstream in(path);
    if (!in) throw td::Error("cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw td::ParseError(std::string("invalid policy JSON: ") + e.what());
    }
    if (static_cast<int>(j.size()) != S)
        throw td::InvariantViolation("policy length must equal num_states");
    std::vector<int> target(S);
    for (int s = 0; s < S; ++s) target[s] = j[s].get<int>();
    return target;
}

int cmd_teach(const TeachOptions& opt) {
    if (!filesystem_safe(opt.experiment_id))
        throw td::DomainError("experiment_id must be nonempty and filesystem-safe");

    td::Mdp mdp = opt.mdp_file.empty()
                      ? [&] {
                            GenOptions g = opt.gen;
                            if (g.family == "random") g.seed = opt.base_seed;
                            if (g.family == "peacock")
                                return td::make_peacock(g.S, g.D, g.A, g.H, g.p);
                            if (g.family == "peacock-tree")
                                return td::make_peacock_tree(g.S, g.D, g.A, g.H,
                                                             g.p);
                            if (g.family == "chain")
                                return td::make_chain(g.S, g.A, g.H);
                            if (g.family == "random")
                                return td::make_random_sparse(g.S, g.A, g.H,
                                                              g.density, g.seed);
                            throw td::DomainError("unknown family: " + g.family);
                        }()
                      : td::load_mdp(opt.mdp_file);

    const int S = mdp.num_states(), A = mdp.num_actions();
    std::vector<int> target =
        opt.target_file.empty() ? std::vector<int>(S, opt.target_action)
                                : load_policy(opt.target_file, S);
    td::QTable q0 = opt.q0_file.empty() ? td::adversarial_q0(mdp, target)
                                        : load_qtable(opt.q0_file, S, A);
    int D = td::diameter(mdp);
    double p_min = td::min_transition_prob(mdp);

    bool any_failures = false;
    std::ostringstream rows;
    for (double eps : parse_double_list(opt.epsilons)) {
        td::TeachingProblem problem{
            mdp,
            td::LearnerSpec{eps, opt.alpha, opt.gamma,
                            td::update_rule_from_string(opt.rule)},
            q0, target};
        long long budget =
            td::default_step_budget(problem, opt.level, opt.budget_multiplier);
        td::TrialStats stats = td::run_trials(problem, opt.level, opt.trials,
                                              opt.base_seed, budget, opt.delta,
                                              opt.threads);
        any_failures = any_failures || stats.failures > 0;

        td::BoundInputs in{S, A, mdp.horizon(), D,
                           opt.level <= 2 ? 0.0 : eps, p_min};
        td::BoundPair bounds = td::tdim_bounds(opt.level, in);

        td::ResultRow row;
        row.experiment_id = opt.experiment_id;
        row.level = opt.level;
        row.rule = td::update_rule_from_string(opt.rule);
        row.num_states = S;
        row.num_actions = A;
        row.horizon = mdp.horizon();
        row.diameter = D;
        row.epsilon = eps;
        row.p_min = p_min;
        row.delta = opt.delta;
        row.trials = stats.trial_count;
        row.failures = stats.failures;
        row.mean_steps = stats.mean_steps;
        row.std_error = stats.std_error;
        row.ci95_low = stats.ci95_low;
        row.ci95_high = stats.ci95_high;
        row.bound_lower = bounds.lower;
        row.bound_upper = bounds.upper;
        row.base_seed = opt.base_seed;
        rows << td::to_csv_row(row) << "\n";

        if (!opt.trace.empty() && eps == parse_double_list(opt.epsilons).front()) {
            td::SessionResult r = td::run_session(problem, opt.level,
                                                  opt.base_seed, budget,
                                                  opt.delta, /*record=*/true);
            td::write_trace(r.records, opt.trace);
        }
    }

    if (opt.out.empty()) {
        std::cout << td::results_csv_header() << "\n" << rows.str();
    } else {
        bool fresh = !std::filesystem::exists(opt.out) ||
                     std::filesystem::file_size(opt.out) == 0;
        std::ofstream out(opt.out, std::ios::app);
        if (!out) throw td::Error("cannot open " + opt.out + " for writing");
        if (fresh) out << td::results_csv_header() << "\n";
        out << rows.str();
        std::cout << "appended to " << opt.out << " (base_seed=" << opt.base_seed
                  << ")\n";
    }
    return any_failures ? kExitBudget : 0;
}

struct BoundsOptions {
    std::string levels = "1,2,3,4";
    int S = 8, A = 3, H = 6, D = 3;
    std::string epsilons = "0";
    double p_min = 1.0;
    bool tight = false;
    bool csv = false;
};

int cmd_bounds(const BoundsOptions& opt) {
    std::vector<int> levels = parse_int_list(opt.levels);
    std::vector<double> epsilons = parse_double_list(opt.epsilons);
    if (opt.csv)
        std::cout << "level,S,A,H,D,epsilon,p_min,lower,upper\n";
    else
        std::cout << std::left << std::setw(7) << "level" << std::setw(10)
                  << "epsilon" << std::setw(8) << "p_min" << std::setw(18)
                  << "lower" << std::setw(18) << "upper" << "\n";
    for (int level : levels) {
        for (double eps : epsilons) {
            td::BoundInputs in{opt.S, opt.A, opt.H, opt.D, eps, opt.p_min};
            td::BoundPair b =
                opt.tight ? td::tight_theta_level3(in) : td::tdim_bounds(level, in);
            if (opt.csv) {
                std::cout << level << ',' << opt.S << ',' << opt.A << ','
                          << opt.H << ',' << opt.D << ','
                          << td::format_double(eps) << ','
                          << td::format_double(opt.p_min) << ','
                          << td::format_double(b.lower) << ','
                          << td::format_double(b.upper) << "\n";
            } else {
                std::cout << std::left << std::setw(7) << level << std::setw(10)
                          << td::format_double(eps) << std::setw(8)
                          << td::format_double(opt.p_min) << std::setw(18)
                          << td::format_double(b.lower) << std::setw(18)
                          << td::format_double(b.upper) << "\n";
            }
        }
    }
    return 0;
}

struct OracleOptions {
    std::string graph;
    std::string out;
    std::string epsilons = "0,0.3,0.7";
};

int cmd_oracle_atsp(const OracleOptions& opt) {
    td::Digraph g = td::load_digraph(opt.graph);
    td::CoveringWalk walk = td::atsp_held_karp(g);
    nlohmann::json j;
    j["length"] = walk.length;
    j["walk"] = walk.vertices;
    std::cout << "atsp length=" << walk.length << " walk size="
              << walk.vertices.size() << "\n";
    if (!opt.out.empty()) {
        std::ofstream out(opt.out);
        if (!out) throw td::Error("cannot open " + opt.out + " for writing");
        out << j.dump(2) << "\n";
    }
    return 0;
}

int cmd_oracle_reduce(const OracleOptions& opt) {
    td::Digraph g = td::load_digraph(opt.graph);
    td::ReducedInstance inst = td::reduce_atsp_to_teaching(g);
    if (!opt.out.empty()) td::save_mdp(inst.problem.mdp, opt.out);
    std::cout << "reduced: S=" << inst.problem.mdp.num_states()
              << " A=2 D=" << inst.diameter
              << " H=" << inst.problem.mdp.horizon() << "\n";
    return 0;
}

int cmd_oracle_metal(const OracleOptions& opt) {
    td::Digraph g = td::load_digraph(opt.graph);
    td::ReducedInstance inst = td::reduce_atsp_to_teaching(g);
    td::MetalCertificate cert =
        td::exact_metal(inst, parse_double_list(opt.epsilons));
    if (!opt.out.empty()) {
        std::ofstream out(opt.out);
        if (!out) throw td::Error("cannot open " + opt.out + " for writing");
        out << td::certificate_to_json(cert);
    }
    std::cout << "metal: atsp_length=" << cert.atsp_length
              << " metal_steps=" << cert.metal_steps << " certified at "
              << cert.certified_epsilons.size() << " epsilon values"
              << (cert.horizon_raised ? " (horizon raised above D^2)" : "")
              << "\n";
    return 0;
}

struct ReportOptions {
    std::vector<std::string> inputs;
};

int cmd_report(const ReportOptions& opt) {
    // Gather rows keyed by experiment_id, ordered by (level, epsilon).
    struct Entry {
        int level;
        double epsilon;
        std::string line;
    };
    std::map<std::string, std::vector<Entry>> groups;
    std::string header = td::results_csv_header();
    for (const std::string& path : opt.inputs) {
        std::ifstream in(path);
        if (!in) throw td::Error("cannot open " + path);
        std::string line;
        bool first = true;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            if (first && line == header) {
                first = false;
                continue;
            }
            first = false;
            std::stringstream ss(line);
            std::vector<std::string> cols;
            std::string col;
            while (std::getline(ss, col, ',')) cols.push_back(col);
            if (cols.size() < 19)
                throw td::ParseError("bad results row in " + path);
            // experiment_id,level,rule,S,A,H,D,epsilon,... -> summary columns
            std::ostringstream summary;
            summary << cols[0] << ',' << cols[1] << ',' << cols[2] << ','
                    << cols[7] << ',' << cols[10] << ',' << cols[12] << ','
                    << cols[13] << ',' << cols[14] << ',' << cols[15] << ','
                    << cols[16] << ',' << cols[17];
            groups[cols[0]].push_back(
                {std::stoi(cols[1]), std::stod(cols[7]), summary.str()});
        }
    }
    if (groups.empty()) return 0;
    std::cout << "experiment_id,level,learner_rule,epsilon,trials,mean_steps,"
                 "std_error,ci95_low,ci95_high,bound_lower,bound_upper\n";
    for (auto& [id, entries] : groups) {
        std::stable_sort(entries.begin(), entries.end(),
                         [](const Entry& a, const Entry& b) {
                             return std::tie(a.level, a.epsilon) <
                                    std::tie(b.level, b.epsilon);
                         });
        for (const Entry& e : entries) std::cout << e.line << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"teaching-by-reinforcement simulator and bound calculator"};
    app.require_subcommand(1);
    // Values come from flags first, then the config file's [subcommand]
    // sections, then defaults.
    app.set_config("--config", "", "config file; flags take precedence");

    GenOptions gen;
    auto* cgen = app.add_subcommand("gen", "generate an MDP instance file");
    cgen->add_option("--family", gen.family,
                     "peacock | peacock-tree | chain | random");
    cgen->add_option("--S", gen.S, "number of states");
    cgen->add_option("--D", gen.D, "diameter (peacock families)");
    cgen->add_option("--A", gen.A, "number of actions");
    cgen->add_option("--H", gen.H, "episode length");
    cgen->add_option("--p", gen.p, "advance probability / p_min");
    cgen->add_option("--density", gen.density, "support density (random)");
    cgen->add_option("--seed", gen.seed, "generator seed (random)");
    cgen->add_option("--out", gen.out, "output MDP file")->required();

    TeachOptions teach;
    auto* cteach =
        app.add_subcommand("teach", "run teaching trials and emit CSV rows");
    cteach->add_option("--id", teach.experiment_id, "experiment id");
    cteach->add_option("--level", teach.level, "teacher level 1..4")
        ->check(CLI::Range(1, 4));
    cteach->add_option("--rule", teach.rule, "standard_q | sarsa");
    cteach->add_option("--mdp", teach.mdp_file, "MDP file (else --family)");
    cteach->add_option("--family", teach.gen.family, "generator family");
    cteach->add_option("--S", teach.gen.S, "states (generator)");
    cteach->add_option("--D", teach.gen.D, "diameter (generator)");
    cteach->add_option("--A", teach.gen.A, "actions (generator)");
    cteach->add_option("--H", teach.gen.H, "episode length (generator)");
    cteach->add_option("--p", teach.gen.p, "probability (generator)");
    cteach->add_option("--density", teach.gen.density, "density (generator)");
    cteach->add_option("--epsilon", teach.epsilons,
                       "epsilon value or comma list");
    cteach->add_option("--alpha", teach.alpha, "learning rate");
    cteach->add_option("--gamma", teach.gamma, "discount factor");
    cteach->add_option("--delta", teach.delta, "promotion margin");
    cteach->add_option("--q0", teach.q0_file,
                       "initial Q-table file (default: adversarial)");
    cteach->add_option("--target", teach.target_file,
                       "target policy file (default: constant action)");
    cteach->add_option("--target-action", teach.target_action,
                       "constant target action");
    cteach->add_option("--trials", teach.trials, "number of sessions");
    cteach->add_option("--seed", teach.base_seed, "base seed");
    cteach->add_option("--budget-multiplier", teach.budget_multiplier,
                       "step budget as a multiple of the upper bound");
    cteach->add_option("--threads", teach.threads, "worker threads");
    cteach->add_option("--out", teach.out, "results CSV (appended)");
    cteach->add_option("--trace", teach.trace,
                       "write a JSONL trace of the first session");

    BoundsOptions bnd;
    auto* cbounds = app.add_subcommand("bounds", "evaluate the TDim bounds");
    cbounds->add_option("--levels", bnd.levels, "comma list of levels");
    cbounds->add_option("--S", bnd.S, "states");
    cbounds->add_option("--A", bnd.A, "actions");
    cbounds->add_option("--H", bnd.H, "episode length");
    cbounds->add_option("--D", bnd.D, "diameter");
    cbounds->add_option("--epsilon", bnd.epsilons, "epsilon comma list");
    cbounds->add_option("--p-min", bnd.p_min, "minimum transition probability");
    cbounds->add_flag("--tight", bnd.tight,
                      "level-3 matched sandwich instead of the level bounds");
    cbounds->add_flag("--csv", bnd.csv, "CSV output");

    OracleOptions orc;
    auto* coracle = app.add_subcommand("oracle", "exact small-instance oracles");
    coracle->require_subcommand(1);
    auto* catsp = coracle->add_subcommand("atsp", "minimum covering walk");
    auto* creduce =
        coracle->add_subcommand("reduce", "build the teaching instance");
    auto* cmetal =
        coracle->add_subcommand("metal", "exact teaching length, certified");
    for (auto* sub : {catsp, creduce, cmetal}) {
        sub->add_option("--graph", orc.graph, "digraph JSON file")->required();
        sub->add_option("--out", orc.out, "output file");
    }
    cmetal->add_option("--epsilon", orc.epsilons,
                       "epsilon comma list to certify");

    ReportOptions rep;
    auto* creport =
        app.add_subcommand("report", "summarize results CSVs for plotting");
    creport->add_option("inputs", rep.inputs, "results CSV files");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    if (const char* env_seed = std::getenv("TEACHDIM_SEED")) {
        teach.base_seed = std::strtoull(env_seed, nullptr, 10);
        gen.seed = teach.base_seed;
    }

    try {
        if (cgen->parsed()) return cmd_gen(gen);
        if (cteach->parsed()) return cmd_teach(teach);
        if (cbounds->parsed()) return cmd_bounds(bnd);
        if (coracle->parsed()) {
            if (catsp->parsed()) return cmd_oracle_atsp(orc);
            if (creduce->parsed()) return cmd_oracle_reduce(orc);
            return cmd_oracle_metal(orc);
        }
        if (creport->parsed()) return cmd_report(rep);
    } catch (const td::CertificationFailure& e) {
        std::cerr << "certification failure: " << e.what() << "\n";
        return kExitCertification;
    } catch (const td::DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const td::InvariantViolation& e) {
        std::cerr << "invariant violation: " << e.what() << "\n";
        return kExitInvariant;
    } catch (const td::InvalidShape& e) {
        std::cerr << "invalid shape: " << e.what() << "\n";
        return kExitInvariant;
    } catch (const td::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitInvariant;
    } catch (const td::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitUsage;
}
