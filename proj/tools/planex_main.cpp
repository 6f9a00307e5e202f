// Command-line front end: validate domains, solve them exactly, inspect the
// abstraction heuristic, run single searches, execute episodes, and produce
// the sweep/bench tables.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "planex/abstraction.hpp"
#include "planex/domain.hpp"
#include "planex/executor.hpp"
#include "planex/flat.hpp"
#include "planex/json_io.hpp"
#include "planex/parser.hpp"
#include "planex/search.hpp"
#include "planex/solvers.hpp"

using nlohmann::json;
using namespace planex;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1; // the domain is unusable or a request on it failed
constexpr int kExitUsage = 2;  // bad invocation or I/O failure

std::uint64_t state_cap() {
    if (const char* env = std::getenv("PLANNER_STATE_CAP")) {
        char* end = nullptr;
        unsigned long long v = std::strtoull(env, &end, 10);
        if (end && *end == '\0' && v > 0) return v;
        std::cerr << "warning: ignoring malformed PLANNER_STATE_CAP '" << env
                  << "'\n";
    }
    return 1ull << 20;
}

struct Loaded {
    DomainSpec domain;
    std::string path;
    std::string hash;
};

std::optional<Loaded> load_checked(const std::string& path, int& rc) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        std::cerr << "error: cannot open '" << path << "'\n";
        rc = kExitUsage;
        return std::nullopt;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    std::string text = ss.str();

    ParseResult pr = parse_domain(text);
    if (!pr.ok()) {
        for (const auto& e : pr.errors)
            std::cerr << path << ": " << format_parse_error(e) << "\n";
        rc = kExitDomain;
        return std::nullopt;
    }
    auto violations = validate(*pr.domain);
    if (!violations.empty()) {
        for (const auto& v : violations)
            std::cerr << path << ": invalid: " << v.message << "\n";
        rc = kExitDomain;
        return std::nullopt;
    }
    return Loaded{std::move(*pr.domain), path, fnv1a64_hex(text)};
}

RunManifest make_manifest(const std::string& command, const Loaded& loaded,
                          json parameters) {
    RunManifest m;
    m.command = command;
    m.domain_path = loaded.path;
    m.domain_hash = loaded.hash;
    m.parameters = std::move(parameters);
    return m;
}

int emit(const std::string& out_path, const std::string& content) {
    if (out_path.empty()) {
        std::cout << content;
        return kExitOk;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
        std::cerr << "error: cannot write '" << out_path << "'\n";
        return kExitUsage;
    }
    out << content;
    return kExitOk;
}

int emit_json(const std::string& out_path, const json& doc) {
    return emit(out_path, doc.dump(2) + "\n");
}

std::optional<std::vector<int>> resolve_ir(const DomainSpec& d,
                                           const std::vector<std::string>& names,
                                           int& rc) {
    if (!names.empty()) {
        std::vector<int> ir;
        for (const auto& n : names) {
            auto idx = d.find_prop(n);
            if (!idx) {
                std::cerr << "error: unknown proposition '" << n << "'\n";
                rc = kExitDomain;
                return std::nullopt;
            }
            ir.push_back(*idx);
        }
        return ir;
    }
    auto ranked = rank_reward_props(d);
    if (ranked.empty() || ranked[0].second <= 0.0) {
        std::cerr << "error: no proposition influences the reward; pass --ir\n";
        rc = kExitDomain;
        return std::nullopt;
    }
    return std::vector<int>{ranked[0].first};
}

json ir_names(const DomainSpec& d, const std::vector<int>& ir) {
    json arr = json::array();
    for (int i : ir) arr.push_back(d.propositions[i].name);
    return arr;
}

// Everything the search-based subcommands share. The context is built on
// demand because it points into this object, which moves after construction.
struct Workbench {
    Loaded loaded;
    FlatMDP flat;
    RelevantSet rel;
    HeuristicTable heuristic;
    std::vector<int> ir;

    SearchContext context() const {
        return SearchContext{&loaded.domain, &heuristic, &flat};
    }
};

std::optional<Workbench> open_workbench(const std::string& path,
                                        const std::vector<std::string>& ir_arg,
                                        int& rc) {
    auto loaded = load_checked(path, rc);
    if (!loaded) return std::nullopt;
    auto ir = resolve_ir(loaded->domain, ir_arg, rc);
    if (!ir) return std::nullopt;

    auto bench = std::make_optional<Workbench>();
    bench->loaded = std::move(*loaded);
    bench->ir = std::move(*ir);
    try {
        bench->flat = ground(bench->loaded.domain, state_cap());
        bench->rel = relevant_closure(bench->loaded.domain, bench->ir);
        bench->heuristic =
            build_heuristic(bench->loaded.domain, bench->ir, state_cap());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        rc = kExitDomain;
        return std::nullopt;
    }
    return bench;
}

std::optional<State> resolve_state(const DomainSpec& d,
                                   const std::string& literals, int& rc) {
    if (literals.empty()) {
        if (d.initial) return d.initial;
        std::cerr << "error: the domain has no init state; pass --state\n";
        rc = kExitDomain;
        return std::nullopt;
    }
    try {
        return state_from_literals(d, literals);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        rc = kExitDomain;
        return std::nullopt;
    }
}

std::vector<int> parse_depths(const std::vector<int>& arg,
                              std::initializer_list<int> fallback) {
    return arg.empty() ? std::vector<int>(fallback) : arg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"planner for propositional stochastic domains"};
    app.require_subcommand(1);

    std::string domain_path, out_path, state_arg, format = "json";
    std::string method = "pi";
    std::vector<std::string> ir_arg;
    std::vector<int> depths_arg;
    int depth = 1, depth_cap = 0, steps = 50, bench_steps = 10;
    double tol = 1e-8, threshold = -1.0, sweep_tol = 1e-6;
    std::uint64_t seed = 1;
    bool no_utility = false, no_expectation = false, no_memo = false;
    bool no_cache = false, as_json = false;

    auto add_domain = [&](CLI::App* cmd) {
        cmd->add_option("--domain", domain_path, "domain file")->required();
    };
    auto add_search_flags = [&](CLI::App* cmd) {
        cmd->add_option("--ir", ir_arg,
                        "immediately relevant propositions (default: the "
                        "proposition with the largest reward swing)")
            ->delimiter(',');
        cmd->add_flag("--no-utility-pruning", no_utility,
                      "scan every outcome of every action");
        cmd->add_flag("--no-expectation-pruning", no_expectation,
                      "descend into estimated-hopeless actions too");
        cmd->add_flag("--no-memo", no_memo, "recompute repeated subtrees");
        cmd->add_option("--threshold", threshold,
                        "expand nodes only while the path probability stays "
                        "at or above this value (enables threshold mode)");
        cmd->add_option("--depth-cap", depth_cap,
                        "hard depth limit in threshold mode (default 12)");
    };

    CLI::App* validate_cmd =
        app.add_subcommand("validate", "parse and check a domain file");
    add_domain(validate_cmd);
    validate_cmd->add_flag("--json", as_json, "machine-readable report");

    CLI::App* solve_cmd =
        app.add_subcommand("solve", "compute optimal values and a policy");
    add_domain(solve_cmd);
    solve_cmd->add_option("--method", method, "pi or vi")
        ->check(CLI::IsMember({"pi", "vi"}));
    solve_cmd->add_option("--tol", tol, "value-iteration accuracy");
    solve_cmd->add_option("--out", out_path, "output file (default stdout)");

    CLI::App* heuristic_cmd = app.add_subcommand(
        "heuristic", "build and export the abstraction heuristic");
    add_domain(heuristic_cmd);
    heuristic_cmd->add_option("--ir", ir_arg, "immediately relevant propositions")
        ->delimiter(',');
    heuristic_cmd->add_option("--out", out_path, "output file (default stdout)");

    CLI::App* plan_cmd =
        app.add_subcommand("plan", "run one search and report the decision");
    add_domain(plan_cmd);
    add_search_flags(plan_cmd);
    plan_cmd->add_option("--depth", depth, "search horizon");
    plan_cmd->add_option("--state", state_arg,
                         "start state as comma-separated literals, e.g. "
                         "'Office,!Rain' (default: the domain's init)");
    plan_cmd->add_option("--out", out_path, "output file (default stdout)");

    CLI::App* run_cmd = app.add_subcommand(
        "run", "interleave search and execution from the init state");
    add_domain(run_cmd);
    add_search_flags(run_cmd);
    run_cmd->add_option("--depth", depth, "search horizon");
    run_cmd->add_option("--state", state_arg, "start state literals");
    run_cmd->add_option("--steps", steps, "maximum actions to execute");
    run_cmd->add_option("--seed", seed, "world randomness seed");
    run_cmd->add_flag("--no-cache", no_cache, "search afresh at every step");
    run_cmd->add_option("--out", out_path, "output file (default stdout)");

    CLI::App* sweep_cmd = app.add_subcommand(
        "sweep", "score the induced policy at several search depths");
    add_domain(sweep_cmd);
    sweep_cmd->add_option("--ir", ir_arg, "immediately relevant propositions")
        ->delimiter(',');
    sweep_cmd->add_option("--depths", depths_arg, "horizons to test")
        ->delimiter(',');
    sweep_cmd->add_option("--tol", sweep_tol, "value loss counted as an error");
    sweep_cmd->add_flag("--no-utility-pruning", no_utility,
                        "scan every outcome of every action");
    sweep_cmd->add_option("--format", format, "json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
    sweep_cmd->add_option("--out", out_path, "output file (default stdout)");

    CLI::App* bench_cmd = app.add_subcommand(
        "bench", "compare interleaved execution with up-front planning");
    add_domain(bench_cmd);
    bench_cmd->add_option("--ir", ir_arg, "immediately relevant propositions")
        ->delimiter(',');
    bench_cmd->add_option("--depths", depths_arg, "horizons to test")
        ->delimiter(',');
    bench_cmd->add_option("--steps", bench_steps,
                          "episode length / plan coverage");
    bench_cmd->add_option("--seed", seed, "world randomness seed");
    bench_cmd->add_option("--state", state_arg, "start state literals");
    bench_cmd->add_option("--format", format, "json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
    bench_cmd->add_option("--out", out_path, "output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    int rc = kExitOk;

    SearchConfig cfg;
    cfg.depth = depth;
    cfg.utility_pruning = !no_utility;
    cfg.expectation_pruning = !no_expectation;
    cfg.memoize = !no_memo;
    if (threshold >= 0.0) {
        cfg.expansion = Expansion::ProbabilityThreshold;
        cfg.threshold = threshold;
        cfg.depth_cap = depth_cap;
    }

    if (app.got_subcommand(validate_cmd)) {
        std::ifstream in(domain_path, std::ios::binary);
        if (!in) {
            std::cerr << "error: cannot open '" << domain_path << "'\n";
            return kExitUsage;
        }
        std::ostringstream ss;
        ss << in.rdbuf();
        ParseResult pr = parse_domain(ss.str());
        std::vector<Violation> violations;
        if (pr.ok()) violations = validate(*pr.domain);
        bool ok = pr.ok() && violations.empty();

        if (as_json) {
            json errors = json::array();
            for (const auto& e : pr.errors) errors.push_back(format_parse_error(e));
            json bad = json::array();
            for (const auto& v : violations) {
                json rec = {{"message", v.message}};
                if (!v.action.empty()) rec["action"] = v.action;
                if (v.aspect >= 0) rec["aspect"] = v.aspect;
                if (v.witness && pr.domain)
                    rec["witness"] = format_state(*pr.domain, *v.witness);
                bad.push_back(std::move(rec));
            }
            json doc = {{"ok", ok},
                        {"parse_errors", errors},
                        {"violations", bad}};
            if (ok) {
                doc["propositions"] = pr.domain->prop_count();
                doc["actions"] = pr.domain->action_count();
            }
            std::cout << doc.dump(2) << "\n";
        } else if (ok) {
            std::cout << domain_path << ": ok (" << pr.domain->prop_count()
                      << " propositions, " << pr.domain->action_count()
                      << " actions)\n";
        } else {
            for (const auto& e : pr.errors)
                std::cout << domain_path << ": " << format_parse_error(e) << "\n";
            for (const auto& v : violations)
                std::cout << domain_path << ": invalid: " << v.message << "\n";
        }
        return ok ? kExitOk : kExitDomain;
    }

    if (app.got_subcommand(solve_cmd)) {
        auto loaded = load_checked(domain_path, rc);
        if (!loaded) return rc;
        try {
            FlatMDP m = ground(loaded->domain, state_cap());
            Policy policy;
            ValueFunction values;
            SolveReport report;
            if (method == "pi") {
                std::tie(policy, values, report) = policy_iteration(m);
            } else {
                std::tie(values, report) = value_iteration(m, tol);
                policy = greedy_policy(m, values);
            }
            json actions = json::array();
            for (auto a : policy) actions.push_back(m.action_names[a]);
            json doc = {{"manifest", to_json(make_manifest(
                                         "solve", *loaded,
                                         {{"method", method}, {"tol", tol}}))},
                        {"method", method},
                        {"num_states", m.num_states},
                        {"discount", m.discount},
                        {"report", to_json(report)},
                        {"values", values},
                        {"policy", actions}};
            return emit_json(out_path, doc);
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return kExitDomain;
        }
    }

    if (app.got_subcommand(heuristic_cmd)) {
        auto bench = open_workbench(domain_path, ir_arg, rc);
        if (!bench) return rc;
        const DomainSpec& d = bench->loaded.domain;
        json doc = heuristic_to_json(d, bench->rel, bench->heuristic);
        doc["manifest"] = to_json(make_manifest(
            "heuristic", bench->loaded, {{"ir", ir_names(d, bench->ir)}}));
        return emit_json(out_path, doc);
    }

    if (app.got_subcommand(plan_cmd)) {
        auto bench = open_workbench(domain_path, ir_arg, rc);
        if (!bench) return rc;
        const DomainSpec& d = bench->loaded.domain;
        auto start = resolve_state(d, state_arg, rc);
        if (!start) return rc;
        SearchResult res = best_action(bench->context(), *start, cfg);
        json doc = {
            {"manifest",
             to_json(make_manifest(
                 "plan", bench->loaded,
                 {{"ir", ir_names(d, bench->ir)},
                  {"depth", cfg.depth},
                  {"threshold", threshold},
                  {"utility_pruning", cfg.utility_pruning},
                  {"expectation_pruning", cfg.expectation_pruning}}))},
            {"state", format_state(d, *start)},
            {"action", d.actions[res.action].name},
            {"value", res.value},
            {"stats", to_json(res.stats)}};
        return emit_json(out_path, doc);
    }

    if (app.got_subcommand(run_cmd)) {
        auto bench = open_workbench(domain_path, ir_arg, rc);
        if (!bench) return rc;
        const DomainSpec& d = bench->loaded.domain;
        auto start = resolve_state(d, state_arg, rc);
        if (!start) return rc;
        Trajectory traj = run_episode(bench->context(), *start, cfg, steps, seed,
                                      !no_cache);
        json doc = trajectory_to_json(d, traj);
        doc["manifest"] = to_json(make_manifest(
            "run", bench->loaded,
            {{"ir", ir_names(d, bench->ir)},
             {"depth", cfg.depth},
             {"steps", steps},
             {"seed", seed},
             {"cache", !no_cache}}));
        return emit_json(out_path, doc);
    }

    if (app.got_subcommand(sweep_cmd)) {
        auto bench = open_workbench(domain_path, ir_arg, rc);
        if (!bench) return rc;
        const DomainSpec& d = bench->loaded.domain;
        std::vector<int> depths = parse_depths(depths_arg, {1, 2, 3, 4, 5});
        SearchConfig base;
        base.utility_pruning = !no_utility;
        // The estimate gate trades exactness for speed; the quality table
        // reports what the exact-pruning searcher does.
        base.expectation_pruning = false;
        auto rows = sweep_policy_quality(bench->context(), depths, base, sweep_tol);
        RunManifest m = make_manifest("sweep", bench->loaded,
                                      {{"ir", ir_names(d, bench->ir)},
                                       {"depths", depths},
                                       {"tol", sweep_tol}});
        if (format == "csv")
            return emit(out_path, "# manifest: " + to_json(m).dump() + "\n" +
                                      sweep_csv(rows));
        json doc = {{"manifest", to_json(m)}, {"rows", sweep_to_json(rows)}};
        return emit_json(out_path, doc);
    }

    if (app.got_subcommand(bench_cmd)) {
        auto bench = open_workbench(domain_path, ir_arg, rc);
        if (!bench) return rc;
        const DomainSpec& d = bench->loaded.domain;
        auto start = resolve_state(d, state_arg, rc);
        if (!start) return rc;
        BenchPlan plan;
        plan.depths = parse_depths(depths_arg, {1, 2, 3});
        plan.steps = bench_steps;
        plan.seed = seed;
        SearchConfig base;
        auto rows = bench_suite(bench->context(), *start, plan, base);
        RunManifest m = make_manifest("bench", bench->loaded,
                                      {{"ir", ir_names(d, bench->ir)},
                                       {"depths", plan.depths},
                                       {"steps", plan.steps},
                                       {"seed", plan.seed}});
        if (format == "csv")
            return emit(out_path, "# manifest: " + to_json(m).dump() + "\n" +
                                      bench_csv(rows));
        json doc = {{"manifest", to_json(m)}, {"rows", bench_to_json(rows)}};
        return emit_json(out_path, doc);
    }

    return kExitUsage; // unreachable: a subcommand is required
}
