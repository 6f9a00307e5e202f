#include "planex/json_io.hpp"

#include <charconv>

namespace planex {

std::string fnv1a64_hex(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, h, 16);
    (void)ec;
    std::string hex(buf, p);
    return std::string(16 - hex.size(), '0') + hex;
}

std::string format_double(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, p);
}

nlohmann::json to_json(const RunManifest& m) {
    return {{"tool", m.tool},
            {"version", m.version},
            {"command", m.command},
            {"domain_path", m.domain_path},
            {"domain_hash", m.domain_hash},
            {"parameters", m.parameters}};
}

nlohmann::json to_json(const SearchStats& s) {
    return {{"nodes_expanded", s.nodes_expanded},
            {"leaves_evaluated", s.leaves_evaluated},
            {"utility_cuts", s.utility_cuts},
            {"expectation_cuts", s.expectation_cuts},
            {"max_branching", s.max_branching},
            {"action_count", s.action_count},
            {"elapsed_seconds", s.elapsed_seconds}};
}

nlohmann::json to_json(const SolveReport& r) {
    return {{"iterations", r.iterations},
            {"residual", r.residual},
            {"elapsed_seconds", r.elapsed_seconds}};
}

nlohmann::json to_json(const PolicyComparison& c) {
    return {{"num_errors", c.num_errors},
            {"total_error", c.total_error},
            {"max_error", c.max_error},
            {"avg_error", c.avg_error}};
}

std::string_view bench_mode_name(BenchMode mode) {
    return mode == BenchMode::SearchAndExecute ? "search_and_execute"
                                               : "search_only";
}

std::string_view termination_name(Termination t) {
    return t == Termination::Goal ? "goal" : "step_limit";
}

nlohmann::json heuristic_to_json(const DomainSpec& d, const RelevantSet& rel,
                                 const HeuristicTable& h) {
    auto names = [&](const std::vector<int>& idx) {
        nlohmann::json arr = nlohmann::json::array();
        for (int i : idx) arr.push_back(d.propositions[i].name);
        return arr;
    };

    nlohmann::json trace = nlohmann::json::array();
    for (const auto& step : rel.trace)
        trace.push_back(nlohmann::json{{"prop", d.propositions[step.prop].name},
                                       {"action", step.action},
                                       {"discriminant", step.discriminant}});

    nlohmann::json clusters = nlohmann::json::array();
    for (std::size_t c = 0; c < h.cluster_count(); ++c) {
        nlohmann::json assignment = nlohmann::json::object();
        for (std::size_t k = 0; k < h.closure_indices.size(); ++k)
            assignment[d.propositions[h.closure_indices[k]].name] =
                ((c >> k) & 1u) != 0;
        clusters.push_back(nlohmann::json{
            {"index", c},
            {"assignment", assignment},
            {"value", h.values[c]},
            {"default_action", d.actions[h.default_actions[c]].name}});
    }

    return {{"immediately_relevant", names(rel.immediately_relevant)},
            {"closure", names(rel.closure)},
            {"closure_mask", rel.closure_mask},
            {"trace", trace},
            {"vmax", h.vmax},
            {"vmin", h.vmin},
            {"epsilon", h.epsilon},
            {"clusters", clusters}};
}

nlohmann::json trajectory_to_json(const DomainSpec& d, const Trajectory& t) {
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& step : t.steps) {
        nlohmann::json rec = {{"state", format_state(d, step.state)},
                              {"action", d.actions[step.action].name},
                              {"outcome", format_state(d, step.outcome)},
                              {"reward", step.reward},
                              {"cache_hit", step.cache_hit}};
        if (step.stats) rec["stats"] = to_json(*step.stats);
        steps.push_back(std::move(rec));
    }
    return {{"seed", t.seed},
            {"termination", std::string(termination_name(t.termination))},
            {"discounted_return", t.discounted_return},
            {"final_state", format_state(d, t.final_state)},
            {"total_searches", t.total_searches()},
            {"total_nodes", t.total_nodes()},
            {"steps", std::move(steps)}};
}

nlohmann::json sweep_to_json(const std::vector<SweepRow>& rows) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& row : rows) {
        nlohmann::json rec = to_json(row.quality);
        rec["depth"] = row.depth;
        arr.push_back(std::move(rec));
    }
    return arr;
}

nlohmann::json bench_to_json(const std::vector<BenchRow>& rows) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& row : rows)
        arr.push_back(
            {{"depth", row.depth},
             {"mode", std::string(bench_mode_name(row.mode))},
             {"cache", row.cache},
             {"elapsed_seconds", row.elapsed_seconds},
             {"searches", row.searches},
             {"nodes_expanded", row.nodes_expanded},
             {"utility_cuts", row.utility_cuts},
             {"expectation_cuts", row.expectation_cuts},
             {"percent_states_searched", row.percent_states_searched}});
    return arr;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::string out(kSweepCsvHeader);
    out += '\n';
    for (const auto& row : rows) {
        out += std::to_string(row.depth);
        out += ',';
        out += std::to_string(row.quality.num_errors);
        out += ',';
        out += format_double(row.quality.total_error);
        out += ',';
        out += format_double(row.quality.max_error);
        out += ',';
        out += format_double(row.quality.avg_error);
        out += '\n';
    }
    return out;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
    std::string out(kBenchCsvHeader);
    out += '\n';
    for (const auto& row : rows) {
        out += std::to_string(row.depth);
        out += ',';
        out += bench_mode_name(row.mode);
        out += ',';
        out += row.cache ? "on" : "off";
        out += ',';
        out += format_double(row.elapsed_seconds);
        out += ',';
        out += std::to_string(row.searches);
        out += ',';
        out += std::to_string(row.nodes_expanded);
        out += ',';
        out += std::to_string(row.utility_cuts);
        out += ',';
        out += std::to_string(row.expectation_cuts);
        out += ',';
        out += format_double(row.percent_states_searched);
        out += '\n';
    }
    return out;
}

} // namespace planex
