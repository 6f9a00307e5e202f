#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "planex/abstraction.hpp"
#include "planex/domain.hpp"
#include "planex/executor.hpp"
#include "planex/search.hpp"
#include "planex/solvers.hpp"

namespace planex {

// Identifies the run that produced an output file. Every tool artifact
// embeds one (JSON field "manifest", CSV "# manifest:" comment line) so a
// result can be traced back to its inputs. `domain_hash` is the FNV-1a 64-bit
// digest of the domain file bytes, in hex.
struct RunManifest {
    std::string tool = "planex";
    std::string version = "0.1.0";
    std::string command;
    std::string domain_path;
    std::string domain_hash;
    nlohmann::json parameters = nlohmann::json::object();
};

std::string fnv1a64_hex(std::string_view bytes);

// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

nlohmann::json to_json(const RunManifest& m);
nlohmann::json to_json(const SearchStats& s);
nlohmann::json to_json(const SolveReport& r);
nlohmann::json to_json(const PolicyComparison& c);

std::string_view bench_mode_name(BenchMode mode);
std::string_view termination_name(Termination t);

nlohmann::json heuristic_to_json(const DomainSpec& d, const RelevantSet& rel,
                                 const HeuristicTable& h);
nlohmann::json trajectory_to_json(const DomainSpec& d, const Trajectory& t);
nlohmann::json sweep_to_json(const std::vector<SweepRow>& rows);
nlohmann::json bench_to_json(const std::vector<BenchRow>& rows);

// CSV bodies. The first line is the pinned column header; callers prepend
// the manifest comment line.
std::string sweep_csv(const std::vector<SweepRow>& rows);
std::string bench_csv(const std::vector<BenchRow>& rows);

inline constexpr std::string_view kSweepCsvHeader =
    "depth,num_errors,total_error,max_error,avg_error";
inline constexpr std::string_view kBenchCsvHeader =
    "depth,mode,cache,elapsed_seconds,searches,nodes_expanded,utility_cuts,"
    "expectation_cuts,percent_states_searched";

} // namespace planex
