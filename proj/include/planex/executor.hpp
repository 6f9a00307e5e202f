#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "planex/flat.hpp"
#include "planex/rng.hpp"
#include "planex/search.hpp"

namespace planex {

// A remembered search result. `depth` records how deep the search that
// produced it looked; a lookup only reuses an entry computed at least as
// deeply as the caller now requires.
struct CachedDecision {
    int action = -1;
    double value = 0.0;
    int depth = 0;
};

class ActionCache {
public:
    const CachedDecision* lookup(const State& s, int min_depth) const;
    // Keeps whichever of the stored and offered entries looked deeper.
    void store(const State& s, const CachedDecision& d);
    std::size_t size() const { return map_.size(); }
    void clear() { map_.clear(); }

private:
    std::unordered_map<std::uint64_t, CachedDecision> map_;
};

// Samples successor states from the grounded model. Outcome selection
// inverts the cumulative distribution in stored order, so a fixed seed
// replays the same world.
class WorldSimulator {
public:
    WorldSimulator(const FlatMDP& mdp, std::uint64_t seed)
        : mdp_(&mdp), rng_(seed) {}

    std::uint32_t sample_next(std::uint32_t state, int action);
    SplitMix64& rng() { return rng_; }

private:
    const FlatMDP* mdp_;
    SplitMix64 rng_;
};

enum class Termination { Goal, StepLimit };

struct TrajectoryStep {
    State state;
    int action = -1;
    State outcome;
    double reward = 0.0;
    bool cache_hit = false;
    std::optional<SearchStats> stats; // absent when the cache answered
};

struct Trajectory {
    std::vector<TrajectoryStep> steps;
    State final_state;
    double discounted_return = 0.0; // sum of discounted rewards incl. final state
    Termination termination = Termination::StepLimit;
    std::uint64_t seed = 0;

    long long total_nodes() const;
    long long total_searches() const;
};

// Interleaves search and execution from `start` for at most `max_steps`
// actions, stopping early once a goal state is entered (a goal start state
// terminates immediately). Requires ctx.flat. When `caching` is set,
// decisions are reused through `cache` (a scratch cache is used if null).
Trajectory run_episode(const SearchContext& ctx, const State& start,
                       const SearchConfig& cfg, int max_steps,
                       std::uint64_t seed, bool caching = false,
                       ActionCache* cache = nullptr);

// Runs a fresh search from every state and records the chosen actions.
// Requires ctx.flat.
Policy induced_policy(const SearchContext& ctx, const SearchConfig& cfg);

struct PolicyComparison {
    int num_errors = 0;      // states whose value loss exceeds the tolerance
    double total_error = 0.0;
    double max_error = 0.0;
    double avg_error = 0.0;  // total_error / number of states
};

// Value loss of `candidate` against the optimal values: per state,
// max(0, optimal[s] - value_of_candidate[s]).
PolicyComparison compare_policy(const FlatMDP& mdp, const Policy& candidate,
                                const ValueFunction& optimal,
                                double tolerance = 1e-6);

struct SweepRow {
    int depth = 0;
    PolicyComparison quality;
};

// Induces a policy at each depth and scores it against the optimal values.
std::vector<SweepRow> sweep_policy_quality(const SearchContext& ctx,
                                           const std::vector<int>& depths,
                                           const SearchConfig& base,
                                           double tolerance = 1e-6);

enum class BenchMode { SearchAndExecute, SearchOnly };

struct BenchRow {
    int depth = 0;
    BenchMode mode = BenchMode::SearchAndExecute;
    bool cache = false;
    double elapsed_seconds = 0.0;
    long long searches = 0;
    long long nodes_expanded = 0;
    long long utility_cuts = 0;
    long long expectation_cuts = 0;
    // Utility-pruned tree size as a percentage of the unpruned tree size,
    // totalled over every domain state at this row's depth.
    double percent_states_searched = 0.0;
};

struct BenchPlan {
    std::vector<int> depths{1, 2, 3};
    int steps = 10;             // actions per episode / plan coverage horizon
    std::uint64_t seed = 1;
    // Search-only without a cache repeats work per visit; rows deeper than
    // this are omitted.
    int search_only_nocache_max_depth = 3;
};

// Measures interleaved execution against up-front planning over every state
// reachable within `steps` actions, with and without the action cache.
std::vector<BenchRow> bench_suite(const SearchContext& ctx, const State& start,
                                  const BenchPlan& plan,
                                  const SearchConfig& base);

} // namespace planex
