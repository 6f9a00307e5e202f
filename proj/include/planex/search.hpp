#ifndef PLANEX_SEARCH_HPP
#define PLANEX_SEARCH_HPP

#include <cstdint>
#include <optional>

#include "planex/abstraction.hpp"
#include "planex/domain.hpp"
#include "planex/flat.hpp"

namespace planex {

// Everything a search needs to run. The grounded model is optional: when
// present it is used as a transition cache, otherwise distributions are
// derived from the schemas on the fly, so the search itself never requires
// enumerating the state space.
struct SearchContext {
    const DomainSpec* domain = nullptr;
    const HeuristicTable* heuristic = nullptr;
    const FlatMDP* flat = nullptr;
};

enum class Expansion { FixedDepth, ProbabilityThreshold };

struct SearchConfig {
    int depth = 1;
    Expansion expansion = Expansion::FixedDepth;
    // Probability-threshold mode: a node whose path probability (product of
    // outcome probabilities from the root) falls below this becomes a leaf.
    double threshold = 0.01;
    // Hard depth cap for threshold mode; 0 means the default of 12.
    int depth_cap = 0;
    bool utility_pruning = true;
    bool expectation_pruning = true;
    // Reuse interior values keyed by (state bits, remaining depth) within a
    // single call. Sound for fixed-depth expansion only; ignored in
    // threshold mode, where a node's leaf test also depends on its path
    // probability.
    bool memoize = true;
};

struct SearchStats {
    std::uint64_t nodes_expanded = 0;   // interior nodes whose actions were tried
    std::uint64_t leaves_evaluated = 0; // heuristic evaluations at tree leaves
    std::uint64_t utility_cuts = 0;     // abandoned outcome scans
    std::uint64_t expectation_cuts = 0; // actions gated on their estimate
    int max_branching = 0;              // widest outcome distribution seen
    int action_count = 0;
    double elapsed_seconds = 0.0;
};

struct SearchResult {
    int action = -1;
    double value = 0.0;
    SearchStats stats;
};

// Full expectimax step at the root: MAX over actions of the probability-
// weighted value of the outcomes, values at leaves taken from the heuristic.
// Depth 0 returns the heuristic's default action and value directly. Ties
// between equal utilities go to the lowest action declaration index, and the
// first action is always fully evaluated, so pruning never leaves the root
// without a real incumbent.
SearchResult best_action(const SearchContext& ctx, const State& s,
                         const SearchConfig& cfg);

// Value of s looking `remaining` action levels ahead (the root MAX step of
// best_action uses remaining = cfg.depth). remaining = 0 is the heuristic.
double evaluate_state(const SearchContext& ctx, const State& s, int remaining,
                      const SearchConfig& cfg, SearchStats* stats = nullptr);

// Utility of one action at s: sum over outcomes of prob * value(outcome,
// remaining - 1). With utility pruning on, returns nullopt when the partial
// sum plus vmax-bounded remaining mass shows the action cannot beat
// `incumbent`. Outcomes are scanned in descending probability order.
std::optional<double> action_utility(const SearchContext& ctx, const State& s,
                                     int action, int remaining,
                                     const SearchConfig& cfg,
                                     double incumbent,
                                     SearchStats* stats = nullptr);

// Expectation test for one action: estimate E = sum(Pr(s, a, t) * h(t)). If
// E + epsilon < incumbent - epsilon the action's subtrees are not worth
// expanding and E is returned as its utility estimate; otherwise nullopt.
std::optional<double> expectation_gate(const SearchContext& ctx, const State& s,
                                       int action, double incumbent);

} // namespace planex

#endif
