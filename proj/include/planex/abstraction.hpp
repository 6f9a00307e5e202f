#ifndef PLANEX_ABSTRACTION_HPP
#define PLANEX_ABSTRACTION_HPP

#include <string>
#include <vector>

#include "planex/flat.hpp"

namespace planex {

// Records why a proposition entered the closure: the action and discriminant
// whose effect on an already-relevant proposition pulled it in.
struct ClosureStep {
    int prop = 0;
    std::string action;
    std::string discriminant;
};

struct RelevantSet {
    std::vector<int> immediately_relevant; // caller's choice, sorted
    std::vector<int> closure;              // least fixpoint, sorted
    std::uint64_t closure_mask = 0;
    std::vector<ClosureStep> trace;        // one entry per derived member
};

// Least set R containing ir such that whenever a proposition of R occurs in
// an effect list, every proposition of the matching discriminant is in R. A
// default case's discriminant is the complement of its aspect's earlier
// cases, so it contributes the propositions those cases mention.
RelevantSet relevant_closure(const DomainSpec& d, const std::vector<int>& ir);

// Drops effect literals on propositions outside the closure. Aspects whose
// every branch becomes empty are removed (pure noise); aspects with mixed
// branches keep their empty branches so probability mass is preserved. Cases
// whose discriminants mention non-closure propositions are guaranteed by the
// closure rule to have all-empty projected effects; they are replaced by a
// single default self-loop case. An action left without aspects receives one
// trivial always-matching case.
DomainSpec project_domain(const DomainSpec& d, const RelevantSet& r);

// Piecewise-constant value estimate over clusters of states that agree on the
// closure propositions, with per-cluster greedy default actions.
struct HeuristicTable {
    int prop_count = 0;
    std::vector<int> closure_indices; // ascending declaration indices
    std::vector<double> values;       // per cluster
    Policy default_actions;           // per cluster, original action indices
    double vmax = 0.0;                // R+/(1-b) of the original rewards
    double vmin = 0.0;                // R-/(1-b)
    double epsilon = 0.0;             // max |value - true optimum| guarantee

    std::size_t cluster_count() const { return values.size(); }

    std::uint32_t cluster_of(const State& s) const {
        std::uint32_t c = 0;
        for (std::size_t j = 0; j < closure_indices.size(); ++j)
            c |= static_cast<std::uint32_t>(s.get(closure_indices[j])) << j;
        return c;
    }

    double value(const State& s) const { return values[cluster_of(s)]; }
    int default_action(const State& s) const {
        return default_actions[cluster_of(s)];
    }
};

// Builds the heuristic: closes ir, projects the domain, grounds the projected
// domain over the closure propositions only, assigns each cluster the
// midpoint of its member states' rewards, and solves the abstract MDP by
// policy iteration. epsilon is (largest cluster reward span)/2/(1-b), a valid
// bound on the abstraction error of the returned values.
HeuristicTable build_heuristic(const DomainSpec& d, const std::vector<int>& ir,
                               std::uint64_t state_cap = 1ull << 20);

// Propositions ranked by reward impact: the largest change in reward any
// single flip of the proposition can cause. Descending, ties by declaration
// index. Useful for picking the immediately relevant set.
std::vector<std::pair<int, double>> rank_reward_props(const DomainSpec& d);

} // namespace planex

#endif
