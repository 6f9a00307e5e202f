#include "planex/search.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace planex {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

using clock_type = std::chrono::steady_clock;

struct ScanOutcome {
    State state;
    double prob;
};

class TreeSearch {
public:
    TreeSearch(const SearchContext& ctx, const SearchConfig& cfg)
        : ctx_(ctx), cfg_(cfg) {
        if (!ctx.domain || !ctx.heuristic)
            throw std::invalid_argument("search context needs a domain and a heuristic");
        threshold_mode_ = cfg.expansion == Expansion::ProbabilityThreshold;
        horizon_ = threshold_mode_ ? (cfg.depth_cap > 0 ? cfg.depth_cap : 12)
                                   : cfg.depth;
        memo_on_ = cfg.memoize && !threshold_mode_;
    }

    SearchStats stats;

    int horizon() const { return horizon_; }

    double state_reward(const State& s) const {
        if (ctx_.flat) return ctx_.flat->rewards[s.bits];
        return reward(*ctx_.domain, s);
    }

    void outcomes_of(const State& s, int a, std::vector<ScanOutcome>& out) {
        out.clear();
        if (ctx_.flat) {
            for (const auto& o : ctx_.flat->transitions(
                     static_cast<std::uint32_t>(s.bits), a))
                out.push_back({State{o.state, s.width}, o.prob});
        } else {
            for (const auto& o : transition_distribution(
                     *ctx_.domain, s,
                     ctx_.domain->actions[static_cast<std::size_t>(a)]))
                out.push_back({o.state, o.prob});
        }
        stats_branching(static_cast<int>(out.size()));
    }

    // Value of the state node; leaves evaluate the heuristic.
    double node_value(const State& s, int remaining, double path_prob) {
        if (is_leaf(remaining, path_prob)) {
            ++stats.leaves_evaluated;
            return ctx_.heuristic->value(s);
        }
        if (memo_on_) {
            if (memo_.size() <= static_cast<std::size_t>(remaining))
                memo_.resize(static_cast<std::size_t>(remaining) + 1);
            auto& level = memo_[static_cast<std::size_t>(remaining)];
            auto it = level.find(s.bits);
            if (it != level.end()) return it->second;
        }
        ++stats.nodes_expanded;
        double best_u;
        max_step(s, remaining, path_prob, best_u);
        double v = state_reward(s) + ctx_.domain->discount * best_u;
        if (memo_on_) memo_[static_cast<std::size_t>(remaining)][s.bits] = v;
        return v;
    }

    // MAX over actions in declaration order. Returns the chosen action; the
    // incumbent stays -inf only if the domain has no actions, which
    // with_implicit_noop rules out. Ties keep the earlier action.
    int max_step(const State& s, int remaining, double path_prob,
                 double& best_u) {
        int m = ctx_.domain->action_count();
        best_u = kNegInf;
        double incumbent = kNegInf;
        int best_a = -1;
        std::vector<ScanOutcome> outs;
        for (int a = 0; a < m; ++a) {
            outcomes_of(s, a, outs);
            if (cfg_.expectation_pruning && incumbent != kNegInf) {
                double e = estimate(outs);
                double eps = ctx_.heuristic->epsilon;
                if (e + eps < incumbent - eps) {
                    // The estimate is at least 2*eps short of an achieved
                    // utility, so the subtrees are skipped; e never competes.
                    ++stats.expectation_cuts;
                    continue;
                }
            }
            auto u = average_step(outs, remaining, path_prob, incumbent);
            if (u) {
                if (*u > best_u) {
                    best_u = *u;
                    best_a = a;
                }
                incumbent = std::max(incumbent, *u);
            }
        }
        return best_a;
    }

    // AVERAGE over an action's outcomes, scanned in descending probability
    // order. Maintains the partial sum P and unevaluated mass q; abandons the
    // scan when P + q*vmax cannot exceed the incumbent. The symmetric floor
    // P + q*vmin raises the incumbent early; once the scan completes it
    // equals the exact utility.
    std::optional<double> average_step(const std::vector<ScanOutcome>& outs,
                                       int remaining, double path_prob,
                                       double& incumbent) {
        // Local buffers: node_value recurses back into here.
        std::vector<ScanOutcome> scan(outs.begin(), outs.end());
        std::stable_sort(scan.begin(), scan.end(),
                         [](const ScanOutcome& a, const ScanOutcome& b) {
                             return a.prob > b.prob;
                         });
        std::size_t n = scan.size();
        std::vector<double> suffix(n + 1);
        suffix[n] = 0.0;
        for (std::size_t i = n; i-- > 0;)
            suffix[i] = suffix[i + 1] + scan[i].prob;

        double vmax = ctx_.heuristic->vmax, vmin = ctx_.heuristic->vmin;
        double p_sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (cfg_.utility_pruning && incumbent != kNegInf &&
                p_sum + suffix[i] * vmax <= incumbent) {
                ++stats.utility_cuts;
                return std::nullopt;
            }
            double v = node_value(scan[i].state, remaining - 1,
                                  path_prob * scan[i].prob);
            p_sum += scan[i].prob * v;
            incumbent = std::max(incumbent, p_sum + suffix[i + 1] * vmin);
        }
        return p_sum;
    }

    double estimate(const std::vector<ScanOutcome>& outs) const {
        double e = 0.0;
        for (const auto& o : outs) e += o.prob * ctx_.heuristic->value(o.state);
        return e;
    }

private:
    bool is_leaf(int remaining, double path_prob) const {
        if (remaining <= 0) return true;
        return threshold_mode_ && path_prob < cfg_.threshold;
    }

    void stats_branching(int b) {
        stats.max_branching = std::max(stats.max_branching, b);
    }

    const SearchContext& ctx_;
    SearchConfig cfg_;
    bool threshold_mode_ = false;
    bool memo_on_ = false;
    int horizon_ = 0;
    std::vector<std::unordered_map<std::uint64_t, double>> memo_;
};

} // namespace

SearchResult best_action(const SearchContext& ctx, const State& s,
                         const SearchConfig& cfg) {
    auto t0 = clock_type::now();
    TreeSearch search(ctx, cfg);
    search.stats.action_count = ctx.domain->action_count();

    SearchResult result;
    if (search.horizon() <= 0) {
        result.action = ctx.heuristic->default_action(s);
        result.value = ctx.heuristic->value(s);
        ++search.stats.leaves_evaluated;
    } else {
        ++search.stats.nodes_expanded;
        double best_u;
        result.action = search.max_step(s, search.horizon(), 1.0, best_u);
        result.value = search.state_reward(s) + ctx.domain->discount * best_u;
    }
    search.stats.elapsed_seconds =
        std::chrono::duration<double>(clock_type::now() - t0).count();
    result.stats = search.stats;
    return result;
}

double evaluate_state(const SearchContext& ctx, const State& s, int remaining,
                      const SearchConfig& cfg, SearchStats* stats) {
    TreeSearch search(ctx, cfg);
    double v = search.node_value(s, remaining, 1.0);
    if (stats) *stats = search.stats;
    return v;
}

std::optional<double> action_utility(const SearchContext& ctx, const State& s,
                                     int action, int remaining,
                                     const SearchConfig& cfg, double incumbent,
                                     SearchStats* stats) {
    TreeSearch search(ctx, cfg);
    std::vector<ScanOutcome> outs;
    search.outcomes_of(s, action, outs);
    auto u = search.average_step(outs, remaining, 1.0, incumbent);
    if (stats) *stats = search.stats;
    return u;
}

std::optional<double> expectation_gate(const SearchContext& ctx, const State& s,
                                       int action, double incumbent) {
    SearchConfig cfg;
    cfg.depth = 1;
    TreeSearch search(ctx, cfg);
    std::vector<ScanOutcome> outs;
    search.outcomes_of(s, action, outs);
    double e = search.estimate(outs);
    double eps = ctx.heuristic->epsilon;
    if (e + eps < incumbent - eps) return e;
    return std::nullopt;
}

} // namespace planex
