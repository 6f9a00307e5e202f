#include "planex/executor.hpp"

#include <chrono>
#include <stdexcept>

#include "planex/solvers.hpp"

namespace planex {

namespace {

using clock_type = std::chrono::steady_clock;

int effective_depth(const SearchConfig& cfg) {
    if (cfg.expansion == Expansion::ProbabilityThreshold)
        return cfg.depth_cap > 0 ? cfg.depth_cap : 12;
    return cfg.depth;
}

void require_flat(const SearchContext& ctx, const char* who) {
    if (!ctx.flat)
        throw std::invalid_argument(std::string(who) +
                                    " needs a grounded model in the context");
}

void accumulate(BenchRow& row, const SearchStats& stats) {
    row.nodes_expanded += stats.nodes_expanded;
    row.utility_cuts += stats.utility_cuts;
    row.expectation_cuts += stats.expectation_cuts;
}

} // namespace

const CachedDecision* ActionCache::lookup(const State& s, int min_depth) const {
    auto it = map_.find(s.bits);
    if (it == map_.end() || it->second.depth < min_depth) return nullptr;
    return &it->second;
}

void ActionCache::store(const State& s, const CachedDecision& d) {
    auto [it, inserted] = map_.try_emplace(s.bits, d);
    if (!inserted && it->second.depth < d.depth) it->second = d;
}

std::uint32_t WorldSimulator::sample_next(std::uint32_t state, int action) {
    auto span = mdp_->transitions(state, action);
    double u = rng_.next_double();
    double cum = 0.0;
    for (const auto& o : span) {
        cum += o.prob;
        if (u < cum) return o.state;
    }
    return span.back().state; // guards against rounding in the running sum
}

long long Trajectory::total_nodes() const {
    long long n = 0;
    for (const auto& step : steps)
        if (step.stats) n += step.stats->nodes_expanded;
    return n;
}

long long Trajectory::total_searches() const {
    long long n = 0;
    for (const auto& step : steps)
        if (step.stats) ++n;
    return n;
}

Trajectory run_episode(const SearchContext& ctx, const State& start,
                       const SearchConfig& cfg, int max_steps,
                       std::uint64_t seed, bool caching, ActionCache* cache) {
    require_flat(ctx, "run_episode");
    ActionCache scratch;
    if (caching && !cache) cache = &scratch;

    Trajectory traj;
    traj.seed = seed;
    WorldSimulator sim(*ctx.flat, seed);
    const int depth = effective_depth(cfg);

    State s = start;
    while (true) {
        if (is_goal(*ctx.domain, s)) {
            traj.termination = Termination::Goal;
            break;
        }
        if (static_cast<int>(traj.steps.size()) >= max_steps) {
            traj.termination = Termination::StepLimit;
            break;
        }

        TrajectoryStep step;
        step.state = s;
        step.reward = ctx.flat->rewards[s.bits];

        const CachedDecision* hit =
            caching ? cache->lookup(s, depth) : nullptr;
        if (hit) {
            step.action = hit->action;
            step.cache_hit = true;
        } else {
            SearchResult res = best_action(ctx, s, cfg);
            step.action = res.action;
            step.stats = res.stats;
            if (caching)
                cache->store(s, CachedDecision{res.action, res.value, depth});
        }

        std::uint32_t next =
            sim.sample_next(static_cast<std::uint32_t>(s.bits), step.action);
        step.outcome = State{next, s.width};
        traj.steps.push_back(std::move(step));
        s = State{next, s.width};
    }

    traj.final_state = s;
    double factor = 1.0;
    for (const auto& step : traj.steps) {
        traj.discounted_return += factor * step.reward;
        factor *= ctx.domain->discount;
    }
    traj.discounted_return += factor * ctx.flat->rewards[s.bits];
    return traj;
}

Policy induced_policy(const SearchContext& ctx, const SearchConfig& cfg) {
    require_flat(ctx, "induced_policy");
    const auto& m = *ctx.flat;
    Policy policy(m.num_states, 0);
    std::uint8_t width = static_cast<std::uint8_t>(m.prop_count);
    for (std::uint32_t s = 0; s < m.num_states; ++s)
        policy[s] = best_action(ctx, State{s, width}, cfg).action;
    return policy;
}

PolicyComparison compare_policy(const FlatMDP& mdp, const Policy& candidate,
                                const ValueFunction& optimal,
                                double tolerance) {
    ValueFunction achieved = policy_evaluation(mdp, candidate);
    PolicyComparison cmp;
    for (std::uint32_t s = 0; s < mdp.num_states; ++s) {
        double loss = std::max(0.0, optimal[s] - achieved[s]);
        cmp.total_error += loss;
        cmp.max_error = std::max(cmp.max_error, loss);
        if (loss > tolerance) ++cmp.num_errors;
    }
    cmp.avg_error = mdp.num_states ? cmp.total_error / mdp.num_states : 0.0;
    return cmp;
}

std::vector<SweepRow> sweep_policy_quality(const SearchContext& ctx,
                                           const std::vector<int>& depths,
                                           const SearchConfig& base,
                                           double tolerance) {
    require_flat(ctx, "sweep_policy_quality");
    auto [opt_policy, opt_values, report] = policy_iteration(*ctx.flat);
    (void)opt_policy;
    (void)report;
    std::vector<SweepRow> rows;
    rows.reserve(depths.size());
    for (int depth : depths) {
        SearchConfig cfg = base;
        cfg.depth = depth;
        SweepRow row;
        row.depth = depth;
        row.quality = compare_policy(*ctx.flat, induced_policy(ctx, cfg),
                                     opt_values, tolerance);
        rows.push_back(row);
    }
    return rows;
}

namespace {

// Walks the set of states reachable from `s` within `rem` chosen actions,
// searching at each newly covered state, exactly as an up-front planner
// would. `covered` records the deepest remaining horizon already handled so
// revisits through shorter paths do not recurse again.
class PlanCoverage {
public:
    PlanCoverage(const SearchContext& ctx, const SearchConfig& cfg,
                 bool use_cache, BenchRow& row)
        : ctx_(ctx), cfg_(cfg), use_cache_(use_cache), row_(row),
          depth_(effective_depth(cfg)) {}

    void cover(const State& s, int rem) {
        if (rem <= 0 || is_goal(*ctx_.domain, s)) return;
        auto [it, inserted] = covered_.try_emplace(s.bits, rem);
        if (!inserted) {
            if (it->second >= rem) return;
            it->second = rem;
        }

        int action;
        const CachedDecision* hit =
            use_cache_ ? cache_.lookup(s, depth_) : nullptr;
        if (hit) {
            action = hit->action;
        } else {
            SearchResult res = best_action(ctx_, s, cfg_);
            ++row_.searches;
            accumulate(row_, res.stats);
            if (use_cache_)
                cache_.store(s, CachedDecision{res.action, res.value, depth_});
            action = res.action;
        }

        for (const auto& o :
             ctx_.flat->transitions(static_cast<std::uint32_t>(s.bits), action))
            cover(State{o.state, s.width}, rem - 1);
    }

private:
    const SearchContext& ctx_;
    const SearchConfig& cfg_;
    bool use_cache_;
    BenchRow& row_;
    int depth_;
    ActionCache cache_;
    std::unordered_map<std::uint64_t, int> covered_;
};

// Fraction of the no-pruning search tree that utility pruning actually
// visits, totalled over every state of the domain. Memoization and the
// estimate gate are disabled so the two sides count the same kind of tree.
double percent_searched(const SearchContext& ctx, int depth) {
    SearchConfig on;
    on.depth = depth;
    on.memoize = false;
    on.expectation_pruning = false;
    SearchConfig off = on;
    off.utility_pruning = false;

    const auto& m = *ctx.flat;
    std::uint8_t width = static_cast<std::uint8_t>(m.prop_count);
    long long pruned = 0, full = 0;
    for (std::uint32_t s = 0; s < m.num_states; ++s) {
        pruned += best_action(ctx, State{s, width}, on).stats.nodes_expanded;
        full += best_action(ctx, State{s, width}, off).stats.nodes_expanded;
    }
    if (full == 0) return 100.0;
    return 100.0 * static_cast<double>(pruned) / static_cast<double>(full);
}

} // namespace

std::vector<BenchRow> bench_suite(const SearchContext& ctx, const State& start,
                                  const BenchPlan& plan,
                                  const SearchConfig& base) {
    require_flat(ctx, "bench_suite");
    std::vector<BenchRow> rows;
    for (int depth : plan.depths) {
        SearchConfig cfg = base;
        cfg.depth = depth;
        double pct = percent_searched(ctx, depth);

        for (BenchMode mode :
             {BenchMode::SearchAndExecute, BenchMode::SearchOnly}) {
            for (bool cache : {false, true}) {
                if (mode == BenchMode::SearchOnly && !cache &&
                    depth > plan.search_only_nocache_max_depth)
                    continue;

                BenchRow row;
                row.depth = depth;
                row.mode = mode;
                row.cache = cache;
                row.percent_states_searched = pct;

                auto t0 = clock_type::now();
                if (mode == BenchMode::SearchAndExecute) {
                    Trajectory traj = run_episode(ctx, start, cfg, plan.steps,
                                                  plan.seed, cache);
                    row.searches = traj.total_searches();
                    for (const auto& step : traj.steps)
                        if (step.stats) accumulate(row, *step.stats);
                } else {
                    PlanCoverage planner(ctx, cfg, cache, row);
                    planner.cover(start, plan.steps);
                }
                row.elapsed_seconds =
                    std::chrono::duration<double>(clock_type::now() - t0)
                        .count();
                rows.push_back(row);
            }
        }
    }
    return rows;
}

} // namespace planex
