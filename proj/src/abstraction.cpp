#include "planex/abstraction.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "planex/solvers.hpp"

namespace planex {

namespace {

std::uint64_t case_write_mask(const AspectCase& c) {
    std::uint64_t m = 0;
    for (const auto& br : c.effect.branches) m |= br.effect.mention_mask();
    return m;
}

// The propositions a case's discriminant depends on. For a default case that
// is the union of all earlier discriminants in the aspect.
std::uint64_t case_condition_mask(const ActionAspect& aspect, std::size_t ci) {
    const auto& c = aspect.cases[ci];
    if (!c.is_default) return c.discriminant.mention_mask();
    std::uint64_t m = 0;
    for (std::size_t k = 0; k < ci; ++k)
        m |= aspect.cases[k].discriminant.mention_mask();
    return m;
}

std::vector<int> mask_to_indices(std::uint64_t mask) {
    std::vector<int> out;
    for (int i = 0; i < 64; ++i)
        if ((mask >> i) & 1u) out.push_back(i);
    return out;
}

PartialAssignment restrict_to(const PartialAssignment& pa, std::uint64_t mask) {
    PartialAssignment out;
    for (auto [idx, pos] : pa.literals())
        if ((mask >> idx) & 1u) out.add(idx, pos);
    return out;
}

PartialAssignment remap(const PartialAssignment& pa,
                        const std::vector<int>& old_to_new) {
    PartialAssignment out;
    for (auto [idx, pos] : pa.literals()) {
        if (old_to_new[static_cast<std::size_t>(idx)] < 0)
            throw std::logic_error(
                "projected discriminant references a non-closure proposition");
        out.add(old_to_new[static_cast<std::size_t>(idx)], pos);
    }
    return out;
}

} // namespace

RelevantSet relevant_closure(const DomainSpec& d, const std::vector<int>& ir) {
    RelevantSet r;
    std::uint64_t mask = 0;
    for (int p : ir) {
        if (p < 0 || p >= d.prop_count())
            throw std::invalid_argument(
                "immediately relevant proposition index out of range: " +
                std::to_string(p));
        mask |= 1ull << p;
    }
    r.immediately_relevant = mask_to_indices(mask);

    bool grew = true;
    while (grew) {
        grew = false;
        for (const auto& act : d.actions) {
            for (const auto& aspect : act.aspects) {
                for (std::size_t ci = 0; ci < aspect.cases.size(); ++ci) {
                    if (!(case_write_mask(aspect.cases[ci]) & mask)) continue;
                    std::uint64_t cond = case_condition_mask(aspect, ci);
                    std::uint64_t fresh = cond & ~mask;
                    if (!fresh) continue;
                    mask |= fresh;
                    grew = true;
                    const auto& c = aspect.cases[ci];
                    std::string disc = c.is_default
                                           ? "default"
                                           : format_condition(d, c.discriminant);
                    for (int p : mask_to_indices(fresh))
                        r.trace.push_back({p, act.name, disc});
                }
            }
        }
    }

    r.closure = mask_to_indices(mask);
    r.closure_mask = mask;
    return r;
}

DomainSpec project_domain(const DomainSpec& d, const RelevantSet& r) {
    DomainSpec out = d;
    for (auto& act : out.actions) {
        std::vector<ActionAspect> kept;
        for (auto& aspect : act.aspects) {
            // Project every branch effect onto the closure.
            bool any_effect = false;
            for (auto& c : aspect.cases) {
                for (auto& br : c.effect.branches) {
                    br.effect = restrict_to(br.effect, r.closure_mask);
                    if (!br.effect.empty()) any_effect = true;
                }
            }
            if (!any_effect) continue; // pure noise, drop the aspect

            // A case is closure-pure when its discriminant (for defaults: the
            // earlier discriminants it negates) mentions only closure
            // propositions. Impure cases must have projected away all their
            // effects, otherwise the closure fixpoint was wrong.
            std::vector<AspectCase> pure;
            bool any_impure = false;
            for (std::size_t ci = 0; ci < aspect.cases.size(); ++ci) {
                bool is_pure =
                    (case_condition_mask(aspect, ci) & ~r.closure_mask) == 0;
                if (is_pure) {
                    pure.push_back(aspect.cases[ci]);
                } else {
                    any_impure = true;
                    if (case_write_mask(aspect.cases[ci]) != 0)
                        throw std::logic_error(
                            "effect on a closure proposition behind a "
                            "non-closure discriminant");
                }
            }
            if (any_impure) {
                AspectCase rest;
                rest.is_default = true;
                rest.effect.branches.push_back({PartialAssignment{}, 1.0});
                pure.push_back(std::move(rest));
            }
            kept.push_back(ActionAspect{std::move(pure)});
        }
        if (kept.empty()) {
            // Everything the action did was noise; keep it as a no-op so the
            // action set (and indexing) is unchanged.
            AspectCase triv;
            triv.effect.branches.push_back({PartialAssignment{}, 1.0});
            kept.push_back(ActionAspect{{triv}});
        }
        act.aspects = std::move(kept);
    }
    return out;
}

HeuristicTable build_heuristic(const DomainSpec& d, const std::vector<int>& ir,
                               std::uint64_t state_cap) {
    RelevantSet r = relevant_closure(d, ir);
    DomainSpec projected = project_domain(d, r);

    // Reduced domain over the closure propositions only.
    std::vector<int> old_to_new(static_cast<std::size_t>(d.prop_count()), -1);
    DomainSpec reduced;
    for (std::size_t j = 0; j < r.closure.size(); ++j) {
        old_to_new[static_cast<std::size_t>(r.closure[j])] = static_cast<int>(j);
        reduced.propositions.push_back(
            {d.propositions[static_cast<std::size_t>(r.closure[j])].name,
             static_cast<int>(j)});
    }
    reduced.discount = d.discount;
    for (const auto& act : projected.actions) {
        ActionSchema ra{act.name, {}};
        for (const auto& aspect : act.aspects) {
            ActionAspect rasp;
            for (const auto& c : aspect.cases) {
                AspectCase rc;
                rc.is_default = c.is_default;
                rc.discriminant = remap(c.discriminant, old_to_new);
                for (const auto& br : c.effect.branches)
                    rc.effect.branches.push_back(
                        {remap(br.effect, old_to_new), br.probability});
                rasp.cases.push_back(std::move(rc));
            }
            ra.aspects.push_back(std::move(rasp));
        }
        reduced.actions.push_back(std::move(ra));
    }

    FlatMDP abstract = ground(reduced, state_cap);

    // Cluster rewards: midpoint of the member states' rewards. Only the
    // propositions reward rules mention can vary the reward inside a cluster,
    // so enumerate those instead of the full member set.
    std::uint64_t reward_mask = 0;
    for (const auto& rule : d.rewards) reward_mask |= rule.condition.mention_mask();
    std::uint64_t outside = reward_mask & ~r.closure_mask;
    std::vector<std::uint64_t> outside_bits;
    {
        std::uint64_t sub = 0;
        while (true) {
            outside_bits.push_back(sub);
            if (sub == outside) break;
            sub = (sub - outside) & outside;
        }
    }
    auto width = static_cast<std::uint8_t>(d.prop_count());
    double max_span = 0.0;
    for (std::uint32_t c = 0; c < abstract.num_states; ++c) {
        std::uint64_t base = 0;
        for (std::size_t j = 0; j < r.closure.size(); ++j)
            if ((c >> j) & 1u) base |= 1ull << r.closure[j];
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (std::uint64_t sub : outside_bits) {
            double rew = reward(d, State{base | sub, width});
            lo = std::min(lo, rew);
            hi = std::max(hi, rew);
        }
        abstract.rewards[c] = (hi + lo) / 2.0;
        max_span = std::max(max_span, hi - lo);
    }

    auto [policy, values, report] = policy_iteration(abstract);
    (void)report;

    // Global reward range over the propositions any rule mentions.
    double rlo = std::numeric_limits<double>::infinity(), rhi = -rlo;
    {
        std::uint64_t sub = 0;
        while (true) {
            double rew = reward(d, State{sub, width});
            rlo = std::min(rlo, rew);
            rhi = std::max(rhi, rew);
            if (sub == reward_mask) break;
            sub = (sub - reward_mask) & reward_mask;
        }
    }

    HeuristicTable h;
    h.prop_count = d.prop_count();
    h.closure_indices = r.closure;
    h.values = std::move(values);
    h.default_actions = std::move(policy);
    h.vmax = rhi / (1.0 - d.discount);
    h.vmin = rlo / (1.0 - d.discount);
    h.epsilon = (max_span / 2.0) / (1.0 - d.discount);
    return h;
}

std::vector<std::pair<int, double>> rank_reward_props(const DomainSpec& d) {
    std::uint64_t reward_mask = 0;
    for (const auto& rule : d.rewards) reward_mask |= rule.condition.mention_mask();
    auto width = static_cast<std::uint8_t>(d.prop_count());

    std::vector<std::pair<int, double>> ranked;
    for (int p = 0; p < d.prop_count(); ++p) {
        double impact = 0.0;
        if ((reward_mask >> p) & 1u) {
            std::uint64_t others = reward_mask & ~(1ull << p);
            std::uint64_t sub = 0;
            while (true) {
                double with = reward(d, State{sub | (1ull << p), width});
                double without = reward(d, State{sub, width});
                impact = std::max(impact, std::abs(with - without));
                if (sub == others) break;
                sub = (sub - others) & others;
            }
        }
        ranked.emplace_back(p, impact);
    }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    return ranked;
}

} // namespace planex
