#include "planex/domain.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace planex {

void PartialAssignment::add(int prop, bool positive) {
    if (prop < 0 || prop >= 64)
        throw std::invalid_argument("proposition index out of range: " +
                                    std::to_string(prop));
    std::uint64_t bit = 1ull << prop;
    if (positive ? (negative_ & bit) : (positive_ & bit))
        throw std::invalid_argument(
            "proposition appears with both polarities: index " +
            std::to_string(prop));
    (positive ? positive_ : negative_) |= bit;
}

int PartialAssignment::literal_count() const {
    return std::popcount(positive_) + std::popcount(negative_);
}

std::vector<std::pair<int, bool>> PartialAssignment::literals() const {
    std::vector<std::pair<int, bool>> out;
    out.reserve(static_cast<std::size_t>(literal_count()));
    for (int i = 0; i < 64; ++i) {
        std::uint64_t bit = 1ull << i;
        if (positive_ & bit) out.emplace_back(i, true);
        else if (negative_ & bit) out.emplace_back(i, false);
    }
    return out;
}

int ActionAspect::match(const State& s) const {
    for (std::size_t i = 0; i < cases.size(); ++i) {
        if (cases[i].is_default || cases[i].discriminant.matches(s))
            return static_cast<int>(i);
    }
    return -1;
}

std::optional<int> DomainSpec::find_prop(const std::string& name) const {
    for (const auto& p : propositions)
        if (p.name == name) return p.index;
    return std::nullopt;
}

std::optional<int> DomainSpec::find_action(const std::string& name) const {
    for (std::size_t i = 0; i < actions.size(); ++i)
        if (actions[i].name == name) return static_cast<int>(i);
    return std::nullopt;
}

State apply_effect(const State& s, const PartialAssignment& effect) {
    if (s.width < 64 && (effect.mention_mask() >> s.width) != 0)
        throw std::invalid_argument(
            "effect mentions a proposition outside the state's width");
    return effect.apply(s);
}

std::vector<Outcome> joint_outcomes(const DomainSpec& d, const State& s,
                                    const ActionSchema& a) {
    std::vector<Outcome> acc{{s, 1.0}};
    for (const auto& aspect : a.aspects) {
        int ci = aspect.match(s);
        if (ci < 0)
            throw std::invalid_argument("no discriminant of action '" + a.name +
                                        "' matches the given state");
        const auto& branches = aspect.cases[static_cast<std::size_t>(ci)].effect.branches;
        std::vector<Outcome> next;
        next.reserve(acc.size() * branches.size());
        for (const auto& partial : acc)
            for (const auto& br : branches)
                next.push_back({apply_effect(partial.state, br.effect),
                                partial.prob * br.probability});
        acc = std::move(next);
    }
    (void)d;
    return acc;
}

Distribution transition_distribution(const DomainSpec& d, const State& s,
                                     const ActionSchema& a) {
    std::map<std::uint64_t, double> merged;
    for (const auto& o : joint_outcomes(d, s, a))
        merged[o.state.bits] += o.prob;
    Distribution dist;
    dist.reserve(merged.size());
    for (const auto& [bits, p] : merged)
        dist.push_back({State{bits, s.width}, p});
    return dist;
}

double reward(const DomainSpec& d, const State& s) {
    double r = 0.0;
    for (const auto& rule : d.rewards)
        if (rule.condition.matches(s)) r += rule.value;
    return r;
}

namespace {

// Enumerates all assignments of the propositions in `mask` (others false) and
// calls fn with each resulting probe state.
template <typename Fn>
void for_each_assignment(std::uint64_t mask, std::uint8_t width, Fn&& fn) {
    std::uint64_t sub = 0;
    while (true) {
        fn(State{sub, width});
        if (sub == mask) break;
        sub = (sub - mask) & mask; // next subset of mask
    }
}

std::uint64_t write_mask(const AspectCase& c) {
    std::uint64_t m = 0;
    for (const auto& br : c.effect.branches) m |= br.effect.mention_mask();
    return m;
}

std::uint64_t mention_mask(const ActionAspect& aspect) {
    std::uint64_t m = 0;
    for (const auto& c : aspect.cases) m |= c.discriminant.mention_mask();
    return m;
}

} // namespace

std::vector<Violation> validate(const DomainSpec& d) {
    using K = Violation::Kind;
    std::vector<Violation> out;
    auto width = static_cast<std::uint8_t>(std::min(d.prop_count(), 64));

    if (d.prop_count() > 64) {
        out.push_back({K::TooManyPropositions,
                       "domains are limited to 64 propositions, got " +
                           std::to_string(d.prop_count()),
                       "", -1, std::nullopt});
        return out; // masks beyond 64 bits cannot be represented; stop here
    }

    if (!(d.discount > 0.0 && d.discount < 1.0))
        out.push_back({K::BadDiscount,
                       "discount must lie strictly between 0 and 1",
                       "", -1, std::nullopt});

    std::uint64_t known = d.prop_count() == 64 ? ~0ull
                                               : (1ull << d.prop_count()) - 1;
    auto check_refs = [&](const PartialAssignment& pa, const std::string& what,
                          const std::string& action, int aspect) {
        if (pa.mention_mask() & ~known)
            out.push_back({K::UnknownProposition,
                           what + " references an undeclared proposition",
                           action, aspect, std::nullopt});
    };

    for (const auto& rule : d.rewards)
        check_refs(rule.condition, "reward condition", "", -1);
    for (const auto& g : d.goals) check_refs(g, "goal", "", -1);

    for (const auto& act : d.actions) {
        for (std::size_t ai = 0; ai < act.aspects.size(); ++ai) {
            const auto& aspect = act.aspects[ai];
            int an = static_cast<int>(ai);

            for (std::size_t ci = 0; ci < aspect.cases.size(); ++ci) {
                const auto& c = aspect.cases[ci];
                check_refs(c.discriminant, "discriminant", act.name, an);
                if (c.is_default && ci + 1 != aspect.cases.size())
                    out.push_back({K::DefaultNotLast,
                                   "default case must be the last case of its aspect",
                                   act.name, an, std::nullopt});
                if (c.effect.branches.empty()) {
                    out.push_back({K::EmptyBranchList,
                                   "effect has no branches", act.name, an,
                                   std::nullopt});
                    continue;
                }
                double sum = 0.0;
                for (const auto& br : c.effect.branches) {
                    check_refs(br.effect, "effect", act.name, an);
                    if (br.probability < 0.0 || br.probability > 1.0)
                        out.push_back({K::BranchProbabilityRange,
                                       "branch probability " +
                                           std::to_string(br.probability) +
                                           " outside [0, 1]",
                                       act.name, an, std::nullopt});
                    sum += br.probability;
                }
                if (std::abs(sum - 1.0) > 1e-9)
                    out.push_back({K::BranchProbabilitySum,
                                   "branch probabilities of action '" + act.name +
                                       "' sum to " + std::to_string(sum) +
                                       ", expected 1",
                                   act.name, an, std::nullopt});
            }

            // Exclusivity and exhaustiveness depend only on the propositions
            // the aspect mentions, so enumerate just those.
            std::uint64_t probe = mention_mask(aspect) & known;
            bool reported_overlap = false, reported_gap = false;
            for_each_assignment(probe, width, [&](const State& s) {
                int matched = 0;
                bool has_default = false;
                for (const auto& c : aspect.cases) {
                    if (c.is_default) has_default = true;
                    else if (c.discriminant.matches(s)) ++matched;
                }
                if (matched > 1 && !reported_overlap) {
                    out.push_back({K::OverlappingDiscriminants,
                                   "two discriminants of action '" + act.name +
                                       "' both match a state",
                                   act.name, an, s});
                    reported_overlap = true;
                }
                if (matched == 0 && !has_default && !reported_gap) {
                    out.push_back({K::NonExhaustiveDiscriminants,
                                   "no discriminant of action '" + act.name +
                                       "' matches a state",
                                   act.name, an, s});
                    reported_gap = true;
                }
            });
        }

        // Two aspects of one action must never write the same proposition in
        // a joint outcome. Enumerate assignments of the propositions either
        // aspect's discriminants mention and intersect the write sets of the
        // matching cases.
        for (std::size_t i = 0; i < act.aspects.size(); ++i) {
            for (std::size_t j = i + 1; j < act.aspects.size(); ++j) {
                std::uint64_t probe = (mention_mask(act.aspects[i]) |
                                       mention_mask(act.aspects[j])) & known;
                bool reported = false;
                for_each_assignment(probe, width, [&](const State& s) {
                    if (reported) return;
                    int mi = act.aspects[i].match(s);
                    int mj = act.aspects[j].match(s);
                    if (mi < 0 || mj < 0) return; // covered by exhaustiveness
                    std::uint64_t wi = write_mask(act.aspects[i].cases[static_cast<std::size_t>(mi)]);
                    std::uint64_t wj = write_mask(act.aspects[j].cases[static_cast<std::size_t>(mj)]);
                    if (wi & wj) {
                        out.push_back({K::AspectWriteConflict,
                                       "aspects " + std::to_string(i) + " and " +
                                           std::to_string(j) + " of action '" +
                                           act.name +
                                           "' write the same proposition",
                                       act.name, static_cast<int>(i), s});
                        reported = true;
                    }
                });
            }
        }
    }

    if (d.initial && d.initial->width != d.prop_count())
        out.push_back({K::BadInitial,
                       "initial state width does not match the proposition count",
                       "", -1, std::nullopt});

    return out;
}

DomainSpec with_implicit_noop(DomainSpec d) {
    if (d.find_action("noop")) return d;
    ActionSchema noop;
    noop.name = "noop";
    AspectCase all;
    all.effect.branches.push_back({PartialAssignment{}, 1.0});
    noop.aspects.push_back(ActionAspect{{all}});
    d.actions.push_back(std::move(noop));
    return d;
}

bool is_goal(const DomainSpec& d, const State& s) {
    for (const auto& g : d.goals)
        if (g.matches(s)) return true;
    return false;
}

State state_from_bits(const DomainSpec& d, std::uint64_t bits) {
    return State{bits, static_cast<std::uint8_t>(d.prop_count())};
}

State state_from_literals(const DomainSpec& d, const std::string& literals) {
    State s = state_from_bits(d, 0);
    std::uint64_t seen = 0;
    std::stringstream ss(literals);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto b = item.find_first_not_of(" \t");
        auto e = item.find_last_not_of(" \t");
        if (b == std::string::npos)
            throw std::invalid_argument("empty literal in state description");
        item = item.substr(b, e - b + 1);
        bool positive = true;
        if (item[0] == '!') {
            positive = false;
            item = item.substr(1);
        }
        auto idx = d.find_prop(item);
        if (!idx)
            throw std::invalid_argument("unknown proposition '" + item + "'");
        std::uint64_t bit = 1ull << *idx;
        if (seen & bit)
            throw std::invalid_argument("proposition '" + item +
                                        "' assigned twice");
        seen |= bit;
        if (positive) s.bits |= bit;
    }
    std::uint64_t all = d.prop_count() == 64 ? ~0ull
                                             : (1ull << d.prop_count()) - 1;
    if (seen != all)
        throw std::invalid_argument(
            "state literals do not determine a unique state: every "
            "proposition must be assigned");
    return s;
}

std::string format_state(const DomainSpec& d, const State& s) {
    std::string out;
    for (const auto& p : d.propositions) {
        if (!out.empty()) out += ' ';
        if (!s.get(p.index)) out += '!';
        out += p.name;
    }
    return out;
}

std::string format_condition(const DomainSpec& d, const PartialAssignment& c) {
    std::string out = "{";
    bool first = true;
    for (auto [idx, pos] : c.literals()) {
        out += first ? " " : ", ";
        first = false;
        if (!pos) out += '!';
        out += d.propositions[static_cast<std::size_t>(idx)].name;
    }
    out += first ? "}" : " }";
    return out;
}

} // namespace planex
