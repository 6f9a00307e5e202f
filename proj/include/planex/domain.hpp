#ifndef PLANEX_DOMAIN_HPP
#define PLANEX_DOMAIN_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace planex {

// A world state: one bit per proposition, bit i = truth value of the
// proposition with declaration index i. At most 64 propositions.
struct State {
    std::uint64_t bits = 0;
    std::uint8_t width = 0;

    bool get(int prop) const { return (bits >> prop) & 1u; }
    bool operator==(const State&) const = default;
};

struct Proposition {
    std::string name;
    int index = 0;

    bool operator==(const Proposition&) const = default;
};

// A conjunction of literals stored as two disjoint bit masks. Used both as a
// condition (discriminant, reward condition, goal) and as an effect list, in
// which case the literals are the values forced onto the state.
class PartialAssignment {
public:
    PartialAssignment() = default;

    // Adds a literal. Throws std::invalid_argument if the proposition index
    // is out of range or already present with the opposite polarity.
    void add(int prop, bool positive);

    bool matches(const State& s) const {
        return (s.bits & positive_) == positive_ && (s.bits & negative_) == 0;
    }

    // Forces the literals onto s. Idempotent.
    State apply(const State& s) const {
        return State{(s.bits | positive_) & ~negative_, s.width};
    }

    bool empty() const { return positive_ == 0 && negative_ == 0; }
    bool mentions(int prop) const { return (mention_mask() >> prop) & 1u; }
    std::uint64_t mention_mask() const { return positive_ | negative_; }
    std::uint64_t positive_mask() const { return positive_; }
    std::uint64_t negative_mask() const { return negative_; }
    int literal_count() const;

    // Literals as (prop index, polarity), ascending by index.
    std::vector<std::pair<int, bool>> literals() const;

    bool operator==(const PartialAssignment&) const = default;

private:
    std::uint64_t positive_ = 0;
    std::uint64_t negative_ = 0;
};

struct EffectBranch {
    PartialAssignment effect;
    double probability = 0.0;

    bool operator==(const EffectBranch&) const = default;
};

// One discrete probability distribution over effect lists. Branch
// probabilities must sum to 1 within 1e-9 (checked by validate()).
struct ProbabilisticEffect {
    std::vector<EffectBranch> branches;

    bool operator==(const ProbabilisticEffect&) const = default;
};

// One row of an aspect: if the discriminant holds, the effect applies. A
// default case matches exactly the states no earlier case matched; validation
// requires it to be last in its aspect.
struct AspectCase {
    PartialAssignment discriminant;
    ProbabilisticEffect effect;
    bool is_default = false;

    bool operator==(const AspectCase&) const = default;
};

// An independent facet of an action's outcome. Discriminants must be mutually
// exclusive and exhaustive; aspects of one action compose by cross product.
struct ActionAspect {
    std::vector<AspectCase> cases;

    // Index of the case that applies in s, or -1 if none does (invalid
    // domains only; validation guarantees a match).
    int match(const State& s) const;

    bool operator==(const ActionAspect&) const = default;
};

struct ActionSchema {
    std::string name;
    std::vector<ActionAspect> aspects;

    bool operator==(const ActionSchema&) const = default;
};

// Rewards are additive: reward(s) is the sum of the values of all rules whose
// condition s satisfies.
struct RewardRule {
    PartialAssignment condition;
    double value = 0.0;

    bool operator==(const RewardRule&) const = default;
};

struct DomainSpec {
    std::vector<Proposition> propositions;
    std::vector<ActionSchema> actions;
    std::vector<RewardRule> rewards;
    double discount = 0.9;
    std::optional<State> initial;
    std::vector<PartialAssignment> goals;

    int prop_count() const { return static_cast<int>(propositions.size()); }
    int action_count() const { return static_cast<int>(actions.size()); }
    std::optional<int> find_prop(const std::string& name) const;
    std::optional<int> find_action(const std::string& name) const;

    bool operator==(const DomainSpec&) const = default;
};

// One weighted outcome of an action application.
struct Outcome {
    State state;
    double prob = 0.0;
};

// Outcomes sorted ascending by state bits, duplicates merged.
using Distribution = std::vector<Outcome>;

struct Violation {
    enum class Kind {
        BadDiscount,
        TooManyPropositions,
        UnknownProposition,
        EmptyBranchList,
        BranchProbabilityRange,
        BranchProbabilitySum,
        DefaultNotLast,
        OverlappingDiscriminants,
        NonExhaustiveDiscriminants,
        AspectWriteConflict,
        BadInitial,
    };

    Kind kind;
    std::string message;
    std::string action;           // empty when not action-related
    int aspect = -1;              // -1 when not aspect-related
    std::optional<State> witness; // a state exhibiting the problem
};

// Applies an effect list to a state. Throws std::invalid_argument if the
// effect mentions a proposition outside the state's width.
State apply_effect(const State& s, const PartialAssignment& effect);

// Unmerged cross product of the matching case of every aspect: one entry per
// combination of branches, probability = product of branch probabilities.
std::vector<Outcome> joint_outcomes(const DomainSpec& d, const State& s,
                                    const ActionSchema& a);

// The transition distribution Pr(s, a, .): joint outcomes with identical
// result states merged, sorted ascending by state bits.
Distribution transition_distribution(const DomainSpec& d, const State& s,
                                     const ActionSchema& a);

double reward(const DomainSpec& d, const State& s);

// Structural and semantic checks; the returned list is empty for a valid
// domain. Exclusivity/exhaustiveness is checked by enumerating assignments of
// the propositions each aspect actually mentions, so it is exact and cheap
// even for wide domains.
std::vector<Violation> validate(const DomainSpec& d);

// Appends the deterministic "noop" action (single always-matching case, empty
// effect) unless an action of that name is already declared. Every domain is
// expected to pass through this before use so a policy exists even in states
// no declared action usefully applies to.
DomainSpec with_implicit_noop(DomainSpec d);

bool is_goal(const DomainSpec& d, const State& s);

State state_from_bits(const DomainSpec& d, std::uint64_t bits);

// Builds a state from comma-separated literals ("Office,!Rain,..."). Every
// proposition must be assigned exactly once; throws std::invalid_argument
// otherwise.
State state_from_literals(const DomainSpec& d, const std::string& literals);

// "Office !Rain Umbrella ..." in declaration order.
std::string format_state(const DomainSpec& d, const State& s);

// Condition rendered as "{ A, !B }".
std::string format_condition(const DomainSpec& d, const PartialAssignment& c);

} // namespace planex

template <> struct std::hash<planex::State> {
    std::size_t operator()(const planex::State& s) const noexcept {
        return std::hash<std::uint64_t>{}(s.bits * 0x9E3779B97F4A7C15ull + s.width);
    }
};

#endif
