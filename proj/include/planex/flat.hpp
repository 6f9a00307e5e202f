#ifndef PLANEX_FLAT_HPP
#define PLANEX_FLAT_HPP

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "planex/domain.hpp"

namespace planex {

// Thrown when grounding would enumerate more states than the caller's cap.
struct SizeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FlatOutcome {
    std::uint32_t state = 0;
    double prob = 0.0;
};

// Action index chosen per state index.
using Policy = std::vector<std::int32_t>;
using ValueFunction = std::vector<double>;

// Fully enumerated MDP. State index i is the bit pattern i over the source
// domain's propositions in declaration order. Treat as immutable once built.
struct FlatMDP {
    int prop_count = 0;
    std::uint32_t num_states = 0;
    int num_actions = 0;
    double discount = 0.9;
    std::vector<double> rewards;            // per state
    std::vector<std::string> action_names;  // declaration order
    std::vector<std::uint64_t> offsets;     // num_states * num_actions + 1
    std::vector<FlatOutcome> outcomes;      // CSR payload, per (state, action)
    int max_branching = 0;                  // largest outcome count seen

    std::span<const FlatOutcome> transitions(std::uint32_t s, int a) const {
        std::size_t k = static_cast<std::size_t>(s) *
                            static_cast<std::size_t>(num_actions) +
                        static_cast<std::size_t>(a);
        return {outcomes.data() + offsets[k],
                static_cast<std::size_t>(offsets[k + 1] - offsets[k])};
    }
};

// Enumerates all 2^n states. Throws SizeError if 2^n exceeds state_cap and
// std::invalid_argument if the domain fails validate().
FlatMDP ground(const DomainSpec& d, std::uint64_t state_cap = 1ull << 20);

// Expected next-state value sum(Pr(s, a, t) * v[t]).
double expected_next_value(const FlatMDP& m, std::uint32_t s, int a,
                           const ValueFunction& v);

// Full action value R(s) + discount * expected_next_value.
double q_value(const FlatMDP& m, std::uint32_t s, int a,
               const ValueFunction& v);

} // namespace planex

#endif
