#include "planex/flat.hpp"

#include <algorithm>

namespace planex {

FlatMDP ground(const DomainSpec& d, std::uint64_t state_cap) {
    auto violations = validate(d);
    if (!violations.empty())
        throw std::invalid_argument("cannot ground an invalid domain: " +
                                    violations.front().message);

    int n = d.prop_count();
    std::uint64_t total = n >= 64 ? 0 : (1ull << n);
    if (n >= 64 || total > state_cap)
        throw SizeError("grounding would enumerate 2^" + std::to_string(n) +
                        " states, cap is " + std::to_string(state_cap));

    FlatMDP m;
    m.prop_count = n;
    m.num_states = static_cast<std::uint32_t>(total);
    m.num_actions = d.action_count();
    m.discount = d.discount;
    m.rewards.resize(total);
    for (const auto& a : d.actions) m.action_names.push_back(a.name);

    m.offsets.reserve(total * static_cast<std::uint64_t>(m.num_actions) + 1);
    m.offsets.push_back(0);
    for (std::uint64_t bits = 0; bits < total; ++bits) {
        State s = state_from_bits(d, bits);
        m.rewards[bits] = reward(d, s);
        for (const auto& a : d.actions) {
            Distribution dist = transition_distribution(d, s, a);
            for (const auto& o : dist)
                m.outcomes.push_back(
                    {static_cast<std::uint32_t>(o.state.bits), o.prob});
            m.offsets.push_back(m.outcomes.size());
            m.max_branching =
                std::max(m.max_branching, static_cast<int>(dist.size()));
        }
    }
    return m;
}

double expected_next_value(const FlatMDP& m, std::uint32_t s, int a,
                           const ValueFunction& v) {
    double e = 0.0;
    for (const auto& o : m.transitions(s, a)) e += o.prob * v[o.state];
    return e;
}

double q_value(const FlatMDP& m, std::uint32_t s, int a,
               const ValueFunction& v) {
    return m.rewards[s] + m.discount * expected_next_value(m, s, a, v);
}

} // namespace planex
