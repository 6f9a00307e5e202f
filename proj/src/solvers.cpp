#include "planex/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace planex {

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

// V'(s) = R(s) + b * sum(Pr(s, p(s), t) * v[t]); returns max-norm change.
double policy_sweep(const FlatMDP& m, const Policy& p, const ValueFunction& v,
                    ValueFunction& out) {
    double delta = 0.0;
    for (std::uint32_t s = 0; s < m.num_states; ++s) {
        double nv = m.rewards[s] + m.discount * expected_next_value(m, s, p[s], v);
        delta = std::max(delta, std::abs(nv - v[s]));
        out[s] = nv;
    }
    return delta;
}

} // namespace

ValueFunction bellman_backup(const FlatMDP& m, const ValueFunction& v) {
    ValueFunction out(m.num_states);
    for (std::uint32_t s = 0; s < m.num_states; ++s) {
        double best = -std::numeric_limits<double>::infinity();
        for (int a = 0; a < m.num_actions; ++a)
            best = std::max(best, expected_next_value(m, s, a, v));
        out[s] = m.rewards[s] + m.discount * best;
    }
    return out;
}

ValueFunction policy_evaluation(const FlatMDP& m, const Policy& p,
                                double residual_target, SolveReport* report) {
    auto t0 = clock_type::now();
    ValueFunction v(m.num_states, 0.0), next(m.num_states);
    int iters = 0;
    // Each sweep contracts the distance to the fixed point by the discount,
    // so stopping once the change is below target/discount bounds the final
    // residual by target. The loop re-checks the true residual directly.
    double threshold = residual_target / std::max(m.discount, 1e-12);
    double residual = 0.0;
    while (true) {
        double delta = policy_sweep(m, p, v, next);
        std::swap(v, next);
        ++iters;
        if (delta <= threshold || iters >= 1000000) {
            residual = policy_sweep(m, p, v, next);
            if (residual <= residual_target || iters >= 1000000) break;
        }
    }
    if (report) *report = {iters, residual, seconds_since(t0)};
    return v;
}

std::tuple<Policy, ValueFunction, SolveReport> policy_iteration(const FlatMDP& m) {
    auto t0 = clock_type::now();
    Policy policy(m.num_states, 0);
    ValueFunction v;
    SolveReport eval_report;
    int rounds = 0;
    while (true) {
        v = policy_evaluation(m, policy, 1e-12, &eval_report);
        ++rounds;
        bool changed = false;
        for (std::uint32_t s = 0; s < m.num_states; ++s) {
            double cur = expected_next_value(m, s, policy[s], v);
            int best_a = policy[s];
            double best = cur;
            for (int a = 0; a < m.num_actions; ++a) {
                double e = expected_next_value(m, s, a, v);
                // Strict improvement beyond round-off, lowest index wins.
                if (e > best + 1e-12) {
                    best = e;
                    best_a = a;
                }
            }
            if (best_a != policy[s]) {
                policy[s] = best_a;
                changed = true;
            }
        }
        if (!changed || rounds > 10000) break;
    }
    SolveReport report{rounds, eval_report.residual, seconds_since(t0)};
    return {std::move(policy), std::move(v), report};
}

std::pair<ValueFunction, SolveReport> value_iteration(const FlatMDP& m,
                                                      double tol) {
    auto t0 = clock_type::now();
    ValueFunction v(m.num_states, 0.0);
    double threshold = tol * (1.0 - m.discount) / (2.0 * m.discount);
    int iters = 0;
    double delta;
    do {
        ValueFunction next = bellman_backup(m, v);
        delta = 0.0;
        for (std::uint32_t s = 0; s < m.num_states; ++s)
            delta = std::max(delta, std::abs(next[s] - v[s]));
        v = std::move(next);
        ++iters;
    } while (delta > threshold && iters < 1000000);
    return {std::move(v), SolveReport{iters, delta, seconds_since(t0)}};
}

Policy greedy_policy(const FlatMDP& m, const ValueFunction& v) {
    Policy p(m.num_states, 0);
    for (std::uint32_t s = 0; s < m.num_states; ++s) {
        double best = expected_next_value(m, s, 0, v);
        for (int a = 1; a < m.num_actions; ++a) {
            double e = expected_next_value(m, s, a, v);
            if (e > best) {
                best = e;
                p[s] = a;
            }
        }
    }
    return p;
}

} // namespace planex
