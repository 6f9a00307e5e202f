#ifndef PLANEX_SOLVERS_HPP
#define PLANEX_SOLVERS_HPP

#include <tuple>
#include <utility>

#include "planex/flat.hpp"

namespace planex {

struct SolveReport {
    int iterations = 0;
    double residual = 0.0;
    double elapsed_seconds = 0.0;
};

// One sweep of V'(s) = R(s) + discount * max_a sum(Pr(s, a, t) * v[t]).
ValueFunction bellman_backup(const FlatMDP& m, const ValueFunction& v);

// Iterative (successive substitution) evaluation of a fixed policy. Runs
// until the returned values satisfy the policy's fixed-point equation with
// max-norm residual at most residual_target; the report carries the measured
// residual.
ValueFunction policy_evaluation(const FlatMDP& m, const Policy& p,
                                double residual_target = 1e-12,
                                SolveReport* report = nullptr);

// Howard policy iteration: evaluate, then switch a state's action only on
// strict improvement, repeat to a fixed point. The returned policy admits no
// improving single-state action swap and the values are its evaluation.
std::tuple<Policy, ValueFunction, SolveReport> policy_iteration(const FlatMDP& m);

// Bellman backups until the max-norm change drops to tol*(1-b)/(2b), the
// standard stop guaranteeing the result is within tol of the optimum.
std::pair<ValueFunction, SolveReport> value_iteration(const FlatMDP& m,
                                                      double tol = 1e-8);

// argmax_a sum(Pr(s, a, t) * v[t]) per state, ties broken toward the lowest
// action declaration index.
Policy greedy_policy(const FlatMDP& m, const ValueFunction& v);

} // namespace planex

#endif
