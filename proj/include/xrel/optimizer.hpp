#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "xrel/dfg.hpp"
#include "xrel/errormodel.hpp"

namespace xrel {

/// Analytic stand-in for synthesized per-node energy: adders scale with the
/// retained width, multipliers with its power `mul_exponent`.
struct CostModel {
  double adder_unit = 1.0;
  double mul_unit = 1.0;
  double mul_exponent = 2.0;
};

/// Throws ValidationError on non-positive units or an exponent below 1.
void validate(const CostModel& model);
CostModel load_cost_model(const std::filesystem::path& path);

/// add: adder_unit * (width - j); mul: mul_unit * (width - j)^mul_exponent.
/// Operator levels are capped at width - 1, so j must be in [0, width - 1].
double energy_cost(const CostModel& model, NodeKind kind, int width, int j);

struct SolveResult {
  TruncationPlan plan;
  double objective = 0.0;    // total energy units
  double predicted_v = 0.0;  // largest per-output prediction
  double budget = 0.0;       // variance bound each output must respect
  bool optimal = false;
};

/// Relative slack on the variance constraint.
inline constexpr double kFeasibilityTolerance = 1e-9;

/// Minimum-cost one-hot level assignment subject to one variance constraint
/// per output, solved exactly by depth-first branch-and-bound with a
/// continuous multiple-choice knapsack bound. Among equal-cost optima the plan
/// whose levels, read in node-id order, are lexicographically largest wins.
/// A zero budget always yields the exact plan.
SolveResult solve_plan(const CompiledDfg& dfg, const ErrorProfile& profile, const CostModel& model,
                       double v_ub);

/// Exhaustive enumeration with the same tie rule. Refuses instances with more
/// than 10^7 assignments (ValidationError).
SolveResult brute_force_plan(const CompiledDfg& dfg, const ErrorProfile& profile,
                             const CostModel& model, double v_ub);

/// One solve per k with budget variance_upper_bound(n_bits, k).
std::vector<SolveResult> sweep_k(const CompiledDfg& dfg, const ErrorProfile& profile,
                                 const CostModel& model, int n_bits, const std::vector<int>& k_range);

/// CSV rows: node, j, cost, es2v (largest over outputs).
std::string solve_log_csv(const CompiledDfg& dfg, const ErrorProfile& profile, const CostModel& model,
                          const SolveResult& result);

}  // namespace xrel
