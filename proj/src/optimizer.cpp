#include "xrel/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include <fmt/core.h>

#include "xrel/errors.hpp"
#include "xrel/sizing.hpp"

namespace xrel {

void validate(const CostModel& model) {
  if (!(model.adder_unit > 0.0) || !std::isfinite(model.adder_unit))
    throw ValidationError("cost model adder_unit must be positive");
  if (!(model.mul_unit > 0.0) || !std::isfinite(model.mul_unit))
    throw ValidationError("cost model mul_unit must be positive");
  if (!(model.mul_exponent >= 1.0) || !std::isfinite(model.mul_exponent))
    throw ValidationError("cost model mul_exponent must be >= 1");
}

CostModel load_cost_model(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const IoError& e) {
    throw InputError(e.what());
  }
  CostModel m;
  try {
    const Json doc = Json::parse(text);
    m.adder_unit = doc.value("adder_unit", m.adder_unit);
    m.mul_unit = doc.value("mul_unit", m.mul_unit);
    m.mul_exponent = doc.value("mul_exponent", m.mul_exponent);
  } catch (const Json::exception& e) {
    throw InputError(fmt::format("malformed cost model '{}': {}", path.string(), e.what()));
  }
  validate(m);
  return m;
}

double energy_cost(const CostModel& model, NodeKind kind, int width, int j) {
  if (!is_operator(kind)) throw ValidationError("energy cost is defined for add and mul nodes");
  if (width < 2) throw ValidationError(fmt::format("width {} too small", width));
  if (j < 0 || j > width - 1)
    throw ValidationError(fmt::format("truncation level {} outside [0, {}]", j, width - 1));
  const double kept = static_cast<double>(width - j);
  if (kind == NodeKind::kAdd) return model.adder_unit * kept;
  return model.mul_unit * std::pow(kept, model.mul_exponent);
}

namespace {

// One operator node as a multiple-choice item. Options are levels 0..width-1.
struct Item {
  std::string id;
  std::vector<double> cost;                  // [j]
  std::vector<std::size_t> outs;             // outputs with a nonzero weight at some level
  std::vector<std::vector<double>> weight;   // [j][r], r indexes outs
};

struct Problem {
  std::vector<Item> items;  // id order
  std::size_t n_outputs = 0;
  double capacity = 0.0;
  double budget = 0.0;
};

Problem build_problem(const CompiledDfg& dfg, const ErrorProfile& profile, const CostModel& model,
                      double v_ub) {
  validate(model);
  if (std::isnan(v_ub) || v_ub < 0.0)
    throw ValidationError(fmt::format("variance budget must be >= 0, got {}", v_ub));
  if (profile.outputs.size() != dfg.outputs().size())
    throw InputError("profile output count does not match the DFG");
  Problem pb;
  pb.n_outputs = profile.outputs.size();
  pb.budget = v_ub;
  pb.capacity = std::isinf(v_ub) ? v_ub : v_ub * (1.0 + kFeasibilityTolerance);
  for (std::size_t i : dfg.operators()) {
    const DfgNode& node = dfg.node(i);
    const NodeProfile* np = profile.find(node.id);
    if (!np || np->width != node.width || np->levels.size() < static_cast<std::size_t>(node.width))
      throw InputError(fmt::format("profile does not cover node '{}'", node.id));
    Item item;
    item.id = node.id;
    for (int j = 0; j < node.width; ++j) item.cost.push_back(energy_cost(model, node.kind, node.width, j));
    for (std::size_t o = 0; o < pb.n_outputs; ++o) {
      bool any = false;
      for (int j = 0; j < node.width; ++j) {
        const LevelStats& ls = np->levels[static_cast<std::size_t>(j)];
        if (ls.es.size() != pb.n_outputs) throw InputError("profile ES vector has the wrong size");
        any |= ls.es[o] * ls.es[o] * ls.v > 0.0;
      }
      if (any) item.outs.push_back(o);
    }
    item.weight.assign(static_cast<std::size_t>(node.width), std::vector<double>(item.outs.size()));
    for (int j = 0; j < node.width; ++j) {
      const LevelStats& ls = np->levels[static_cast<std::size_t>(j)];
      for (std::size_t r = 0; r < item.outs.size(); ++r)
        item.weight[j][r] = ls.es[item.outs[r]] * ls.es[item.outs[r]] * ls.v;
    }
    pb.items.push_back(std::move(item));
  }
  return pb;
}

bool better(double candidate, double incumbent) {
  if (std::isinf(incumbent)) return true;
  return candidate < incumbent - 1e-9 * std::max(1.0, std::abs(incumbent));
}

SolveResult finish(const CompiledDfg& dfg, const ErrorProfile& profile, const Problem& pb,
                   const std::vector<int>& chosen, bool optimal) {
  SolveResult r;
  r.plan.dfg = dfg.name();
  double objective = 0.0;
  for (std::size_t n = 0; n < pb.items.size(); ++n) {
    r.plan.assignments[pb.items[n].id] = chosen[n];
    objective += pb.items[n].cost[static_cast<std::size_t>(chosen[n])];
  }
  r.objective = objective;
  r.predicted_v = predict_output_variance(profile, r.plan);
  r.plan.cost = objective;
  r.plan.predicted_v = r.predicted_v;
  r.budget = pb.budget;
  r.optimal = optimal;
  return r;
}

// Branch-and-bound over one group of items coupled through shared outputs.
class ComponentSolver {
 public:
  ComponentSolver(const Problem& pb, std::vector<std::size_t> members, std::vector<std::size_t> outputs)
      : pb_(pb), members_(std::move(members)), outputs_(std::move(outputs)) {
    local_.assign(pb.n_outputs, SIZE_MAX);
    for (std::size_t c = 0; c < outputs_.size(); ++c) local_[outputs_[c]] = c;
    integral_ = true;
    for (std::size_t m : members_)
      for (double c : pb_.items[m].cost) integral_ &= std::floor(c) == c;
    build_twins();
    build_relaxation();
  }

  // Returns chosen levels per member and whether the search completed.
  std::pair<std::vector<int>, bool> solve() {
    used_.assign(outputs_.size(), 0.0);
    current_.assign(members_.size(), 0);
    best_.assign(members_.size(), 0);
    best_cost_ = std::numeric_limits<double>::infinity();
    expansions_ = 0;
    dfs(0, 0.0);
    return {best_, expansions_ < kExpansionLimit};
  }

 private:
  static constexpr std::uint64_t kExpansionLimit = 200'000'000;

  struct Segment {
    double efficiency;  // cost decrease per unit weight
    double dw, dc;      // dc < 0
    std::size_t pos;    // member position
  };

  void build_twins() {
    twin_.assign(members_.size(), SIZE_MAX);
    std::map<std::pair<std::vector<double>, std::vector<std::pair<std::size_t, std::vector<double>>>>,
             std::size_t>
        last;
    for (std::size_t p = 0; p < members_.size(); ++p) {
      const Item& it = pb_.items[members_[p]];
      std::vector<std::pair<std::size_t, std::vector<double>>> w;
      for (std::size_t r = 0; r < it.outs.size(); ++r) {
        std::vector<double> col;
        for (const auto& row : it.weight) col.push_back(row[r]);
        w.emplace_back(it.outs[r], std::move(col));
      }
      auto key = std::make_pair(it.cost, std::move(w));
      auto found = last.find(key);
      if (found != last.end()) twin_[p] = found->second;
      last[key] = p;
    }
  }

  void build_relaxation() {
    const std::size_t n = members_.size();
    start_suffix_.assign(outputs_.size(), std::vector<double>(n + 1, 0.0));
    segments_.assign(outputs_.size(), {});
    for (std::size_t c = 0; c < outputs_.size(); ++c) {
      const std::size_t o = outputs_[c];
      std::vector<double> start(n);
      for (std::size_t p = 0; p < n; ++p) {
        const Item& it = pb_.items[members_[p]];
        const auto r_it = std::find(it.outs.begin(), it.outs.end(), o);
        std::vector<std::pair<double, double>> pts;  // (weight, cost)
        for (std::size_t j = 0; j < it.cost.size(); ++j)
          pts.emplace_back(r_it == it.outs.end() ? 0.0 : it.weight[j][static_cast<std::size_t>(r_it - it.outs.begin())],
                           it.cost[j]);
        std::sort(pts.begin(), pts.end());
        // Pareto frontier: strictly decreasing cost with increasing weight.
        std::vector<std::pair<double, double>> front;
        for (const auto& pt : pts)
          if (front.empty() || pt.second < front.back().second) {
            if (!front.empty() && pt.first == front.back().first) front.back() = pt;
            else front.push_back(pt);
          }
        // Lower convex hull of the frontier.
        std::vector<std::pair<double, double>> hull;
        for (const auto& pt : front) {
          while (hull.size() >= 2) {
            const auto& a = hull[hull.size() - 2];
            const auto& b = hull.back();
            const double cross = (b.first - a.first) * (pt.second - a.second) -
                                 (b.second - a.second) * (pt.first - a.first);
            if (cross <= 0.0) hull.pop_back();
            else break;
          }
          hull.push_back(pt);
        }
        start[p] = hull.front().second;
        for (std::size_t h = 1; h < hull.size(); ++h) {
          const double dw = hull[h].first - hull[h - 1].first;
          const double dc = hull[h].second - hull[h - 1].second;
          segments_[c].push_back({-dc / dw, dw, dc, p});
        }
      }
      for (std::size_t p = n; p-- > 0;) start_suffix_[c][p] = start_suffix_[c][p + 1] + start[p];
      std::stable_sort(segments_[c].begin(), segments_[c].end(),
                       [](const Segment& a, const Segment& b) { return a.efficiency > b.efficiency; });
    }
    free_suffix_.assign(n + 1, 0.0);
    for (std::size_t p = n; p-- > 0;) {
      const auto& cost = pb_.items[members_[p]].cost;
      free_suffix_[p] = free_suffix_[p + 1] + *std::min_element(cost.begin(), cost.end());
    }
  }

  // Lower bound on the cost of members [depth, n) given the remaining capacity.
  double bound(std::size_t depth) const {
    double lb = free_suffix_[depth];
    if (std::isinf(pb_.capacity)) return lb;
    for (std::size_t c = 0; c < outputs_.size(); ++c) {
      double value = start_suffix_[c][depth];
      double cap = pb_.capacity - used_[c];
      if (cap < 0.0) cap = 0.0;
      for (const Segment& s : segments_[c]) {
        if (s.pos < depth) continue;
        if (s.dw <= cap) {
          cap -= s.dw;
          value += s.dc;
        } else {
          value += s.dc * (cap / s.dw);
          break;
        }
      }
      lb = std::max(lb, value);
    }
    return lb;
  }

  void dfs(std::size_t depth, double cost) {
    if (++expansions_ >= kExpansionLimit) return;
    if (depth == members_.size()) {
      if (better(cost, best_cost_)) {
        best_cost_ = cost;
        best_ = current_;
      }
      return;
    }
    const Item& it = pb_.items[members_[depth]];
    const int max_j = static_cast<int>(it.cost.size()) - 1;
    const int limit = twin_[depth] == SIZE_MAX ? max_j : std::min(max_j, current_[twin_[depth]]);
    for (int j = limit; j >= 0; --j) {
      const auto& w = it.weight[static_cast<std::size_t>(j)];
      bool feasible = true;
      for (std::size_t r = 0; r < it.outs.size() && feasible; ++r)
        feasible = used_[local_[it.outs[r]]] + w[r] <= pb_.capacity;
      if (!feasible) continue;
      for (std::size_t r = 0; r < it.outs.size(); ++r) used_[local_[it.outs[r]]] += w[r];
      const double next = cost + it.cost[static_cast<std::size_t>(j)];
      double lb = next + bound(depth + 1);
      if (integral_) lb = std::ceil(lb - 1e-7);
      if (better(lb, best_cost_)) {
        current_[depth] = j;
        dfs(depth + 1, next);
      }
      for (std::size_t r = 0; r < it.outs.size(); ++r) used_[local_[it.outs[r]]] -= w[r];
      if (expansions_ >= kExpansionLimit) return;
    }
  }

  const Problem& pb_;
  std::vector<std::size_t> members_;
  std::vector<std::size_t> outputs_;
  std::vector<std::size_t> local_;
  std::vector<std::size_t> twin_;
  bool integral_ = true;
  std::vector<std::vector<double>> start_suffix_;
  std::vector<std::vector<Segment>> segments_;
  std::vector<double> free_suffix_;

  std::vector<double> used_;
  std::vector<int> current_;
  std::vector<int> best_;
  double best_cost_ = 0.0;
  std::uint64_t expansions_ = 0;
};

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t x) {
  while (parent[x] != x) x = parent[x] = parent[parent[x]];
  return x;
}

}  // namespace

SolveResult solve_plan(const CompiledDfg& dfg, const ErrorProfile& profile, const CostModel& model,
                       double v_ub) {
  const Problem pb = build_problem(dfg, profile, model, v_ub);
  std::vector<int> chosen(pb.items.size(), 0);
  if (v_ub == 0.0) return finish(dfg, profile, pb, chosen, true);

  // Outputs coupled by a shared item form one component.
  std::vector<std::size_t> parent(pb.n_outputs);
  std::iota(parent.begin(), parent.end(), 0);
  for (const Item& it : pb.items)
    for (std::size_t r = 1; r < it.outs.size(); ++r)
      parent[find_root(parent, it.outs[r])] = find_root(parent, it.outs[0]);

  std::map<std::size_t, std::vector<std::size_t>> members;
  for (std::size_t n = 0; n < pb.items.size(); ++n) {
    const Item& it = pb.items[n];
    if (it.outs.empty()) {
      // No variance at any level: the cheapest (largest) level is free.
      std::size_t best = 0;
      for (std::size_t j = 1; j < it.cost.size(); ++j)
        if (it.cost[j] <= it.cost[best]) best = j;
      chosen[n] = static_cast<int>(best);
    } else {
      members[find_root(parent, it.outs[0])].push_back(n);
    }
  }

  bool optimal = true;
  for (auto& [root, items] : members) {
    std::vector<std::size_t> outs;
    for (std::size_t o = 0; o < pb.n_outputs; ++o)
      if (find_root(parent, o) == root) outs.push_back(o);
    ComponentSolver solver(pb, items, outs);
    auto [levels, complete] = solver.solve();
    optimal &= complete;
    for (std::size_t p = 0; p < items.size(); ++p) chosen[items[p]] = levels[p];
  }
  return finish(dfg, profile, pb, chosen, optimal);
}

SolveResult brute_force_plan(const CompiledDfg& dfg, const ErrorProfile& profile, const CostModel& model,
                             double v_ub) {
  const Problem pb = build_problem(dfg, profile, model, v_ub);
  if (v_ub == 0.0) return finish(dfg, profile, pb, std::vector<int>(pb.items.size(), 0), true);
  constexpr double kLimit = 1e7;
  double count = 1.0;
  for (const Item& it : pb.items) count *= static_cast<double>(it.cost.size());
  if (count > kLimit)
    throw ValidationError(fmt::format("brute force refuses {:.3g} assignments (limit 1e7)", count));

  const std::size_t n = pb.items.size();
  std::vector<int> current(n, 0), best(n, 0);
  std::vector<double> used(pb.n_outputs, 0.0);
  double best_cost = std::numeric_limits<double>::infinity();

  // Odometer in node-id order, levels descending; keep the first strict improvement.
  auto recurse = [&](auto&& self, std::size_t depth, double cost) -> void {
    if (depth == n) {
      for (double u : used)
        if (u > pb.capacity) return;
      if (better(cost, best_cost)) {
        best_cost = cost;
        best = current;
      }
      return;
    }
    const Item& it = pb.items[depth];
    for (int j = static_cast<int>(it.cost.size()) - 1; j >= 0; --j) {
      const auto& w = it.weight[static_cast<std::size_t>(j)];
      for (std::size_t r = 0; r < it.outs.size(); ++r) used[it.outs[r]] += w[r];
      current[depth] = j;
      self(self, depth + 1, cost + it.cost[static_cast<std::size_t>(j)]);
      for (std::size_t r = 0; r < it.outs.size(); ++r) used[it.outs[r]] -= w[r];
    }
  };
  recurse(recurse, 0, 0.0);
  return finish(dfg, profile, pb, best, true);
}

std::vector<SolveResult> sweep_k(const CompiledDfg& dfg, const ErrorProfile& profile, const CostModel& model,
                                 int n_bits, const std::vector<int>& k_range) {
  std::vector<SolveResult> results;
  results.reserve(k_range.size());
  for (int k : k_range) {
    SolveResult r = solve_plan(dfg, profile, model, variance_upper_bound(n_bits, k));
    r.plan.k = k;
    results.push_back(std::move(r));
  }
  return results;
}

std::string solve_log_csv(const CompiledDfg& dfg, const ErrorProfile& profile, const CostModel& model,
                          const SolveResult& result) {
  std::string csv = "node,j,cost,es2v\n";
  for (std::size_t i : dfg.operators()) {
    const DfgNode& node = dfg.node(i);
    const int j = result.plan.assignments.at(node.id);
    const LevelStats& ls = profile.find(node.id)->levels[static_cast<std::size_t>(j)];
    double term = 0.0;
    for (double es : ls.es) term = std::max(term, es * es * ls.v);
    csv += fmt::format("{},{},{},{}\n", node.id, j, energy_cost(model, node.kind, node.width, j), term);
  }
  return csv;
}

}  // namespace xrel
