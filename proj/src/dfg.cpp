#include "xrel/dfg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>
#include <set>

#include <fmt/core.h>
#include <fmt/ranges.h>

#include "xrel/errors.hpp"

namespace xrel {

namespace {

std::uint64_t mask_of(int width) { return width >= 64 ? ~0ULL : ((1ULL << width) - 1); }

int arity(NodeKind kind) {
  switch (kind) {
    case NodeKind::kInput:
    case NodeKind::kConst: return 0;
    case NodeKind::kAdd:
    case NodeKind::kMul: return 2;
    case NodeKind::kOutput: return 1;
  }
  return 0;
}

}  // namespace

std::string_view kind_name(NodeKind kind) {
  switch (kind) {
    case NodeKind::kInput: return "input";
    case NodeKind::kConst: return "const";
    case NodeKind::kAdd: return "add";
    case NodeKind::kMul: return "mul";
    case NodeKind::kOutput: return "output";
  }
  return "unknown";
}

std::optional<NodeKind> parse_kind(std::string_view name) {
  for (NodeKind k : {NodeKind::kInput, NodeKind::kConst, NodeKind::kAdd, NodeKind::kMul,
                     NodeKind::kOutput})
    if (kind_name(k) == name) return k;
  return std::nullopt;
}

std::int64_t wrap_signed(std::uint64_t bits, int width) {
  if (width >= 64) return static_cast<std::int64_t>(bits);
  const std::uint64_t sign = 1ULL << (width - 1);
  const std::uint64_t v = bits & mask_of(width);
  return static_cast<std::int64_t>(v ^ sign) - static_cast<std::int64_t>(sign);
}

std::int64_t trunc_op(NodeKind kind, std::int64_t x, std::int64_t y, int width, int j) {
  if (!is_operator(kind)) throw ValidationError("trunc_op needs an add or mul node");
  if (width < 2 || width > 64)
    throw ValidationError(fmt::format("width must be in [2, 64], got {}", width));
  if (j < 0 || j > width)
    throw ValidationError(fmt::format("truncation level {} outside [0, {}]", j, width));
  const std::uint64_t keep = ~mask_of(j);
  const std::uint64_t a = static_cast<std::uint64_t>(x) & keep;
  const std::uint64_t b = static_cast<std::uint64_t>(y) & keep;
  return wrap_signed(kind == NodeKind::kAdd ? a + b : a * b, width);
}

std::vector<std::string> validate(const Dfg& dfg) {
  std::vector<std::string> out;
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < dfg.nodes.size(); ++i) {
    const DfgNode& n = dfg.nodes[i];
    if (n.id.empty()) out.push_back(fmt::format("node #{} has an empty id", i));
    if (!index.emplace(n.id, i).second) out.push_back(fmt::format("duplicate node id '{}'", n.id));
    if (n.width < 2 || n.width > 64)
      out.push_back(fmt::format("node '{}': width {} outside [2, 64]", n.id, n.width));
    if (static_cast<int>(n.operands.size()) != arity(n.kind))
      out.push_back(fmt::format("node '{}': {} expects {} operand(s), has {}", n.id,
                                kind_name(n.kind), arity(n.kind), n.operands.size()));
    if (n.kind == NodeKind::kConst && !n.const_value)
      out.push_back(fmt::format("node '{}': const node without const_value", n.id));
    if (n.kind != NodeKind::kConst && n.const_value)
      out.push_back(fmt::format("node '{}': const_value on a {} node", n.id, kind_name(n.kind)));
  }

  // Edges over resolvable operands only.
  const std::size_t size = dfg.nodes.size();
  std::vector<std::vector<std::size_t>> consumers(size);
  std::vector<int> indegree(size, 0);
  bool has_output = false;
  for (std::size_t i = 0; i < size; ++i) {
    const DfgNode& n = dfg.nodes[i];
    has_output |= n.kind == NodeKind::kOutput;
    for (const std::string& op : n.operands) {
      auto it = index.find(op);
      if (it == index.end()) {
        out.push_back(fmt::format("node '{}': operand '{}' does not exist", n.id, op));
        continue;
      }
      if (dfg.nodes[it->second].kind == NodeKind::kOutput)
        out.push_back(fmt::format("node '{}': output node '{}' used as operand", n.id, op));
      consumers[it->second].push_back(i);
      ++indegree[i];
    }
  }
  if (!has_output) out.push_back("graph has no output node");

  std::queue<std::size_t> ready;
  for (std::size_t i = 0; i < size; ++i)
    if (indegree[i] == 0) ready.push(i);
  std::size_t visited = 0;
  while (!ready.empty()) {
    const std::size_t i = ready.front();
    ready.pop();
    ++visited;
    for (std::size_t c : consumers[i])
      if (--indegree[c] == 0) ready.push(c);
  }
  if (visited != size) {
    std::vector<std::string> cyc;
    for (std::size_t i = 0; i < size; ++i)
      if (indegree[i] > 0) cyc.push_back(dfg.nodes[i].id);
    out.push_back(fmt::format("cycle through nodes: {}", fmt::join(cyc, ", ")));
  }

  std::vector<bool> reached(size, false);
  std::vector<std::size_t> stack;
  for (std::size_t i = 0; i < size; ++i)
    if (dfg.nodes[i].kind == NodeKind::kInput) {
      reached[i] = true;
      stack.push_back(i);
    }
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    for (std::size_t c : consumers[i])
      if (!reached[c]) {
        reached[c] = true;
        stack.push_back(c);
      }
  }
  for (std::size_t i = 0; i < size; ++i)
    if (dfg.nodes[i].kind == NodeKind::kOutput && !reached[i])
      out.push_back(fmt::format("output '{}' is not reachable from any input", dfg.nodes[i].id));
  return out;
}

CompiledDfg::CompiledDfg(Dfg dfg) : dfg_(std::move(dfg)) {
  if (auto v = validate(dfg_); !v.empty())
    throw InputError(fmt::format("invalid DFG '{}': {}", dfg_.name, fmt::join(v, "; ")));

  const std::size_t n = dfg_.nodes.size();
  for (std::size_t i = 0; i < n; ++i) index_.emplace(dfg_.nodes[i].id, i);
  operands_.resize(n);
  std::vector<std::vector<std::size_t>> consumers(n);
  std::vector<int> indegree(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const DfgNode& node = dfg_.nodes[i];
    for (const std::string& op : node.operands) {
      const std::size_t j = index_.find(op)->second;
      operands_[i].push_back(j);
      consumers[j].push_back(i);
      ++indegree[i];
    }
    switch (node.kind) {
      case NodeKind::kInput: inputs_.push_back(i); break;
      case NodeKind::kOutput: outputs_.push_back(i); break;
      case NodeKind::kAdd:
      case NodeKind::kMul: operators_.push_back(i); break;
      case NodeKind::kConst: break;
    }
  }
  std::sort(operators_.begin(), operators_.end(),
            [&](std::size_t a, std::size_t b) { return dfg_.nodes[a].id < dfg_.nodes[b].id; });

  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t i = 0; i < n; ++i)
    if (indegree[i] == 0) ready.push(i);
  while (!ready.empty()) {
    const std::size_t i = ready.top();
    ready.pop();
    topo_.push_back(i);
    for (std::size_t c : consumers[i])
      if (--indegree[c] == 0) ready.push(c);
  }

  std::vector<std::size_t> position(n);
  for (std::size_t p = 0; p < n; ++p) position[topo_[p]] = p;
  downstream_.resize(n);
  std::vector<char> seen(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(seen.begin(), seen.end(), 0);
    std::vector<std::size_t> stack = consumers[i];
    auto& cone = downstream_[i];
    while (!stack.empty()) {
      const std::size_t c = stack.back();
      stack.pop_back();
      if (seen[c]) continue;
      seen[c] = 1;
      cone.push_back(c);
      for (std::size_t d : consumers[c]) stack.push_back(d);
    }
    std::sort(cone.begin(), cone.end(),
              [&](std::size_t a, std::size_t b) { return position[a] < position[b]; });
  }
}

std::optional<std::size_t> CompiledDfg::index_of(std::string_view id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::int64_t CompiledDfg::evaluate_node(std::size_t i, int level,
                                        std::span<const std::int64_t> values) const {
  const DfgNode& node = dfg_.nodes[i];
  const auto& ops = operands_[i];
  switch (node.kind) {
    case NodeKind::kConst:
      return wrap_signed(static_cast<std::uint64_t>(*node.const_value), node.width);
    case NodeKind::kOutput:
      return wrap_signed(static_cast<std::uint64_t>(values[ops[0]]), node.width);
    case NodeKind::kAdd:
    case NodeKind::kMul: {
      const std::uint64_t keep = ~mask_of(level);
      const std::uint64_t a = static_cast<std::uint64_t>(values[ops[0]]) & keep;
      const std::uint64_t b = static_cast<std::uint64_t>(values[ops[1]]) & keep;
      return wrap_signed(node.kind == NodeKind::kAdd ? a + b : a * b, node.width);
    }
    case NodeKind::kInput: break;
  }
  return values[i];
}

void CompiledDfg::evaluate(std::span<const std::int64_t> input_values, std::span<const int> levels,
                           std::span<std::int64_t> values) const {
  for (std::size_t p = 0; p < inputs_.size(); ++p) {
    const std::size_t i = inputs_[p];
    values[i] = wrap_signed(static_cast<std::uint64_t>(input_values[p]), dfg_.nodes[i].width);
  }
  for (std::size_t i : topo_) {
    if (dfg_.nodes[i].kind == NodeKind::kInput) continue;
    values[i] = evaluate_node(i, levels.empty() ? 0 : levels[i], values);
  }
}

std::vector<int> CompiledDfg::levels_of(const TruncationPlan& plan) const {
  std::vector<int> levels(size(), 0);
  for (const auto& [id, j] : plan.assignments) {
    auto idx = index_of(id);
    if (!idx) throw InputError(fmt::format("plan names unknown node '{}'", id));
    const DfgNode& node = dfg_.nodes[*idx];
    if (!is_operator(node.kind))
      throw InputError(fmt::format("plan assigns a level to {} node '{}'", kind_name(node.kind), id));
    if (j < 0 || j > node.width)
      throw InputError(fmt::format("plan level {} for '{}' outside [0, {}]", j, id, node.width));
    levels[*idx] = j;
  }
  for (std::size_t i : operators_)
    if (!plan.assignments.contains(dfg_.nodes[i].id))
      throw InputError(fmt::format("plan has no entry for node '{}'", dfg_.nodes[i].id));
  return levels;
}

TruncationPlan exact_plan(const CompiledDfg& dfg) {
  TruncationPlan plan;
  plan.dfg = dfg.name();
  for (std::size_t i : dfg.operators()) plan.assignments[dfg.node(i).id] = 0;
  return plan;
}

std::map<std::string, std::int64_t> eval(const CompiledDfg& dfg, const TruncationPlan& plan,
                                         const std::map<std::string, std::int64_t>& inputs) {
  const std::vector<int> levels = dfg.levels_of(plan);
  std::vector<std::int64_t> in;
  in.reserve(dfg.inputs().size());
  for (std::size_t i : dfg.inputs()) {
    auto it = inputs.find(dfg.node(i).id);
    if (it == inputs.end()) throw InputError(fmt::format("missing value for input '{}'", dfg.node(i).id));
    in.push_back(it->second);
  }
  std::vector<std::int64_t> values(dfg.size());
  dfg.evaluate(in, levels, values);
  std::map<std::string, std::int64_t> out;
  for (std::size_t i : dfg.outputs()) out[dfg.node(i).id] = values[i];
  return out;
}

std::size_t operator_count(const Dfg& dfg) {
  return static_cast<std::size_t>(std::count_if(dfg.nodes.begin(), dfg.nodes.end(),
                                                [](const DfgNode& n) { return is_operator(n.kind); }));
}

std::vector<std::int64_t> fir_coefficients(int taps, int frac_bits) {
  if (taps < 1) throw ValidationError("FIR needs at least one tap");
  if (frac_bits < 0 || frac_bits > 60) throw ValidationError("FIR fractional bits out of range");
  constexpr double cutoff = 0.2;
  const double center = (taps - 1) / 2.0;
  std::vector<double> h(taps);
  double sum = 0.0;
  for (int n = 0; n < taps; ++n) {
    const double t = n - center;
    const double sinc = t == 0.0 ? 2.0 * cutoff
                                 : std::sin(2.0 * std::numbers::pi * cutoff * t) / (std::numbers::pi * t);
    const double window =
        taps == 1 ? 1.0 : 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * n / (taps - 1));
    h[n] = sinc * window;
    sum += h[n];
  }
  std::vector<std::int64_t> q(taps);
  for (int n = 0; n < taps; ++n) {
    const double scaled = h[n] / sum * std::ldexp(1.0, frac_bits);
    auto v = static_cast<std::int64_t>(std::llround(scaled));
    if (v == 0) v = h[n] < 0 ? -1 : 1;
    q[n] = v;
  }
  return q;
}

namespace {

std::string padded(char prefix, std::size_t i, int digits) {
  return fmt::format("{}{:0{}}", prefix, i, digits);
}

// Pairwise reduction level by level; returns the id of the root.
std::string adder_tree(Dfg& dfg, std::vector<std::string> terms, int width,
                       const std::string& prefix, int digits) {
  std::size_t counter = 0;
  while (terms.size() > 1) {
    std::vector<std::string> next;
    for (std::size_t i = 0; i + 1 < terms.size(); i += 2) {
      std::string id = fmt::format("{}{:0{}}", prefix, counter++, digits);
      dfg.nodes.push_back({id, NodeKind::kAdd, width, {terms[i], terms[i + 1]}, std::nullopt});
      next.push_back(std::move(id));
    }
    if (terms.size() % 2 == 1) next.push_back(terms.back());
    terms = std::move(next);
  }
  return terms.front();
}

void check_benchmark_width(int width) {
  if (width < 8 || width > 32)
    throw ValidationError(fmt::format("benchmark width must be in [8, 32], got {}", width));
}

}  // namespace

Dfg build_fir(int taps, int width, int coeff_frac_bits) {
  if (width < 2 || width > 64) throw ValidationError("FIR width out of range");
  const auto coeffs = fir_coefficients(taps, coeff_frac_bits);
  const int digits = taps > 100 ? 3 : 2;
  Dfg dfg;
  dfg.name = fmt::format("fir{}", taps);
  std::vector<std::string> products;
  for (int t = 0; t < taps; ++t) {
    dfg.nodes.push_back({padded('x', t, digits), NodeKind::kInput, width, {}, std::nullopt});
    dfg.nodes.push_back({padded('c', t, digits), NodeKind::kConst, width, {}, coeffs[t]});
  }
  for (int t = 0; t < taps; ++t) {
    dfg.nodes.push_back({padded('m', t, digits), NodeKind::kMul, width,
                         {padded('x', t, digits), padded('c', t, digits)}, std::nullopt});
    products.push_back(padded('m', t, digits));
  }
  const std::string root = adder_tree(dfg, products, width, "a", digits);
  dfg.nodes.push_back({"y", NodeKind::kOutput, width, {root}, std::nullopt});
  return dfg;
}

Dfg build_benchmark(std::string_view name, int width) {
  check_benchmark_width(width);
  const int frac = width / 2 - 1;
  if (name == "fir8") return build_fir(8, width, frac);
  if (name == "fir64") return build_fir(64, width, frac);
  if (name == "mm8") {
    Dfg dfg;
    dfg.name = "mm8";
    for (char m : {'a', 'b'})
      for (int r = 0; r < 8; ++r)
        for (int c = 0; c < 8; ++c)
          dfg.nodes.push_back({fmt::format("{}{}{}", m, r, c), NodeKind::kInput, width, {}, std::nullopt});
    for (int r = 0; r < 8; ++r)
      for (int c = 0; c < 8; ++c) {
        std::vector<std::string> products;
        for (int t = 0; t < 8; ++t) {
          std::string id = fmt::format("m{}{}_{}", r, c, t);
          dfg.nodes.push_back({id, NodeKind::kMul, width,
                               {fmt::format("a{}{}", r, t), fmt::format("b{}{}", t, c)}, std::nullopt});
          products.push_back(std::move(id));
        }
        const std::string root = adder_tree(dfg, products, width, fmt::format("s{}{}_", r, c), 1);
        dfg.nodes.push_back({fmt::format("y{}{}", r, c), NodeKind::kOutput, width, {root}, std::nullopt});
      }
    return dfg;
  }
  if (name == "smt3") {
    Dfg dfg;
    dfg.name = "smt3";
    const auto weight = static_cast<std::int64_t>(std::llround(std::ldexp(1.0, frac) / 9.0));
    std::vector<std::string> products;
    for (int p = 0; p < 9; ++p) {
      dfg.nodes.push_back({fmt::format("p{}", p), NodeKind::kInput, width, {}, std::nullopt});
      dfg.nodes.push_back({fmt::format("w{}", p), NodeKind::kConst, width, {}, weight});
    }
    for (int p = 0; p < 9; ++p) {
      dfg.nodes.push_back({fmt::format("m{}", p), NodeKind::kMul, width,
                           {fmt::format("p{}", p), fmt::format("w{}", p)}, std::nullopt});
      products.push_back(fmt::format("m{}", p));
    }
    const std::string root = adder_tree(dfg, products, width, "a", 1);
    dfg.nodes.push_back({"y", NodeKind::kOutput, width, {root}, std::nullopt});
    return dfg;
  }
  throw ValidationError(fmt::format("unknown benchmark '{}'", name));
}

const std::vector<std::string>& benchmark_names() {
  static const std::vector<std::string> names = {"fir8", "fir64", "mm8", "smt3"};
  return names;
}

}  // namespace xrel
