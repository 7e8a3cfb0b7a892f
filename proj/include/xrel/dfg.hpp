#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace xrel {

enum class NodeKind { kInput, kConst, kAdd, kMul, kOutput };

std::string_view kind_name(NodeKind kind);
std::optional<NodeKind> parse_kind(std::string_view name);
inline bool is_operator(NodeKind kind) { return kind == NodeKind::kAdd || kind == NodeKind::kMul; }

struct DfgNode {
  std::string id;
  NodeKind kind = NodeKind::kInput;
  int width = 16;
  std::vector<std::string> operands;
  std::optional<std::int64_t> const_value;  // const nodes only

  friend bool operator==(const DfgNode&, const DfgNode&) = default;
};

/// Plain graph description. May be malformed; see validate() and CompiledDfg.
struct Dfg {
  std::string name;
  std::vector<DfgNode> nodes;

  friend bool operator==(const Dfg&, const Dfg&) = default;
};

/// Truncation level j for every add/mul node (0 = exact operator).
struct TruncationPlan {
  std::string dfg;
  int k = 0;
  std::map<std::string, int> assignments;
  double predicted_v = 0.0;
  double cost = 0.0;

  friend bool operator==(const TruncationPlan&, const TruncationPlan&) = default;
};

/// Human-readable list of every invariant the graph breaks; empty when valid.
std::vector<std::string> validate(const Dfg& dfg);

/// Sign-extends the low `width` bits of `bits`.
std::int64_t wrap_signed(std::uint64_t bits, int width);

/// Zeroes the j LSBs of both operands, applies the exact operation and wraps
/// the result to `width` bits (two's complement, low half for products).
/// Throws ValidationError unless kind is add/mul and 0 <= j <= width.
std::int64_t trunc_op(NodeKind kind, std::int64_t x, std::int64_t y, int width, int j);

/// Validated graph with resolved operand indices and a stable topological
/// order (ties broken by declaration order). Immutable after construction.
class CompiledDfg {
 public:
  /// Throws InputError listing the violations when the graph is malformed.
  explicit CompiledDfg(Dfg dfg);

  const Dfg& source() const { return dfg_; }
  const std::string& name() const { return dfg_.name; }
  std::size_t size() const { return dfg_.nodes.size(); }
  const DfgNode& node(std::size_t i) const { return dfg_.nodes[i]; }
  std::optional<std::size_t> index_of(std::string_view id) const;

  const std::vector<std::size_t>& topo_order() const { return topo_; }
  const std::vector<std::size_t>& inputs() const { return inputs_; }
  const std::vector<std::size_t>& outputs() const { return outputs_; }
  /// Add/mul node indices, ordered by node id.
  const std::vector<std::size_t>& operators() const { return operators_; }
  const std::vector<std::size_t>& operand_indices(std::size_t i) const { return operands_[i]; }
  /// Nodes reachable from i (excluding i), in topological order.
  const std::vector<std::size_t>& downstream(std::size_t i) const { return downstream_[i]; }

  /// Evaluates every node. `input_values` follows inputs() order, `levels`
  /// holds a truncation level per node index (ignored for non-operators) or
  /// is empty for exact evaluation. `values` must have size() entries.
  void evaluate(std::span<const std::int64_t> input_values, std::span<const int> levels,
                std::span<std::int64_t> values) const;

  /// Value of node i given the already-evaluated values of its operands.
  std::int64_t evaluate_node(std::size_t i, int level, std::span<const std::int64_t> values) const;

  /// Per-node truncation levels of a plan. Throws InputError when an
  /// operator node has no entry, an entry names an unknown or non-operator
  /// node, or a level exceeds the node width.
  std::vector<int> levels_of(const TruncationPlan& plan) const;

 private:
  Dfg dfg_;
  std::map<std::string, std::size_t, std::less<>> index_;
  std::vector<std::vector<std::size_t>> operands_;
  std::vector<std::vector<std::size_t>> downstream_;
  std::vector<std::size_t> topo_;
  std::vector<std::size_t> inputs_;
  std::vector<std::size_t> outputs_;
  std::vector<std::size_t> operators_;
};

/// Plan with j = 0 on every operator node.
TruncationPlan exact_plan(const CompiledDfg& dfg);

/// Evaluates the graph under `plan` and returns every output node's value.
/// Throws InputError on a missing input or plan entry.
std::map<std::string, std::int64_t> eval(const CompiledDfg& dfg, const TruncationPlan& plan,
                                         const std::map<std::string, std::int64_t>& inputs);

/// Number of add/mul nodes.
std::size_t operator_count(const Dfg& dfg);

/// Hamming-windowed sinc low-pass taps (cutoff 0.2 of the sample rate, unit
/// DC gain), quantized with `frac_bits` fractional bits. Taps that round to
/// zero keep one LSB of their sign so every multiplier stays live.
std::vector<std::int64_t> fir_coefficients(int taps, int frac_bits);

/// FIR graph: inputs x00.., constant taps c00.., products m00.. and a
/// balanced adder tree a00.. feeding output y.
Dfg build_fir(int taps, int width, int coeff_frac_bits);

/// Benchmarks: fir8, fir64, mm8 (8x8 matrix product, 64 outputs) and smt3
/// (3x3 smoothing window). Width must be in [8, 32]; fixed-point constants
/// use width/2 - 1 fractional bits. Throws ValidationError on an unknown name.
Dfg build_benchmark(std::string_view name, int width);

const std::vector<std::string>& benchmark_names();

}  // namespace xrel
