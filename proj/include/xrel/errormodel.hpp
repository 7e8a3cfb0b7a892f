#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "xrel/dfg.hpp"
#include "xrel/io.hpp"

namespace xrel {

/// Statistics of one operator node truncated at one level, all other nodes exact.
struct LevelStats {
  double v = 0.0;                // truncation error variance at the node
  double eps_node = 0.0;         // mean |error| at the node
  std::vector<double> eps_out;   // mean |error| at each output
  std::vector<double> es;        // error sensitivity per output, eps_out / eps_node
};

struct NodeProfile {
  std::string id;
  NodeKind kind = NodeKind::kAdd;
  int width = 0;
  std::vector<LevelStats> levels;  // index j in [0, width]
};

/// Per-(node, level) sensitivity and variance table of one DFG.
struct ErrorProfile {
  std::string dfg_name;
  std::uint64_t dfg_hash = 0;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> outputs;  // output node ids, graph order
  std::vector<NodeProfile> nodes;    // operator nodes, id order
  std::vector<std::string> annotations;

  const NodeProfile* find(std::string_view id) const;
};

/// Variance of the error a level-j truncation injects at an add or mul node.
/// add: (2^(2j) - 1) / 6, the variance of the sum of two independent uniform
/// j-bit residues. mul: operands uniform over the signed `operand_bits`
/// range; the law of total variance is evaluated by enumerating every residue
/// pair while 2^(2j) <= 2^16 and by 2^16 seeded samples beyond that. Levels at
/// or above operand_bits lose the whole product. j = 0 gives 0.
double analytic_trunc_variance(NodeKind kind, int width, int j, int operand_bits,
                               std::uint64_t seed = 0);

/// Uniform random input vector of trial `trial` (inputs() order), drawn over
/// each input's full two's-complement range from substream (seed, trial).
void random_inputs(const CompiledDfg& dfg, std::uint64_t seed, std::size_t trial,
                   std::span<std::int64_t> out);

/// Monte Carlo error sensitivity of every operator node at every level.
/// Requires trials >= 1000. Bit-identical for any thread count.
ErrorProfile estimate_profile(const CompiledDfg& dfg, std::size_t trials, std::uint64_t seed);

/// Sum of ES^2 * v over the plan's chosen levels, one value per output.
std::vector<double> predict_output_variances(const ErrorProfile& profile, const TruncationPlan& plan);
/// Largest per-output prediction.
double predict_output_variance(const ErrorProfile& profile, const TruncationPlan& plan);

/// Sample variance (T - 1 denominator) of exact minus approximate output
/// over `trials` uniform random input vectors, per output.
std::vector<double> measure_output_variances(const CompiledDfg& dfg, const TruncationPlan& plan,
                                             std::size_t trials, std::uint64_t seed);
/// Largest per-output measurement.
double measure_output_variance(const CompiledDfg& dfg, const TruncationPlan& plan,
                               std::size_t trials, std::uint64_t seed);

Json profile_to_json(const ErrorProfile& profile);
ErrorProfile profile_from_json(const Json& doc);

/// Profile cache keyed by (dfg name, trials, seed). A cached profile whose
/// DFG hash differs from `dfg` is treated as absent.
void save_profile_cache(const std::filesystem::path& path, const ErrorProfile& profile);
std::optional<ErrorProfile> load_profile_cache(const std::filesystem::path& path, const Dfg& dfg,
                                               std::size_t trials, std::uint64_t seed);

}  // namespace xrel
