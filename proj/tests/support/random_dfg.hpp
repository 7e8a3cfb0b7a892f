#pragma once

#include <cstdint>
#include <string>

#include <fmt/core.h>

#include "xrel/dfg.hpp"
#include "xrel/rng.hpp"

namespace xrel::testing {

// Random DAG with 2..4 inputs, up to `max_ops` add/mul nodes of width
// 3..max_width, one or two outputs. Product of (width) over operators stays
// below `max_assignments` so exhaustive search remains tractable.
inline Dfg random_dfg(std::uint64_t seed, int max_ops = 8, int max_width = 8,
                      double max_assignments = 1e7) {
  Xoshiro256 rng(seed);
  auto pick = [&](std::uint64_t n) { return static_cast<int>(rng() % n); };
  for (;;) {
    Dfg dfg;
    dfg.name = fmt::format("rand{}", seed);
    const int n_in = 2 + pick(3);
    const int n_ops = 1 + pick(static_cast<std::uint64_t>(max_ops));
    std::vector<std::string> pool;
    for (int i = 0; i < n_in; ++i) {
      dfg.nodes.push_back({fmt::format("in{}", i), NodeKind::kInput, 3 + pick(max_width - 2), {}, std::nullopt});
      pool.push_back(dfg.nodes.back().id);
    }
    double product = 1.0;
    for (int i = 0; i < n_ops; ++i) {
      const int width = 3 + pick(max_width - 2);
      product *= width;
      const NodeKind kind = pick(2) ? NodeKind::kAdd : NodeKind::kMul;
      const std::string a = pool[pick(pool.size())];
      const std::string b = i > 0 && pick(2) ? pool.back() : pool[pick(pool.size())];
      dfg.nodes.push_back({fmt::format("op{}", i), kind, width, {a, b}, std::nullopt});
      pool.push_back(dfg.nodes.back().id);
    }
    if (product > max_assignments) continue;
    const int n_out = 1 + pick(2);
    dfg.nodes.push_back({"out0", NodeKind::kOutput, max_width, {pool.back()}, std::nullopt});
    if (n_out == 2 && n_ops > 1)
      dfg.nodes.push_back({"out1", NodeKind::kOutput, max_width, {pool[n_in + pick(n_ops - 1)]}, std::nullopt});
    return dfg;
  }
}

}  // namespace xrel::testing
