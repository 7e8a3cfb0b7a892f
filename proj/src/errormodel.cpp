#include "xrel/errormodel.hpp"

#include <cmath>
#include <map>
#include <tuple>

#include <fmt/core.h>

#include "xrel/errors.hpp"
#include "xrel/parallel.hpp"
#include "xrel/rng.hpp"

namespace xrel {

namespace {

using u128 = unsigned __int128;

std::uint64_t abs_diff_wrapped(std::int64_t exact, std::int64_t approx, int width) {
  const std::int64_t d = wrap_signed(static_cast<std::uint64_t>(exact) - static_cast<std::uint64_t>(approx), width);
  return d < 0 ? (~static_cast<std::uint64_t>(d) + 1) : static_cast<std::uint64_t>(d);
}

constexpr std::size_t kMinTrials = 1000;
constexpr int kMaxEnumerationLevel = 8;  // 2^(2j) <= 2^16
constexpr std::size_t kMulSamples = 1u << 16;

// Moments of a signed uniform variable over 2^bits consecutive integers
// starting at -2^(bits-1).
long double signed_uniform_var(int bits) {
  const long double m = std::ldexp(1.0L, bits);
  return (m * m - 1.0L) / 12.0L;
}

double mul_variance_enumerated(int j, int b) {
  // x = 2^j h + r with h uniform over 2^(b-j) values (mean -1/2) independent of r.
  const long double scale = std::ldexp(1.0L, j);
  const long double var_h = signed_uniform_var(b - j);
  const long double mean_h = -0.5L;
  const std::uint64_t count = 1ULL << j;
  long double sum_var = 0.0L, sum_mean = 0.0L, sum_mean_sq = 0.0L;
  for (std::uint64_t rx = 0; rx < count; ++rx) {
    for (std::uint64_t ry = 0; ry < count; ++ry) {
      const long double x = static_cast<long double>(rx), y = static_cast<long double>(ry);
      const long double mean = scale * mean_h * (x + y) + x * y;
      sum_var += scale * scale * var_h * (x * x + y * y);
      sum_mean += mean;
      sum_mean_sq += mean * mean;
    }
  }
  const long double n = static_cast<long double>(count * count);
  const long double mu = sum_mean / n;
  return static_cast<double>(sum_var / n + (sum_mean_sq / n - mu * mu));
}

double mul_variance_sampled(int j, int b, std::uint64_t seed) {
  Xoshiro256 rng(derive_seed(seed, (static_cast<std::uint64_t>(b) << 8) | static_cast<std::uint64_t>(j)));
  const std::uint64_t low = (1ULL << j) - 1;
  long double mean = 0.0L, m2 = 0.0L;
  for (std::size_t s = 0; s < kMulSamples; ++s) {
    const std::int64_t x = wrap_signed(rng.bits(b), b);
    const std::int64_t y = wrap_signed(rng.bits(b), b);
    const auto rx = static_cast<long double>(static_cast<std::uint64_t>(x) & low);
    const auto ry = static_cast<long double>(static_cast<std::uint64_t>(y) & low);
    const long double e = static_cast<long double>(x) * ry + static_cast<long double>(y) * rx - rx * ry;
    const long double delta = e - mean;
    mean += delta / static_cast<long double>(s + 1);
    m2 += delta * (e - mean);
  }
  return static_cast<double>(m2 / static_cast<long double>(kMulSamples - 1));
}

}  // namespace

const NodeProfile* ErrorProfile::find(std::string_view id) const {
  for (const NodeProfile& n : nodes)
    if (n.id == id) return &n;
  return nullptr;
}

double analytic_trunc_variance(NodeKind kind, int width, int j, int operand_bits, std::uint64_t seed) {
  if (!is_operator(kind)) throw ValidationError("truncation variance needs an add or mul node");
  if (width < 2 || width > 64) throw ValidationError(fmt::format("width {} outside [2, 64]", width));
  if (j < 0 || j > width)
    throw ValidationError(fmt::format("truncation level {} outside [0, {}]", j, width));
  if (operand_bits < 1 || operand_bits > 64)
    throw ValidationError(fmt::format("operand_bits {} outside [1, 64]", operand_bits));
  if (j == 0) return 0.0;
  if (kind == NodeKind::kAdd) return (std::ldexp(1.0, 2 * j) - 1.0) / 6.0;

  const int b = operand_bits;
  if (j >= b) {
    const long double second = signed_uniform_var(b) + 0.25L;  // E[x^2]
    return static_cast<double>(second * second - 0.0625L);
  }
  if (j <= kMaxEnumerationLevel) return mul_variance_enumerated(j, b);
  return mul_variance_sampled(j, b, seed);
}

void random_inputs(const CompiledDfg& dfg, std::uint64_t seed, std::size_t trial,
                   std::span<std::int64_t> out) {
  Xoshiro256 rng(derive_seed(seed, trial));
  const auto& inputs = dfg.inputs();
  for (std::size_t p = 0; p < inputs.size(); ++p) {
    const int w = dfg.node(inputs[p]).width;
    out[p] = wrap_signed(rng.bits(w), w);
  }
}

ErrorProfile estimate_profile(const CompiledDfg& dfg, std::size_t trials, std::uint64_t seed) {
  if (trials < kMinTrials)
    throw ValidationError(fmt::format("profile estimation needs at least {} trials, got {}", kMinTrials, trials));

  const auto& ops = dfg.operators();
  const auto& outs = dfg.outputs();
  std::vector<std::size_t> output_slot(dfg.size(), SIZE_MAX);
  for (std::size_t o = 0; o < outs.size(); ++o) output_slot[outs[o]] = o;

  // Outputs reached from each operator node.
  std::vector<std::vector<std::size_t>> reached(ops.size());
  for (std::size_t p = 0; p < ops.size(); ++p)
    for (std::size_t c : dfg.downstream(ops[p]))
      if (output_slot[c] != SIZE_MAX) reached[p].push_back(output_slot[c]);

  // Accumulator layout: per operator, per level, [node sum, one sum per reached output].
  std::vector<std::size_t> offset(ops.size() + 1, 0);
  for (std::size_t p = 0; p < ops.size(); ++p) {
    const std::size_t levels = static_cast<std::size_t>(dfg.node(ops[p]).width) + 1;
    offset[p + 1] = offset[p] + levels * (1 + reached[p].size());
  }

  const unsigned workers = std::max(1u, thread_count());
  const std::size_t chunks = std::min<std::size_t>(workers, trials);
  const std::size_t chunk_size = (trials + chunks - 1) / chunks;
  std::vector<std::vector<u128>> partial(chunks, std::vector<u128>(offset.back(), 0));

  parallel_for(chunks, [&](std::size_t cb, std::size_t ce) {
    std::vector<std::int64_t> in(dfg.inputs().size());
    std::vector<std::int64_t> exact(dfg.size()), work(dfg.size());
    for (std::size_t chunk = cb; chunk < ce; ++chunk) {
      auto& acc = partial[chunk];
      const std::size_t t_end = std::min(trials, (chunk + 1) * chunk_size);
      for (std::size_t t = chunk * chunk_size; t < t_end; ++t) {
        random_inputs(dfg, seed, t, in);
        dfg.evaluate(in, {}, exact);
        work = exact;
        for (std::size_t p = 0; p < ops.size(); ++p) {
          const std::size_t i = ops[p];
          const int width = dfg.node(i).width;
          const std::size_t stride = 1 + reached[p].size();
          const auto& cone = dfg.downstream(i);
          for (int j = 1; j <= width; ++j) {
            const std::int64_t approx = dfg.evaluate_node(i, j, exact);
            if (approx == exact[i]) continue;
            u128* slot = &acc[offset[p] + static_cast<std::size_t>(j) * stride];
            slot[0] += abs_diff_wrapped(exact[i], approx, width);
            work[i] = approx;
            for (std::size_t c : cone) work[c] = dfg.evaluate_node(c, 0, work);
            for (std::size_t r = 0; r < reached[p].size(); ++r) {
              const std::size_t o = outs[reached[p][r]];
              slot[1 + r] += abs_diff_wrapped(exact[o], work[o], dfg.node(o).width);
            }
            work[i] = exact[i];
            for (std::size_t c : cone) work[c] = exact[c];
          }
        }
      }
    }
  });

  std::vector<u128> total(offset.back(), 0);
  for (const auto& acc : partial)
    for (std::size_t x = 0; x < total.size(); ++x) total[x] += acc[x];

  ErrorProfile profile;
  profile.dfg_name = dfg.name();
  profile.dfg_hash = dfg_hash(dfg.source());
  profile.trials = trials;
  profile.seed = seed;
  for (std::size_t o : outs) profile.outputs.push_back(dfg.node(o).id);

  std::map<std::tuple<NodeKind, int, int>, double> variance_cache;
  const double denom = static_cast<double>(trials);
  for (std::size_t p = 0; p < ops.size(); ++p) {
    const DfgNode& node = dfg.node(ops[p]);
    NodeProfile np{node.id, node.kind, node.width, {}};
    const std::size_t stride = 1 + reached[p].size();
    for (int j = 0; j <= node.width; ++j) {
      LevelStats ls;
      ls.eps_out.assign(outs.size(), 0.0);
      ls.es.assign(outs.size(), 0.0);
      const u128* slot = &total[offset[p] + static_cast<std::size_t>(j) * stride];
      ls.eps_node = static_cast<double>(slot[0]) / denom;
      for (std::size_t r = 0; r < reached[p].size(); ++r) {
        const std::size_t o = reached[p][r];
        ls.eps_out[o] = static_cast<double>(slot[1 + r]) / denom;
        if (slot[0] != 0) ls.es[o] = static_cast<double>(slot[1 + r]) / static_cast<double>(slot[0]);
      }
      const auto key = std::make_tuple(node.kind, node.width, j);
      auto it = variance_cache.find(key);
      if (it == variance_cache.end())
        it = variance_cache.emplace(key, analytic_trunc_variance(node.kind, node.width, j, node.width, seed)).first;
      ls.v = it->second;
      if (j > 0 && slot[0] == 0)
        profile.annotations.push_back(
            fmt::format("{} j={}: truncation error never observed, ES set to 0", node.id, j));
      np.levels.push_back(std::move(ls));
    }
    if (reached[p].empty())
      profile.annotations.push_back(fmt::format("{}: no path to any output, ES set to 0", node.id));
    profile.nodes.push_back(std::move(np));
  }
  return profile;
}

std::vector<double> predict_output_variances(const ErrorProfile& profile, const TruncationPlan& plan) {
  std::vector<double> v(profile.outputs.size(), 0.0);
  for (const auto& [id, j] : plan.assignments) {
    const NodeProfile* np = profile.find(id);
    if (!np) throw InputError(fmt::format("profile has no entry for node '{}'", id));
    if (j < 0 || j >= static_cast<int>(np->levels.size()))
      throw InputError(fmt::format("profile has no level {} for node '{}'", j, id));
    const LevelStats& ls = np->levels[static_cast<std::size_t>(j)];
    for (std::size_t o = 0; o < v.size(); ++o) v[o] += ls.es[o] * ls.es[o] * ls.v;
  }
  return v;
}

double predict_output_variance(const ErrorProfile& profile, const TruncationPlan& plan) {
  double m = 0.0;
  for (double x : predict_output_variances(profile, plan)) m = std::max(m, x);
  return m;
}

std::vector<double> measure_output_variances(const CompiledDfg& dfg, const TruncationPlan& plan,
                                             std::size_t trials, std::uint64_t seed) {
  if (trials < kMinTrials)
    throw ValidationError(fmt::format("variance measurement needs at least {} trials, got {}", kMinTrials, trials));
  const std::vector<int> levels = dfg.levels_of(plan);
  const auto& outs = dfg.outputs();
  const std::size_t n_out = outs.size();
  std::vector<std::int64_t> diffs(trials * n_out);

  parallel_for(trials, [&](std::size_t begin, std::size_t end) {
    std::vector<std::int64_t> in(dfg.inputs().size());
    std::vector<std::int64_t> exact(dfg.size()), approx(dfg.size());
    for (std::size_t t = begin; t < end; ++t) {
      random_inputs(dfg, seed, t, in);
      dfg.evaluate(in, {}, exact);
      dfg.evaluate(in, levels, approx);
      for (std::size_t o = 0; o < n_out; ++o) {
        const std::size_t i = outs[o];
        diffs[t * n_out + o] = wrap_signed(
            static_cast<std::uint64_t>(exact[i]) - static_cast<std::uint64_t>(approx[i]), dfg.node(i).width);
      }
    }
  });

  std::vector<double> result(n_out);
  for (std::size_t o = 0; o < n_out; ++o) {
    long double sum = 0.0L;
    for (std::size_t t = 0; t < trials; ++t) sum += static_cast<long double>(diffs[t * n_out + o]);
    const long double mean = sum / static_cast<long double>(trials);
    long double ss = 0.0L;
    for (std::size_t t = 0; t < trials; ++t) {
      const long double d = static_cast<long double>(diffs[t * n_out + o]) - mean;
      ss += d * d;
    }
    result[o] = static_cast<double>(ss / static_cast<long double>(trials - 1));
  }
  return result;
}

double measure_output_variance(const CompiledDfg& dfg, const TruncationPlan& plan, std::size_t trials,
                               std::uint64_t seed) {
  double m = 0.0;
  for (double x : measure_output_variances(dfg, plan, trials, seed)) m = std::max(m, x);
  return m;
}

Json profile_to_json(const ErrorProfile& profile) {
  Json nodes = Json::array();
  for (const NodeProfile& n : profile.nodes) {
    Json levels = Json::array();
    for (const LevelStats& ls : n.levels)
      levels.push_back({{"v", ls.v}, {"eps_node", ls.eps_node}, {"eps_out", ls.eps_out}, {"es", ls.es}});
    nodes.push_back({{"id", n.id}, {"kind", std::string(kind_name(n.kind))}, {"width", n.width},
                     {"levels", std::move(levels)}});
  }
  Json doc;
  doc["dfg"] = profile.dfg_name;
  doc["dfg_hash"] = fmt::format("{:016x}", profile.dfg_hash);
  doc["trials"] = profile.trials;
  doc["seed"] = profile.seed;
  doc["outputs"] = profile.outputs;
  doc["nodes"] = std::move(nodes);
  doc["annotations"] = profile.annotations;
  return doc;
}

ErrorProfile profile_from_json(const Json& doc) {
  try {
    ErrorProfile p;
    p.dfg_name = doc.at("dfg").get<std::string>();
    p.dfg_hash = std::stoull(doc.at("dfg_hash").get<std::string>(), nullptr, 16);
    p.trials = doc.at("trials").get<std::size_t>();
    p.seed = doc.at("seed").get<std::uint64_t>();
    p.outputs = doc.at("outputs").get<std::vector<std::string>>();
    for (const Json& jn : doc.at("nodes")) {
      NodeProfile n;
      n.id = jn.at("id").get<std::string>();
      auto kind = parse_kind(jn.at("kind").get<std::string>());
      if (!kind || !is_operator(*kind)) throw InputError("profile node kind must be add or mul");
      n.kind = *kind;
      n.width = jn.at("width").get<int>();
      for (const Json& jl : jn.at("levels")) {
        LevelStats ls;
        ls.v = jl.at("v").get<double>();
        ls.eps_node = jl.at("eps_node").get<double>();
        ls.eps_out = jl.at("eps_out").get<std::vector<double>>();
        ls.es = jl.at("es").get<std::vector<double>>();
        n.levels.push_back(std::move(ls));
      }
      p.nodes.push_back(std::move(n));
    }
    p.annotations = doc.value("annotations", std::vector<std::string>{});
    return p;
  } catch (const Json::exception& e) {
    throw InputError(fmt::format("malformed profile document: {}", e.what()));
  } catch (const std::invalid_argument& e) {
    throw InputError(fmt::format("malformed profile document: {}", e.what()));
  }
}

void save_profile_cache(const std::filesystem::path& path, const ErrorProfile& profile) {
  write_text_file(path, profile_to_json(profile).dump() + "\n");
}

std::optional<ErrorProfile> load_profile_cache(const std::filesystem::path& path, const Dfg& dfg,
                                               std::size_t trials, std::uint64_t seed) {
  if (!std::filesystem::exists(path)) return std::nullopt;
  ErrorProfile p;
  try {
    p = profile_from_json(Json::parse(read_text_file(path)));
  } catch (const Json::exception&) {
    return std::nullopt;
  } catch (const InputError&) {
    return std::nullopt;
  }
  if (p.dfg_name != dfg.name || p.trials != trials || p.seed != seed || p.dfg_hash != dfg_hash(dfg))
    return std::nullopt;
  return p;
}

}  // namespace xrel
