#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "xrel/dfg.hpp"
#include "xrel/errormodel.hpp"
#include "xrel/errors.hpp"
#include "xrel/faultsim.hpp"
#include "xrel/io.hpp"
#include "xrel/metrics.hpp"
#include "xrel/optimizer.hpp"
#include "xrel/rng.hpp"
#include "xrel/sizing.hpp"
#include "xrel/voters.hpp"

namespace py = pybind11;
using namespace xrel;

namespace {

VoterKind voter_or_throw(const std::string& name) {
  const auto kind = parse_voter(name);
  if (!kind) throw ValidationError("unknown voter: " + name);
  return *kind;
}

py::dict metrics_dict(const AggregateMetrics& m) {
  py::dict d;
  d["er"] = m.er;
  d["mean_ed"] = m.mean_ed;
  d["mred"] = m.mred;
  d["variance"] = m.variance;
  d["mred_skipped"] = m.mred_skipped;
  d["samples"] = m.samples;
  return d;
}

py::dict report_dict(const CampaignReport& r) {
  py::dict d;
  d["mode"] = r.mode;
  d["p_f"] = r.p_f;
  d["k"] = r.k;
  d["seed"] = r.seed;
  d["width"] = r.width;
  d["repetitions"] = r.repetitions;
  d["words"] = r.words;
  d["mse_ratio"] = r.mse_ratio;
  py::dict voters;
  for (const auto& v : r.voters) {
    py::dict e = metrics_dict(v.metrics);
    e["mse"] = v.mse;
    e["psnr"] = v.psnr;
    e["mssim"] = v.mssim;
    e["false_positives"] = v.false_positives;
    e["error_signals"] = v.error_signals;
    voters[py::str(std::string(voter_name(v.voter)))] = e;
  }
  d["voters"] = voters;
  return d;
}

SampleSet sample_set(const std::vector<std::int64_t>& exact, const std::vector<std::int64_t>& approx, int width) {
  if (exact.size() != approx.size()) throw ValidationError("exact and approx lengths differ");
  SampleSet s;
  s.width = width;
  for (std::size_t i = 0; i < exact.size(); ++i) s.pairs.push_back({exact[i], approx[i]});
  return s;
}

std::vector<VoterKind> voter_list(const std::vector<std::string>& names) {
  if (names.empty()) return all_voters();
  std::vector<VoterKind> out;
  for (const auto& n : names) out.push_back(voter_or_throw(n));
  return out;
}

}  // namespace

PYBIND11_MODULE(_xrel, m) {
  m.doc() = "Approximate-voter sizing, truncation planning and fault simulation";
  m.attr("__version__") = XREL_VERSION;

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  m.def("compute_mted",
        [](int n_bits, double q, std::optional<double> mted) { return compute_mted({n_bits, q, mted}); },
        py::arg("n_bits"), py::arg("q_dubv_percent"), py::arg("mted") = py::none());
  m.def("compute_k", &compute_k, py::arg("mted"), py::arg("n_bits"));
  m.def("variance_upper_bound", &variance_upper_bound, py::arg("n_bits"), py::arg("k"));
  m.def(
      "size_voter",
      [](int n_bits, double q, std::optional<double> mted) {
        const SizingResult r = size_voter({n_bits, q, mted});
        py::dict d;
        d["n_bits"] = r.n_bits;
        d["mted"] = r.mted;
        d["k"] = r.k;
        d["v_ub"] = r.v_ub;
        return d;
      },
      py::arg("n_bits"), py::arg("q_dubv_percent") = 0.0, py::arg("mted") = py::none());

  m.def(
      "vote",
      [](const std::string& voter, std::uint64_t a, std::uint64_t b, std::uint64_t c, int width, int k,
         std::uint64_t threshold) -> py::object {
        const VoteOutcome o = vote(voter_or_throw(voter), Word(a, width), Word(b, width), Word(c, width), k, threshold);
        if (!o.value) return py::none();
        return py::int_(o.value->bits());
      },
      py::arg("voter"), py::arg("a"), py::arg("b"), py::arg("c"), py::arg("width"), py::arg("k"),
      py::arg("threshold") = 0, "Voted word, or None when the voter signals an error.");
  m.def("voters", [] {
    std::vector<std::string> names;
    for (auto v : all_voters()) names.emplace_back(voter_name(v));
    return names;
  });

  m.def("benchmark_names", &benchmark_names);
  m.def(
      "build_benchmark", [](const std::string& name, int width) { return dfg_to_json(build_benchmark(name, width)).dump(); },
      py::arg("name"), py::arg("width") = 16, "DFG of a named benchmark as a JSON string.");
  m.def(
      "validate_dfg", [](const std::string& dfg_json) { return validate(dfg_from_json(Json::parse(dfg_json))); },
      py::arg("dfg_json"));
  m.def(
      "evaluate",
      [](const std::string& dfg_json, const std::map<std::string, std::int64_t>& inputs,
         std::optional<std::string> plan_json) {
        const CompiledDfg g(dfg_from_json(Json::parse(dfg_json)));
        const TruncationPlan plan = plan_json ? plan_from_json(Json::parse(*plan_json)) : exact_plan(g);
        return eval(g, plan, inputs);
      },
      py::arg("dfg_json"), py::arg("inputs"), py::arg("plan_json") = py::none());

  m.def(
      "design",
      [](const std::string& dfg_json, double v_ub, std::size_t trials, std::uint64_t seed) {
        const CompiledDfg g(dfg_from_json(Json::parse(dfg_json)));
        ErrorProfile profile;
        SolveResult r;
        {
          py::gil_scoped_release release;
          profile = estimate_profile(g, trials, seed);
          r = solve_plan(g, profile, CostModel{}, v_ub);
        }
        py::dict d;
        d["plan"] = plan_to_json(r.plan).dump();
        d["objective"] = r.objective;
        d["predicted_v"] = r.predicted_v;
        d["budget"] = r.budget;
        d["optimal"] = r.optimal;
        return d;
      },
      py::arg("dfg_json"), py::arg("v_ub"), py::arg("trials") = 100000, py::arg("seed") = 1,
      "Estimates the error profile and solves for the cheapest plan within v_ub.");
  m.def(
      "measure_output_variance",
      [](const std::string& dfg_json, const std::string& plan_json, std::size_t trials, std::uint64_t seed) {
        const CompiledDfg g(dfg_from_json(Json::parse(dfg_json)));
        const TruncationPlan plan = plan_from_json(Json::parse(plan_json));
        py::gil_scoped_release release;
        return measure_output_variance(g, plan, trials, seed);
      },
      py::arg("dfg_json"), py::arg("plan_json"), py::arg("trials") = 100000, py::arg("seed") = 1);

  m.def(
      "metrics",
      [](const std::vector<std::int64_t>& exact, const std::vector<std::int64_t>& approx, int width) {
        const SampleSet s = sample_set(exact, approx, width);
        py::dict d = metrics_dict(aggregate_metrics(s));
        d["mse"] = mse(s);
        d["psnr"] = psnr(s);
        return d;
      },
      py::arg("exact"), py::arg("approx"), py::arg("width") = 8);
  m.def("mse_ratio_from_mse", &mse_ratio_from_mse, py::arg("mse_xrel"), py::arg("mse_typical"));

  m.def(
      "inject_noise",
      [](std::uint64_t bits, int width, double p_f, std::uint64_t seed, std::uint64_t stream) {
        return inject_noise(Word(bits, width), NoiseConfig{p_f, seed, 1}, stream).bits();
      },
      py::arg("word"), py::arg("width"), py::arg("p_f"), py::arg("seed"), py::arg("stream") = 0);
  m.def(
      "random_words",
      [](std::size_t count, int width, std::uint64_t seed) {
        std::vector<std::uint64_t> out;
        for (const Word& w : random_words(count, width, seed)) out.push_back(w.bits());
        return out;
      },
      py::arg("count"), py::arg("width"), py::arg("seed"));
  m.def(
      "run_voter_campaign",
      [](const std::vector<std::uint64_t>& bits, int width, double p_f, int k, std::uint64_t seed, int repetitions,
         const std::vector<std::string>& voters) {
        const auto kinds = voter_list(voters);
        std::vector<Word> exact;
        for (auto b : bits) exact.emplace_back(b, width);
        CampaignReport r;
        {
          py::gil_scoped_release release;
          r = run_voter_campaign(exact, NoiseConfig{p_f, seed, repetitions}, kinds, k);
        }
        return report_dict(r);
      },
      py::arg("exact"), py::arg("width"), py::arg("p_f"), py::arg("k"), py::arg("seed") = 1, py::arg("repetitions") = 1,
      py::arg("voters") = std::vector<std::string>{});
  m.def(
      "fir_experiment",
      [](int taps, double p_f, int k, std::size_t n_samples, std::uint64_t seed, int repetitions,
         const std::vector<std::string>& voters) {
        const auto kinds = voter_list(voters);
        CampaignReport r;
        {
          py::gil_scoped_release release;
          r = fir_experiment(taps, NoiseConfig{p_f, seed, repetitions}, k, n_samples, kinds);
        }
        return report_dict(r);
      },
      py::arg("taps"), py::arg("p_f"), py::arg("k"), py::arg("n_samples") = 10000, py::arg("seed") = 1,
      py::arg("repetitions") = 1, py::arg("voters") = std::vector<std::string>{});
}
