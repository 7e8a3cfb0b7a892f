#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "xrel/dfg.hpp"
#include "xrel/errormodel.hpp"
#include "xrel/errors.hpp"
#include "xrel/faultsim.hpp"
#include "xrel/image.hpp"
#include "xrel/io.hpp"
#include "xrel/optimizer.hpp"
#include "xrel/parallel.hpp"
#include "xrel/sizing.hpp"

namespace xrel::cli {
namespace fs = std::filesystem;

namespace {

struct Globals {
  std::uint64_t seed = 1;
  std::string format = "csv";
  unsigned threads = 1;

  char sep() const { return format == "tsv" ? '\t' : ','; }
  std::string ext() const { return format == "tsv" ? ".tsv" : ".csv"; }
};

std::uint64_t default_seed() {
  if (const char* env = std::getenv("XREL_SEED")) {
    try {
      std::size_t used = 0;
      const std::string text(env);
      const auto v = std::stoull(text, &used, 0);
      if (used == text.size()) return v;
    } catch (const std::exception&) {
    }
    throw ValidationError(fmt::format("XREL_SEED='{}' is not an unsigned integer", env));
  }
  return 1;
}

void write_manifest(const fs::path& dir, const std::string& command, const std::vector<std::string>& args,
                    const Globals& g, Json params) {
  Json m;
  m["tool"] = "xrel";
  m["version"] = XREL_VERSION;
  m["command"] = command;
  m["args"] = args;
  m["seed"] = g.seed;
  m["format"] = g.format;
  m["parameters"] = std::move(params);
  write_text_file(dir / "manifest.json", m.dump(2) + "\n");
}

std::string csv_num(double v) { return fmt::format("{}", v); }

// size ---------------------------------------------------------------------

struct SizeArgs {
  int n = 16;
  std::optional<double> qdub;
  std::optional<double> mted;
  bool table = false;
  std::string out = "xrel_out";
};

void cmd_size(const SizeArgs& a, const Globals& g, const std::vector<std::string>& args, std::ostream& out) {
  Json params{{"n", a.n}, {"table", a.table}, {"out", a.out}};
  if (a.table) {
    const auto& qs = reference_q_list();
    const auto rows = size_table(a.n, qs);
    const char s = g.sep();
    std::string text = fmt::format("q_dubv{0}mted{0}k{0}v_ub\n", s);
    for (std::size_t i = 0; i < rows.size(); ++i)
      text += fmt::format("{1}{0}{2}{0}{3}{0}{4:.2E}\n", s, qs[i], rows[i].mted, rows[i].k, rows[i].v_ub);
    out << text;
    write_text_file(fs::path(a.out) / ("size_table" + g.ext()), text);
  } else {
    if (!a.qdub && !a.mted) throw ValidationError("size needs --qdub or --mted (or --table)");
    QualitySpec spec{a.n, a.qdub.value_or(0.0), a.mted};
    const SizingResult r = size_voter(spec);
    if (a.qdub) params["qdub"] = *a.qdub;
    if (a.mted) params["mted"] = *a.mted;
    const std::string line = fmt::format("n={} mted={:g} k={} v_ub={:.2E}\n", r.n_bits, r.mted, r.k, r.v_ub);
    out << line;
    write_text_file(fs::path(a.out) / "size.txt", line);
  }
  write_manifest(a.out, "size", args, g, std::move(params));
}

// design -------------------------------------------------------------------

struct DesignArgs {
  std::string dfg;
  int n = 16;
  std::optional<int> k;
  std::optional<double> qdub;
  std::size_t trials = 100000;
  std::string cost_model;
  std::string profile_cache;
  std::string out = "xrel_out";
};

void cmd_design(const DesignArgs& a, const Globals& g, const std::vector<std::string>& args, std::ostream& out) {
  if (a.k.has_value() == a.qdub.has_value()) throw ValidationError("design needs exactly one of --k or --qdub");
  const int k = a.k ? *a.k : size_voter(QualitySpec{a.n, *a.qdub, std::nullopt}).k;
  const double v_ub = variance_upper_bound(a.n, k);
  const Dfg source = load_dfg(a.dfg);
  const CompiledDfg dfg(source);
  const CostModel model = a.cost_model.empty() ? CostModel{} : load_cost_model(a.cost_model);

  std::optional<ErrorProfile> profile;
  if (!a.profile_cache.empty()) profile = load_profile_cache(a.profile_cache, source, a.trials, g.seed);
  if (!profile) {
    profile = estimate_profile(dfg, a.trials, g.seed);
    if (!a.profile_cache.empty()) save_profile_cache(a.profile_cache, *profile);
  }

  SolveResult r = solve_plan(dfg, *profile, model, v_ub);
  r.plan.k = k;
  const fs::path dir(a.out);
  save_plan(dir / "plan.json", r.plan);
  std::string log = solve_log_csv(dfg, *profile, model, r);
  if (g.sep() != ',') std::replace(log.begin(), log.end(), ',', g.sep());
  write_text_file(dir / ("solve_log" + g.ext()), log);

  Json params{{"dfg", a.dfg}, {"n", a.n}, {"k", k}, {"trials", a.trials}, {"out", a.out}};
  if (a.qdub) params["qdub"] = *a.qdub;
  if (!a.cost_model.empty()) params["cost_model"] = a.cost_model;
  write_manifest(dir, "design", args, g, std::move(params));
  out << fmt::format("dfg={} k={} v_ub={:.6g} objective={:g} predicted_v={:.6g} optimal={}\n", r.plan.dfg, k,
                     v_ub, r.objective, r.predicted_v, r.optimal);
  for (const auto& note : profile->annotations) out << "note: " << note << "\n";
}

// simulate -----------------------------------------------------------------

struct SimulateArgs {
  std::string mode = "voter";
  std::vector<double> pf{0.01};
  std::vector<int> k{4};
  int reps = 1;
  std::vector<std::string> voters;
  std::size_t words = 10000;
  int width = 8;
  std::string image;
  int image_size = 64;
  bool save_images = false;
  int taps = 8;
  std::size_t samples = 10000;
  std::string out = "xrel_out";
};

std::vector<VoterKind> parse_voters(const std::vector<std::string>& names) {
  if (names.empty()) return all_voters();
  std::vector<VoterKind> v;
  for (const auto& n : names) {
    auto kind = parse_voter(n);
    if (!kind) throw ValidationError(fmt::format("unknown voter '{}'", n));
    v.push_back(*kind);
  }
  return v;
}

void cmd_simulate(const SimulateArgs& a, const Globals& g, const std::vector<std::string>& args,
                  std::ostream& out) {
  const auto voters = parse_voters(a.voters);
  const fs::path dir(a.out);
  std::vector<CampaignReport> reports;
  Json params{{"mode", a.mode}, {"pf", a.pf}, {"k", a.k}, {"reps", a.reps}, {"out", a.out}};
  std::vector<std::string> names;
  for (VoterKind v : voters) names.emplace_back(voter_name(v));
  params["voters"] = names;

  if (a.mode == "voter") {
    params["words"] = a.words;
    params["width"] = a.width;
    if (a.width < 2 || a.width > 64) throw ValidationError("--width must be in [2, 64]");
    const auto exact = random_words(a.words, a.width, g.seed);
    for (double pf : a.pf)
      for (int k : a.k) reports.push_back(run_voter_campaign(exact, {pf, g.seed, a.reps}, voters, k));
  } else if (a.mode == "image") {
    Image img;
    if (a.image.empty()) {
      img = synthetic_image(a.image_size, a.image_size, 3, g.seed);
      write_pnm(dir / "input.ppm", img);
      params["image_size"] = a.image_size;
    } else {
      img = read_pnm(a.image);
      params["image"] = a.image;
    }
    for (double pf : a.pf)
      for (int k : a.k) {
        const NoiseConfig cfg{pf, g.seed, a.reps};
        reports.push_back(image_experiment(img, cfg, k, voters));
        if (a.save_images) {
          const auto images = image_outputs(img, cfg, k, voters, 0);
          for (std::size_t v = 0; v < voters.size(); ++v)
            write_pnm(dir / fmt::format("{}_pf{}_k{}{}", voter_name(voters[v]), pf, k,
                                        img.channels == 1 ? ".pgm" : ".ppm"),
                      images[v]);
        }
      }
  } else if (a.mode == "fir") {
    params["taps"] = a.taps;
    params["samples"] = a.samples;
    for (double pf : a.pf)
      for (int k : a.k) reports.push_back(fir_experiment(a.taps, {pf, g.seed, a.reps}, k, a.samples, voters));
  } else {
    throw ValidationError(fmt::format("unknown mode '{}'", a.mode));
  }

  const std::string table = report_table(reports, g.sep());
  write_text_file(dir / ("report" + g.ext()), table);
  write_text_file(dir / ("report_long" + g.ext()), report_long(reports, g.sep()));
  write_manifest(dir, "simulate", args, g, std::move(params));
  out << table;
}

// bench --------------------------------------------------------------------

struct BenchArgs {
  std::string name;
  int width = 16;
  std::string out;
};

void cmd_bench(const BenchArgs& a, const Globals& g, const std::vector<std::string>& args, std::ostream& out) {
  const auto& names = benchmark_names();
  if (std::find(names.begin(), names.end(), a.name) == names.end())
    throw ValidationError(fmt::format("unknown benchmark '{}' (known: fir8, fir64, mm8, smt3)", a.name));
  const Dfg dfg = build_benchmark(a.name, a.width);
  const fs::path file = a.out.empty() ? fs::path("xrel_out") / (a.name + ".json") : fs::path(a.out);
  save_dfg(file, dfg);
  const fs::path dir = file.has_parent_path() ? file.parent_path() : fs::path(".");
  write_manifest(dir, "bench", args, g, Json{{"name", a.name}, {"width", a.width}, {"out", file.string()}});
  out << fmt::format("{} operators={} nodes={}\n", a.name, operator_count(dfg), dfg.nodes.size());
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        std::optional<std::uint64_t> seed_override) {
  CLI::App app{"xrel: approximate TMR voter sizing, truncation and fault simulation", "xrel"};
  app.fallthrough();
  app.require_subcommand(1);
  app.set_version_flag("--version", XREL_VERSION);

  Globals g;
  std::optional<std::uint64_t> seed;
  app.add_option("--seed", seed, "Random seed (default: $XREL_SEED or 1)");
  app.add_option("--format", g.format, "Table format")->check(CLI::IsMember({"csv", "tsv"}));
  app.add_option("--threads", g.threads, "Worker threads, 0 = all cores")->default_val(1);

  SizeArgs size;
  auto* sc = app.add_subcommand("size", "Size the voter for a quality bound");
  sc->add_option("--n", size.n, "Word width in bits")->required();
  auto* q = sc->add_option("--qdub", size.qdub, "Quality degradation upper bound, percent");
  auto* m = sc->add_option("--mted", size.mted, "Maximum tolerable error distance");
  q->excludes(m);
  sc->add_flag("--table", size.table, "Emit the 12-row reference table");
  sc->add_option("--out", size.out, "Output directory");

  DesignArgs design;
  auto* dc = app.add_subcommand("design", "Optimal truncation plan for a DFG");
  dc->add_option("--dfg", design.dfg, "DFG JSON file")->required();
  dc->add_option("--n", design.n, "Voter word width");
  auto* dk = dc->add_option("--k", design.k, "Relaxed LSBs");
  auto* dq = dc->add_option("--qdub", design.qdub, "Quality bound, percent");
  dk->excludes(dq);
  dc->add_option("--trials", design.trials, "Monte Carlo trials for the error profile");
  dc->add_option("--cost-model", design.cost_model, "Cost model JSON");
  dc->add_option("--profile-cache", design.profile_cache, "Profile cache file");
  dc->add_option("--out", design.out, "Output directory");

  SimulateArgs sim;
  auto* simc = app.add_subcommand("simulate", "Fault-injection campaigns");
  simc->add_option("--mode", sim.mode)->check(CLI::IsMember({"voter", "image", "fir"}));
  simc->add_option("--pf", sim.pf, "Bit flip probabilities")->delimiter(',');
  simc->add_option("--k", sim.k, "Relaxed LSB counts")->delimiter(',');
  simc->add_option("--reps", sim.reps, "Repetitions");
  simc->add_option("--voters", sim.voters, "Voters (tmr,bit_tmr,xrel,idmr,itdmr)")->delimiter(',');
  simc->add_option("--words", sim.words, "Words per repetition (voter mode)");
  simc->add_option("--width", sim.width, "Word width (voter mode)");
  simc->add_option("--image", sim.image, "Input PGM/PPM (image mode)");
  simc->add_option("--image-size", sim.image_size, "Synthetic image side (image mode)");
  simc->add_flag("--save-images", sim.save_images, "Write voted images of repetition 0");
  simc->add_option("--taps", sim.taps, "FIR taps (fir mode)")->check(CLI::IsMember({8, 64}));
  simc->add_option("--samples", sim.samples, "FIR output samples (fir mode)");
  simc->add_option("--out", sim.out, "Output directory");

  BenchArgs bench;
  auto* bc = app.add_subcommand("bench", "Generate a benchmark DFG");
  bc->add_option("--name", bench.name, "fir8, fir64, mm8 or smt3")->required();
  bc->add_option("--width", bench.width, "Node width");
  bc->add_option("--out", bench.out, "DFG file to write");

  std::string manifest;
  auto* rc = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
  rc->add_option("manifest", manifest, "manifest.json")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::Success& e) {
    std::ostringstream os;
    const int code = app.exit(e, os, os);
    out << os.str();
    return code;
  } catch (const CLI::ParseError& e) {
    std::ostringstream os;
    app.exit(e, os, os);
    err << os.str();
    return kUsage;
  }

  try {
    g.seed = seed ? *seed : seed_override ? *seed_override : default_seed();
    set_thread_count(g.threads);
    if (sc->parsed()) cmd_size(size, g, args, out);
    else if (dc->parsed()) cmd_design(design, g, args, out);
    else if (simc->parsed()) cmd_simulate(sim, g, args, out);
    else if (bc->parsed()) cmd_bench(bench, g, args, out);
    else if (rc->parsed()) {
      Json doc;
      try {
        doc = Json::parse(read_text_file(manifest));
      } catch (const IoError& e) {
        throw InputError(e.what());
      } catch (const Json::exception& e) {
        throw InputError(fmt::format("'{}' is not a valid manifest: {}", manifest, e.what()));
      }
      std::vector<std::string> recorded;
      std::uint64_t recorded_seed = 0;
      try {
        recorded = doc.at("args").get<std::vector<std::string>>();
        recorded_seed = doc.at("seed").get<std::uint64_t>();
      } catch (const Json::exception& e) {
        throw InputError(fmt::format("manifest '{}' lacks args or seed: {}", manifest, e.what()));
      }
      if (!recorded.empty() && recorded.front() == "replay") throw InputError("manifest records a replay");
      return run(recorded, out, err, recorded_seed);
    }
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kInputData;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  }
  return kOk;
}

}  // namespace xrel::cli
