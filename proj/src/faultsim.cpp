#include "xrel/faultsim.hpp"

#include <array>
#include <cmath>
#include <limits>

#include <fmt/core.h>

#include "xrel/dfg.hpp"
#include "xrel/errors.hpp"
#include "xrel/parallel.hpp"

namespace xrel {

void validate(const NoiseConfig& cfg) {
  if (!(cfg.p_f >= 0.0 && cfg.p_f <= 1.0))
    throw ValidationError(fmt::format("flip probability must be in [0, 1], got {}", cfg.p_f));
  if (cfg.repetitions < 1)
    throw ValidationError(fmt::format("repetitions must be >= 1, got {}", cfg.repetitions));
}

Word inject_noise(Word w, double p_f, Xoshiro256& rng) {
  std::uint64_t flips = 0;
  for (int b = 0; b < w.width(); ++b)
    if (rng.uniform_open_closed() <= p_f) flips |= std::uint64_t{1} << b;
  return Word(w.bits() ^ flips, w.width());
}

Word inject_noise(Word w, const NoiseConfig& cfg, std::uint64_t stream) {
  validate(cfg);
  Xoshiro256 rng(derive_seed(cfg.seed, stream));
  return inject_noise(w, cfg.p_f, rng);
}

std::uint64_t repetition_seed(std::uint64_t seed, int rep) {
  return derive_seed(seed, static_cast<std::uint64_t>(rep));
}

VoteOutcome vote(VoterKind kind, Word a, Word b, Word c, int k, std::uint64_t threshold) {
  const std::uint64_t t = threshold ? threshold : default_threshold(k);
  switch (kind) {
    case VoterKind::kWordTmr: return vote_word_tmr(a, b, c);
    case VoterKind::kBitTmr: return VoteOutcome::ok(vote_bit_tmr(a, b, c));
    case VoterKind::kXrel: return vote_xrel(a, b, c, k);
    case VoterKind::kIdmr: return vote_idmr(a, b, k, t);
    case VoterKind::kItdmr: return vote_itdmr(a, b, c, k, t);
  }
  throw ValidationError("unknown voter");
}

const std::vector<VoterKind>& all_voters() {
  static const std::vector<VoterKind> v{VoterKind::kWordTmr, VoterKind::kBitTmr, VoterKind::kXrel,
                                        VoterKind::kIdmr, VoterKind::kItdmr};
  return v;
}

const VoterReport* CampaignReport::find(VoterKind kind) const {
  for (const VoterReport& r : voters)
    if (r.voter == kind) return &r;
  return nullptr;
}

namespace {

struct Outcome {
  std::uint64_t bits = 0;
  bool error = false;
};

struct Accumulator {
  SampleSet samples;
  std::uint64_t false_positives = 0;
  std::uint64_t error_signals = 0;
};

std::int64_t numeric(std::uint64_t bits, int width, bool signed_values) {
  return signed_values ? Word(bits, width).to_signed() : static_cast<std::int64_t>(bits);
}

// One repetition: outcomes[v * n + i] for voter v and word i.
std::vector<Outcome> run_repetition(std::span<const Word> exact, double p_f, std::uint64_t rep_seed,
                                    const std::vector<VoterKind>& voters, int k,
                                    std::vector<std::uint8_t>& violations) {
  const std::size_t n = exact.size();
  std::vector<Outcome> out(voters.size() * n);
  violations.assign(n, 0);
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      std::array<Word, 3> copy;
      for (std::size_t c = 0; c < 3; ++c) {
        Xoshiro256 rng(derive_seed(rep_seed, 3 * i + c));
        copy[c] = inject_noise(exact[i], p_f, rng);
      }
      for (std::size_t v = 0; v < voters.size(); ++v) {
        const VoteOutcome o = vote(voters[v], copy[0], copy[1], copy[2], k);
        out[v * n + i] = {o.bits_or_zero(), o.error_flag};
        if (voters[v] == VoterKind::kXrel && o.value && o.value->upper(k) != exact[i].upper(k)) {
          // A wrong agreed slice needs two copies sharing it.
          const std::uint64_t u = o.value->upper(k);
          int agreeing = 0;
          for (const Word& w : copy) agreeing += w.upper(k) == u;
          if (agreeing < 2) violations[i] = 1;
        }
      }
    }
  });
  return out;
}

CampaignReport assemble(const std::string& mode, std::span<const Word> exact, const NoiseConfig& cfg,
                        const std::vector<VoterKind>& voters, int k,
                        const std::vector<Accumulator>& acc, std::uint64_t violations) {
  CampaignReport r;
  r.mode = mode;
  r.p_f = cfg.p_f;
  r.k = k;
  r.seed = cfg.seed;
  r.width = exact.front().width();
  r.repetitions = cfg.repetitions;
  r.words = exact.size();
  r.invariant_violations = violations;
  for (std::size_t v = 0; v < voters.size(); ++v) {
    VoterReport vr;
    vr.voter = voters[v];
    vr.metrics = aggregate_metrics(acc[v].samples);
    vr.mse = mse(acc[v].samples);
    vr.psnr = psnr(acc[v].samples);
    vr.mssim = std::numeric_limits<double>::quiet_NaN();
    vr.false_positives = acc[v].false_positives;
    vr.error_signals = acc[v].error_signals;
    r.voters.push_back(vr);
  }
  const VoterReport* x = r.find(VoterKind::kXrel);
  const VoterReport* t = r.find(VoterKind::kWordTmr);
  r.mse_ratio = x && t ? mse_ratio_from_mse(x->mse, t->mse) : std::numeric_limits<double>::quiet_NaN();
  return r;
}

void check_campaign(std::span<const Word> exact, const NoiseConfig& cfg, const std::vector<VoterKind>& voters,
                    int k) {
  validate(cfg);
  if (exact.empty()) throw ValidationError("exact stream is empty");
  if (voters.empty()) throw ValidationError("no voters selected");
  const int width = exact.front().width();
  for (const Word& w : exact)
    if (w.width() != width) throw ValidationError("exact stream mixes word widths");
  if (k < 0 || k >= width) throw ValidationError(fmt::format("k must be in [0, {}], got {}", width - 1, k));
}

// Runs every repetition, pooling samples; `per_rep` sees each repetition's outcomes.
template <typename PerRep>
CampaignReport campaign(const std::string& mode, std::span<const Word> exact, const NoiseConfig& cfg,
                        const std::vector<VoterKind>& voters, int k, bool signed_values, PerRep&& per_rep) {
  check_campaign(exact, cfg, voters, k);
  const std::size_t n = exact.size();
  const int width = exact.front().width();
  std::vector<Accumulator> acc(voters.size());
  for (auto& a : acc) {
    a.samples.width = width;
    a.samples.pairs.reserve(n * static_cast<std::size_t>(cfg.repetitions));
  }
  std::uint64_t violations = 0;
  std::vector<std::uint8_t> flags;
  for (int rep = 0; rep < cfg.repetitions; ++rep) {
    const auto out = run_repetition(exact, cfg.p_f, repetition_seed(cfg.seed, rep), voters, k, flags);
    for (std::uint8_t f : flags) violations += f;
    for (std::size_t v = 0; v < voters.size(); ++v)
      for (std::size_t i = 0; i < n; ++i) {
        const Outcome& o = out[v * n + i];
        acc[v].samples.pairs.push_back(
            {numeric(exact[i].bits(), width, signed_values), numeric(o.bits, width, signed_values)});
        if (o.error) ++acc[v].error_signals;
        else if (Word(o.bits, width).upper(k) != exact[i].upper(k)) ++acc[v].false_positives;
      }
    per_rep(rep, out);
  }
  return assemble(mode, exact, cfg, voters, k, acc, violations);
}

}  // namespace

CampaignReport run_voter_campaign(std::span<const Word> exact, const NoiseConfig& cfg,
                                  const std::vector<VoterKind>& voters, int k, bool signed_values) {
  return campaign("voter", exact, cfg, voters, k, signed_values, [](int, const std::vector<Outcome>&) {});
}

std::vector<Word> random_words(std::size_t count, int width, std::uint64_t seed) {
  Xoshiro256 rng(derive_seed(seed, ~std::uint64_t{0}));
  std::vector<Word> words;
  words.reserve(count);
  for (std::size_t i = 0; i < count; ++i) words.emplace_back(rng.bits(width), width);
  return words;
}

namespace {

std::vector<Word> image_words(const Image& img) {
  validate(img);
  std::vector<Word> words;
  words.reserve(img.data.size());
  for (std::uint8_t b : img.data) words.emplace_back(b, 8);
  return words;
}

Image voted_image(const Image& img, const std::vector<Outcome>& out, std::size_t v) {
  Image res = img;
  const std::size_t n = img.data.size();
  for (std::size_t i = 0; i < n; ++i) res.data[i] = static_cast<std::uint8_t>(out[v * n + i].bits);
  return res;
}

}  // namespace

CampaignReport image_experiment(const Image& img, const NoiseConfig& cfg, int k,
                                const std::vector<VoterKind>& voters) {
  const std::vector<Word> words = image_words(img);
  std::vector<std::vector<double>> ssim(voters.size());
  CampaignReport r = campaign("image", words, cfg, voters, k, false, [&](int, const std::vector<Outcome>& out) {
    for (std::size_t v = 0; v < voters.size(); ++v) ssim[v].push_back(mssim(img, voted_image(img, out, v)));
  });
  for (std::size_t v = 0; v < voters.size(); ++v) {
    double sum = 0.0;
    for (double s : ssim[v]) sum += s;
    r.voters[v].mssim = sum / static_cast<double>(ssim[v].size());
  }
  return r;
}

std::vector<Image> image_outputs(const Image& img, const NoiseConfig& cfg, int k,
                                 const std::vector<VoterKind>& voters, int rep) {
  const std::vector<Word> words = image_words(img);
  check_campaign(words, cfg, voters, k);
  std::vector<std::uint8_t> flags;
  const auto out = run_repetition(words, cfg.p_f, repetition_seed(cfg.seed, rep), voters, k, flags);
  std::vector<Image> images;
  for (std::size_t v = 0; v < voters.size(); ++v) images.push_back(voted_image(img, out, v));
  return images;
}

std::vector<Word> fir_reference_stream(int taps, std::size_t n_samples, std::uint64_t seed) {
  if (taps != 8 && taps != 64) throw ValidationError(fmt::format("FIR taps must be 8 or 64, got {}", taps));
  if (n_samples == 0) throw ValidationError("FIR experiment needs at least one sample");
  const CompiledDfg dfg(build_fir(taps, kFirWidth, kFirFracBits));
  const std::size_t t = static_cast<std::size_t>(taps);
  Xoshiro256 rng(derive_seed(seed, ~std::uint64_t{0} - 1));
  const double half = std::ldexp(1.0, kFirFracBits - 1);
  std::vector<std::int64_t> signal(n_samples + t - 1);
  for (auto& s : signal) s = std::llround((rng.uniform_open_closed() * 2.0 - 1.0) * half);

  std::vector<Word> out(n_samples);
  const std::size_t y = dfg.outputs().front();
  parallel_for(n_samples, [&](std::size_t begin, std::size_t end) {
    std::vector<std::int64_t> in(t), values(dfg.size());
    for (std::size_t n = begin; n < end; ++n) {
      for (std::size_t i = 0; i < t; ++i) in[i] = signal[n + t - 1 - i];
      dfg.evaluate(in, {}, values);
      out[n] = Word::from_signed(values[y], kFirWidth);
    }
  });
  return out;
}

CampaignReport fir_experiment(int taps, const NoiseConfig& cfg, int k, std::size_t n_samples,
                              const std::vector<VoterKind>& voters) {
  validate(cfg);
  const std::vector<Word> exact = fir_reference_stream(taps, n_samples, cfg.seed);
  CampaignReport r = campaign(fmt::format("fir{}", taps), exact, cfg, voters, k, true,
                              [](int, const std::vector<Outcome>&) {});
  return r;
}

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{}", v);
}

}  // namespace

std::string report_table(const std::vector<CampaignReport>& reports, char sep) {
  const std::string s(1, sep);
  std::string out = fmt::format("voter{0}p_f{0}k{0}seed{0}ER{0}mean_ED{0}MRED{0}variance{0}PSNR{0}MSSIM{0}"
                                "MSE_ratio{0}false_positives{0}error_signals\n",
                                s);
  for (const CampaignReport& r : reports)
    for (const VoterReport& v : r.voters) {
      out += fmt::format("{1}{0}{2}{0}{3}{0}{4}{0}{5}{0}{6}{0}{7}{0}{8}{0}{9}{0}{10}{0}{11}{0}{12}{0}{13}\n", s,
                         voter_name(v.voter), num(r.p_f), r.k, r.seed, num(v.metrics.er), num(v.metrics.mean_ed),
                         num(v.metrics.mred), num(v.metrics.variance), num(v.psnr), num(v.mssim),
                         num(r.mse_ratio), v.false_positives, v.error_signals);
    }
  return out;
}

std::string report_long(const std::vector<CampaignReport>& reports, char sep) {
  const std::string s(1, sep);
  std::string out = fmt::format("mode{0}voter{0}p_f{0}k{0}seed{0}metric{0}value\n", s);
  for (const CampaignReport& r : reports)
    for (const VoterReport& v : r.voters) {
      const std::pair<const char*, std::string> rows[] = {
          {"ER", num(v.metrics.er)},
          {"mean_ED", num(v.metrics.mean_ed)},
          {"MRED", num(v.metrics.mred)},
          {"variance", num(v.metrics.variance)},
          {"PSNR", num(v.psnr)},
          {"MSSIM", num(v.mssim)},
          {"MSE_ratio", num(r.mse_ratio)},
          {"false_positives", std::to_string(v.false_positives)},
          {"error_signals", std::to_string(v.error_signals)},
      };
      for (const auto& [metric, value] : rows) {
        if (value.empty()) continue;
        out += fmt::format("{1}{0}{2}{0}{3}{0}{4}{0}{5}{0}{6}{0}{7}\n", s, r.mode, voter_name(v.voter),
                           num(r.p_f), r.k, r.seed, metric, value);
      }
    }
  return out;
}

}  // namespace xrel
