#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "xrel/image.hpp"
#include "xrel/metrics.hpp"
#include "xrel/rng.hpp"
#include "xrel/voters.hpp"

namespace xrel {

struct NoiseConfig {
  double p_f = 0.0;  // per-bit flip probability
  std::uint64_t seed = 0;
  int repetitions = 1;
};

/// Throws ValidationError unless p_f is in [0, 1] and repetitions >= 1.
void validate(const NoiseConfig& cfg);

/// Flips each bit independently when a uniform (0, 1] draw is <= p_f.
Word inject_noise(Word w, double p_f, Xoshiro256& rng);
/// Same, drawing from substream (cfg.seed, stream).
Word inject_noise(Word w, const NoiseConfig& cfg, std::uint64_t stream);

/// Seed of repetition `rep`: derive_seed(seed, rep). Copy c (0..2) of word i
/// within a repetition draws from substream 3 * i + c of that seed.
std::uint64_t repetition_seed(std::uint64_t seed, int rep);

/// Dispatches to the voter of the given kind. IDMR ignores `c`; a zero
/// threshold selects default_threshold(k).
VoteOutcome vote(VoterKind kind, Word a, Word b, Word c, int k, std::uint64_t threshold = 0);

const std::vector<VoterKind>& all_voters();

struct VoterReport {
  VoterKind voter = VoterKind::kXrel;
  AggregateMetrics metrics;
  double mse = 0.0;
  double psnr = 0.0;
  double mssim = 0.0;  // NaN outside image experiments
  std::uint64_t false_positives = 0;
  std::uint64_t error_signals = 0;
};

struct CampaignReport {
  std::string mode = "voter";
  double p_f = 0.0;
  int k = 0;
  std::uint64_t seed = 0;
  int width = 0;
  int repetitions = 1;
  std::size_t words = 0;  // per repetition
  std::vector<VoterReport> voters;
  double mse_ratio = 0.0;  // pooled X-Rel MSE over word-TMR MSE; NaN if either is absent
  std::uint64_t invariant_violations = 0;

  const VoterReport* find(VoterKind kind) const;
};

/// Triplicates every exact word, corrupts each copy independently, and votes
/// with every selected voter. Error outcomes enter the metrics as 0. A false
/// positive is a non-error outcome whose upper width-k slice differs from the
/// exact word's. Metrics pool all repetitions. `signed_values` selects the
/// numeric interpretation used by the metrics.
CampaignReport run_voter_campaign(std::span<const Word> exact, const NoiseConfig& cfg,
                                  const std::vector<VoterKind>& voters, int k, bool signed_values = false);

/// Uniform random words of the given width from substream (seed, ~0).
std::vector<Word> random_words(std::size_t count, int width, std::uint64_t seed);

/// Every channel byte of the image is one 8-bit word. MSSIM against the
/// error-free image is averaged over repetitions; other metrics are pooled.
CampaignReport image_experiment(const Image& img, const NoiseConfig& cfg, int k,
                                const std::vector<VoterKind>& voters);

/// Voted output images of one repetition, in `voters` order.
std::vector<Image> image_outputs(const Image& img, const NoiseConfig& cfg, int k,
                                 const std::vector<VoterKind>& voters, int rep);

/// Coefficient fraction bits and word width of the FIR experiment.
inline constexpr int kFirWidth = 32;
inline constexpr int kFirFracBits = 15;

/// Exact 32-bit fixed-point FIR outputs for a seeded input signal uniform in
/// [-0.5, 0.5] (Q.15), `n_samples` outputs.
std::vector<Word> fir_reference_stream(int taps, std::size_t n_samples, std::uint64_t seed);

/// Corrupts and votes the FIR output words; PSNR uses signed values and the
/// pooled MSE with MAX = 2^32 - 1.
CampaignReport fir_experiment(int taps, const NoiseConfig& cfg, int k, std::size_t n_samples,
                              const std::vector<VoterKind>& voters);

/// Wide report: one row per (campaign, voter) with columns voter, p_f, k,
/// seed, ER, mean_ED, MRED, variance, PSNR, MSSIM, MSE_ratio,
/// false_positives, error_signals. Undefined values are left empty.
std::string report_table(const std::vector<CampaignReport>& reports, char sep = ',');

/// Long format: mode, voter, p_f, k, seed, metric, value.
std::string report_long(const std::vector<CampaignReport>& reports, char sep = ',');

}  // namespace xrel
