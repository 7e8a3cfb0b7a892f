#include "xrel/voters.hpp"

#include <array>

#include <fmt/core.h>

#include "xrel/errors.hpp"

namespace xrel {

namespace {

void check_width(int width) {
  if (width < 2 || width > 64)
    throw ValidationError(fmt::format("word width must be in [2, 64], got {}", width));
}

void check_same_width(std::initializer_list<Word> words) {
  const int w = words.begin()->width();
  for (const Word& x : words)
    if (x.width() != w)
      throw ValidationError(fmt::format("voter input widths differ ({} vs {})", w, x.width()));
}

void check_k(int k, int width) {
  if (k < 0 || k > width - 1)
    throw ValidationError(fmt::format("k must be in [0, {}], got {}", width - 1, k));
}

std::uint64_t low_mask(int k) { return k >= 64 ? ~0ULL : ((1ULL << k) - 1); }

std::uint64_t distance(std::uint64_t x, std::uint64_t y) { return x > y ? x - y : y - x; }

// Floor average without overflow.
std::uint64_t floor_average(std::uint64_t x, std::uint64_t y) { return (x & y) + ((x ^ y) >> 1); }

}  // namespace

std::uint64_t width_mask(int width) { return low_mask(width); }

Word::Word(std::uint64_t bits, int width) : bits_(bits), width_(width) {
  check_width(width);
  if ((bits & ~width_mask(width)) != 0)
    throw ValidationError(fmt::format("bit pattern {:#x} does not fit in {} bits", bits, width));
}

Word Word::wrap(std::uint64_t bits, int width) {
  check_width(width);
  return Word(bits & width_mask(width), width);
}

Word Word::from_signed(std::int64_t value, int width) {
  return wrap(static_cast<std::uint64_t>(value), width);
}

std::int64_t Word::to_signed() const {
  if (width_ == 64) return static_cast<std::int64_t>(bits_);
  const std::uint64_t sign = 1ULL << (width_ - 1);
  return static_cast<std::int64_t>((bits_ ^ sign)) - static_cast<std::int64_t>(sign);
}

std::uint64_t Word::upper(int k) const { return bits_ & ~low_mask(k); }

std::uint64_t Word::lower(int k) const { return bits_ & low_mask(k); }

std::string_view voter_name(VoterKind kind) {
  switch (kind) {
    case VoterKind::kWordTmr: return "tmr";
    case VoterKind::kBitTmr: return "bit_tmr";
    case VoterKind::kXrel: return "xrel";
    case VoterKind::kIdmr: return "idmr";
    case VoterKind::kItdmr: return "itdmr";
  }
  return "unknown";
}

std::optional<VoterKind> parse_voter(std::string_view name) {
  for (VoterKind k : {VoterKind::kWordTmr, VoterKind::kBitTmr, VoterKind::kXrel,
                      VoterKind::kIdmr, VoterKind::kItdmr})
    if (voter_name(k) == name) return k;
  return std::nullopt;
}

VoteOutcome vote_word_tmr(Word a, Word b, Word c) {
  check_same_width({a, b, c});
  if (a == b || a == c) return VoteOutcome::ok(a);
  if (b == c) return VoteOutcome::ok(b);
  return VoteOutcome::error();
}

Word vote_bit_tmr(Word a, Word b, Word c) {
  check_same_width({a, b, c});
  const std::uint64_t x = a.bits(), y = b.bits(), z = c.bits();
  return Word((x & y) | (x & z) | (y & z), a.width());
}

VoteOutcome vote_xrel(Word a, Word b, Word c, int k, int forward) {
  check_same_width({a, b, c});
  check_k(k, a.width());
  if (forward < 1 || forward > 3)
    throw ValidationError(fmt::format("forwarded input must be 1, 2 or 3, got {}", forward));
  const std::uint64_t ua = a.upper(k), ub = b.upper(k), uc = c.upper(k);
  std::uint64_t agreed;
  if (ua == ub || ua == uc) {
    agreed = ua;
  } else if (ub == uc) {
    agreed = ub;
  } else {
    return VoteOutcome::error();
  }
  const std::array<Word, 3> in{a, b, c};
  return VoteOutcome::ok(Word(agreed | in[forward - 1].lower(k), a.width()));
}

VoteOutcome vote_idmr(Word a, Word b, int k, std::uint64_t threshold) {
  check_same_width({a, b});
  check_k(k, a.width());
  if (threshold == 0) throw ValidationError("IDMR threshold must be positive");
  if (distance(a.bits(), b.bits()) >= threshold) return VoteOutcome::error();
  return VoteOutcome::ok(Word(a.upper(k) | floor_average(a.lower(k), b.lower(k)), a.width()));
}

VoteOutcome vote_itdmr(Word a, Word b, Word c, int k, std::uint64_t threshold) {
  check_same_width({a, b, c});
  check_k(k, a.width());
  if (threshold == 0) throw ValidationError("ITDMR threshold must be positive");
  const std::array<Word, 3> in{a, b, c};
  constexpr std::array<std::array<int, 2>, 3> pairs{{{0, 1}, {0, 2}, {1, 2}}};
  int best = -1;
  std::uint64_t best_distance = 0;
  for (int p = 0; p < 3; ++p) {
    const auto [i, j] = pairs[p];
    const std::uint64_t d = distance(in[i].upper(k), in[j].upper(k));
    if (d >= threshold) continue;
    if (best < 0 || d < best_distance) {
      best = p;
      best_distance = d;
    }
  }
  if (best < 0) return VoteOutcome::error();
  const auto [i, j] = pairs[best];
  return VoteOutcome::ok(
      Word(in[i].upper(k) | floor_average(in[i].lower(k), in[j].lower(k)), a.width()));
}

std::uint64_t default_threshold(int k) {
  if (k < 0 || k > 63) throw ValidationError(fmt::format("k out of range: {}", k));
  return 1ULL << k;
}

}  // namespace xrel
