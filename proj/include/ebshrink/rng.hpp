#pragma once

// Counter-based random streams.
//
// Every random number in the library is a pure function of a 64-bit key and
// a 128-bit counter (Philox4x32-10). Simulations key streams by
// (seed, replication, arm) and put (draw index, attempt, batch, purpose) in
// the counter, so results never depend on execution order, thread count or
// which SIMD width produced them.

#include <array>
#include <cstdint>
#include <string_view>

namespace ebshrink {

struct StreamKey {
  std::uint32_t lo = 0;
  std::uint32_t hi = 0;

  friend bool operator==(const StreamKey&, const StreamKey&) = default;
};

using Counter = std::array<std::uint32_t, 4>;

// Purpose tag, stored in the last counter word.
enum class StreamTag : std::uint32_t {
  PosteriorDraw = 1,
  TieBreak = 2,
  Allocation = 3,
  Outcome = 4,
  Bootstrap = 5,
  Subsample = 6,
  Scenario = 7,
};

// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

// FNV-1a, used to key per-arm streams by arm identifier.
std::uint64_t hash_label(std::string_view label);

StreamKey make_key(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream = 0);

Counter philox4x32(Counter ctr, StreamKey key);

// Maps a 32-bit word to the open interval (0, 1).
double unit_open(std::uint32_t word);

// Uniform on (0, 1) from word 0 of the block at `ctr`.
double uniform_at(StreamKey key, Counter ctr);

// Standard normal (Box-Muller on words 0 and 1) at `ctr`.
double normal_at(StreamKey key, Counter ctr);

// Gamma(shape, 1) draw whose attempts live at counters
// {index, attempt << 1 | slot, word2, word3}. Identical to the SIMD fill.
double gamma_at(StreamKey key, double shape, std::uint32_t index, std::uint32_t slot,
                std::uint32_t word2, std::uint32_t word3);

// Beta(alpha, beta) draw = G_a / (G_a + G_b) with slots 0 and 1.
double beta_at(StreamKey key, double alpha, double beta, std::uint32_t index,
               std::uint32_t word2, std::uint32_t word3);

// Sequential reader over one stream: counter words 2 and 3 are fixed, words 0
// and 1 form a 64-bit block index.
class CounterStream {
 public:
  CounterStream(StreamKey key, std::uint32_t word2, StreamTag tag);

  std::uint32_t next_u32();
  double uniform();
  // Uniform integer in [0, n).
  std::uint32_t below(std::uint32_t n);

 private:
  StreamKey key_;
  std::uint32_t word2_;
  std::uint32_t word3_;
  std::uint64_t block_ = 0;
  Counter buffer_{};
  int used_ = 4;
};

}  // namespace ebshrink
