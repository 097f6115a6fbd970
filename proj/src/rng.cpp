#include "ebshrink/rng.hpp"

#include "kernels/lanes_scalar.hpp"
#include "kernels/generic.hpp"

namespace ebshrink {

using kernels::SF;
using kernels::SU;

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t hash_label(std::string_view label) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

StreamKey make_key(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream) {
  const std::uint64_t h = mix64(mix64(mix64(seed) ^ stream) ^ substream);
  return {static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
}

Counter philox4x32(Counter ctr, StreamKey key) {
  SU c[4] = {ctr[0], ctr[1], ctr[2], ctr[3]};
  kernels::philox4x32_10(c, SU{key.lo}, SU{key.hi});
  return {static_cast<std::uint32_t>(c[0]), static_cast<std::uint32_t>(c[1]),
          static_cast<std::uint32_t>(c[2]), static_cast<std::uint32_t>(c[3])};
}

double unit_open(std::uint32_t word) { return kernels::unit_open<SF, SU>(word); }

double uniform_at(StreamKey key, Counter ctr) { return unit_open(philox4x32(ctr, key)[0]); }

double normal_at(StreamKey key, Counter ctr) {
  return kernels::normal_lanes<SF, SU>(key.lo, key.hi, ctr[0], ctr[1], ctr[2], ctr[3]);
}

double gamma_at(StreamKey key, double shape, std::uint32_t index, std::uint32_t slot,
                std::uint32_t word2, std::uint32_t word3) {
  return kernels::gamma_lanes<SF, SU>(key.lo, key.hi, index, shape, slot, word2, word3);
}

double beta_at(StreamKey key, double alpha, double beta, std::uint32_t index, std::uint32_t word2,
               std::uint32_t word3) {
  return kernels::beta_lanes<SF, SU>(key.lo, key.hi, index, alpha, beta, word2, word3);
}

CounterStream::CounterStream(StreamKey key, std::uint32_t word2, StreamTag tag)
    : key_(key), word2_(word2), word3_(static_cast<std::uint32_t>(tag)) {}

std::uint32_t CounterStream::next_u32() {
  if (used_ == 4) {
    buffer_ = philox4x32({static_cast<std::uint32_t>(block_),
                          static_cast<std::uint32_t>(block_ >> 32), word2_, word3_},
                         key_);
    ++block_;
    used_ = 0;
  }
  return buffer_[used_++];
}

double CounterStream::uniform() { return unit_open(next_u32()); }

std::uint32_t CounterStream::below(std::uint32_t n) {
  // Lemire's multiply-shift with rejection of the biased low region.
  const std::uint32_t threshold = static_cast<std::uint32_t>(-n) % n;
  for (;;) {
    const std::uint64_t m = static_cast<std::uint64_t>(next_u32()) * n;
    if (static_cast<std::uint32_t>(m) >= threshold) return static_cast<std::uint32_t>(m >> 32);
  }
}

}  // namespace ebshrink
