#pragma once

#include <cstdint>
#include <string_view>

namespace chameleon::rng {

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// FNV-1a over the bytes of `name`; used to turn stream names into key material.
constexpr std::uint64_t hash_name(std::string_view name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : name) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Derives an independent 64-bit seed from a parent seed and a label.
std::uint64_t derive_seed(std::uint64_t parent, std::string_view label);

/// Counter-based random stream: the value at (counter, lane) is a pure function of
/// (key, counter, lane). No state advances, so any partition of counters across
/// workers reproduces the sequential draws exactly.
class CounterStream {
 public:
  constexpr CounterStream() = default;
  explicit constexpr CounterStream(std::uint64_t key) : key_(key) {}

  /// Stream named `name` under `master` ("source", "station1", "station2", ...).
  static CounterStream derive(std::uint64_t master, std::string_view name) {
    return CounterStream(derive_seed(master, name));
  }

  [[nodiscard]] constexpr std::uint64_t key() const { return key_; }

  [[nodiscard]] std::uint64_t bits(std::uint64_t counter, std::uint64_t lane = 0) const;

  /// Uniform double in [0, 1) with 53 random bits.
  [[nodiscard]] double uniform(std::uint64_t counter, std::uint64_t lane = 0) const;

 private:
  std::uint64_t key_ = 0;
};

/// The three named streams of a protocol run, all derived from one master seed.
struct StreamSet {
  CounterStream source;
  CounterStream station1;
  CounterStream station2;

  static StreamSet from_master(std::uint64_t master);
};

}  // namespace chameleon::rng
