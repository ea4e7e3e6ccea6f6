#include "chameleon/rng.hpp"

namespace chameleon::rng {

namespace {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kLaneStep = 0xd1b54a32d192ed03ULL;
}  // namespace

std::uint64_t derive_seed(std::uint64_t parent, std::string_view label) {
  return mix64(mix64(parent + kGolden) ^ hash_name(label));
}

std::uint64_t CounterStream::bits(std::uint64_t counter, std::uint64_t lane) const {
  std::uint64_t x = mix64(key_ + kGolden * (counter + 1));
  return mix64(x + kLaneStep * (lane + 1));
}

double CounterStream::uniform(std::uint64_t counter, std::uint64_t lane) const {
  return static_cast<double>(bits(counter, lane) >> 11) * 0x1.0p-53;
}

StreamSet StreamSet::from_master(std::uint64_t master) {
  return StreamSet{CounterStream::derive(master, "source"),
                   CounterStream::derive(master, "station1"),
                   CounterStream::derive(master, "station2")};
}

}  // namespace chameleon::rng
