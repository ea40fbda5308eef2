#include "htpkit/rng.hpp"

#include <bit>

namespace htpkit {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t absorb(std::uint64_t state, std::uint64_t word) {
  return splitmix64(state ^ splitmix64(word));
}

}  // namespace

RngSpec RngSpec::child(std::string_view purpose,
                       std::initializer_list<std::uint64_t> indices) const {
  RngSpec out = *this;
  out.labels_.push_back(StreamLabel{std::string(purpose), std::vector<std::uint64_t>(indices)});
  return out;
}

std::uint64_t RngSpec::stream_key() const {
  std::uint64_t state = splitmix64(base_seed_);
  for (const auto& label : labels_) {
    // Length prefixes keep ("ab", {}) and ("a", {'b'}) apart.
    state = absorb(state, label.purpose.size());
    for (unsigned char ch : label.purpose) state = absorb(state, ch);
    state = absorb(state, label.indices.size());
    for (auto index : label.indices) state = absorb(state, index);
  }
  return state;
}

Engine RngSpec::engine() const {
  const std::uint64_t key = stream_key();
  std::seed_seq seq{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)};
  return Engine(seq);
}

std::uint64_t bits_of(double value) { return std::bit_cast<std::uint64_t>(value); }

}  // namespace htpkit
