#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace htpkit {

using Engine = std::mt19937_64;

struct StreamLabel {
  std::string purpose;
  std::vector<std::uint64_t> indices;

  bool operator==(const StreamLabel&) const = default;
};

/// Labelled, counter-based random stream description.
///
/// A stream is identified by the base seed plus an ordered path of labels, so
/// e.g. the matrix of trial 17 in cell (0.4, 0.6) always gets the same bits no
/// matter which worker runs it or in which order. Engines are derived on
/// demand; an RngSpec itself holds no mutable state.
class RngSpec {
 public:
  explicit RngSpec(std::uint64_t base_seed) : base_seed_(base_seed) {}

  /// Returns the substream spec obtained by appending one label.
  RngSpec child(std::string_view purpose,
                std::initializer_list<std::uint64_t> indices = {}) const;

  /// Fresh engine positioned at the start of this stream.
  Engine engine() const;

  /// 64-bit key the engine is seeded with; a pure function of the label path.
  std::uint64_t stream_key() const;

  std::uint64_t base_seed() const { return base_seed_; }
  const std::vector<StreamLabel>& labels() const { return labels_; }

 private:
  std::uint64_t base_seed_;
  std::vector<StreamLabel> labels_;
};

/// Bit pattern of a double, for keying streams by real-valued coordinates.
std::uint64_t bits_of(double value);

}  // namespace htpkit
