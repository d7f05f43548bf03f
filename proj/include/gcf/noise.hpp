// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The gcf Authors

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "gcf/random.hpp"
#include "gcf/vocabulary.hpp"

namespace gcf {

enum class NoiseOrigin : std::uint8_t { kPrior = 0, kPosterior = 1 };
enum class NoiseDtype : std::uint8_t { kF32 = 0, kF64 = 1 };

/// Exogenous sampling noise: one standard-Gumbel perturbation per generated
/// position and vocabulary symbol, stored densely row-major. Row t perturbs
/// the t-th generated position; prompt positions have no rows.
class NoiseRecord {
 public:
  NoiseRecord() = default;
  NoiseRecord(std::size_t positions, std::size_t width, NoiseOrigin origin,
              std::uint64_t seed);

  std::size_t positions() const { return positions_; }
  std::size_t width() const { return width_; }
  NoiseOrigin origin() const { return origin_; }
  std::uint64_t seed() const { return seed_; }

  std::span<const double> row(std::size_t t) const {
    return {data_.data() + t * width_, width_};
  }
  std::span<double> row(std::size_t t) {
    return {data_.data() + t * width_, width_};
  }
  double at(std::size_t t, std::size_t j) const { return data_[t * width_ + j]; }
  double& at(std::size_t t, std::size_t j) { return data_[t * width_ + j]; }
  const std::vector<double>& data() const { return data_; }

  /// Appends `rows` rows of fresh standard-Gumbel noise.
  void extend_with_prior(std::size_t rows, RandomStream& rng);
  /// Keeps only the first `rows` rows.
  void truncate(std::size_t rows);
  void set_origin(NoiseOrigin origin) { origin_ = origin; }

  /// Binary container: "GNR1", u32 positions, u32 vocab_size, u8 dtype,
  /// u8 origin, u16 reserved (0), u64 seed, then row-major entries. All
  /// little-endian. f32 storage rounds entries to float.
  void write(std::ostream& out, NoiseDtype dtype = NoiseDtype::kF64) const;
  static NoiseRecord read(std::istream& in);
  void save(const std::filesystem::path& path,
            NoiseDtype dtype = NoiseDtype::kF64) const;
  static NoiseRecord load(const std::filesystem::path& path);

  /// Debug form {"origin","seed","positions","vocab_size","rows":[[..]]}.
  /// Throws DataError for widths above 64.
  nlohmann::json to_json() const;
  static NoiseRecord from_json(const nlohmann::json& j);

  friend bool operator==(const NoiseRecord&, const NoiseRecord&) = default;

 private:
  std::size_t positions_ = 0;
  std::size_t width_ = 0;
  NoiseOrigin origin_ = NoiseOrigin::kPrior;
  std::uint64_t seed_ = 0;
  std::vector<double> data_;
};

/// Matrix of i.i.d. standard-Gumbel entries; origin = prior.
NoiseRecord sample_prior_noise(std::size_t positions, const Vocabulary& vocab,
                               RandomStream& rng);

}  // namespace gcf
