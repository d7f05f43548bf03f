// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The gcf Authors

#include "gcf/noise.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "gcf/error.hpp"
#include "gcf/gumbel.hpp"

namespace gcf {

static_assert(std::endian::native == std::endian::little,
              "noise serialization assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'G', 'N', 'R', '1'};
constexpr std::size_t kJsonMaxWidth = 64;

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw DataError("truncated noise record");
  return v;
}

}  // namespace

NoiseRecord::NoiseRecord(std::size_t positions, std::size_t width,
                         NoiseOrigin origin, std::uint64_t seed)
    : positions_(positions),
      width_(width),
      origin_(origin),
      seed_(seed),
      data_(positions * width, 0.0) {}

void NoiseRecord::extend_with_prior(std::size_t rows, RandomStream& rng) {
  data_.reserve((positions_ + rows) * width_);
  for (std::size_t i = 0; i < rows * width_; ++i) {
    data_.push_back(sample_standard_gumbel(rng));
  }
  positions_ += rows;
}

void NoiseRecord::truncate(std::size_t rows) {
  if (rows >= positions_) return;
  positions_ = rows;
  data_.resize(rows * width_);
}

void NoiseRecord::write(std::ostream& out, NoiseDtype dtype) const {
  out.write(kMagic, 4);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(positions_));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(width_));
  put<std::uint8_t>(out, static_cast<std::uint8_t>(dtype));
  put<std::uint8_t>(out, static_cast<std::uint8_t>(origin_));
  put<std::uint16_t>(out, 0);
  put<std::uint64_t>(out, seed_);
  if (dtype == NoiseDtype::kF64) {
    out.write(reinterpret_cast<const char*>(data_.data()),
              static_cast<std::streamsize>(data_.size() * sizeof(double)));
  } else {
    for (double v : data_) put<float>(out, static_cast<float>(v));
  }
  if (!out) throw DataError("failed writing noise record");
}

NoiseRecord NoiseRecord::read(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw DataError("not a noise record (bad magic)");
  }
  const auto positions = get<std::uint32_t>(in);
  const auto width = get<std::uint32_t>(in);
  const auto dtype = get<std::uint8_t>(in);
  const auto origin = get<std::uint8_t>(in);
  get<std::uint16_t>(in);
  const auto seed = get<std::uint64_t>(in);
  if (dtype > 1) throw DataError("noise record: unknown dtype");
  if (origin > 1) throw DataError("noise record: unknown origin");
  NoiseRecord rec(positions, width, static_cast<NoiseOrigin>(origin), seed);
  if (dtype == static_cast<std::uint8_t>(NoiseDtype::kF64)) {
    in.read(reinterpret_cast<char*>(rec.data_.data()),
            static_cast<std::streamsize>(rec.data_.size() * sizeof(double)));
    if (!in) throw DataError("truncated noise record");
  } else {
    for (double& v : rec.data_) v = get<float>(in);
  }
  for (double v : rec.data_) {
    if (!std::isfinite(v)) throw DataError("noise record has non-finite entry");
  }
  return rec;
}

void NoiseRecord::save(const std::filesystem::path& path,
                       NoiseDtype dtype) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  write(out, dtype);
}

NoiseRecord NoiseRecord::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return read(in);
}

nlohmann::json NoiseRecord::to_json() const {
  if (width_ > kJsonMaxWidth) {
    throw DataError("JSON noise form is limited to vocabularies of " +
                    std::to_string(kJsonMaxWidth) + " symbols");
  }
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t t = 0; t < positions_; ++t) {
    auto r = row(t);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  return {{"origin", origin_ == NoiseOrigin::kPrior ? "prior" : "posterior"},
          {"seed", seed_},
          {"positions", positions_},
          {"vocab_size", width_},
          {"rows", std::move(rows)}};
}

NoiseRecord NoiseRecord::from_json(const nlohmann::json& j) {
  try {
    const std::string origin = j.at("origin").get<std::string>();
    if (origin != "prior" && origin != "posterior") {
      throw DataError("noise JSON: unknown origin '" + origin + "'");
    }
    NoiseRecord rec(j.at("positions").get<std::size_t>(),
                    j.at("vocab_size").get<std::size_t>(),
                    origin == "prior" ? NoiseOrigin::kPrior
                                      : NoiseOrigin::kPosterior,
                    j.at("seed").get<std::uint64_t>());
    const auto& rows = j.at("rows");
    if (rows.size() != rec.positions_) {
      throw DataError("noise JSON: row count mismatch");
    }
    for (std::size_t t = 0; t < rec.positions_; ++t) {
      auto r = rows[t].get<std::vector<double>>();
      if (r.size() != rec.width_) {
        throw DataError("noise JSON: row width mismatch");
      }
      std::copy(r.begin(), r.end(), rec.row(t).begin());
    }
    return rec;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("noise JSON: ") + e.what());
  }
}

NoiseRecord sample_prior_noise(std::size_t positions, const Vocabulary& vocab,
                               RandomStream& rng) {
  NoiseRecord rec(0, vocab.size(), NoiseOrigin::kPrior, rng.seed());
  rec.extend_with_prior(positions, rng);
  return rec;
}

}  // namespace gcf
