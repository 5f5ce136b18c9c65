#pragma once

#include <lpmap/hash.hpp>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace lpmap {

/// Generator used for every key sequence. Recorded in benchmark metadata.
using KeyRng = std::mt19937_64;
inline constexpr const char* kKeyRngName = "mt19937_64";

/// Zipf distribution over keys 1..universe: P(k) = 1 / (k^s * H_{N,s}).
struct ZipfSpec {
  std::uint64_t universe = 1'000'000;
  double s = 1.0;
  std::uint64_t seed = 1;
};

/// H_{N,s} = sum_{k=1}^{N} k^-s.
double generalized_harmonic(std::uint64_t n, double s);

/// Exact inverse-CDF sampler: the cumulative table is built once, each draw
/// is a binary search over it.
class ZipfSampler {
 public:
  ZipfSampler(std::uint64_t universe, double s);

  std::uint64_t universe() const noexcept { return cdf_.size(); }
  double s() const noexcept { return s_; }
  double probability(std::uint64_t k) const;
  /// cdf()[i] = P(key <= i + 1).
  const std::vector<double>& cdf() const noexcept { return cdf_; }

  std::uint64_t operator()(KeyRng& rng) const;

 private:
  double s_;
  double harmonic_;
  std::vector<double> cdf_;
};

struct KeySequence {
  std::vector<std::uint64_t> keys;
  std::string provenance;
};

/// `n` keys uniform over the user key range. With `distinct`, repeated draws
/// are rejected.
KeySequence gen_uniform(std::size_t n, std::uint64_t seed, bool distinct = false);

KeySequence gen_zipf(std::size_t n, const ZipfSpec& spec);

/// Key dump: "GTKEYS01", count as u64, then the keys; all little-endian.
void write_keys(const std::filesystem::path& path, std::span<const std::uint64_t> keys);
std::vector<std::uint64_t> read_keys(const std::filesystem::path& path);

}  // namespace lpmap
