#include <lpmap/workload.hpp>

#include <lpmap/cell.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <unordered_set>

namespace lpmap {

double generalized_harmonic(std::uint64_t n, double s) {
  long double sum = 0;
  for (std::uint64_t k = n; k >= 1; --k) sum += std::pow(static_cast<long double>(k), -static_cast<long double>(s));
  return static_cast<double>(sum);
}

ZipfSampler::ZipfSampler(std::uint64_t universe, double s) : s_(s), cdf_(universe) {
  if (universe == 0) throw std::invalid_argument("zipf universe must be positive");
  if (s < 0) throw std::invalid_argument("zipf exponent must be non-negative");
  std::vector<long double> partial(universe);
  long double sum = 0;
  for (std::uint64_t k = 1; k <= universe; ++k) {
    sum += std::pow(static_cast<long double>(k), -static_cast<long double>(s));
    partial[k - 1] = sum;
  }
  harmonic_ = static_cast<double>(sum);
  for (std::uint64_t i = 0; i < universe; ++i) cdf_[i] = static_cast<double>(partial[i] / sum);
  cdf_.back() = 1.0;
}

double ZipfSampler::probability(std::uint64_t k) const {
  if (k == 0 || k > cdf_.size()) return 0.0;
  return std::pow(static_cast<double>(k), -s_) / harmonic_;
}

std::uint64_t ZipfSampler::operator()(KeyRng& rng) const {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  const auto index = static_cast<std::uint64_t>(std::min<std::ptrdiff_t>(it - cdf_.begin(), cdf_.size() - 1));
  return index + 1;
}

KeySequence gen_uniform(std::size_t n, std::uint64_t seed, bool distinct) {
  KeySequence out;
  out.provenance = std::string("uniform n=") + std::to_string(n) + " seed=" + std::to_string(seed) +
                   (distinct ? " distinct" : "") + " rng=" + kKeyRngName;
  out.keys.reserve(n);
  KeyRng rng(seed);
  std::uniform_int_distribution<std::uint64_t> draw(1, kMaxUserKey);
  if (!distinct) {
    for (std::size_t i = 0; i < n; ++i) out.keys.push_back(draw(rng));
    return out;
  }
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(n);
  while (out.keys.size() < n) {
    const std::uint64_t key = draw(rng);
    if (seen.insert(key).second) out.keys.push_back(key);
  }
  return out;
}

KeySequence gen_zipf(std::size_t n, const ZipfSpec& spec) {
  const ZipfSampler sampler(spec.universe, spec.s);
  KeySequence out;
  out.provenance = "zipf n=" + std::to_string(n) + " N=" + std::to_string(spec.universe) +
                   " s=" + std::to_string(spec.s) + " seed=" + std::to_string(spec.seed) + " rng=" + kKeyRngName;
  out.keys.reserve(n);
  KeyRng rng(spec.seed);
  for (std::size_t i = 0; i < n; ++i) out.keys.push_back(sampler(rng));
  return out;
}

namespace {

constexpr std::array<char, 8> kMagic{'G', 'T', 'K', 'E', 'Y', 'S', '0', '1'};

void put_le(std::ostream& out, std::uint64_t word) {
  std::array<unsigned char, 8> bytes;
  for (int b = 0; b < 8; ++b) bytes[b] = static_cast<unsigned char>(word >> (8 * b));
  out.write(reinterpret_cast<const char*>(bytes.data()), 8);
}

std::uint64_t get_le(std::istream& in) {
  std::array<unsigned char, 8> bytes{};
  if (!in.read(reinterpret_cast<char*>(bytes.data()), 8)) throw std::runtime_error("key dump truncated");
  std::uint64_t word = 0;
  for (int b = 0; b < 8; ++b) word |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
  return word;
}

}  // namespace

void write_keys(const std::filesystem::path& path, std::span<const std::uint64_t> keys) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(kMagic.data(), kMagic.size());
  put_le(out, keys.size());
  for (std::uint64_t key : keys) put_le(out, key);
  if (!out) throw std::runtime_error("write to " + path.string() + " failed");
}

std::vector<std::uint64_t> read_keys(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw std::runtime_error(path.string() + " is not a key dump");
  }
  const std::uint64_t count = get_le(in);
  std::vector<std::uint64_t> keys;
  keys.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) keys.push_back(get_le(in));
  return keys;
}

}  // namespace lpmap
