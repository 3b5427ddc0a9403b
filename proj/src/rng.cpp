#include "nnlogit/rng.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace nnlogit {

namespace {

constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_key(std::uint64_t seed, const std::vector<std::uint64_t>& path) {
  std::uint64_t key = mix64(seed ^ 0x6a09e667f3bcc909ULL);
  for (std::uint64_t id : path) {
    key = mix64(key ^ mix64(id + kGamma));
  }
  return key;
}

}  // namespace

RandomStream::RandomStream(std::uint64_t seed, std::vector<std::uint64_t> path)
    : seed_(seed), path_(std::move(path)), key_(derive_key(seed_, path_)) {}

RandomStream RandomStream::child(std::uint64_t id) const {
  auto path = path_;
  path.push_back(id);
  return RandomStream(seed_, std::move(path));
}

std::uint64_t RandomStream::next_u64() {
  ++counter_;
  return mix64(key_ + counter_ * kGamma);
}

double RandomStream::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RandomStream::uniform_open() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t RandomStream::bounded(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("bounded: bound must be positive");
  // Lemire's multiply-and-reject.
  std::uint64_t x = next_u64();
  __uint128_t m = static_cast<__uint128_t>(x) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      x = next_u64();
      m = static_cast<__uint128_t>(x) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

double RandomStream::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform_open();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

std::vector<double> gaussian(RandomStream& stream, std::size_t count) {
  std::vector<double> out(count);
  for (auto& v : out) v = stream.gaussian();
  return out;
}

std::vector<std::size_t> uniform_choice(RandomStream& stream, std::size_t n, std::size_t m) {
  if (m > n) throw std::invalid_argument("uniform_choice: m exceeds n");
  // Sparse Fisher-Yates: only the touched slots are materialized.
  std::unordered_map<std::size_t, std::size_t> swapped;
  auto value_at = [&](std::size_t i) {
    auto it = swapped.find(i);
    return it == swapped.end() ? i : it->second;
  };
  std::vector<std::size_t> out;
  out.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(stream.bounded(n - i));
    const std::size_t vi = value_at(i);
    const std::size_t vj = value_at(j);
    out.push_back(vj);
    swapped[j] = vi;
  }
  return out;
}

std::vector<std::size_t> shuffle(RandomStream& stream, std::size_t n) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(stream.bounded(i));
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

}  // namespace nnlogit
