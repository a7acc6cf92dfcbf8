#include "soullab/sampling.hpp"

#include "soullab/error.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace soullab {

namespace {

constexpr std::array<int, 12> kPrimes = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};

}  // namespace

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

ScrambledHalton::ScrambledHalton(int dims, std::uint64_t seed) {
  if (dims < 1 || dims > static_cast<int>(kPrimes.size())) {
    raise(ErrorKind::InvalidArgument, "Halton dimension out of range");
  }
  std::uint64_t state = seed;
  for (int d = 0; d < dims; ++d) {
    const int b = kPrimes[static_cast<std::size_t>(d)];
    bases_.push_back(b);
    // Digit 0 stays fixed so trailing zero digits contribute nothing.
    std::vector<int> perm(static_cast<std::size_t>(b));
    for (int k = 0; k < b; ++k) perm[static_cast<std::size_t>(k)] = k;
    for (int k = b - 1; k > 1; --k) {
      const auto j = 1 + static_cast<int>(splitmix64(state) % static_cast<std::uint64_t>(k));
      std::swap(perm[static_cast<std::size_t>(k)], perm[static_cast<std::size_t>(j)]);
    }
    permutations_.push_back(std::move(perm));
  }
}

double ScrambledHalton::coordinate(std::size_t index, int d) const {
  const auto b = static_cast<std::size_t>(bases_[static_cast<std::size_t>(d)]);
  const auto& perm = permutations_[static_cast<std::size_t>(d)];
  std::size_t n = index + 1;
  double scale = 1.0 / static_cast<double>(b);
  double x = 0.0;
  while (n > 0) {
    x += scale * perm[n % b];
    n /= b;
    scale /= static_cast<double>(b);
  }
  return x;
}

PlaneSampler::PlaneSampler(std::vector<Interval> region, std::size_t count, std::uint64_t seed)
    : region_(std::move(region)),
      count_(count),
      seed_(seed),
      halton_(static_cast<int>(region_.size() * 3), seed) {
  if (count_ == 0) raise(ErrorKind::EmptySample, "plane sampler has zero samples");
}

PlaneSample PlaneSampler::sample(std::size_t i, const MetricChart& chart) const {
  const int n = static_cast<int>(region_.size());
  if (chart.dim() != n) raise(ErrorKind::InvalidArgument, "sampler region dimension mismatch");
  PlaneSample out;
  out.point.resize(n);
  for (int d = 0; d < n; ++d) {
    const auto& iv = region_[static_cast<std::size_t>(d)];
    out.point[d] = iv.lo + iv.width() * halton_.coordinate(i, d);
  }
  // Box-Muller on consecutive Halton coordinates gives 2n Gaussians.
  std::array<double, 8> gauss{};
  for (int k = 0; k < n; ++k) {
    const double u1 = halton_.coordinate(i, n + 2 * k);
    const double u2 = halton_.coordinate(i, n + 2 * k + 1);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    gauss[static_cast<std::size_t>(2 * k)] = radius * std::cos(2.0 * std::numbers::pi * u2);
    gauss[static_cast<std::size_t>(2 * k + 1)] = radius * std::sin(2.0 * std::numbers::pi * u2);
  }
  Vec a(n), b(n);
  if (n >= 2 && i % 4 == 3) {
    // Every fourth plane is spanned by two vectors of the orthonormal frame,
    // cycling through all pairs.
    const std::size_t pairs = static_cast<std::size_t>(n * (n - 1) / 2);
    std::size_t q = (i / 4) % pairs;
    int j = 0;
    while (q >= static_cast<std::size_t>(n - 1 - j)) {
      q -= static_cast<std::size_t>(n - 1 - j);
      ++j;
    }
    const int k = j + 1 + static_cast<int>(q);
    a = Vec::Zero(n);
    b = Vec::Zero(n);
    a[j] = 1.0;
    b[k] = 1.0;
  } else {
    for (int k = 0; k < n; ++k) {
      a[k] = gauss[static_cast<std::size_t>(k)];
      b[k] = gauss[static_cast<std::size_t>(n + k)];
    }
  }
  // Map orthonormal-frame coefficients to coordinates: g = L L^T, e = L^{-T} c.
  const Mat g = chart.metric(out.point);
  Eigen::LLT<Mat> llt(g);
  if (llt.info() != Eigen::Success) {
    raise(ErrorKind::SingularMetric, "metric not positive definite at sampled point");
  }
  out.u = llt.matrixU().solve(a);
  out.v = llt.matrixU().solve(b);
  return out;
}

}  // namespace soullab
