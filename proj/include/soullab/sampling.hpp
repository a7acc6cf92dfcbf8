#pragma once

#include "soullab/chart.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace soullab {

/// Digit-permuted Halton sequence. Permutations are drawn from a splitmix64
/// stream keyed by `seed`, so the sequence is reproducible on every platform.
class ScrambledHalton {
 public:
  ScrambledHalton(int dims, std::uint64_t seed);

  int dims() const { return static_cast<int>(bases_.size()); }

  /// Coordinate `d` of point `index` (index 0 is skipped internally).
  double coordinate(std::size_t index, int d) const;

 private:
  std::vector<int> bases_;
  std::vector<std::vector<int>> permutations_;
};

struct PlaneSample {
  Vec point;
  Vec u;
  Vec v;
};

/// Deterministic (point, 2-plane) sequence over a coordinate region.
/// Points are low-discrepancy in the region. Three of every four planes are
/// spanned by isotropic Gaussians with respect to the metric at the point
/// (uniform on the Grassmannian); the fourth is a pair of vectors from the
/// Cholesky orthonormal frame, so coordinate-aligned extremes are hit.
class PlaneSampler {
 public:
  PlaneSampler(std::vector<Interval> region, std::size_t count, std::uint64_t seed);

  std::size_t size() const { return count_; }
  const std::vector<Interval>& region() const { return region_; }
  std::uint64_t seed() const { return seed_; }

  PlaneSample sample(std::size_t i, const MetricChart& chart) const;

 private:
  std::vector<Interval> region_;
  std::size_t count_;
  std::uint64_t seed_;
  ScrambledHalton halton_;
};

std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace soullab
