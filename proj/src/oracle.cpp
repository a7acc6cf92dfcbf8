// Brute-force quotient metric: project the 5-dim product metric onto the
// complement of the action field. Shares nothing with the closed form in
// quotient.cpp beyond the factor charts.
#include "soullab/quotient.hpp"

#include <Eigen/Dense>

namespace soullab {

Mat quotient_projection_oracle(const QuotientSpec& spec, SoulRegion region, const Vec& p) {
  using Mat5 = Eigen::Matrix<double, 5, 5>;
  using Vec5 = Eigen::Matrix<double, 5, 1>;

  const Vec a = p.head(2);
  const Vec xy = p.tail(2);
  Mat gA;
  Vec5 K = Vec5::Zero();
  switch (region) {
    case SoulRegion::Polar:
      gA = sphere_chart(spec.sphere).metric(a);
      K[1] = spec.killing.C1;
      break;
    case SoulRegion::North:
      gA = sphere_pole_chart(spec.sphere, Pole::North, default_pole_half_width(spec.sphere)).metric(a);
      K[0] = -spec.killing.C1 * a[1];
      K[1] = spec.killing.C1 * a[0];
      break;
    case SoulRegion::South:
      gA = sphere_pole_chart(spec.sphere, Pole::South, default_pole_half_width(spec.sphere)).metric(a);
      K[0] = spec.killing.C1 * a[1];
      K[1] = -spec.killing.C1 * a[0];
      break;
  }
  const Mat gB = plane_chart_cartesian(spec.plane).metric(xy);
  K[2] = -spec.killing.C2 * xy[1];
  K[3] = spec.killing.C2 * xy[0];
  K[4] = 1.0;  // unit speed along the line

  Mat5 G = Mat5::Zero();
  G.block<2, 2>(0, 0) = gA;
  G.block<2, 2>(2, 2) = gB;
  G(4, 4) = 1.0;

  // P w = w − ⟨w,K⟩/⟨K,K⟩ K
  const Mat5 P = Mat5::Identity() - K * (G * K).transpose() / K.dot(G * K);
  Eigen::Matrix<double, 5, 4> slice = Eigen::Matrix<double, 5, 4>::Zero();
  slice.topRows<4>() = Eigen::Matrix4d::Identity();
  const Eigen::Matrix<double, 5, 4> lifted = P * slice;
  return Mat(lifted.transpose() * G * lifted);
}

}  // namespace soullab
