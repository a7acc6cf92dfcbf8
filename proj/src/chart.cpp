#include "soullab/chart.hpp"

#include "soullab/error.hpp"

#include <cmath>
#include <limits>

namespace soullab {

MetricChart::MetricChart(std::string name, std::vector<Interval> box, Components components,
                         double fd_step, int fd_order) {
  if (box.empty() || box.size() > 4) {
    raise(ErrorKind::InvalidArgument, "chart '" + name + "': dimension must be 1..4");
  }
  for (const auto& iv : box) {
    if (!(iv.hi > iv.lo)) raise(ErrorKind::InvalidArgument, "chart '" + name + "': empty interval");
  }
  if (!(fd_step > 0.0)) raise(ErrorKind::InvalidArgument, "chart '" + name + "': fd_step must be positive");
  if (fd_order != 2 && fd_order != 4) {
    raise(ErrorKind::InvalidArgument, "chart '" + name + "': fd_order must be 2 or 4");
  }
  state_ = std::make_shared<const State>(
      State{std::move(name), std::move(box), std::move(components), fd_step, fd_order});
}

double MetricChart::boundary_distance(const Vec& p) const {
  double d = std::numeric_limits<double>::infinity();
  for (int i = 0; i < dim(); ++i) {
    const auto& iv = state_->box[static_cast<std::size_t>(i)];
    if (iv.periodic) continue;
    d = std::min({d, p[i] - iv.lo, iv.hi - p[i]});
  }
  return d;
}

MetricChart MetricChart::with_fd(double fd_step, int fd_order) const {
  return MetricChart(state_->name, state_->box, state_->components, fd_step, fd_order);
}

Vec make_vec(std::initializer_list<double> values) {
  Vec v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

}  // namespace soullab
