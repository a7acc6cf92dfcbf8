#pragma once

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace soullab {

// Charts never exceed dimension 4, so vectors and matrices stay on the stack.
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 4, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 4, 4>;

inline constexpr double kDefaultFdStep = 1e-3;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool periodic = false;

  double width() const { return hi - lo; }
};

/// A coordinate box together with a metric-components function.
///
/// The box is the closed coordinate range on which `components` is defined;
/// the metric must be positive definite strictly inside it (it may degenerate
/// on the boundary, e.g. at the poles of a polar chart). Differential
/// operations keep a margin of a few `fd_step` from non-periodic edges.
/// Instances are immutable and cheap to copy.
class MetricChart {
 public:
  using Components = std::function<Mat(const Vec&)>;

  MetricChart(std::string name, std::vector<Interval> box, Components components,
              double fd_step = kDefaultFdStep, int fd_order = 2);

  const std::string& name() const { return state_->name; }
  int dim() const { return static_cast<int>(state_->box.size()); }
  const std::vector<Interval>& box() const { return state_->box; }
  double fd_step() const { return state_->fd_step; }
  int fd_order() const { return state_->fd_order; }

  Mat metric(const Vec& p) const { return state_->components(p); }

  /// Distance (in coordinate units) from `p` to the nearest non-periodic edge.
  double boundary_distance(const Vec& p) const;

  /// Same chart with a different finite-difference step or order (2 or 4).
  MetricChart with_fd(double fd_step, int fd_order) const;

 private:
  struct State {
    std::string name;
    std::vector<Interval> box;
    Components components;
    double fd_step;
    int fd_order;
  };
  std::shared_ptr<const State> state_;
};

Vec make_vec(std::initializer_list<double> values);

}  // namespace soullab
