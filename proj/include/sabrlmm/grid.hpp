#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace sabrlmm {

// Box [lower_k, upper_k] per dimension. Pricing grids order the forwards first and the
// volatility last.
struct SpaceDomain {
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t dimension() const { return lower.size(); }
  double length(std::size_t k) const { return upper[k] - lower[k]; }

  // forward_count copies of [0, f_max] followed by [0, v_max].
  static SpaceDomain standard(std::size_t forward_count, double f_max = 0.1, double v_max = 3.5);
};

// Anisotropic Cartesian grid with 2^{l_k} + 1 points and mesh width 2^{-l_k} c_k per dimension.
class GridSpec {
 public:
  GridSpec(std::vector<int> levels, SpaceDomain domain);

  std::size_t dimension() const { return levels_.size(); }
  const std::vector<int>& levels() const { return levels_; }
  const SpaceDomain& domain() const { return domain_; }

  int points(std::size_t k) const { return (1 << levels_[k]) + 1; }
  int last_index(std::size_t k) const { return 1 << levels_[k]; }
  double width(std::size_t k) const { return widths_[k]; }
  double coordinate(std::size_t k, int index) const { return domain_.lower[k] + index * widths_[k]; }

  // Row-major: the last dimension varies fastest.
  std::ptrdiff_t stride(std::size_t k) const { return strides_[k]; }
  std::size_t node_count() const { return node_count_; }

  // Per-dimension indices of a linear node index.
  void decode(std::size_t node, std::span<int> index) const;

  friend bool operator==(const GridSpec& a, const GridSpec& b) {
    return a.levels_ == b.levels_ && a.domain_.lower == b.domain_.lower &&
           a.domain_.upper == b.domain_.upper;
  }

 private:
  std::vector<int> levels_;
  SpaceDomain domain_;
  std::vector<double> widths_;
  std::vector<std::ptrdiff_t> strides_;
  std::size_t node_count_ = 1;
};

// Nodal values of a function on a GridSpec.
struct GridFunction {
  GridSpec spec;
  Eigen::VectorXd values;

  explicit GridFunction(GridSpec s)
      : spec(std::move(s)), values(Eigen::VectorXd::Zero(Eigen::Index(spec.node_count()))) {}
  GridFunction(GridSpec s, Eigen::VectorXd v);
};

// Samples f(x) at every node; f receives the node coordinates.
template <typename F>
GridFunction sample(const GridSpec& spec, F&& f) {
  GridFunction u(spec);
  std::vector<int> index(spec.dimension());
  std::vector<double> x(spec.dimension());
  for (std::size_t n = 0; n < spec.node_count(); ++n) {
    spec.decode(n, index);
    for (std::size_t k = 0; k < x.size(); ++k) x[k] = spec.coordinate(k, index[k]);
    u.values[Eigen::Index(n)] = f(std::span<const double>(x));
  }
  return u;
}

// d-linear interpolation over the enclosing cell. Throws std::out_of_range if the point lies
// outside the grid's domain.
double multilinear_interpolate(const GridFunction& u, std::span<const double> point);

}  // namespace sabrlmm
