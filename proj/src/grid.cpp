#include "sabrlmm/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sabrlmm {

SpaceDomain SpaceDomain::standard(std::size_t forward_count, double f_max, double v_max) {
  SpaceDomain d;
  d.lower.assign(forward_count + 1, 0.0);
  d.upper.assign(forward_count, f_max);
  d.upper.push_back(v_max);
  return d;
}

GridSpec::GridSpec(std::vector<int> levels, SpaceDomain domain)
    : levels_(std::move(levels)), domain_(std::move(domain)) {
  const std::size_t d = levels_.size();
  if (d == 0) throw std::invalid_argument("grid needs at least one dimension");
  if (domain_.lower.size() != d || domain_.upper.size() != d)
    throw std::invalid_argument("grid levels and domain dimension differ");
  widths_.resize(d);
  strides_.resize(d);
  for (std::size_t k = 0; k < d; ++k) {
    if (levels_[k] < 0 || levels_[k] > 30) throw std::invalid_argument("grid level out of range");
    if (!(domain_.lower[k] < domain_.upper[k]))
      throw std::invalid_argument("domain lower bound must be below upper bound");
    widths_[k] = std::ldexp(domain_.length(k), -levels_[k]);
  }
  for (std::size_t k = d; k-- > 0;) {
    strides_[k] = std::ptrdiff_t(node_count_);
    node_count_ *= std::size_t(points(k));
  }
}

void GridSpec::decode(std::size_t node, std::span<int> index) const {
  for (std::size_t k = 0; k < dimension(); ++k) {
    index[k] = int(node / std::size_t(strides_[k]));
    node -= std::size_t(index[k]) * std::size_t(strides_[k]);
  }
}

GridFunction::GridFunction(GridSpec s, Eigen::VectorXd v) : spec(std::move(s)), values(std::move(v)) {
  if (values.size() != Eigen::Index(spec.node_count()))
    throw std::invalid_argument("grid function size does not match its grid");
}

double multilinear_interpolate(const GridFunction& u, std::span<const double> point) {
  const GridSpec& g = u.spec;
  const std::size_t d = g.dimension();
  if (point.size() != d) throw std::invalid_argument("interpolation point has wrong dimension");

  std::vector<double> weight(d);
  std::ptrdiff_t origin = 0;
  for (std::size_t k = 0; k < d; ++k) {
    const double lo = g.domain().lower[k];
    const double hi = g.domain().upper[k];
    if (!(point[k] >= lo && point[k] <= hi))
      throw std::out_of_range("interpolation point outside domain in dimension " + std::to_string(k));
    const double s = (point[k] - lo) / g.width(k);
    const int cell = std::clamp(int(std::floor(s)), 0, g.last_index(k) - 1);
    weight[k] = s - cell;
    origin += cell * g.stride(k);
  }

  double value = 0.0;
  for (std::size_t corner = 0; corner < (std::size_t(1) << d); ++corner) {
    double w = 1.0;
    std::ptrdiff_t node = origin;
    for (std::size_t k = 0; k < d; ++k) {
      if (corner >> k & 1U) {
        w *= weight[k];
        node += g.stride(k);
      } else {
        w *= 1.0 - weight[k];
      }
    }
    if (w != 0.0) value += w * u.values[node];
  }
  return value;
}

}  // namespace sabrlmm
