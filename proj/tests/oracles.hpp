#pragma once

// Brute-force references shared by the unit and acceptance tests.

#include <set>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sabrlmm/pde.hpp"
#include "sabrlmm/sparse.hpp"

namespace sabrlmm::oracle {

// Row-major flat index, computed here rather than through GridSpec::stride.
inline std::size_t flat(const std::vector<int>& idx, const std::vector<int>& points) {
  std::size_t n = 0;
  for (std::size_t k = 0; k < idx.size(); ++k) n = n * std::size_t(points[k]) + std::size_t(idx[k]);
  return n;
}

// Dense matrix of the interior stencil assembled node by node from coefficients_at (dt = 1);
// rows of boundary nodes are zero.
inline Eigen::MatrixXd dense_operator(const GridSpec& g, const PdeProblem& problem) {
  const std::size_t d = g.dimension(), m = d - 1;
  std::vector<int> points(d);
  for (std::size_t k = 0; k < d; ++k) points[k] = g.points(k);
  const auto n = Eigen::Index(g.node_count());
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  std::vector<int> idx(d);
  for (std::size_t p = 0; p < g.node_count(); ++p) {
    g.decode(p, idx);
    bool interior = true;
    for (std::size_t k = 0; k < d; ++k) interior = interior && idx[k] > 0 && idx[k] < points[k] - 1;
    if (!interior) continue;
    std::vector<double> x(d);
    for (std::size_t k = 0; k < d; ++k) x[k] = g.coordinate(k, idx[k]);
    const PdeCoefficients c = coefficients_at(x, problem, 1.0, g);
    const auto row = Eigen::Index(p);
    auto at = [&](std::vector<std::pair<std::size_t, int>> shifts) {
      std::vector<int> j = idx;
      for (auto [k, s] : shifts) j[k] += s;
      return Eigen::Index(flat(j, points));
    };
    w(row, row) -= 2.0 * c.d;
    w(row, at({{m, 1}})) += c.d;
    w(row, at({{m, -1}})) += c.d;
    for (std::size_t i = 0; i < m; ++i) {
      w(row, row) -= 2.0 * c.b[i];
      w(row, at({{i, 1}})) += c.b[i] + c.r[i];
      w(row, at({{i, -1}})) += c.b[i] - c.r[i];
      w(row, at({{i, 1}, {m, 1}})) += c.a[i];
      w(row, at({{i, -1}, {m, -1}})) += c.a[i];
      w(row, at({{i, 1}, {m, -1}})) -= c.a[i];
      w(row, at({{i, -1}, {m, 1}})) -= c.a[i];
    }
    std::size_t q = 0;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i + 1; j < m; ++j, ++q) {
        w(row, at({{i, 1}, {j, 1}})) += c.psi[q];
        w(row, at({{i, -1}, {j, -1}})) += c.psi[q];
        w(row, at({{i, 1}, {j, -1}})) -= c.psi[q];
        w(row, at({{i, -1}, {j, 1}})) -= c.psi[q];
      }
  }
  return w;
}

// Union of all grid nodes with |l|_1 <= n, nodes written as integers on the level-n lattice.
inline std::size_t brute_union(int n, int d) {
  std::set<std::vector<int>> nodes;
  for (int s = 0; s <= n; ++s)
    for (const MultiIndex& l : enumerate_level(d, s)) {
      std::vector<int> idx(static_cast<std::size_t>(d), 0);
      while (true) {
        std::vector<int> key(static_cast<std::size_t>(d));
        for (std::size_t k = 0; k < key.size(); ++k) key[k] = idx[k] << (n - l.levels[k]);
        nodes.insert(key);
        std::size_t k = 0;
        for (; k < idx.size(); ++k) {
          if (++idx[k] <= (1 << l.levels[k])) break;
          idx[k] = 0;
        }
        if (k == idx.size()) break;
      }
    }
  return nodes.size();
}

inline std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * std::uint64_t(n - k + i) / std::uint64_t(i);
  return r;
}

}  // namespace sabrlmm::oracle
