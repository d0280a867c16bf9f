#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "sabrlmm/grid.hpp"

using namespace sabrlmm;

TEST_SUITE("grid") {

TEST_CASE("layout") {
  const GridSpec g({2, 3}, SpaceDomain::standard(1));
  CHECK(g.node_count() == 5 * 9);
  CHECK(g.stride(1) == 1);
  CHECK(g.stride(0) == 9);
  CHECK(g.width(0) == doctest::Approx(0.025));
  CHECK(g.width(1) == doctest::Approx(3.5 / 8));
  std::vector<int> idx(2);
  g.decode(9 * 3 + 7, idx);
  CHECK(idx[0] == 3);
  CHECK(idx[1] == 7);
  CHECK(g.coordinate(1, 8) == doctest::Approx(3.5));
  CHECK_THROWS_AS(GridSpec({2}, SpaceDomain::standard(1)), std::invalid_argument);
  CHECK_THROWS_AS(GridSpec({-1, 2}, SpaceDomain::standard(1)), std::invalid_argument);
}

TEST_CASE("level zero has the two endpoints only") {
  const GridSpec g({0, 0, 4}, SpaceDomain::standard(2));
  CHECK(g.points(0) == 2);
  CHECK(g.node_count() == 2 * 2 * 17);
}

TEST_CASE("interpolation is exact on multilinear functions") {
  std::mt19937_64 rng(11);
  for (std::size_t d = 1; d <= 4; ++d) {
    std::vector<int> levels(d);
    for (std::size_t k = 0; k < d; ++k) levels[k] = 1 + int(k);
    const GridSpec g(levels, SpaceDomain::standard(d - 1));
    // Product of affine factors plus a constant; multilinear by construction.
    std::vector<double> c0(d), c1(d);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    for (std::size_t k = 0; k < d; ++k) c0[k] = coef(rng), c1[k] = coef(rng);
    auto f = [&](std::span<const double> x) {
      double prod = 1.0;
      for (std::size_t k = 0; k < d; ++k) prod *= c0[k] + c1[k] * x[k];
      return prod + 0.3;
    };
    const GridFunction u = sample(g, f);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> x(d);
      for (std::size_t k = 0; k < d; ++k)
        x[k] = std::uniform_real_distribution<double>(0.0, g.domain().upper[k])(rng);
      CHECK(multilinear_interpolate(u, x) == doctest::Approx(f(x)).epsilon(1e-12));
    }
  }
}

TEST_CASE("interpolation at nodes and on the domain edge") {
  const GridSpec g({3, 2}, SpaceDomain::standard(1));
  const GridFunction u = sample(g, [](std::span<const double> x) { return std::sin(40 * x[0]) + x[1] * x[1]; });
  std::vector<int> idx(2);
  for (std::size_t n = 0; n < g.node_count(); ++n) {
    g.decode(n, idx);
    const std::vector<double> x = {g.coordinate(0, idx[0]), g.coordinate(1, idx[1])};
    CHECK(multilinear_interpolate(u, x) == doctest::Approx(u.values[Eigen::Index(n)]).epsilon(1e-14));
  }
  const std::vector<double> outside = {0.1000001, 1.0};
  CHECK_THROWS_AS(multilinear_interpolate(u, outside), std::out_of_range);
  const std::vector<double> below = {0.05, -1e-9};
  CHECK_THROWS_AS(multilinear_interpolate(u, below), std::out_of_range);
  const std::vector<double> wrong = {0.05};
  CHECK_THROWS_AS(multilinear_interpolate(u, wrong), std::invalid_argument);
}

}
