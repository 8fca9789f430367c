#include <cmath>
#include <set>
#include <sstream>

#include "doctest.h"
#include "mlpot/grid.hpp"

using namespace mlpot;

TEST_CASE("grid construction") {
  const Grid g = make_grid(1, 1.0, 8);
  CHECK(g.cell_width() == doctest::Approx(0.25));
  for (int k = 0; k < 8; ++k) CHECK(g.center(k) == doctest::Approx(-1.0 + 0.125 + 0.25 * k));

  const Grid g2 = make_grid(2, 2.0, 4);
  CHECK(g2.size() == 16);
  CHECK(g2.cell_width() == doctest::Approx(1.0));

  CHECK_THROWS_AS(make_grid(1, 1.0, 3), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(4, 1.0, 4), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(1, -1.0, 4), std::invalid_argument);
}

TEST_CASE("flatten and unflatten are inverse") {
  const Grid g = make_grid(3, 1.0, 4);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(g.flatten(g.unflatten(i)) == i);
}

TEST_CASE("integrate examples") {
  const Grid g = make_grid(1, 1.0, 8);
  CHECK(integrate(GridFunction::constant(g, 0.0)) == 0.0);
  CHECK(integrate(GridFunction::constant(g, 1.0)) == doctest::Approx(2.0));
  const auto ind = [](std::span<const double> x) { return x[0] >= 0.0 && x[0] < 1.0 ? 1.0 : 0.0; };
  CHECK(integrate(GridFunction::sample(g, ind)) == doctest::Approx(1.0));
  CHECK(integrate(GridFunction::sample(make_grid(1, 1.0, 16), ind)) == doctest::Approx(1.0));
}

TEST_CASE("integrate is linear and additive over dyadic children") {
  const Grid g = make_grid(2, 1.0, 16);
  const auto f = GridFunction::sample(g, [](std::span<const double> x) { return std::sin(3 * x[0]) + x[1] * x[1]; });
  const auto h = GridFunction::sample(g, [](std::span<const double> x) { return std::exp(x[0] - x[1]); });
  const Cube q{{4, 8, 0}, 8};
  const double lhs = integrate(2.5 * f + (-1.5) * h, q);
  const double rhs = 2.5 * integrate(f, q) - 1.5 * integrate(h, q);
  CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(rhs)));

  double children = 0.0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) children += integrate(f, Cube{{4 + 4 * a, 8 + 4 * b, 0}, 4});
  CHECK(children == doctest::Approx(integrate(f, q)).epsilon(1e-14));
}

TEST_CASE("midpoint rule converges at second order") {
  const auto fn = [](std::span<const double> x) { return std::exp(x[0]); };
  const double exact = std::exp(1.0) - std::exp(-1.0);
  std::vector<double> err;
  for (int N : {8, 16, 32}) err.push_back(std::abs(integrate(GridFunction::sample(make_grid(1, 1.0, N), fn)) - exact));
  CHECK(std::log2(err[0] / err[1]) == doctest::Approx(2.0).epsilon(0.05));
  CHECK(std::log2(err[1] / err[2]) == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("cube families") {
  CHECK(cube_family(make_grid(1, 1.0, 4), FamilyKind::Dyadic).size() == 7);
  CHECK(cube_family(make_grid(2, 1.0, 4), FamilyKind::Dyadic).size() == 21);

  // brute force: every (center point, side) with side 1..N, clipped, deduplicated
  const Grid g = make_grid(1, 1.0, 4);
  std::set<std::pair<int, int>> expect;
  for (int s = 1; s <= 4; ++s) {
    if (s % 2 == 1) {
      for (int c = 0; c < 4; ++c) {
        const int lo = std::max(0, c - (s - 1) / 2);
        const int hi = std::min(4, c + (s + 1) / 2);
        expect.insert({lo, hi});
      }
    } else {
      for (int v = 0; v <= 4; ++v) {
        const int lo = std::max(0, v - s / 2);
        const int hi = std::min(4, v + s / 2);
        if (hi > lo) expect.insert({lo, hi});
      }
    }
  }
  const auto fam = cube_family(g, FamilyKind::Centered);
  std::set<std::pair<int, int>> got;
  for (const auto& q : fam) {
    const CellRange r = q.clip(g);
    got.insert({r.lo[0], r.hi[0]});
  }
  CHECK(got == expect);
}

TEST_CASE("every cell is covered by the centered family") {
  const Grid g = make_grid(2, 1.0, 8);
  std::vector<int> hit(g.size(), 0);
  for (const auto& q : cube_family(g, FamilyKind::Centered))
    for_each_cell(g, q.clip(g), [&](std::size_t i) { hit[i] = 1; });
  for (int h : hit) CHECK(h == 1);
}

TEST_CASE("cube dilation and clipping") {
  const Grid g = make_grid(1, 1.0, 8);
  const Cube q{{0, 0, 0}, 2};
  const Cube d = q.dilate3();
  CHECK(d.side == 6);
  CHECK(d.lo[0] == -2);
  CHECK(d.clipped(g));
  CHECK(d.clipped_measure(g) == doctest::Approx(1.0));
  CHECK(d.measure(g) == doctest::Approx(1.5));
}

TEST_CASE("prefix sums match direct sums") {
  const Grid g = make_grid(3, 1.0, 8);
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::sin(0.37 * static_cast<double>(i));
  const PrefixSum ps(g, v);
  const CellRange r{{1, 2, 3}, {5, 8, 6}};
  double direct = 0.0;
  for_each_cell(g, r, [&](std::size_t i) { direct += v[i]; });
  CHECK(ps.sum(r) == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("csv round trip") {
  const Grid g = make_grid(2, 1.5, 4);
  const auto f = GridFunction::sample(g, [](std::span<const double> x) { return x[0] * 0.1 + x[1] / 3.0; });
  std::stringstream ss;
  write_csv(ss, f);
  const GridFunction back = read_csv(ss);
  CHECK(back.grid() == g);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(back[i] == f[i]);
}

TEST_CASE("mismatched grids are rejected") {
  const auto a = GridFunction::constant(make_grid(1, 1.0, 4), 1.0);
  const auto b = GridFunction::constant(make_grid(1, 1.0, 8), 1.0);
  CHECK_THROWS(a + b);
}
