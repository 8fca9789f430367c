#include <cmath>
#include <set>
#include <stdexcept>

#include "doctest.h"
#include "json.hpp"
#include "mlpot/corpus.hpp"
#include "mlpot/dyadic.hpp"
#include "mlpot/weights.hpp"

using namespace mlpot;

namespace {

GridFunction indicator(const Grid& g, double a, double b) {
  return GridFunction::sample(g, [=](std::span<const double> x) { return x[0] >= a && x[0] < b ? 1.0 : 0.0; });
}

std::vector<GridFunction> abs_tuple(const FunctionTuple& f) {
  std::vector<GridFunction> out;
  for (const auto& fi : f) out.push_back(abs(fi));
  return out;
}

// brute force: product of clipped 3Q averages
double prod_norm(std::span<const GridFunction> h, const Cube& q) {
  double p = 1.0;
  for (const auto& hi : h) p *= average(hi, q.dilate3());
  return p;
}

}  // namespace

TEST_CASE("dyadic lattice") {
  const Grid g = make_grid(2, 1.0, 8);
  const DyadicLattice lat(g);
  CHECK(lat.levels() == 4);
  CHECK(lat.count(0) == 1);
  CHECK(lat.count(2) == 16);
  CHECK(lat.side(3) == 1);
  for (int j = 0; j < lat.levels(); ++j)
    for (std::size_t c = 0; c < lat.count(j); ++c) CHECK(lat.index_of(j, lat.cube(j, c).lo) == c);
}

TEST_CASE("m3d examples") {
  const Grid g = make_grid(1, 2.0, 32);
  const DyadicLattice lat(g);
  const std::vector<GridFunction> consts{GridFunction::constant(g, 2.0), GridFunction::constant(g, 0.5)};
  const auto mc = m3d(consts, lat);
  for (double v : mc.values()) CHECK(v == doctest::Approx(1.0));

  const std::vector<GridFunction> one{indicator(g, 0, 1)};
  const auto mi = m3d(one, lat);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.center(static_cast<int>(i));
    if (x > 0 && x < 1) CHECK(mi[i] >= 1.0 / 3.0 - 1e-12);
  }

  const auto corpus = make_corpus(g, 2, 5, 4);
  for (const auto& f : corpus) {
    const auto h = abs_tuple(f);
    std::vector<GridFunction> big{h[0] + GridFunction::constant(g, 0.2), h[1]};
    const auto a = m3d(h, lat);
    const auto b = m3d(big, lat);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(a[i] <= b[i] + 1e-14);
  }
}

TEST_CASE("constant data selects nothing beyond the base") {
  const Grid g = make_grid(1, 2.0, 32);
  const std::vector<GridFunction> h{GridFunction::constant(g, 3.0)};
  const auto cz = cz_decompose(h, default_cz_base(1, 1), DyadicLattice(g));
  CHECK(cz.levels.empty());
  CHECK(cz.base.e_cells == g.size());
  CHECK(cz.max_q_over_e() == doctest::Approx(1.0));
}

TEST_CASE("CZ invariants on random tuples") {
  for (int m : {1, 2}) {
    const Grid g = make_grid(1, 2.0, 64);
    const DyadicLattice lat(g);
    const double a = default_cz_base(1, m);
    for (const auto& f : make_corpus(g, m, 5, 10 + m)) {
      const auto h = abs_tuple(f);
      const auto cz = cz_decompose(h, a, lat);
      const auto md = m3d(h, lat);
      std::size_t e_total = cz.base.e_cells;
      for (const auto& lv : cz.levels) {
        std::vector<int> cover(g.size(), 0);
        for (const auto& c : lv.cubes) {
          const double pn = prod_norm(h, c.cube);
          CHECK(pn == doctest::Approx(c.prod_norm).epsilon(1e-12));
          CHECK(c.prod_norm > lv.threshold);
          CHECK(c.prod_norm <= std::pow(2.0, m) * lv.threshold * (1 + 1e-12));
          for_each_cell(g, c.cube.clip(g), [&](std::size_t i) { ++cover[i]; });
          e_total += c.e_cells;
        }
        for (std::size_t i = 0; i < g.size(); ++i) {
          CHECK(cover[i] <= 1);
          CHECK((cover[i] == 1) == (md[i] > lv.threshold));
        }
      }
      CHECK(e_total == g.size());
      CHECK(std::isfinite(cz.max_q_over_e()));
    }
  }
}

TEST_CASE("E sets are Q minus the next level set") {
  const Grid g = make_grid(1, 2.0, 64);
  const auto f = make_corpus(g, 2, 1, 77).front();
  const auto h = abs_tuple(f);
  const auto cz = cz_decompose(h, default_cz_base(1, 2), DyadicLattice(g));
  const auto md = m3d(h, DyadicLattice(g));
  std::set<std::size_t> seen;
  for (std::size_t l = 0; l < cz.levels.size(); ++l) {
    const auto& lv = cz.levels[l];
    const double next = lv.threshold * cz.a;
    for (const auto& c : lv.cubes) {
      std::size_t count = 0;
      for_each_cell(g, c.cube.clip(g), [&](std::size_t i) {
        if (md[i] > next) return;
        ++count;
        CHECK(seen.insert(i).second);
      });
      CHECK(count == c.e_cells);
    }
  }
}

TEST_CASE("two bumps are separated") {
  const Grid g = make_grid(1, 2.0, 64);
  const std::vector<GridFunction> h{indicator(g, -1.75, -1.5) + indicator(g, 1.5, 1.75)};
  const auto cz = cz_decompose(h, 4.0, DyadicLattice(g));
  REQUIRE_FALSE(cz.levels.empty());
  const auto& top = cz.levels.back();
  for (const auto& c : top.cubes) {
    const CellRange r = c.cube.clip(g);
    const double lo = g.center(r.lo[0]);
    const double hi = g.center(r.hi[0] - 1);
    CHECK_FALSE((lo < -1.5 && hi > 1.5));
  }
}

TEST_CASE("CZ rejects bad input") {
  const Grid g = make_grid(1, 2.0, 16);
  const std::vector<GridFunction> z{GridFunction::constant(g, 0.0)};
  CHECK_THROWS_AS(cz_decompose(z, 4.0, DyadicLattice(g)), std::invalid_argument);
  const std::vector<GridFunction> o{GridFunction::constant(g, 1.0)};
  CHECK_THROWS_AS(cz_decompose(o, 1.0, DyadicLattice(g)), std::invalid_argument);
}

TEST_CASE("CZ JSON export") {
  const Grid g = make_grid(1, 2.0, 32);
  const auto h = abs_tuple(make_corpus(g, 2, 1, 3).front());
  const auto cz = cz_decompose(h, default_cz_base(1, 2), DyadicLattice(g));
  const auto j = nlohmann::json::parse(cz_to_json(cz));
  CHECK(j["a"].get<double>() == cz.a);
  CHECK(j["levels"].size() == cz.levels.size());
  for (const auto& lv : j["levels"]) {
    long total = 0;
    for (const auto& run : lv["E_masks"]) total += run[1].get<long>();
    CHECK(total == static_cast<long>(g.size()));
    for (const auto& c : lv["cubes"]) CHECK(c.contains("corner"));
  }
}

TEST_CASE("discretization zero slot") {
  const Grid g = make_grid(1, 2.0, 32);
  const Kernel k = Kernel::fractional(1, 2, 1.0);
  const std::vector<GridFunction> f{indicator(g, 0, 1), GridFunction::constant(g, 0.0)};
  const auto r = discretization_check(k, f, GridFunction::constant(g, 1.0), nullptr, DiscretizationParams{}, 32.0);
  CHECK(r.lhs == 0.0);
  CHECK(r.rhs == 0.0);
}

TEST_CASE("discretization ratio is finite and refinement stable") {
  const Kernel k = Kernel::fractional(1, 1, 0.5);
  std::vector<double> ratios;
  for (int N : {64, 128}) {
    const Grid g = make_grid(1, 2.0, N);
    const std::vector<GridFunction> f{indicator(g, 0, 1)};
    const auto r = discretization_check(k, f, GridFunction::constant(g, 1.0), nullptr, DiscretizationParams{},
                                        default_cz_base(1, 1));
    CHECK(std::isfinite(r.ratio));
    CHECK(r.ratio > 0.0);
    ratios.push_back(r.ratio);
  }
  CHECK(std::abs(ratios[1] / ratios[0] - 1.0) < 0.25);
}

TEST_CASE("discretization with a commutator") {
  const Grid g = make_grid(1, 2.0, 64);
  const Kernel k = Kernel::fractional(1, 2, 1.0);
  const auto f = make_corpus(g, 2, 1, 5).front();
  const auto b = gen_bmo_log(g);
  DiscretizationParams p;
  p.ell = 1;
  p.j = 1;
  p.q = 0.6;
  const auto r = discretization_check(k, f, GridFunction::constant(g, 1.0), &b, p, default_cz_base(1, 2));
  CHECK(std::isfinite(r.ratio));
  CHECK(r.rhs > 0.0);
}

TEST_CASE("a sweep changes the discretization ratio by a bounded factor") {
  const Grid g = make_grid(1, 2.0, 64);
  const Kernel k = Kernel::fractional(1, 2, 1.0);
  for (const auto& f : make_corpus(g, 2, 5, 6)) {
    const auto u = GridFunction::constant(g, 1.0);
    const auto r1 = discretization_check(k, f, u, nullptr, DiscretizationParams{}, std::pow(4.0, 2));
    const auto r2 = discretization_check(k, f, u, nullptr, DiscretizationParams{}, 2 * std::pow(4.0, 2));
    const double change = std::max(r1.ratio / r2.ratio, r2.ratio / r1.ratio);
    CHECK(change < 4.0);
  }
}

TEST_CASE("dyadic tail check") {
  const Grid g = make_grid(1, 2.0, 64);
  const Kernel k = Kernel::fractional(1, 1, 0.5);
  const NormSpec l1 = NormSpec::lebesgue(1);
  CHECK(dyadic_tail_check(k, Cube{{0, 0, 0}, 16}, l1, GridFunction::constant(g, 0.0), 1.0) == 0.0);
  std::vector<double> r;
  for (int side : {4, 8, 16, 32}) {
    r.push_back(dyadic_tail_check(k, Cube{{32, 0, 0}, side}, l1, GridFunction::constant(g, 1.0), 1.0));
    CHECK(std::isfinite(r.back()));
  }
  for (std::size_t i = 1; i < r.size(); ++i) CHECK(std::abs(r[i] / r[0] - 1.0) < 0.2);
  const double single = dyadic_tail_check(k, Cube{{32, 0, 0}, 1}, l1, GridFunction::constant(g, 1.0), 1.0);
  CHECK(std::isfinite(single));
  CHECK_THROWS(dyadic_tail_check(k, Cube{{3, 0, 0}, 4}, l1, GridFunction::constant(g, 1.0), 1.0));
}
