#include <cmath>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "mlpot/grid.hpp"
#include "mlpot/orlicz.hpp"
#include "mlpot/weights.hpp"

using namespace mlpot;

namespace {

GridFunction random_function(const Grid& g, std::mt19937_64& rng, double lo = 0.0, double hi = 3.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(g.size());
  for (auto& x : v) x = u(rng);
  return GridFunction(g, std::move(v));
}

Cube random_cube(const Grid& g, std::mt19937_64& rng) {
  const int N = g.cells_per_axis();
  std::uniform_int_distribution<int> side(1, N);
  const int s = side(rng);
  std::uniform_int_distribution<int> pos(0, N - s);
  Cube q;
  q.side = s;
  for (int d = 0; d < g.dim(); ++d) q.lo[d] = pos(rng);
  return q;
}

}  // namespace

TEST_CASE("young_eval examples") {
  CHECK(young_eval(YoungFunction::power_log(1, 1), 1.0) == doctest::Approx(1.0));
  CHECK(young_eval(YoungFunction::exp(), 0.0) == 0.0);
  const double e = std::exp(1.0);
  CHECK(young_eval(YoungFunction::power_log(2, 1), e) == doctest::Approx(2 * e * e));
  CHECK(young_eval(YoungFunction::power_log(2.5, 0), 1.7) == std::pow(1.7, 2.5));
}

TEST_CASE("young_inverse examples") {
  CHECK(young_inverse(YoungFunction::identity(), 5.0) == doctest::Approx(5.0));
  CHECK(young_inverse(YoungFunction::power_log(2, 0), 9.0) == doctest::Approx(3.0));
  const double e = std::exp(1.0);
  const auto b = YoungFunction::power_log(1, 1);
  CHECK(young_inverse(b, 2 * e) == doctest::Approx(e).epsilon(1e-10));
  for (double s : {1e-3, 0.5, 3.0, 1e4}) CHECK(young_eval(b, young_inverse(b, s)) == doctest::Approx(s).epsilon(1e-10));
  CHECK_THROWS(young_inverse(b, -1.0));
}

TEST_CASE("young functions are convex and vanish at zero") {
  for (const auto& y : {YoungFunction::power_log(1, 1), YoungFunction::power_log(2, 0.5), YoungFunction::exp(),
                        YoungFunction::exp_power(2), YoungFunction::iterate(YoungFunction::power_log(1, 1), 2)}) {
    CHECK(y(0.0) == 0.0);
    CHECK(y.looks_convex());
  }
  CHECK(YoungFunction::power_log(1, 1).submultiplicative());
  CHECK(YoungFunction::identity().submultiplicative());
  CHECK_FALSE(YoungFunction::exp().submultiplicative());
}

TEST_CASE("norm spec parsing round trips") {
  CHECK(NormSpec::parse("L^2").is_lebesgue());
  CHECK(NormSpec::parse("L^2").exponent() == 2.0);
  CHECK(NormSpec::parse("L").exponent() == 1.0);
  const NormSpec a = NormSpec::parse("Lp{1.5}logL{0.5}");
  CHECK_FALSE(a.is_lebesgue());
  CHECK(a.young().p() == 1.5);
  CHECK(a.young().alpha() == 0.5);
  CHECK(NormSpec::parse("expL").young().family() == YoungFunction::Family::Exp);
  CHECK(NormSpec::parse("expL^{1/2}").young().family() == YoungFunction::Family::ExpPower);
  const NormSpec c = NormSpec::parse("B^2(Lp{1}logL{1})");
  CHECK(c.young().family() == YoungFunction::Family::Composed);
  CHECK(c.young()(3.0) == doctest::Approx(YoungFunction::power_log(1, 1)(YoungFunction::power_log(1, 1)(3.0))));
  for (const char* s : {"L^2", "Lp{1.5}logL{0.5}", "expL", "B^2(Lp{1}logL{1})"})
    CHECK(NormSpec::parse(NormSpec::parse(s).to_string()).to_string() == NormSpec::parse(s).to_string());
  CHECK_THROWS(NormSpec::parse("Lq"));
  CHECK_THROWS(NormSpec::parse("L^0.5"));
}

TEST_CASE("luxemburg closed forms") {
  const Grid g = make_grid(1, 1.0, 16);
  const Cube q = Cube::whole(g);
  CHECK(luxemburg_norm(GridFunction::constant(g, 3.0), q, NormSpec::lebesgue(1)) == doctest::Approx(3.0));
  CHECK(std::abs(luxemburg_norm(GridFunction::constant(g, 1.0), q, NormSpec::parse("expL")) - 1.0 / std::log(2.0)) <
        1e-8);
  const auto two = GridFunction::sample(g, [](std::span<const double> x) { return x[0] < 0.0 ? 2.0 : 0.0; });
  CHECK(std::abs(luxemburg_norm(two, q, NormSpec::lebesgue(2)) - std::sqrt(2.0)) < 1e-8);
  CHECK(std::abs(luxemburg_norm(two, q, NormSpec::orlicz(YoungFunction::power_log(2, 0))) - std::sqrt(2.0)) < 1e-8);
}

TEST_CASE("luxemburg norm of a constant matches the inverse Young function") {
  const Grid g = make_grid(1, 1.0, 8);
  const auto one = GridFunction::constant(g, 1.0);
  const auto b = YoungFunction::power_log(1, 1);
  CHECK(luxemburg_norm(one, Cube::whole(g), NormSpec::orlicz(b)) == doctest::Approx(1.0 / young_inverse(b, 1.0)));
}

TEST_CASE("t^r Young spec agrees with the L^r fast path") {
  std::mt19937_64 rng(7);
  const Grid g = make_grid(2, 1.0, 16);
  std::uniform_real_distribution<double> rexp(1.0, 4.0);
  for (int trial = 0; trial < 100; ++trial) {
    const double r = rexp(rng);
    const auto f = random_function(g, rng);
    const Cube q = random_cube(g, rng);
    const double fast = luxemburg_norm(f, q, NormSpec::lebesgue(r));
    const double slow = luxemburg_norm(f, q, NormSpec::orlicz(YoungFunction::power_log(r, 0)));
    CHECK(std::abs(fast - slow) <= 1e-9 * std::max(1.0, fast));
  }
}

TEST_CASE("luxemburg homogeneity and monotonicity") {
  std::mt19937_64 rng(11);
  const Grid g = make_grid(1, 1.0, 32);
  for (const char* s : {"L^1.5", "Lp{1}logL{1}", "expL", "Lp{2}logL{0.5}", "expL^{1/2}"}) {
    const NormSpec x = NormSpec::parse(s);
    const auto f = random_function(g, rng);
    const Cube q = Cube::whole(g);
    const double base = luxemburg_norm(f, q, x);
    CHECK(luxemburg_norm(2.5 * f, q, x) == doctest::Approx(2.5 * base).epsilon(1e-9));
    CHECK(luxemburg_norm((-1.0) * f, q, x) == doctest::Approx(base).epsilon(1e-9));
    const auto bigger = f + GridFunction::constant(g, 0.3);
    CHECK(luxemburg_norm(bigger, q, x) >= base - 1e-9);
  }
  CHECK(luxemburg_norm(GridFunction::constant(g, 0.0), Cube::whole(g), NormSpec::parse("expL")) == 0.0);
}

TEST_CASE("L log L norms are dominated by twice the L^2 norm") {
  std::mt19937_64 rng(3);
  const Grid g = make_grid(1, 1.0, 64);
  for (int trial = 0; trial < 20; ++trial) {
    const auto f = random_function(g, rng, 0.0, 10.0);
    const Cube q = random_cube(g, rng);
    const double l2 = luxemburg_norm(f, q, NormSpec::lebesgue(2));
    for (double a : {0.5, 1.0}) CHECK(luxemburg_norm(f, q, NormSpec::llogl(1, a)) <= 2.0 * l2 * (1 + 1e-9));
  }
}

TEST_CASE("holder check") {
  const Grid g = make_grid(1, 1.0, 32);
  const Cube q = Cube::whole(g);
  const auto one = GridFunction::constant(g, 1.0);
  const auto l2 = NormSpec::lebesgue(2);
  const auto l1 = NormSpec::lebesgue(1);
  CHECK(holder_check(one, one, q, l2, l2, l1).ratio == doctest::Approx(1.0));

  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const auto f = random_function(g, rng);
    const auto h = random_function(g, rng);
    const Cube c = random_cube(g, rng);
    CHECK(holder_check(f, h, c, l2, l2, l1).ratio <= 1.0 + 1e-9);
  }
  const auto llogl = NormSpec::llogl(1, 1);
  const auto expl = NormSpec::parse("expL");
  for (int trial = 0; trial < 20; ++trial) {
    const auto f = random_function(g, rng, 0.0, 20.0);
    CHECK(holder_check(f, one, random_cube(g, rng), llogl, expl, l1).ratio <= 2.0);
  }
  CHECK_THROWS_AS(holder_check(one, one, q, l1, l1, l2), std::invalid_argument);
}

TEST_CASE("mean oscillation of log|x| against L log L") {
  const Grid g = make_grid(1, 2.0, 64);
  const auto b = gen_bmo_log(g);
  const auto fam = cube_family(g, FamilyKind::Dyadic);
  const double bstar = bmo_norm(b, fam).l1;
  std::mt19937_64 rng(9);
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const auto f = random_function(g, rng, 0.0, 5.0);
    for (const auto& q : fam) {
      const double bq = average(b, q);
      const auto osc = map(b, [bq](double x) { return std::abs(x - bq); });
      const double lhs = average(osc * f, q);
      const double rhs = bstar * luxemburg_norm(f, q, NormSpec::llogl(1, 1));
      if (rhs > 0) worst = std::max(worst, lhs / rhs);
    }
  }
  CHECK(std::isfinite(worst));
  CHECK(worst < 10.0);
}
