#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <tuple>

#include "doctest.h"
#include "json.hpp"
#include "mlpot/error.hpp"
#include "mlpot/verify.hpp"
#include "mlpot/weights.hpp"

using namespace mlpot;

namespace {

HarnessConfig small(int m, int ell = 0) {
  HarnessConfig c;
  c.m = m;
  c.N = 32;
  c.ell = ell;
  c.corpus_size = 6;
  c.seed = 3;
  return c;
}

TestingCondition basic_condition(const Grid& g) {
  TestingCondition tc;
  tc.x = NormSpec::llogl(2.0, 1.5);
  tc.y = {{NormSpec::llogl(2.0, 1.5), NormSpec::llogl(2.0, 1.5)},
          {NormSpec::llogl(2.0, 1.5), NormSpec::llogl(2.0, 1.5)}};
  tc.u = GridFunction::constant(g, 1.0);
  tc.v = {GridFunction::constant(g, 1.0), GridFunction::constant(g, 2.0)};
  tc.kernel = Kernel::fractional(1, 2, 1.0);
  tc.exps = ExponentTuple{{2.0, 2.0}, 1.0};
  tc.family = cube_family(g, FamilyKind::Dyadic);
  return tc;
}

}  // namespace

TEST_CASE("safe ratio") {
  CHECK(safe_ratio(0.0, 0.0) == 0.0);
  CHECK(std::isinf(safe_ratio(1.0, 0.0)));
  CHECK(safe_ratio(3.0, 2.0) == 1.5);
}

TEST_CASE("weak Lorentz quasinorm") {
  const Grid g = make_grid(1, 2.0, 64);
  const auto one = GridFunction::constant(g, 1.0);
  // 3 on [0, 1): sup is 3 |E|^{1/p}
  const auto f = GridFunction::sample(g, [](std::span<const double> x) { return x[0] >= 0 && x[0] < 1 ? 3.0 : 0.0; });
  for (double p : {0.5, 1.0, 2.0}) CHECK(lorentz_weak_quasinorm(f, one, p) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(lorentz_weak_quasinorm(GridFunction::constant(g, 0.0), one, 1.0) == 0.0);
  CHECK_THROWS(lorentz_weak_quasinorm(f, one, 0.0));

  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  std::vector<double> vals(g.size());
  for (auto& v : vals) v = std::pow(d(rng), 3.0) * 5.0;
  const GridFunction h(g, vals);
  const auto u = GridFunction::sample(g, [](std::span<const double> x) { return 1.0 + x[0] * x[0]; });
  const double p = 1.5;
  const double exact = lorentz_weak_quasinorm(h, u, p);
  const double top = *std::max_element(vals.begin(), vals.end());
  double scan = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const double lam = top * k / 10000.0;
    double mass = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
      if (vals[i] > lam) mass += u[i] * g.cell_volume();
    scan = std::max(scan, lam * std::pow(mass, 1.0 / p));
  }
  CHECK(scan <= exact * (1 + 1e-12));
  CHECK(scan >= exact * (1 - 1e-3));
}

TEST_CASE("testing condition W") {
  const Grid g = make_grid(1, 2.0, 32);
  TestingCondition tc = basic_condition(g);
  const double w = testing_condition_W(tc);
  CHECK(std::isfinite(w));
  CHECK(w > 0.0);

  tc.u = GridFunction::constant(g, 0.0);
  CHECK(testing_condition_W(tc) == 0.0);

  tc.u = GridFunction::sample(g, [](std::span<const double> x) { return 1.0 + std::abs(x[0]); });
  const double w1 = testing_condition_W(tc);
  tc.u = 2.0 * tc.u;
  CHECK(testing_condition_W(tc) == doctest::Approx(2.0 * w1).epsilon(1e-9));

  tc.v[1] = GridFunction::sample(g, [](std::span<const double> x) { return x[0] > 0 ? 1.0 : 0.0; });
  CHECK_THROWS_AS(testing_condition_W(tc), std::invalid_argument);

  TestingCondition bad = basic_condition(g);
  bad.y.pop_back();
  CHECK_THROWS_AS(testing_condition_W(bad), std::invalid_argument);
}

TEST_CASE("strong bound for the potential") {
  HarnessConfig cfg = small(2);
  StrongOptions opt;
  opt.exps = ExponentTuple{{2.0, 2.0}, 1.0};
  const InequalityReport r = verify_strong(cfg, opt);
  CHECK(r.theorem == "strong");
  CHECK(r.cases.size() == 6);
  CHECK(std::isfinite(r.max_ratio));
  CHECK(r.max_ratio > 0.0);
  CHECK(r.refined);
  CHECK(r.stable);
  CHECK(r.metrics.count("W0"));
  CHECK(r.metrics.count("W0_refined"));

  opt.exps.q = 0.5;
  CHECK_THROWS_AS(verify_strong(cfg, opt), std::invalid_argument);
  opt.exps.q = 1.0;
  opt.x_override = NormSpec::lebesgue(1.0);
  CHECK_THROWS_AS(verify_strong(cfg, opt), std::invalid_argument);
  opt.unchecked = true;
  const InequalityReport u = verify_strong(cfg, opt);
  CHECK(std::find(u.notes.begin(), u.notes.end(), "unverified hypothesis: custom norm bundle") != u.notes.end());
}

TEST_CASE("strong bound with a zero slot") {
  HarnessConfig cfg = small(2);
  cfg.refine = false;
  cfg.corpus = [](const Grid& g) {
    const auto bump = GridFunction::sample(g, [](std::span<const double> x) { return std::abs(x[0]) < 1 ? 1.0 : 0.0; });
    return std::vector<FunctionTuple>{FunctionTuple{bump, GridFunction::constant(g, 0.0)}};
  };
  StrongOptions opt;
  opt.exps = ExponentTuple{{2.0, 2.0}, 1.0};
  const InequalityReport r = verify_strong(cfg, opt);
  REQUIRE(r.cases.size() == 1);
  CHECK(r.cases[0].lhs == 0.0);
  CHECK(r.cases[0].rhs == 0.0);
  CHECK(r.cases[0].ratio == 0.0);
}

TEST_CASE("strong bound is homogeneous in each slot") {
  HarnessConfig cfg = small(2);
  cfg.refine = false;
  StrongOptions opt;
  opt.exps = ExponentTuple{{2.0, 2.0}, 1.0};
  const InequalityReport base = verify_strong(cfg, opt);
  cfg.corpus = [](const Grid& g) {
    auto c = make_corpus(g, 2, 6, 3);
    for (auto& t : c) t[1] = 7.5 * t[1];
    return c;
  };
  const InequalityReport scaled = verify_strong(cfg, opt);
  REQUIRE(scaled.cases.size() == base.cases.size());
  for (std::size_t i = 0; i < base.cases.size(); ++i)
    CHECK(scaled.cases[i].ratio == doctest::Approx(base.cases[i].ratio).epsilon(1e-9));
}

TEST_CASE("strong bound for the commutator") {
  HarnessConfig cfg = small(2, 1);
  StrongOptions opt;
  opt.exps = ExponentTuple{{2.0, 2.0}, 1.0};
  const InequalityReport r = verify_strong(cfg, opt);
  CHECK(std::isfinite(r.max_ratio));
  CHECK(r.stable);
  CHECK(r.metrics.count("W1"));
  CHECK(r.metrics.count("bmo_norm"));

  cfg.refine = false;
  const InequalityReport r1 = verify_strong(cfg, opt);
  cfg.symbol_scale = 2.0;
  const InequalityReport r2 = verify_strong(cfg, opt);
  CHECK(r2.max_ratio <= 2.0 * r1.max_ratio * (1 + 1e-9));
  CHECK(r2.max_ratio >= r1.max_ratio);

  opt.exps.q = 0.8;
  opt.exps.p_i = {1.5, 1.5};
  const InequalityReport low = verify_strong(small(2, 1), opt);
  CHECK(low.case_id == "q<=1");
  CHECK(std::isfinite(low.max_ratio));
}

TEST_CASE("Fefferman-Stein harness") {
  HarnessConfig one = small(1);
  one.kernel = "frac0.5";
  FeffermanSteinOptions a;
  a.p_i = {2.0};
  a.u = {"pow{0.3}"};
  const InequalityReport ra = verify_fefferman_stein(one, a);
  CHECK(std::isfinite(ra.max_ratio));
  CHECK(ra.stable);

  FeffermanSteinOptions c;
  c.case_id = "iii";
  c.p_i = {1.6, 1.6};
  const InequalityReport rc = verify_fefferman_stein(small(2, 1), c);
  CHECK(std::isfinite(rc.max_ratio));
  CHECK(rc.stable);

  FeffermanSteinOptions b;
  b.case_id = "ii";
  b.p_i = {1.5, 1.5};
  CHECK(std::isfinite(verify_fefferman_stein(small(2), b).max_ratio));
  CHECK_THROWS_AS(verify_fefferman_stein(small(2, 1), b), std::invalid_argument);
  b.case_id = "iv";
  CHECK_THROWS_AS(verify_fefferman_stein(small(2), b), std::invalid_argument);
}

TEST_CASE("Coifman harness") {
  CoifmanOptions a;
  a.w = "pow{0.3}";
  const InequalityReport ra = verify_coifman(small(2), a);
  CHECK(std::isfinite(ra.max_ratio));
  CHECK(ra.stable);
  CHECK(ra.metrics.count("rh2"));

  CoifmanOptions b;
  b.case_id = "ii";
  b.p = 0.5;
  b.w = "pow{0.2}";
  const InequalityReport rb = verify_coifman(small(2, 1), b);
  CHECK(std::isfinite(rb.max_ratio));
  CHECK(rb.metrics.count("rh2"));

  CHECK_THROWS_AS(verify_coifman(small(2, 1), a), std::invalid_argument);
  a.w = "pow{-0.9}";
  CHECK_THROWS_AS(verify_coifman(small(2), a), HypothesisUnmet);
}

TEST_CASE("for-t-d with u = 1 matches Coifman at p = 1") {
  const InequalityReport f = verify_ftd(small(2), FtdOptions{});
  const InequalityReport c = verify_coifman(small(2), CoifmanOptions{});
  CHECK(f.max_ratio <= c.max_ratio * (1 + 1e-9));
  CHECK(f.max_ratio == doctest::Approx(c.max_ratio).epsilon(1e-9));

  FtdOptions ii;
  ii.case_id = "ii";
  ii.p = 1.5;
  ii.u = "pow{0.3}";
  const InequalityReport r = verify_ftd(small(2, 1), ii);
  CHECK(r.params.at("gamma") == "3");
  CHECK(std::isfinite(r.max_ratio));
  ii.p = 0.5;
  CHECK_THROWS_AS(verify_ftd(small(2), ii), std::invalid_argument);
}

TEST_CASE("weak maximal harness") {
  for (const char* b : {"L", "Lp{1}logL{1}"})
    for (const char* phi : {"one", "t^{0.5}"}) {
      WeakMaximalOptions opt;
      opt.young = b;
      opt.phi = phi;
      const InequalityReport r = verify_weak_maximal(small(2), opt);
      CHECK(std::isfinite(r.max_ratio));
      CHECK(r.max_ratio > 0.0);
      CHECK(r.metrics.at("lambda_refinement") <= 0.05);
    }
  // corpus tuple 9 at N = 64 has its sup at the lowest level of M
  HarnessConfig plateau = small(2);
  plateau.N = 64;
  plateau.corpus_size = 20;
  plateau.seed = 0;
  plateau.refine = false;
  WeakMaximalOptions half;
  half.phi = "t^{0.5}";
  CHECK(verify_weak_maximal(plateau, half).metrics.at("lambda_refinement") <= 0.05);

  WeakMaximalOptions bad;
  bad.young = "expL";
  CHECK_THROWS(verify_weak_maximal(small(2), bad));
  CHECK_THROWS(parse_phi_scaling("t^"));
  CHECK(parse_phi_scaling("const{2}")(0.3) == doctest::Approx(2.0));
  CHECK(parse_phi_scaling("t^{0.5}")(0.25) == doctest::Approx(0.5));
}

TEST_CASE("control harness") {
  for (int ell : {0, 1}) {
    ControlOptions opt;
    opt.u = "pow{0.3}";
    opt.corollary = ell == 0;
    const InequalityReport r = verify_control(small(2, ell), opt);
    CHECK(std::isfinite(r.max_ratio));
    CHECK(r.stable);
    CHECK(r.metrics.count("theorem_delta=0.5"));
    if (ell == 0) CHECK(r.metrics.count("corollary_delta=0.5"));
  }
  ControlOptions bad;
  bad.deltas = {};
  CHECK_THROWS(verify_control(small(2), bad));
}

TEST_CASE("report JSON is deterministic") {
  HarnessConfig cfg = small(2);
  cfg.refine = false;
  const std::string a = report_to_json(verify_coifman(cfg, CoifmanOptions{}));
  const std::string b = report_to_json(verify_coifman(cfg, CoifmanOptions{}));
  CHECK(a == b);
  const auto j = nlohmann::json::parse(a);
  CHECK(j["theorem"] == "coifman");
  CHECK(j["cases"].size() == 6);
}
