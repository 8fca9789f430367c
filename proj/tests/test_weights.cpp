#include <cmath>
#include <filesystem>
#include <stdexcept>

#include "doctest.h"
#include "mlpot/corpus.hpp"
#include "mlpot/weights.hpp"

using namespace mlpot;

TEST_CASE("power weights") {
  const Grid g = make_grid(1, 2.0, 32);
  const auto w0 = gen_power_weight(0.0, g);
  for (double v : w0.values()) CHECK(v == doctest::Approx(1.0));

  const Grid g8 = make_grid(1, 1.0, 4);  // centers at +-0.25, +-0.75
  const auto w1 = gen_power_weight(1.0, g8);
  CHECK(w1[3] == doctest::Approx(0.75));
  const Grid gh = make_grid(1, 1.0, 8);  // h = 0.25, cell 5 has center 0.375
  CHECK(gen_power_weight(1.0, gh)[5] == doctest::Approx(0.375));

  const double h = gh.cell_width();
  const auto wm = gen_power_weight(-0.5, gh);
  const std::size_t origin = static_cast<std::size_t>(gh.cells_per_axis() / 2);
  CHECK(wm[origin] == doctest::Approx(2.0 / std::sqrt(h)));
  CHECK(wm[origin - 1] == doctest::Approx(2.0 / std::sqrt(h)));

  const Grid g2 = make_grid(2, 1.0, 8);
  const auto w2 = gen_power_weight(-0.5, g2);
  for (double v : w2.values()) CHECK(std::isfinite(v));
  CHECK_THROWS_AS(gen_power_weight(-1.0, g), std::invalid_argument);
  CHECK_THROWS_AS(gen_power_weight(-2.5, g2), std::invalid_argument);
}

TEST_CASE("log symbol") {
  const Grid g = make_grid(1, 2.0, 8);  // h = 0.5, center 1.25 at index 6
  const auto b = gen_bmo_log(g);
  CHECK(b[6] == doctest::Approx(std::log(1.25)));
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(b[i] == doctest::Approx(b[g.size() - 1 - i]));
  const Grid g4 = make_grid(1, 4.0, 8);  // h = 1, center 0.5 ... 1.5 at index 5
  CHECK(gen_bmo_log(g4)[5] == doctest::Approx(std::log(1.5)));

  std::vector<double> norms;
  for (int N : {64, 128, 256}) {
    const Grid gn = make_grid(1, 2.0, N);
    norms.push_back(bmo_norm(gen_bmo_log(gn), cube_family(gn, FamilyKind::Centered)).l1);
  }
  for (double v : norms) CHECK(std::isfinite(v));
  CHECK(std::abs(norms[1] / norms[0] - 1) < 0.15);
  CHECK(std::abs(norms[2] / norms[1] - 1) < 0.15);
}

TEST_CASE("bmo norm") {
  const Grid g = make_grid(1, 1.0, 64);
  const auto fam = cube_family(g, FamilyKind::Dyadic);
  CHECK(bmo_norm(GridFunction::constant(g, 4.0), fam).l1 == doctest::Approx(0.0));
  const auto x = GridFunction::sample(g, [](std::span<const double> p) { return p[0]; });
  CHECK(bmo_norm(x, fam).l1 == doctest::Approx(0.5).epsilon(1e-3));

  // John-Nirenberg: one constant across a corpus of symbols
  double worst = 0.0;
  for (const auto& t : make_corpus(g, 1, 10, 21)) {
    const BmoNorm bn = bmo_norm(t[0], fam);
    if (bn.l1 > 0) worst = std::max(worst, bn.expl / bn.l1);
  }
  const BmoNorm lg = bmo_norm(gen_bmo_log(g), fam);
  worst = std::max(worst, lg.expl / lg.l1);
  CHECK(std::isfinite(worst));
  CHECK(worst < 10.0);
}

TEST_CASE("reverse Holder") {
  const Grid g = make_grid(1, 2.0, 64);
  const auto fam = cube_family(g, FamilyKind::Centered);
  CHECK(rh_check(GridFunction::constant(g, 2.0), 2.0, fam) == doctest::Approx(1.0));
  CHECK(rh_inf_check(GridFunction::constant(g, 2.0), fam) == doctest::Approx(1.0));
  CHECK_THROWS(rh_check(GridFunction::constant(g, 1.0), 1.0, fam));

  const auto root = parse_weight("pow{0.5}");
  const RhCertificate c = certify_rh(root, g, 2.0, FamilyKind::Centered);
  CHECK(c.ok);
  CHECK(std::abs(c.fine / c.coarse - 1.0) < 0.1);

  const RhCertificate bad = certify_rh(parse_weight("pow{-0.6}"), g, 2.0, FamilyKind::Centered);
  CHECK_FALSE(bad.ok);
  CHECK(bad.fine > bad.coarse);
  CHECK(bad.finest > bad.fine);
  CHECK(certify_rh(parse_weight("pow{-0.3}"), g, 2.0, FamilyKind::Centered).ok);
  CHECK_FALSE(certify_rh(parse_weight("pow{-0.9}"), g, 2.0, FamilyKind::Centered).ok);

  const auto w = GridFunction::sample(g, [](std::span<const double> x) { return 1.0 + std::exp(-x[0] * x[0]); });
  double prev = 0.0;
  for (double s : {1.5, 2.0, 3.0, 5.0}) {
    const double v = rh_check(w, s, fam);
    CHECK(v >= prev - 1e-12);
    prev = v;
    CHECK(v <= rh_inf_check(w, fam) + 1e-12);
  }
}

TEST_CASE("RH infinity by hand") {
  const Grid g = make_grid(1, 1.0, 4);
  // w = 1.1 on [0, 1), 0.1 elsewhere
  const auto w = GridFunction::sample(g, [](std::span<const double> x) { return (x[0] >= 0 ? 1.0 : 0.0) + 0.1; });
  const std::vector<Cube> fam = cube_family(g, FamilyKind::Dyadic);
  // worst cube: the whole box, max 1.1 over average 0.6
  CHECK(rh_inf_check(w, fam) == doctest::Approx(1.1 / 0.6));
}

TEST_CASE("weight specs") {
  const Grid g = make_grid(1, 2.0, 16);
  CHECK(make_weight("one", g)[3] == 1.0);
  CHECK(make_weight("pow{1}", g)[15] == doctest::Approx(g.center(15)));
  CHECK(make_weight("bmolog", g)[15] == doctest::Approx(std::log(g.center(15))));
  const auto path = (std::filesystem::temp_directory_path() / "mlpot_weight_test.csv").string();
  write_csv_file(path, make_weight("pow{0.5}", g));
  const auto back = make_weight("file:" + path, g);
  CHECK(back[7] == make_weight("pow{0.5}", g)[7]);
  CHECK_THROWS(make_weight("file:" + path, make_grid(1, 2.0, 32)));
  CHECK_THROWS(make_weight("gauss", g));
  std::filesystem::remove(path);
}
