#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mlpot/grid.hpp"

namespace mlpot {

/// w(x) = |x|^beta at cell centers; cells touching the origin hold the cell
/// average (closed form for n = 1, corner peeling otherwise).
GridFunction gen_power_weight(double beta, const Grid& g);

/// b(x) = log|x| with the same origin-cell averaging.
GridFunction gen_bmo_log(const Grid& g);

struct BmoNorm {
  double l1 = 0.0;    // sup_Q (1/|Q|) int_Q |b - b_Q|
  double expl = 0.0;  // sup_Q ||b - b_Q||_{exp L, Q}
};

BmoNorm bmo_norm(const GridFunction& b, const std::vector<Cube>& family);

/// max over the family of (avg_Q w^s)^{1/s} / avg_Q w; cubes where w
/// vanishes are skipped.
double rh_check(const GridFunction& w, double s, const std::vector<Cube>& family);
/// max over the family of sup_Q w / avg_Q w.
double rh_inf_check(const GridFunction& w, const std::vector<Cube>& family);

using WeightFactory = std::function<GridFunction(const Grid&)>;

/// "one", "pow{beta}", "bmolog" or "file:<path.csv>".
WeightFactory parse_weight(const std::string& spec);
GridFunction make_weight(const std::string& spec, const Grid& g);

struct RhCertificate {
  double s = 2.0;
  double coarse = 0.0;  // rh_check at N
  double fine = 0.0;    // rh_check at 2N
  double finest = 0.0;  // rh_check at 4N
  bool ok = false;
};

/// RH(s) certificate over N, 2N, 4N. Fails on growth above 25% in one step, or on
/// growth that persists: second step above 5% and at least 0.85 of the first.
RhCertificate certify_rh(const WeightFactory& w, const Grid& g, double s, FamilyKind family);

}  // namespace mlpot
