#include "mlpot/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mlpot/orlicz.hpp"
#include "mlpot/quadrature.hpp"

namespace mlpot {

namespace {

bool touches_origin(const Grid& g, const Index3& c) {
  const int half = g.cells_per_axis() / 2;
  for (int d = 0; d < g.dim(); ++d)
    if (c[d] != half - 1 && c[d] != half) return false;
  return true;
}

double euclid(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

// Average of fn(|x|) over the cell with index c, which has a vertex at 0.
double origin_cell_average(const Grid& g, const Index3& c, const std::function<double(double)>& fn) {
  const int n = g.dim();
  const double h = g.cell_width();
  std::vector<double> lo(n);
  std::vector<double> hi(n);
  for (int d = 0; d < n; ++d) {
    lo[d] = -g.half_width() + c[d] * h;
    hi[d] = lo[d] + h;
  }
  const auto f = [&](std::span<const double> x) { return fn(euclid(x)); };
  return quad::origin_box_integral(f, lo, hi) / g.cell_volume();
}

GridFunction radial_weight(const Grid& g, const std::function<double(double)>& fn, double origin_1d) {
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Index3 c = g.unflatten(i);
    if (touches_origin(g, c)) {
      v[i] = g.dim() == 1 ? origin_1d : origin_cell_average(g, c, fn);
    } else {
      const Point3 p = g.point(i);
      v[i] = fn(euclid(std::span<const double>(p.data(), g.dim())));
    }
  }
  return GridFunction(g, std::move(v));
}

}  // namespace

GridFunction gen_power_weight(double beta, const Grid& g) {
  if (!(beta > -g.dim())) throw std::invalid_argument("power weight needs beta > -n for local integrability");
  if (beta == 0.0) return GridFunction::constant(g, 1.0);
  const double h = g.cell_width();
  return radial_weight(g, [beta](double r) { return std::pow(r, beta); }, std::pow(h, beta) / (beta + 1.0));
}

GridFunction gen_bmo_log(const Grid& g) {
  const double h = g.cell_width();
  return radial_weight(g, [](double r) { return std::log(r); }, std::log(h) - 1.0);
}

BmoNorm bmo_norm(const GridFunction& b, const std::vector<Cube>& family) {
  if (family.empty()) throw std::invalid_argument("bmo_norm needs a nonempty family");
  const Grid& g = b.grid();
  const NormSpec expl = NormSpec::orlicz(YoungFunction::exp());
  BmoNorm out;
  std::vector<double> buf;
  for (const auto& q : family) {
    gather(b, q.clip(g), buf);
    double mean = 0.0;
    for (double v : buf) mean += v;
    mean /= static_cast<double>(buf.size());
    double dev = 0.0;
    for (double& v : buf) {
      v -= mean;
      dev += std::abs(v);
    }
    out.l1 = std::max(out.l1, dev / static_cast<double>(buf.size()));
    out.expl = std::max(out.expl, luxemburg_norm(buf, expl));
  }
  return out;
}

double rh_check(const GridFunction& w, double s, const std::vector<Cube>& family) {
  if (!(s > 1.0)) throw std::invalid_argument("reverse Holder exponent must exceed 1");
  if (!w.nonnegative()) throw std::invalid_argument("reverse Holder check needs a nonnegative weight");
  const Grid& g = w.grid();
  std::vector<double> ws(w.size());
  for (std::size_t i = 0; i < ws.size(); ++i) ws[i] = std::pow(w[i], s);
  const PrefixSum p1(g, w.values());
  const PrefixSum ps(g, ws);
  double worst = 0.0;
  for (const auto& q : family) {
    const CellRange r = q.clip(g);
    const double cnt = static_cast<double>(r.count(g.dim()));
    const double avg = p1.sum(r) / cnt;
    if (!(avg > 0.0)) continue;
    const double avg_s = std::max(0.0, ps.sum(r)) / cnt;
    worst = std::max(worst, std::pow(avg_s, 1.0 / s) / avg);
  }
  return worst;
}

double rh_inf_check(const GridFunction& w, const std::vector<Cube>& family) {
  if (!w.nonnegative()) throw std::invalid_argument("RH_inf check needs a nonnegative weight");
  const Grid& g = w.grid();
  double worst = 0.0;
  std::vector<double> buf;
  for (const auto& q : family) {
    gather(w, q.clip(g), buf);
    double sum = 0.0;
    double mx = 0.0;
    for (double v : buf) {
      sum += v;
      mx = std::max(mx, v);
    }
    if (sum > 0.0) worst = std::max(worst, mx / (sum / static_cast<double>(buf.size())));
  }
  return worst;
}

WeightFactory parse_weight(const std::string& spec) {
  if (spec == "one") return [](const Grid& g) { return GridFunction::constant(g, 1.0); };
  if (spec == "bmolog") return [](const Grid& g) { return gen_bmo_log(g); };
  if (spec.rfind("pow", 0) == 0) {
    std::string s = spec.substr(3);
    if (s.size() >= 2 && s.front() == '{' && s.back() == '}') s = s.substr(1, s.size() - 2);
    double beta = 0.0;
    try {
      std::size_t used = 0;
      beta = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw std::invalid_argument("malformed weight '" + spec + "'");
    }
    return [beta](const Grid& g) { return gen_power_weight(beta, g); };
  }
  if (spec.rfind("file:", 0) == 0) {
    const std::string path = spec.substr(5);
    return [path](const Grid& g) {
      GridFunction f = read_csv_file(path);
      if (!(f.grid() == g)) throw std::invalid_argument("weight file '" + path + "' is on a different grid");
      return f;
    };
  }
  throw std::invalid_argument("unknown weight '" + spec + "' (expected one, pow{beta}, bmolog, file:<csv>)");
}

GridFunction make_weight(const std::string& spec, const Grid& g) { return parse_weight(spec)(g); }

RhCertificate certify_rh(const WeightFactory& w, const Grid& g, double s, FamilyKind family) {
  RhCertificate c;
  c.s = s;
  const Grid fine = make_grid(g.dim(), g.half_width(), 2 * g.cells_per_axis());
  const Grid finest = make_grid(g.dim(), g.half_width(), 4 * g.cells_per_axis());
  c.coarse = rh_check(w(g), s, cube_family(g, family));
  c.fine = rh_check(w(fine), s, cube_family(fine, family));
  c.finest = rh_check(w(finest), s, cube_family(finest, family));
  if (!std::isfinite(c.coarse) || !std::isfinite(c.fine) || !std::isfinite(c.finest)) return c;
  const double g1 = c.fine / c.coarse - 1.0;
  const double g2 = c.finest / c.fine - 1.0;
  c.ok = g1 < 0.25 && g2 < 0.25 && !(g2 > 0.05 && g2 >= 0.85 * g1);
  return c;
}

}  // namespace mlpot
