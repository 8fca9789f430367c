#include "mlpot/quadrature.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace mlpot::quad {

namespace {

struct Rule {
  std::span<const double> x;
  std::span<const double> w;
};

constexpr std::array<double, 2> kX2{-0.57735026918962576, 0.57735026918962576};
constexpr std::array<double, 2> kW2{1.0, 1.0};
constexpr std::array<double, 4> kX4{-0.86113631159405258, -0.33998104358485626, 0.33998104358485626,
                                    0.86113631159405258};
constexpr std::array<double, 4> kW4{0.34785484513745386, 0.65214515486254614, 0.65214515486254614,
                                    0.34785484513745386};
constexpr std::array<double, 8> kX8{-0.96028985649753623, -0.79666647741362674, -0.52553240991632899,
                                    -0.18343464249564980, 0.18343464249564980,  0.52553240991632899,
                                    0.79666647741362674,  0.96028985649753623};
constexpr std::array<double, 8> kW8{0.10122853629037626, 0.22238103445337447, 0.31370664587788729,
                                    0.36268378337836198, 0.36268378337836198, 0.31370664587788729,
                                    0.22238103445337447, 0.10122853629037626};

Rule rule(int order) {
  switch (order) {
    case 2: return {kX2, kW2};
    case 4: return {kX4, kW4};
    case 8: return {kX8, kW8};
    default: throw std::invalid_argument("Gauss-Legendre order must be 2, 4 or 8");
  }
}

}  // namespace

double gauss_legendre(const Fn1& f, double a, double b, int order) {
  const Rule r = rule(order);
  const double c = 0.5 * (a + b);
  const double hw = 0.5 * (b - a);
  double s = 0.0;
  for (std::size_t i = 0; i < r.x.size(); ++i) s += r.w[i] * f(c + hw * r.x[i]);
  return s * hw;
}

double composite_log(const Fn1& f, double a, double b, int panels, int order) {
  if (!(a > 0.0) || !(b > a)) throw std::invalid_argument("composite_log needs 0 < a < b");
  const double ratio = std::pow(b / a, 1.0 / panels);
  double s = 0.0;
  double lo = a;
  for (int p = 0; p < panels; ++p) {
    const double hi = p + 1 == panels ? b : lo * ratio;
    s += gauss_legendre(f, lo, hi, order);
    lo = hi;
  }
  return s;
}

double integrate_from_zero(const Fn1& f, double t, int order) {
  if (!(t > 0.0)) throw std::invalid_argument("integration limit must be positive");
  double total = 0.0;
  double prev = 0.0;
  int rising = 0;
  double hi = t;
  for (int j = 0; j < 400; ++j) {
    const double lo = 0.5 * hi;
    const double piece = gauss_legendre(f, lo, hi, order);
    total += piece;
    if (j > 0) {
      if (piece >= prev && piece > 0.0) {
        if (++rising >= 10) throw std::domain_error("integral diverges at the origin");
      } else {
        rising = 0;
      }
      const double r = prev > 0.0 ? piece / prev : 0.0;
      if (j >= 4 && r < 1.0 && piece * r / (1.0 - r) <= 1e-16 * std::abs(total)) {
        total += piece * r / (1.0 - r);
        return total;
      }
    }
    prev = piece;
    hi = lo;
  }
  throw std::domain_error("integral near the origin did not converge");
}

double box_integral(const FnN& f, std::span<const double> lo, std::span<const double> hi, int order) {
  const Rule r = rule(order);
  const std::size_t D = lo.size();
  const std::size_t q = r.x.size();
  std::vector<double> pt(D);
  std::vector<std::size_t> idx(D, 0);
  double jac = 1.0;
  for (std::size_t d = 0; d < D; ++d) jac *= 0.5 * std::abs(hi[d] - lo[d]);
  double s = 0.0;
  while (true) {
    double w = 1.0;
    for (std::size_t d = 0; d < D; ++d) {
      pt[d] = 0.5 * (lo[d] + hi[d]) + 0.5 * (hi[d] - lo[d]) * r.x[idx[d]];
      w *= r.w[idx[d]];
    }
    s += w * f(pt);
    std::size_t d = 0;
    while (d < D && ++idx[d] == q) idx[d++] = 0;
    if (d == D) break;
  }
  return s * jac;
}

namespace {

// Integral over the orthant box between the origin and the signed corner w.
double corner_integral(const FnN& f, const std::vector<double>& w, int max_levels) {
  const std::size_t D = w.size();
  const int order = D <= 3 ? 4 : 2;
  std::vector<double> lo(D);
  std::vector<double> hi(D);
  double total = 0.0;
  double prev = 0.0;
  double scale = 1.0;
  for (int level = 0; level < max_levels; ++level) {
    const double half = 0.5 * scale;
    double peeled = 0.0;
    for (std::size_t mask = 1; mask < (std::size_t{1} << D); ++mask) {
      for (std::size_t d = 0; d < D; ++d) {
        const bool upper = (mask >> d) & 1U;
        lo[d] = (upper ? half : 0.0) * w[d];
        hi[d] = (upper ? scale : half) * w[d];
      }
      peeled += box_integral(f, lo, hi, order);
    }
    total += peeled;
    if (level > 0 && prev != 0.0) {
      const double r = peeled / prev;
      if (r >= 1.0) throw std::domain_error("function is not integrable at the origin");
      const double tail = peeled * r / (1.0 - r);
      if (level + 1 == max_levels || std::abs(tail) <= 1e-15 * std::abs(total)) return total + tail;
    } else if (level > 0 && peeled == 0.0) {
      return total;
    }
    prev = peeled;
    scale = half;
  }
  return total;
}

}  // namespace

double origin_box_integral(const FnN& f, std::span<const double> lo, std::span<const double> hi, int max_levels) {
  const std::size_t D = lo.size();
  if (hi.size() != D || D == 0) throw std::invalid_argument("box bounds have mismatched dimensions");
  for (std::size_t d = 0; d < D; ++d)
    if (lo[d] > 0.0 || hi[d] < 0.0) throw std::invalid_argument("box closure does not contain the origin");

  double total = 0.0;
  std::vector<double> w(D);
  for (std::size_t mask = 0; mask < (std::size_t{1} << D); ++mask) {
    bool empty = false;
    for (std::size_t d = 0; d < D; ++d) {
      w[d] = ((mask >> d) & 1U) ? hi[d] : lo[d];
      if (w[d] == 0.0) empty = true;
    }
    if (!empty) total += corner_integral(f, w, max_levels);
  }
  return total;
}

}  // namespace mlpot::quad
