#include "mlpot/orlicz.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace mlpot {

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

}  // namespace

YoungFunction YoungFunction::power_log(double p, double alpha) {
  if (!(p >= 1.0) || !(alpha >= 0.0)) throw std::invalid_argument("power-log Young function needs p >= 1 and alpha >= 0");
  YoungFunction y;
  y.family_ = Family::PowerLog;
  y.p_ = p;
  y.alpha_ = alpha;
  return y;
}

YoungFunction YoungFunction::exp() {
  YoungFunction y;
  y.family_ = Family::Exp;
  return y;
}

YoungFunction YoungFunction::exp_power(double q) {
  if (!(q > 0.0)) throw std::invalid_argument("exp-power Young function needs q > 0");
  YoungFunction y;
  y.family_ = Family::ExpPower;
  y.q_ = q;
  if (q > 1.0) {
    // tangent point from the origin: e^u (u/q - 1) + 1 = 0 with u = t^{1/q}
    double lo = 1e-12;
    double hi = q;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (std::exp(mid) * (mid / q - 1.0) + 1.0 < 0.0 ? lo : hi) = mid;
    }
    y.knot_ = std::pow(lo, q);
    y.slope_ = std::expm1(lo) / y.knot_;
  }
  return y;
}

YoungFunction YoungFunction::identity() { return YoungFunction{}; }

YoungFunction YoungFunction::composed(std::vector<YoungFunction> parts) {
  if (parts.empty()) throw std::invalid_argument("composed Young function needs at least one part");
  if (parts.size() == 1) return parts.front();
  YoungFunction y;
  y.family_ = Family::Composed;
  y.parts_ = std::move(parts);
  return y;
}

YoungFunction YoungFunction::iterate(const YoungFunction& b, int m) {
  if (m < 1) throw std::invalid_argument("composition power must be >= 1");
  return composed(std::vector<YoungFunction>(static_cast<std::size_t>(m), b));
}

double YoungFunction::operator()(double t) const {
  if (t < 0.0 || std::isnan(t)) throw std::domain_error("Young function evaluated at a negative argument");
  switch (family_) {
    case Family::Identity: return t;
    case Family::PowerLog: {
      double v = p_ == 1.0 ? t : std::pow(t, p_);
      if (alpha_ != 0.0 && t > 1.0) v *= std::pow(1.0 + std::log(t), alpha_);
      return v;
    }
    case Family::Exp: return std::expm1(t);
    case Family::ExpPower: return t < knot_ ? slope_ * t : std::expm1(std::pow(t, 1.0 / q_));
    case Family::Composed: {
      double v = t;
      for (auto it = parts_.rbegin(); it != parts_.rend(); ++it) v = (*it)(v);
      return v;
    }
  }
  return t;
}

double YoungFunction::inverse(double s, double tol) const {
  if (s < 0.0) throw std::domain_error("Young inverse of a negative value");
  if (s == 0.0) return 0.0;
  switch (family_) {
    case Family::Identity: return s;
    case Family::Exp: return std::log1p(s);
    case Family::ExpPower: return s < slope_ * knot_ ? s / slope_ : std::pow(std::log1p(s), q_);
    case Family::PowerLog:
      if (alpha_ == 0.0) return std::pow(s, 1.0 / p_);
      break;
    case Family::Composed: {
      double v = s;
      for (const auto& part : parts_) v = part.inverse(v, tol);
      return v;
    }
  }
  double lo = 0.0;
  double hi = 1.0;
  for (int i = 0; (*this)(hi) < s; ++i) {
    if (i > 2000) throw std::runtime_error("Young inverse: no bracket found");
    lo = hi;
    hi *= 2.0;
  }
  const double target = tol * std::max(1.0, s);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double v = (*this)(mid);
    if (std::abs(v - s) <= target) return mid;
    (v < s ? lo : hi) = mid;
  }
  throw std::runtime_error("Young inverse did not converge after 200 iterations; malformed Young function " +
                           to_string());
}

bool YoungFunction::looks_convex() const {
  if ((*this)(0.0) != 0.0) return false;
  constexpr int kSamples = 400;
  std::vector<double> ts(kSamples);
  for (int i = 0; i < kSamples; ++i) ts[i] = 1e6 * static_cast<double>(i) / (kSamples - 1);
  // a second, log-spaced pass resolves the behaviour near zero
  for (int pass = 0; pass < 2; ++pass) {
    if (pass == 1)
      for (int i = 0; i < kSamples; ++i) ts[i] = std::pow(10.0, -6.0 + 12.0 * i / (kSamples - 1));
    double prev = -1.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const double v = (*this)(ts[i]);
      if (std::isinf(v)) break;
      if (v < prev) return false;
      prev = v;
      if (i + 1 < ts.size()) {
        const double a = ts[i];
        const double b = ts[i + 1];
        const double vb = (*this)(b);
        const double vm = (*this)(0.5 * (a + b));
        if (std::isinf(vb)) break;
        if (vm > 0.5 * (v + vb) * (1.0 + 1e-12) + 1e-300) return false;
      }
    }
  }
  return true;
}

bool YoungFunction::submultiplicative(double tol) const {
  for (int i = 0; i <= 24; ++i)
    for (int j = 0; j <= 24; ++j) {
      const double s = std::pow(10.0, -3.0 + 0.25 * i);
      const double t = std::pow(10.0, -3.0 + 0.25 * j);
      const double lhs = (*this)(s * t);
      const double rhs = (*this)(s) * (*this)(t);
      if (std::isinf(rhs)) continue;
      if (lhs > (1.0 + tol) * rhs) return false;
    }
  return true;
}

std::string YoungFunction::to_string() const {
  switch (family_) {
    case Family::Identity: return "Lp1logL0";
    case Family::PowerLog: return "Lp" + num(p_) + "logL" + num(alpha_);
    case Family::Exp: return "expL";
    case Family::ExpPower: return "expL^{1/" + num(q_) + "}";
    case Family::Composed: {
      const bool same = std::all_of(parts_.begin(), parts_.end(),
                                    [&](const YoungFunction& y) { return y.to_string() == parts_[0].to_string(); });
      if (same) return "B^" + std::to_string(parts_.size()) + "(" + parts_[0].to_string() + ")";
      std::string s = "compose(";
      for (std::size_t i = 0; i < parts_.size(); ++i) s += (i ? "," : "") + parts_[i].to_string();
      return s + ")";
    }
  }
  return "?";
}

double young_eval(const YoungFunction& y, double t) { return y(t); }
double young_inverse(const YoungFunction& y, double s, double tol) { return y.inverse(s, tol); }

NormSpec NormSpec::lebesgue(double r) {
  if (!(r >= 1.0) || !std::isfinite(r)) throw std::invalid_argument("L^r norm needs r >= 1, got " + num(r));
  NormSpec x;
  x.lebesgue_ = true;
  x.r_ = r;
  return x;
}

NormSpec NormSpec::orlicz(YoungFunction y) {
  NormSpec x;
  x.lebesgue_ = false;
  x.young_ = std::move(y);
  return x;
}

NormSpec NormSpec::llogl(double p, double alpha) {
  if (alpha == 0.0) return lebesgue(p);
  return orlicz(YoungFunction::power_log(p, alpha));
}

namespace {

std::string strip_braces(std::string s) {
  if (s.size() >= 2 && s.front() == '{' && s.back() == '}') s = s.substr(1, s.size() - 2);
  return s;
}

double parse_number(const std::string& raw, const std::string& whole) {
  const std::string s = strip_braces(raw);
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("malformed number '" + raw + "' in norm spec '" + whole + "'");
  }
}

}  // namespace

NormSpec NormSpec::parse(const std::string& text) {
  const std::string& t = text;
  if (t == "L" || t == "L1") return lebesgue(1.0);
  if (t == "expL") return orlicz(YoungFunction::exp());
  if (t.rfind("expL^", 0) == 0) {
    const std::string e = strip_braces(t.substr(5));
    if (e.rfind("1/", 0) == 0) return orlicz(YoungFunction::exp_power(parse_number(e.substr(2), t)));
    return orlicz(YoungFunction::exp_power(1.0 / parse_number(e, t)));
  }
  if (t.rfind("B^", 0) == 0) {
    const auto open = t.find('(');
    if (open == std::string::npos || t.back() != ')')
      throw std::invalid_argument("composed norm spec must look like B^m(<spec>), got '" + t + "'");
    const int m = static_cast<int>(parse_number(t.substr(2, open - 2), t));
    const NormSpec inner = parse(t.substr(open + 1, t.size() - open - 2));
    const YoungFunction base = inner.is_lebesgue() ? YoungFunction::power_log(inner.exponent(), 0.0) : inner.young();
    return orlicz(YoungFunction::iterate(base, m));
  }
  if (t.rfind("L^", 0) == 0) return lebesgue(parse_number(t.substr(2), t));
  if (t.rfind("Lp", 0) == 0) {
    const auto pos = t.find("logL");
    if (pos == std::string::npos) throw std::invalid_argument("expected Lp{p}logL{alpha}, got '" + t + "'");
    const double p = parse_number(t.substr(2, pos - 2), t);
    const double a = parse_number(t.substr(pos + 4), t);
    return orlicz(YoungFunction::power_log(p, a));
  }
  if (t.rfind("LlogL", 0) == 0) {
    const std::string rest = t.substr(5);
    return orlicz(YoungFunction::power_log(1.0, rest.empty() ? 1.0 : parse_number(rest, t)));
  }
  throw std::invalid_argument("unknown norm spec '" + t + "' (expected L^r, Lp{p}logL{alpha}, expL, expL^{1/q}, B^m(...))");
}

double NormSpec::inverse(double s) const {
  if (lebesgue_) return r_ == 1.0 ? s : std::pow(s, 1.0 / r_);
  return young_.inverse(s);
}

std::string NormSpec::to_string() const { return lebesgue_ ? "L^" + num(r_) : young_.to_string(); }

double luxemburg_norm(std::span<const double> values, const NormSpec& x, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("norm tolerance must be positive");
  if (values.empty()) throw std::invalid_argument("norm over an empty cube");
  const double count = static_cast<double>(values.size());
  if (x.is_lebesgue()) {
    const double r = x.exponent();
    double s = 0.0;
    if (r == 1.0) {
      for (double v : values) s += std::abs(v);
      return s / count;
    }
    for (double v : values) s += std::pow(std::abs(v), r);
    return std::pow(s / count, 1.0 / r);
  }

  std::vector<double> nz;
  nz.reserve(values.size());
  double mx = 0.0;
  for (double v : values)
    if (v != 0.0) {
      nz.push_back(std::abs(v));
      mx = std::max(mx, std::abs(v));
    }
  if (nz.empty()) return 0.0;

  const YoungFunction& y = x.young();
  auto mean_of = [&](double lambda) {
    double s = 0.0;
    const double inv = 1.0 / lambda;
    for (double v : nz) s += y(v * inv);
    return s / count;
  };
  double lo = mx / y.inverse(2.0 * count);
  double hi = mx / y.inverse(0.5);
  for (int i = 0; mean_of(hi) > 1.0; ++i) {
    if (i > 200) throw std::runtime_error("Luxemburg bracket expansion failed");
    hi *= 2.0;
  }
  for (int i = 0; mean_of(lo) <= 1.0; ++i) {
    if (i > 200) throw std::runtime_error("Luxemburg bracket expansion failed");
    lo *= 0.5;
  }
  while (hi > lo * (1.0 + tol)) {
    const double mid = std::sqrt(lo * hi);
    if (mid <= lo || mid >= hi) break;
    (mean_of(mid) <= 1.0 ? hi : lo) = mid;
  }
  return hi;
}

double luxemburg_norm(const GridFunction& f, const Cube& q, const NormSpec& x, double tol) {
  std::vector<double> v;
  gather(f, q.clip(f.grid()), v);
  return luxemburg_norm(v, x, tol);
}

double holder_inverse_constant(const NormSpec& a, const NormSpec& b, const NormSpec& c) {
  double kappa = 0.0;
  constexpr int kSamples = 200;
  for (int i = 0; i < kSamples; ++i) {
    const double t = std::pow(10.0, -3.0 + 9.0 * i / (kSamples - 1));
    kappa = std::max(kappa, a.inverse(t) * b.inverse(t) / c.inverse(t));
  }
  return kappa;
}

HolderResult holder_check(const GridFunction& f, const GridFunction& g, const Cube& q, const NormSpec& a,
                          const NormSpec& b, const NormSpec& c, double kappa_max) {
  require_same_grid(f, g);
  HolderResult res;
  res.kappa = holder_inverse_constant(a, b, c);
  if (res.kappa > kappa_max)
    throw std::invalid_argument("invalid Holder triple (" + a.to_string() + ", " + b.to_string() + ", " +
                                c.to_string() + "): A^-1 B^-1 exceeds C^-1 by a factor " + num(res.kappa));
  const double fg = luxemburg_norm(f * g, q, c);
  const double den = luxemburg_norm(f, q, a) * luxemburg_norm(g, q, b);
  res.ratio = den > 0.0 ? fg / den : 0.0;
  return res;
}

}  // namespace mlpot
