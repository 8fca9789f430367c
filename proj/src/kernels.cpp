#include "mlpot/kernels.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "mlpot/quadrature.hpp"

namespace mlpot {

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

double block_norm(std::span<const double> y, int n, int i) {
  double s = 0.0;
  for (int d = 0; d < n; ++d) s += y[i * n + d] * y[i * n + d];
  return std::sqrt(s);
}

double l1_sum(std::span<const double> y, int n, int m) {
  double s = 0.0;
  for (int i = 0; i < m; ++i) s += block_norm(y, n, i);
  return s;
}

void check_dims(int n, int m) {
  if (n < 1 || n > 3) throw std::invalid_argument("kernel dimension n must be 1, 2 or 3");
  if (m < 1) throw std::invalid_argument("kernel multilinearity m must be >= 1");
}

double parse_param(const std::string& raw, const std::string& whole) {
  std::string s = raw;
  if (s.size() >= 2 && s.front() == '{' && s.back() == '}') s = s.substr(1, s.size() - 2);
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw std::invalid_argument("malformed kernel parameter in '" + whole + "'");
}

}  // namespace

void AnnulusSpec::validate() const {
  if (!(t > 0.0) || !(delta > 0.0) || !(eps >= 0.0 && eps < 1.0))
    throw std::invalid_argument("annulus needs t > 0, delta > 0 and eps in [0, 1)");
}

Kernel Kernel::fractional(int n, int m, double alpha) {
  check_dims(n, m);
  if (!(alpha > 0.0 && alpha < n * m))
    throw std::invalid_argument("fractional kernel requires alpha in (0, nm) = (0, " + std::to_string(n * m) +
                                "), got " + num(alpha));
  Kernel k;
  k.family_ = Family::Fractional;
  k.n_ = n;
  k.m_ = m;
  k.alpha_ = alpha;
  return k;
}

Kernel Kernel::radial_profile(int n, int m, Profile profile, std::string name) {
  check_dims(n, m);
  if (!profile) throw std::invalid_argument("empty kernel profile");
  int trend = 0;
  double prev = profile(0.0);
  if (!(prev >= 0.0)) throw std::invalid_argument("kernel profile must be nonnegative");
  for (int i = 0; i <= 600; ++i) {
    const double s = std::pow(10.0, -4.0 + 7.0 * i / 600.0);
    const double v = profile(s);
    if (!(v >= 0.0)) throw std::invalid_argument("kernel profile must be nonnegative");
    const int dir = v > prev * (1.0 + 1e-12) ? 1 : (v < prev * (1.0 - 1e-12) ? -1 : 0);
    if (dir != 0) {
      if (trend != 0 && dir != trend) throw std::invalid_argument("kernel profile '" + name + "' is not monotone");
      trend = dir;
    }
    prev = v;
  }
  Kernel k;
  k.family_ = Family::RadialProfile;
  k.n_ = n;
  k.m_ = m;
  k.alpha_ = 0.0;
  k.profile_ = std::make_shared<const Profile>(std::move(profile));
  k.name_ = std::move(name);
  return k;
}

Kernel Kernel::bessel(int n, int m, double alpha, double T, int nodes) {
  check_dims(n, m);
  if (!(alpha > 0.0)) throw std::invalid_argument("Bessel kernel requires alpha > 0, got " + num(alpha));
  if (!(T > 1.0) || nodes < 16) throw std::invalid_argument("Bessel quadrature needs T > 1 and at least 16 nodes");
  Kernel k;
  k.family_ = Family::Bessel;
  k.n_ = n;
  k.m_ = m;
  k.alpha_ = alpha;
  k.T_ = T;
  k.nodes_ = nodes;
  const double nm = n * m;
  k.bessel_c_ = 1.0 / (std::pow(2.0, nm) * std::tgamma(alpha / 2.0) * std::pow(std::numbers::pi, nm / 2.0));
  return k;
}

Kernel Kernel::tabulated(int n, int m, std::vector<double> s, std::vector<double> v, std::string name) {
  check_dims(n, m);
  if (s.size() < 2 || s.size() != v.size()) throw std::invalid_argument("tabulated profile needs >= 2 (s, value) pairs");
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!(v[i] >= 0.0) || !std::isfinite(v[i])) throw std::invalid_argument("tabulated profile values must be finite and >= 0");
    if (i > 0 && !(s[i] > s[i - 1])) throw std::invalid_argument("tabulated profile abscissae must increase strictly");
  }
  if (s.front() < 0.0) throw std::invalid_argument("tabulated profile abscissae must be >= 0");
  Kernel k;
  k.family_ = Family::Tabulated;
  k.n_ = n;
  k.m_ = m;
  k.alpha_ = 0.0;
  k.tab_s_ = std::make_shared<const std::vector<double>>(std::move(s));
  k.tab_v_ = std::make_shared<const std::vector<double>>(std::move(v));
  k.name_ = std::move(name);
  return k;
}

Kernel Kernel::parse(const std::string& text, int n, int m) {
  if (text.rfind("frac", 0) == 0) return fractional(n, m, parse_param(text.substr(4), text));
  if (text.rfind("bessel", 0) == 0) return bessel(n, m, parse_param(text.substr(6), text));
  if (text.rfind("profile:", 0) == 0) {
    const std::string path = text.substr(8);
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open kernel profile '" + path + "'");
    std::vector<double> s;
    std::vector<double> v;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      std::replace(line.begin(), line.end(), ',', ' ');
      std::istringstream ls(line);
      double a = 0.0;
      double b = 0.0;
      if (!(ls >> a >> b)) {
        if (s.empty()) continue;  // header row
        throw std::invalid_argument("malformed row in kernel profile '" + path + "'");
      }
      s.push_back(a);
      v.push_back(b);
    }
    return tabulated(n, m, std::move(s), std::move(v), path);
  }
  throw std::invalid_argument("unknown kernel '" + text + "' (expected frac{alpha}, bessel{alpha}, profile:file.csv)");
}

std::string Kernel::to_string() const {
  switch (family_) {
    case Family::Fractional: return "frac" + num(alpha_);
    case Family::Bessel: return "bessel" + num(alpha_);
    case Family::RadialProfile: return name_;
    case Family::Tabulated: return "profile:" + name_;
  }
  return "?";
}

bool Kernel::singular_at_origin() const {
  switch (family_) {
    case Family::Fractional: return true;
    case Family::Bessel: return alpha_ <= dim();
    case Family::RadialProfile: return !std::isfinite((*profile_)(0.0));
    case Family::Tabulated: return false;
  }
  return false;
}

double Kernel::profile(double s) const {
  switch (family_) {
    case Family::Fractional:
      if (s == 0.0) return std::numeric_limits<double>::infinity();
      return std::pow(s, alpha_ - dim());
    case Family::RadialProfile: return (*profile_)(s);
    case Family::Tabulated: {
      const auto& xs = *tab_s_;
      const auto& vs = *tab_v_;
      if (s <= xs.front()) return vs.front();
      if (s >= xs.back()) return vs.back();
      const auto it = std::upper_bound(xs.begin(), xs.end(), s);
      const std::size_t j = static_cast<std::size_t>(it - xs.begin());
      const double w = (s - xs[j - 1]) / (xs[j] - xs[j - 1]);
      return (1.0 - w) * vs[j - 1] + w * vs[j];
    }
    case Family::Bessel: {
      const double expo = 0.5 * (alpha_ - dim());
      if (s == 0.0 && expo <= 0.0) return std::numeric_limits<double>::infinity();
      const double lo = s > 0.0 ? std::min(1.0 / T_, s * s / 200.0) : 1.0 / T_;
      const double ulo = std::log(lo);
      const double du = (std::log(T_) - ulo) / nodes_;
      const double q = 0.25 * s * s;
      double acc = 0.0;
      for (int i = 0; i < nodes_; ++i) {
        const double u = ulo + (i + 0.5) * du;
        const double t = std::exp(u);
        acc += std::exp(-t - q / t + expo * u);
      }
      return bessel_c_ * acc * du;
    }
  }
  return 0.0;
}

double Kernel::operator()(std::span<const double> y) const {
  if (static_cast<int>(y.size()) != dim()) throw std::invalid_argument("kernel argument has the wrong dimension");
  const double s = l1_sum(y, n_, m_);
  if (s == 0.0 && singular_at_origin()) throw std::domain_error("kernel " + to_string() + " is singular at the origin");
  return profile(s);
}

double eval_kernel(const Kernel& k, std::span<const double> y) { return k(y); }

double kernel_cell_value(const Kernel& k, std::span<const double> lo, std::span<const double> hi) {
  const int D = k.dim();
  if (static_cast<int>(lo.size()) != D || static_cast<int>(hi.size()) != D)
    throw std::invalid_argument("cell has the wrong dimension");
  bool touches = true;
  double vol = 1.0;
  std::vector<double> c(D);
  for (int d = 0; d < D; ++d) {
    if (!(hi[d] > lo[d])) throw std::invalid_argument("degenerate kernel cell");
    touches = touches && lo[d] <= 0.0 && hi[d] >= 0.0;
    vol *= hi[d] - lo[d];
    c[d] = 0.5 * (lo[d] + hi[d]);
  }
  if (!touches) return k(c);
  const int n = k.n();
  const int m = k.m();
  const auto f = [&](std::span<const double> y) { return k.profile(l1_sum(y, n, m)); };
  return quad::origin_box_integral(f, lo, hi) / vol;
}

double kernel_cell_value(const Kernel& k, std::span<const int> offsets, double h) {
  const int D = k.dim();
  if (static_cast<int>(offsets.size()) != D) throw std::invalid_argument("cell offsets have the wrong dimension");
  std::vector<double> lo(D);
  std::vector<double> hi(D);
  for (int d = 0; d < D; ++d) {
    lo[d] = (offsets[d] - 0.5) * h;
    hi[d] = (offsets[d] + 0.5) * h;
  }
  return kernel_cell_value(k, lo, hi);
}

double l1_ball_volume(int n, int m) {
  const double wn = std::pow(std::numbers::pi, n / 2.0) / std::tgamma(n / 2.0 + 1.0);
  return std::pow(n * wn * std::tgamma(static_cast<double>(n)), m) / std::tgamma(n * m + 1.0);
}

double radial_shell_integral(const Kernel& k, double a, double b) {
  if (!(a >= 0.0) || !(b >= a)) throw std::invalid_argument("radial shell needs 0 <= a <= b");
  if (a == b) return 0.0;
  const int D = k.dim();
  const double V = l1_ball_volume(k.n(), k.m());
  if (k.family() == Kernel::Family::Fractional) return D * V / k.alpha() * (std::pow(b, k.alpha()) - std::pow(a, k.alpha()));
  const auto f = [&](double s) { return k.profile(s) * D * V * std::pow(s, D - 1); };
  if (a == 0.0) return quad::integrate_from_zero(f, b);
  return quad::composite_log(f, a, b, 16);
}

double annulus_integral_radial(const Kernel& k, const AnnulusSpec& a) {
  a.validate();
  return radial_shell_integral(k, a.inner(), a.outer());
}

double shell_integral_cells(const Kernel& k, double s_lo, double s_hi, const Grid& g) {
  const int D = k.dim();
  const int n = k.n();
  const int m = k.m();
  if (D > 3) throw std::invalid_argument("cell quadrature of a shell needs nm <= 3");
  const int N = g.cells_per_axis();
  const double h = g.cell_width();
  const double L = g.half_width();
  constexpr int kSub = 4;
  std::size_t total = 1;
  for (int d = 0; d < D; ++d) total *= static_cast<std::size_t>(N);
  const double vol = std::pow(h, D);
  std::array<double, 3> lo{};
  std::array<double, 3> hi{};
  std::array<double, 3> c{};
  double acc = 0.0;
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rem = idx;
    bool origin = true;
    for (int d = D - 1; d >= 0; --d) {
      const int i = static_cast<int>(rem % N);
      rem /= N;
      lo[d] = -L + i * h;
      hi[d] = lo[d] + h;
      c[d] = lo[d] + 0.5 * h;
      origin = origin && lo[d] <= 0.0 && hi[d] >= 0.0;
    }
    double smin = 0.0;
    double smax = 0.0;
    for (int b = 0; b < m; ++b) {
      double mn = 0.0;
      double mx = 0.0;
      for (int d = b * n; d < (b + 1) * n; ++d) {
        const double dist = lo[d] > 0.0 ? lo[d] : (hi[d] < 0.0 ? -hi[d] : 0.0);
        const double far = std::max(std::abs(lo[d]), std::abs(hi[d]));
        mn += dist * dist;
        mx += far * far;
      }
      smin += std::sqrt(mn);
      smax += std::sqrt(mx);
    }
    if (smax <= s_lo || smin > s_hi) continue;
    const std::span<const double> slo(lo.data(), D);
    const std::span<const double> shi(hi.data(), D);
    if (origin && s_lo <= 0.0 && smax <= s_hi) {
      acc += kernel_cell_value(k, slo, shi) * vol;
    } else if (!origin && smin > s_lo && smax <= s_hi) {
      acc += k(std::span<const double>(c.data(), D)) * vol;
    } else {
      int sub_total = 1;
      for (int d = 0; d < D; ++d) sub_total *= kSub;
      std::array<double, 3> p{};
      double part = 0.0;
      for (int j = 0; j < sub_total; ++j) {
        int r = j;
        for (int d = 0; d < D; ++d) {
          p[d] = lo[d] + h * ((r % kSub) + 0.5) / kSub;
          r /= kSub;
        }
        const std::span<const double> ps(p.data(), D);
        const double s = l1_sum(ps, n, m);
        if (s > s_lo && s <= s_hi) part += k.profile(s);
      }
      acc += part / sub_total * vol;
    }
  }
  return acc;
}

double annulus_integral(const Kernel& k, const AnnulusSpec& a, const Grid& g) {
  a.validate();
  if (k.dim() > 3 || a.outer() > g.half_width()) return annulus_integral_radial(k, a);
  return shell_integral_cells(k, a.inner(), a.outer(), g);
}

double tilde_phi(const Kernel& k, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("tilde_phi needs t > 0");
  return radial_shell_integral(k, 0.0, t);
}

int grid_nu_max(const Grid& g) { return static_cast<int>(std::ceil(std::log2(1.0 / g.cell_width()))); }

PhiThetaResult phi_theta(const Kernel& k, double theta, double t, double delta, double eps, int nu_max) {
  if (!(theta > 0.0 && theta <= 1.0)) throw std::invalid_argument("phi_theta needs theta in (0, 1]");
  if (!(t > 0.0)) throw std::invalid_argument("phi_theta needs t > 0");
  PhiThetaResult res;
  res.nu_first = static_cast<int>(std::ceil(-std::log2(t) - 1e-12));
  res.nu_last = std::max(nu_max, res.nu_first);
  const auto term = [&](int nu) {
    return std::pow(annulus_integral_radial(k, AnnulusSpec{std::ldexp(1.0, -nu), delta, eps}), theta);
  };
  double sum = 0.0;
  double prev = -1.0;
  double last = 0.0;
  int rising = 0;
  for (int nu = res.nu_first; nu <= res.nu_last; ++nu) {
    const double a = term(nu);
    if (prev >= 0.0 && a > 0.0 && a >= prev) {
      if (++rising >= 10) throw std::domain_error("Phi_theta series is not summable for kernel " + k.to_string());
    } else {
      rising = 0;
    }
    sum += a;
    prev = a;
    last = a;
  }
  const double next = term(res.nu_last + 1);
  if (last > 0.0) {
    const double r = next / last;
    res.tail_bound = r < 1.0 ? next / (1.0 - r) : std::numeric_limits<double>::infinity();
  }
  res.value = std::pow(sum, 1.0 / theta);
  return res;
}

std::vector<double> annulus_samples(int n, int m, double inner, double outer, int count, std::uint64_t seed) {
  if (count <= 0) throw std::invalid_argument("annulus sampling needs a positive count");
  if (!(inner >= 0.0) || !(outer > inner)) throw std::invalid_argument("annulus sampling needs 0 <= inner < outer");
  const int dir_dims = n == 1 ? 1 : n - 1;
  const int dims = 1 + (m - 1) + m * dir_dims;
  // generalized golden ratio for the R_d Kronecker sequence
  double phi = 2.0;
  for (int i = 0; i < 64; ++i) phi = std::pow(1.0 + phi, 1.0 / (dims + 1));
  std::vector<double> step(dims);
  std::vector<double> shift(dims);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int j = 0; j < dims; ++j) {
    step[j] = std::fmod(std::pow(1.0 / phi, j + 1), 1.0);
    shift[j] = uni(rng);
  }
  std::vector<double> out(static_cast<std::size_t>(count) * n * m);
  std::vector<double> u(dims);
  std::vector<double> cuts(m + 1);
  for (int i = 0; i < count; ++i) {
    for (int j = 0; j < dims; ++j) {
      const double v = shift[j] + (i + 1) * step[j];
      u[j] = v - std::floor(v);
    }
    const double s = outer - (outer - inner) * u[0];
    cuts[0] = 0.0;
    cuts[m] = 1.0;
    for (int b = 1; b < m; ++b) cuts[b] = u[b];
    std::sort(cuts.begin() + 1, cuts.begin() + m);
    double* y = &out[static_cast<std::size_t>(i) * n * m];
    int next = m;
    for (int b = 0; b < m; ++b) {
      const double r = s * (cuts[b + 1] - cuts[b]);
      if (n == 1) {
        y[b] = u[next++] < 0.5 ? -r : r;
      } else if (n == 2) {
        const double ang = 2.0 * std::numbers::pi * u[next++];
        y[2 * b] = r * std::cos(ang);
        y[2 * b + 1] = r * std::sin(ang);
      } else {
        const double z = 2.0 * u[next++] - 1.0;
        const double ang = 2.0 * std::numbers::pi * u[next++];
        const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
        y[3 * b] = r * rho * std::cos(ang);
        y[3 * b + 1] = r * rho * std::sin(ang);
        y[3 * b + 2] = r * z;
      }
    }
  }
  return out;
}

double phi_bar(const Kernel& k, double t, std::uint64_t seed, int samples) {
  const AnnulusSpec a{t, 1.0, 0.0};
  a.validate();
  const std::vector<double> pts = annulus_samples(k.n(), k.m(), a.inner(), a.outer(), samples, seed);
  const int D = k.dim();
  double sup = 0.0;
  for (int i = 0; i < samples; ++i) sup = std::max(sup, k(std::span<const double>(&pts[static_cast<std::size_t>(i) * D], D)));
  return sup;
}

ConditionDReport condition_d_check(const Kernel& k, double delta, double eps, int k_lo, int k_hi, std::uint64_t seed,
                                   int samples) {
  if (k_lo > k_hi) throw std::invalid_argument("condition D check needs k_lo <= k_hi");
  if (samples <= 0) throw std::invalid_argument("condition D check: empty sampled annulus");
  ConditionDReport rep;
  rep.delta = delta;
  rep.eps = eps;
  for (int kk = k_lo; kk <= k_hi; ++kk) {
    ConditionDRow row;
    row.k = kk;
    const double t = std::ldexp(1.0, kk);
    row.sup = phi_bar(k, t, seed, samples);
    row.integral = annulus_integral_radial(k, AnnulusSpec{t, delta, eps});
    const double den = std::ldexp(row.integral, -kk * k.dim());
    if (row.sup == 0.0)
      row.ratio = 0.0;
    else
      row.ratio = den > 0.0 ? row.sup / den : std::numeric_limits<double>::infinity();
    rep.c_max = std::max(rep.c_max, row.ratio);
    rep.rows.push_back(row);
  }
  rep.growing = rep.rows.size() >= 3;
  for (std::size_t i = 1; i < rep.rows.size(); ++i)
    if (!(rep.rows[i].ratio > rep.rows[i - 1].ratio * (1.0 + 1e-6))) rep.growing = false;
  return rep;
}

double h_alpha(double alpha, int n, int m, double s) {
  if (!(s > 0.0) || s >= 2.0) throw std::domain_error("h_alpha needs 0 < |x| < 2");
  const double nm = n * m;
  if (alpha < nm) return std::pow(s, alpha - nm) + 1.0;
  if (alpha == nm) return std::log(1.0 / s) + 1.0;
  return 1.0;
}

FourierProbe bessel_fourier_probe(const Kernel& k, std::vector<double> xi) {
  if (k.family() != Kernel::Family::Bessel) throw std::invalid_argument("Fourier probe needs a Bessel kernel");
  if (k.dim() != 1) throw std::invalid_argument("Fourier probe supports nm = 1 only");
  FourierProbe p;
  p.xi = std::move(xi);
  const double a = k.alpha();
  constexpr double kCut = 50.0;
  for (double x : p.xi) {
    const double w = 2.0 * std::numbers::pi * x;
    const auto f = [&](double s) { return k.profile(s) * std::cos(w * s); };
    double v = quad::integrate_from_zero(f, 1.0);
    const int panels = static_cast<int>(std::ceil((kCut - 1.0) * std::max(1.0, 4.0 * std::abs(x))));
    const double width = (kCut - 1.0) / panels;
    for (int i = 0; i < panels; ++i) v += quad::gauss_legendre(f, 1.0 + i * width, 1.0 + (i + 1) * width);
    const double num_val = 2.0 * v;
    const double sq = std::pow(1.0 + 4.0 * std::numbers::pi * std::numbers::pi * x * x, -a / 2.0);
    const double un = std::pow(1.0 + 4.0 * std::numbers::pi * std::numbers::pi * std::abs(x), -a / 2.0);
    p.numeric.push_back(num_val);
    p.squared.push_back(sq);
    p.unsquared.push_back(un);
    p.err_squared = std::max(p.err_squared, std::abs(num_val - sq) / sq);
    p.err_unsquared = std::max(p.err_unsquared, std::abs(num_val - un) / un);
  }
  constexpr double kMatch = 1e-3;
  if (p.err_squared < kMatch && p.err_squared <= p.err_unsquared)
    p.verdict = "squared";
  else if (p.err_unsquared < kMatch)
    p.verdict = "unsquared";
  else
    p.verdict = "neither";
  return p;
}

}  // namespace mlpot
