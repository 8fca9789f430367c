#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mlpot/grid.hpp"

namespace mlpot {

/// Annulus {delta(1-eps) t < sum |y_i| <= delta(1+eps) 2t} in (R^n)^m.
struct AnnulusSpec {
  double t = 1.0;
  double delta = 1.0;
  double eps = 0.0;

  double inner() const { return delta * (1.0 - eps) * t; }
  double outer() const { return delta * (1.0 + eps) * 2.0 * t; }
  void validate() const;
};

/// Nonnegative kernel on (R^n)^m depending on y only through
/// s = |y_1| + ... + |y_m| (Euclidean |y_i|).
class Kernel {
 public:
  enum class Family { Fractional, RadialProfile, Bessel, Tabulated };
  using Profile = std::function<double(double)>;

  /// (sum |y_i|)^{alpha - nm}, 0 < alpha < nm.
  static Kernel fractional(int n, int m, double alpha);
  /// Arbitrary nonnegative monotone profile of s; checked by sampling.
  static Kernel radial_profile(int n, int m, Profile profile, std::string name = "profile");
  /// Multilinear Bessel kernel G_alpha, log-spaced midpoint quadrature in t
  /// over [min(1/T, s^2/200), T] with the given node count.
  static Kernel bessel(int n, int m, double alpha, double T = 1e3, int nodes = 4096);
  /// Piecewise-linear profile through (s_k, v_k), s strictly increasing,
  /// clamped outside the table.
  static Kernel tabulated(int n, int m, std::vector<double> s, std::vector<double> v, std::string name);
  /// "frac{alpha}", "bessel{alpha}" or "profile:<file.csv>".
  static Kernel parse(const std::string& text, int n, int m);

  Family family() const { return family_; }
  int n() const { return n_; }
  int m() const { return m_; }
  int dim() const { return n_ * m_; }
  double alpha() const { return alpha_; }
  std::string to_string() const;

  /// True when the profile blows up at s = 0.
  bool singular_at_origin() const;
  /// Profile value at s >= 0 (+inf at a singular origin).
  double profile(double s) const;
  /// phi(y) for y in (R^n)^m stored as m consecutive blocks of n coordinates.
  /// Throws std::domain_error at the singular origin.
  double operator()(std::span<const double> y) const;

 private:
  Family family_ = Family::Fractional;
  int n_ = 1;
  int m_ = 1;
  double alpha_ = 0.5;
  double T_ = 1e3;
  int nodes_ = 4096;
  double bessel_c_ = 0.0;
  std::shared_ptr<const Profile> profile_;
  std::shared_ptr<const std::vector<double>> tab_s_;
  std::shared_ptr<const std::vector<double>> tab_v_;
  std::string name_;
};

double eval_kernel(const Kernel& k, std::span<const double> y);

/// Average of phi over the box prod [lo_d, hi_d] (dimension nm) when its
/// closure contains the origin, else phi at the box center.
double kernel_cell_value(const Kernel& k, std::span<const double> lo, std::span<const double> hi);
/// Same for the cell centered at h * offsets (one integer offset per
/// coordinate, nm of them) with width h.
double kernel_cell_value(const Kernel& k, std::span<const int> offsets, double h);

/// Volume of {sum |y_i| <= 1} in (R^n)^m: (n w_n Gamma(n))^m / Gamma(nm + 1).
double l1_ball_volume(int n, int m);

/// Integral of phi over {a < s <= b} by the radial reduction
/// int_a^b profile(s) nm V s^{nm-1} ds; exact for fractional kernels.
double radial_shell_integral(const Kernel& k, double a, double b);

/// Annulus integral by the radial reduction.
double annulus_integral_radial(const Kernel& k, const AnnulusSpec& a);

/// Annulus integral by midpoint cells of width h on [-L, L)^{nm}; boundary
/// cells are weighted by 4^{nm}-point subsampling. Falls back to the radial
/// formula when the annulus is not contained in the box or nm > 3.
double annulus_integral(const Kernel& k, const AnnulusSpec& a, const Grid& g);

/// Integral of phi over {s_lo < s <= s_hi} by nm-dimensional cells of the
/// grid (origin cells integrated by corner peeling). nm <= 3.
double shell_integral_cells(const Kernel& k, double s_lo, double s_hi, const Grid& g);

/// Integral of phi over {sum |y_i| <= t}. Throws std::domain_error when the
/// integral diverges at the origin.
double tilde_phi(const Kernel& k, double t);

struct PhiThetaResult {
  double value = 0.0;       // partial sum, nu from ceil(log_{1/2} t) to nu_max
  double tail_bound = 0.0;  // geometric estimate of the omitted tail (theta power)
  int nu_first = 0;
  int nu_last = 0;
};

/// Phi_theta(t) = [sum_{nu >= log_{1/2} t} (int_{A(2^-nu, delta, eps)} phi)^theta]^{1/theta},
/// truncated at nu_max. Throws std::domain_error when the terms fail to
/// decrease over 10 consecutive nu.
PhiThetaResult phi_theta(const Kernel& k, double theta, double t, double delta, double eps, int nu_max = 40);
/// Finest dyadic scale resolved by the grid: ceil(log2(1/h)).
int grid_nu_max(const Grid& g);

/// Low-discrepancy points in the annulus {inner < s <= outer} of (R^n)^m
/// (Kronecker sequence with a seeded Cranley-Patterson shift), returned as
/// count consecutive blocks of nm coordinates.
std::vector<double> annulus_samples(int n, int m, double inner, double outer, int count, std::uint64_t seed);

/// Sampled sup of phi over the annulus A(t, 1, 0).
double phi_bar(const Kernel& k, double t, std::uint64_t seed = 0, int samples = 10000);

struct ConditionDRow {
  int k = 0;
  double sup = 0.0;
  double integral = 0.0;
  double ratio = 0.0;
};

struct ConditionDReport {
  double delta = 1.0;
  double eps = 0.5;
  std::vector<ConditionDRow> rows;
  double c_max = 0.0;
  bool growing = false;  // ratios strictly increasing across the whole range
};

/// ratio_k = sup_{A(2^k,1,0)} phi / (2^{-knm} int_{A(2^k,delta,eps)} phi).
ConditionDReport condition_d_check(const Kernel& k, double delta, double eps, int k_lo, int k_hi,
                                   std::uint64_t seed = 0, int samples = 10000);

/// Leading-order behaviour of G_alpha near the origin at s = sum |x_i|.
double h_alpha(double alpha, int n, int m, double s);

struct FourierProbe {
  std::vector<double> xi;
  std::vector<double> numeric;
  std::vector<double> squared;    // (1 + 4 pi^2 xi^2)^{-alpha/2}
  std::vector<double> unsquared;  // (1 + 4 pi^2 |xi|)^{-alpha/2}
  double err_squared = 0.0;
  double err_unsquared = 0.0;
  std::string verdict;  // "squared", "unsquared" or "neither"
};

/// Numerical Fourier transform of a Bessel kernel with nm = 1 at the given
/// frequencies, compared against both closed-form candidates.
FourierProbe bessel_fourier_probe(const Kernel& k, std::vector<double> xi);

}  // namespace mlpot
