#pragma once

#include <span>
#include <string>
#include <vector>

#include "mlpot/grid.hpp"

namespace mlpot {

/// Young function of one of the supported families:
///   power-log  t^p (1 + log+ t)^alpha,  p >= 1, alpha >= 0
///   exp        e^t - 1
///   exp-power  e^{t^{1/q}} - 1
///   identity   t
///   composed   B1(B2(...Bk(t)))  (evaluated right to left)
class YoungFunction {
 public:
  enum class Family { PowerLog, Exp, ExpPower, Identity, Composed };

  static YoungFunction power_log(double p, double alpha = 0.0);
  static YoungFunction exp();
  /// exp(t^{1/q}) - 1; for q > 1 replaced below its tangent point from the origin by that tangent line.
  static YoungFunction exp_power(double q);
  static YoungFunction identity();
  static YoungFunction composed(std::vector<YoungFunction> parts);
  /// m-fold self composition B o ... o B.
  static YoungFunction iterate(const YoungFunction& b, int m);

  Family family() const { return family_; }
  double p() const { return p_; }
  double alpha() const { return alpha_; }
  double q() const { return q_; }
  const std::vector<YoungFunction>& parts() const { return parts_; }

  /// Exact formula; throws std::domain_error for t < 0.
  double operator()(double t) const;
  /// t with |B(t) - s| <= tol * max(1, s), by bracketing bisection.
  double inverse(double s, double tol = 1e-12) const;

  /// Sampled check of B(0) = 0, monotonicity and convexity on [0, 1e6].
  bool looks_convex() const;
  /// B(st) <= (1 + tol) B(s) B(t) on a sampled (s, t) lattice.
  bool submultiplicative(double tol = 0.01) const;

  std::string to_string() const;

 private:
  Family family_ = Family::Identity;
  double p_ = 1.0;
  double alpha_ = 0.0;
  double q_ = 1.0;
  double knot_ = 0.0;  // exp-power: linear below the knot so the function is convex
  double slope_ = 0.0;
  std::vector<YoungFunction> parts_;
};

double young_eval(const YoungFunction& y, double t);
double young_inverse(const YoungFunction& y, double s, double tol = 1e-12);

/// Cube-norm specification: a plain L^r exponent or a Young function.
/// Text forms: "L^r", "L" (= L^1), "Lp{p}logL{alpha}", "expL",
/// "expL^{1/q}", "B^m(<spec>)".
class NormSpec {
 public:
  NormSpec() = default;
  static NormSpec lebesgue(double r);
  static NormSpec orlicz(YoungFunction y);
  static NormSpec parse(const std::string& text);
  /// L^p (log L)^alpha, collapsing to L^p when alpha == 0.
  static NormSpec llogl(double p, double alpha);

  bool is_lebesgue() const { return lebesgue_; }
  double exponent() const { return r_; }
  const YoungFunction& young() const { return young_; }

  /// Inverse of the defining function: s^{1/r} or B^{-1}(s).
  double inverse(double s) const;
  std::string to_string() const;

 private:
  bool lebesgue_ = true;
  double r_ = 1.0;
  YoungFunction young_;
};

constexpr double kDefaultNormTol = 1e-10;

/// Luxemburg norm of equally weighted samples: (avg |v|^r)^{1/r} in closed
/// form for L^r, otherwise inf{lambda : avg B(|v|/lambda) <= 1} by bisection to
/// relative tolerance tol. Zero when every sample is zero.
double luxemburg_norm(std::span<const double> values, const NormSpec& x, double tol = kDefaultNormTol);
double luxemburg_norm(const GridFunction& f, const Cube& q, const NormSpec& x, double tol = kDefaultNormTol);

struct HolderResult {
  double ratio = 0.0;  // ||fg||_C / (||f||_A ||g||_B)
  double kappa = 0.0;  // sup_t A^{-1}(t) B^{-1}(t) / C^{-1}(t) over the sample
};

/// Largest A^{-1}(t) B^{-1}(t) / C^{-1}(t) over t in a log-spaced sample of
/// [1e-3, 1e6].
double holder_inverse_constant(const NormSpec& a, const NormSpec& b, const NormSpec& c);

/// Generalized Holder ratio on Q. Rejects the triple (std::invalid_argument)
/// when its inverse constant exceeds kappa_max.
HolderResult holder_check(const GridFunction& f, const GridFunction& g, const Cube& q, const NormSpec& a,
                          const NormSpec& b, const NormSpec& c, double kappa_max = 1.25);

}  // namespace mlpot
