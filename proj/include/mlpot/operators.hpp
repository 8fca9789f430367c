#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mlpot/grid.hpp"
#include "mlpot/kernels.hpp"
#include "mlpot/orlicz.hpp"

namespace mlpot {

/// Exponents p_1..p_m in (1, inf), derived 1/p = sum 1/p_i, and a target q.
struct ExponentTuple {
  std::vector<double> p_i;
  double q = 1.0;

  double p() const;
  /// Throws unless every p_i > 1, p > 1/m and q > 0.
  void validate() const;
};

/// Profile phi(t) of the cube measure t = |Q| used by the maximal operators.
class PhiScaling {
 public:
  using Fn = std::function<double(double)>;

  static PhiScaling constant(double c = 1.0);
  /// c t^e.
  static PhiScaling power(double c, double e);
  static PhiScaling custom(Fn fn, std::string name);
  /// t -> Phi_theta(t^{1/n})^exponent.
  static PhiScaling kernel_theta(const Kernel& k, double theta, double exponent, double delta, double eps,
                                 int nu_max = 40);
  /// t -> B^m(phi(t)^{1/m}).
  static PhiScaling psi(const YoungFunction& b, int m, const PhiScaling& phi);

  PhiScaling scaled(double c) const;
  double operator()(double t) const { return fn_(t); }
  const std::string& name() const { return name_; }

 private:
  Fn fn_;
  std::string name_;
};

struct PhiWitness {
  double rho = 1.0;          // max of phi(t) / phi(s) over sampled t <= s
  double tail_slope = 0.0;   // phi(t)/t at the largest sample over phi(t)/t at the middle one
  bool sublinear = false;    // phi(t)/t decreasing on the large-t sample
};

/// Sampled essential-monotonicity witness on t in [t_lo, t_hi].
PhiWitness witness(const PhiScaling& phi, double t_lo = 1e-6, double t_hi = 1e6, int samples = 121);

/// T_phi(f)(x) = sum over m-tuples of cells of kernel_cell_value(x - y) prod f_i(y_i) h^{nm}.
/// Output grid must equal the input grid.
GridFunction apply_potential(const Kernel& k, std::span<const GridFunction> f, const Grid& out_grid);
/// Plain nested-loop reference for apply_potential.
GridFunction apply_potential_naive(const Kernel& k, std::span<const GridFunction> f, const Grid& out_grid);

/// sum_j [b_j T(f) - T(f_1, ..., b_j f_j, ..., f_m)].
GridFunction apply_commutator(const Kernel& k, std::span<const GridFunction> b, std::span<const GridFunction> f,
                              const Grid& out_grid);

/// ||f||_{X,Q} for every cube of the family (prefix sums for L^r).
std::vector<double> cube_norms(const GridFunction& f, const std::vector<Cube>& family, const NormSpec& x);

/// sup over family cubes Q containing x of phi(|Q|) prod ||f_i||_{X_i,Q}, with
/// |Q| the unclipped measure. Throws when a cell is not covered.
GridFunction maximal(const PhiScaling& phi, std::span<const NormSpec> x, std::span<const GridFunction> f,
                     const std::vector<Cube>& family);
GridFunction maximal_single(const PhiScaling& phi, const NormSpec& x, const GridFunction& u,
                            const std::vector<Cube>& family);

}  // namespace mlpot
