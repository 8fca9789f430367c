#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mlpot/corpus.hpp"
#include "mlpot/grid.hpp"
#include "mlpot/kernels.hpp"
#include "mlpot/operators.hpp"
#include "mlpot/orlicz.hpp"

namespace mlpot {

/// Settings shared by every theorem harness.
struct HarnessConfig {
  int n = 1;
  int m = 2;
  int N = 64;
  double L = 2.0;
  std::string kernel = "frac1";
  int ell = 0;
  FamilyKind family = FamilyKind::Centered;
  int corpus_size = 20;
  std::uint64_t seed = 0;
  /// Also run at 2N and compare the corpus max ratio.
  bool refine = true;
  /// Condition D parameters used for Phi_theta.
  double delta_d = 1.0;
  double eps_d = 0.5;
  /// Commutator symbol (same b in every slot) for ell = 1.
  std::string symbol = "bmolog";
  double symbol_scale = 1.0;
  /// Replaces the seeded corpus when set.
  std::function<std::vector<FunctionTuple>(const Grid&)> corpus;
};

struct InequalityCase {
  std::string label;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
};

struct InequalityReport {
  std::string theorem;
  std::string case_id;
  int m = 1;
  int n = 1;
  int N = 0;
  double L = 0.0;
  std::string kernel;
  int ell = 0;
  std::string family;
  std::map<std::string, std::string> params;
  std::vector<InequalityCase> cases;  // at resolution N
  double max_ratio = 0.0;             // empirical constant at N
  bool refined = false;
  double max_ratio_refined = 0.0;  // at 2N
  bool stable = true;
  std::map<std::string, double> metrics;
  std::vector<std::string> notes;
};

std::string report_to_json(const InequalityReport& r, int indent = 2);

/// lhs / rhs with 0/0 = 0 and x/0 = inf.
double safe_ratio(double lhs, double rhs);

/// sup_lambda lambda u({|g| > lambda})^{1/p}, exact over the sample values.
double lorentz_weak_quasinorm(const GridFunction& g, const GridFunction& u, double p);

struct TestingCondition {
  double theta = 1.0;
  double gamma = 1.0;
  NormSpec x;
  std::vector<std::vector<NormSpec>> y;  // y[i][j]
  GridFunction u;
  std::vector<GridFunction> v;
  Kernel kernel = Kernel::fractional(1, 1, 0.5);
  ExponentTuple exps;
  std::vector<Cube> family;
  double delta = 1.0;
  double eps = 0.5;
  int nu_max = -1;  // -1: grid scale
};

/// max_j sup_Q Phi_theta(l(Q)) |Q|^{1/q-1/p} ||u^gamma||_{X,Q}^{1/gamma} prod_i ||v_i^{-1}||_{Y_ij,Q}.
double testing_condition_W(const TestingCondition& tc);

struct StrongOptions {
  ExponentTuple exps;
  std::string u = "one";
  std::vector<std::string> v;  // empty: all "one"
  double delta = 0.5;          // Orlicz bundle parameter
  bool unchecked = false;
  std::optional<NormSpec> x_override;
  std::optional<std::vector<NormSpec>> y_override;  // one spec per i, used for every column
};

/// Two-weight strong type bound for T (ell = 0) or the commutator (ell = 1).
InequalityReport verify_strong(const HarnessConfig& cfg, const StrongOptions& opt);

struct FeffermanSteinOptions {
  std::string case_id = "i";
  std::vector<double> p_i{2.0, 2.0};
  double delta = 0.5;
  std::vector<std::string> u;  // empty: all "one"
};

InequalityReport verify_fefferman_stein(const HarnessConfig& cfg, const FeffermanSteinOptions& opt);

struct CoifmanOptions {
  std::string case_id = "i";
  double p = 1.0;
  std::string w = "one";
  double rh_s = 2.0;  // A_inf surrogate exponent
};

InequalityReport verify_coifman(const HarnessConfig& cfg, const CoifmanOptions& opt);

struct FtdOptions {
  std::string case_id = "i";
  double p = 1.0;
  std::string u = "one";
};

InequalityReport verify_ftd(const HarnessConfig& cfg, const FtdOptions& opt);

struct WeakMaximalOptions {
  std::string young = "L";     // B as a norm spec ("L" means B(t) = t)
  std::string phi = "one";     // "one", "const{c}" or "t^{e}"
  std::vector<std::string> u;  // empty: all "one"
  int lambda_points = 64;
};

/// Also records metrics["lambda_refinement"]: max relative LHS change when
/// the lambda grid is doubled.
InequalityReport verify_weak_maximal(const HarnessConfig& cfg, const WeakMaximalOptions& opt);

/// phi scaling from "one", "const{c}" or "t^{e}".
PhiScaling parse_phi_scaling(const std::string& text);

struct ControlOptions {
  std::string u = "one";
  std::vector<double> deltas{0.25, 0.5, 1.0};
  bool corollary = true;  // ell = 0 only
};

InequalityReport verify_control(const HarnessConfig& cfg, const ControlOptions& opt);

}  // namespace mlpot
