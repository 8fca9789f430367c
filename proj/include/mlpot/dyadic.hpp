#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mlpot/grid.hpp"
#include "mlpot/kernels.hpp"
#include "mlpot/orlicz.hpp"

namespace mlpot {

/// Dyadic subcubes of the grid box. Level j has 2^j cubes per axis of side
/// N / 2^j cells; level 0 is the box, the last level is single cells.
class DyadicLattice {
 public:
  explicit DyadicLattice(const Grid& g);

  const Grid& grid() const { return grid_; }
  int levels() const { return levels_; }
  int side(int j) const { return grid_.cells_per_axis() >> j; }
  int per_axis(int j) const { return 1 << j; }
  std::size_t count(int j) const;
  Cube cube(int j, std::size_t idx) const;
  /// Index at level j of the cube containing the cell.
  std::size_t index_of(int j, const Index3& cell) const;

 private:
  Grid grid_;
  int levels_ = 1;
};

/// prod_i ||h_i||_{L,3Q} for every dyadic cube, per level (3Q clipped to the
/// box, averages normalized by the clipped measure).
std::vector<std::vector<double>> m3d_cube_products(std::span<const GridFunction> h, const DyadicLattice& lat);
/// M_{3D} h(x) = sup over dyadic Q containing x of prod_i ||h_i||_{L,3Q}.
GridFunction m3d(std::span<const GridFunction> h, const DyadicLattice& lat);

struct CZCube {
  Cube cube;
  int level = 0;            // lattice level j
  double prod_norm = 0.0;   // prod_i ||h_i||_{L,3Q}
  std::size_t e_cells = 0;  // cells of E = Q \ D_{k+1}
};

struct CZLevel {
  int k = 0;
  double threshold = 0.0;  // a^k
  std::vector<CZCube> cubes;
};

/// Calderon-Zygmund selection: for each k in the band, the maximal dyadic
/// cubes with prod_norm > a^k. The band starts at the smallest k with
/// a^k >= prod_norm(box) and ends at the largest k with a^k < max M_{3D};
/// at most 64 levels (the highest are kept). The root cube carries the
/// remaining cells box \ D_{k_first} as its E set.
struct CZDecomposition {
  Grid grid;
  double a = 2.0;
  int m = 1;
  std::vector<CZLevel> levels;
  CZCube base;
  /// Per cell: -1 for the base set, otherwise a global id into `ids`.
  std::vector<int> owner;
  /// Global id -> (level position, cube position).
  std::vector<std::pair<int, int>> ids;
  GridFunction m3d;

  /// max |Q| / |E| over every selected cube (and the base); +inf when some
  /// E is empty.
  double max_q_over_e() const;
  std::size_t cube_count() const;
};

CZDecomposition cz_decompose(std::span<const GridFunction> h, double a, const DyadicLattice& lat);
/// Default base a = 2 * 4^{nm}.
double default_cz_base(int n, int m);

/// JSON {a, levels:[{k, cubes:[{corner, side, prod_norm}], E_masks}]} where
/// E_masks run-length encodes the per-cell cube position within the level
/// (-1 outside) as [value, run] pairs.
std::string cz_to_json(const CZDecomposition& cz, int indent = 2);

struct DiscretizationParams {
  int ell = 0;
  int j = 0;  // commutator slot (0-based) for ell = 1
  double q = 1.0;
  double delta = 1.0;
  double eps = 0.5;
  int nu_max = -1;  // -1: grid scale
};

/// Right side of the discretization inequality: the cz0 sum
///   Phi_q(l(Q))^q ||u^q||_{L(log L)^{ell q},3Q} prod ||f_i||^q_{L,3Q} |E|
/// plus, for ell = 1, the czj sum
///   Phi_q(l(Q))^q ||u||^q_{L,3Q} prod ||f_i||^q_{L(log L)^{delta_ij},3Q} |E|.
/// The base record of each decomposition is included.
double discretization_rhs(const Kernel& k, std::span<const GridFunction> f, const GridFunction& u,
                          const CZDecomposition& cz0, const CZDecomposition* czj, const DiscretizationParams& p);
/// int [|T_{b_j^ell}(f)| u]^q with T_{b_j^1} = b_j T(f) - T(.., b_j f_j, ..).
double discretization_lhs(const Kernel& k, std::span<const GridFunction> f, const GridFunction& u,
                          const GridFunction* b, const DiscretizationParams& p);

struct DiscretizationResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  double max_q_over_e = 0.0;
};

/// Builds cz0 from f and (ell = 1) czj from f with slot j replaced by u, then
/// evaluates both sides. A zero component gives 0 = 0.
DiscretizationResult discretization_check(const Kernel& k, std::span<const GridFunction> f, const GridFunction& u,
                                          const GridFunction* b, const DiscretizationParams& p, double a);

/// LHS / RHS of
///   sum_{dyadic Q in Q0} phibar(l(Q)/2)^q |3Q|^{mq+1} ||f||_{psi,3Q}
///     <= C Phi_q(l(Q0))^q |3Q0| ||f||_{psi,3Q0}
/// with unclipped |3Q| and norms over 3Q clipped to the box. 0 when f = 0.
double dyadic_tail_check(const Kernel& k, const Cube& q0, const NormSpec& psi, const GridFunction& f, double q,
                         double delta = 1.0, double eps = 0.5, std::uint64_t seed = 0);

}  // namespace mlpot
