#include "mlpot/dyadic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "json.hpp"
#include "mlpot/operators.hpp"

namespace mlpot {

DyadicLattice::DyadicLattice(const Grid& g) : grid_(g) {
  levels_ = 1;
  while ((g.cells_per_axis() >> (levels_ - 1)) > 1) ++levels_;
}

std::size_t DyadicLattice::count(int j) const {
  std::size_t c = 1;
  for (int d = 0; d < grid_.dim(); ++d) c *= static_cast<std::size_t>(per_axis(j));
  return c;
}

Cube DyadicLattice::cube(int j, std::size_t idx) const {
  Cube q;
  q.side = side(j);
  const std::size_t per = static_cast<std::size_t>(per_axis(j));
  for (int d = grid_.dim() - 1; d >= 0; --d) {
    q.lo[d] = static_cast<int>(idx % per) * q.side;
    idx /= per;
  }
  return q;
}

std::size_t DyadicLattice::index_of(int j, const Index3& cell) const {
  const int s = side(j);
  std::size_t idx = 0;
  for (int d = 0; d < grid_.dim(); ++d) idx = idx * static_cast<std::size_t>(per_axis(j)) + cell[d] / s;
  return idx;
}

std::vector<std::vector<double>> m3d_cube_products(std::span<const GridFunction> h, const DyadicLattice& lat) {
  if (h.empty()) throw std::invalid_argument("M_3D needs at least one function");
  const Grid& g = lat.grid();
  std::vector<PrefixSum> sums;
  for (const auto& hi : h) {
    if (!(hi.grid() == g)) throw std::invalid_argument("M_3D: functions must live on the lattice grid");
    if (!hi.nonnegative()) throw std::invalid_argument("M_3D needs nonnegative functions");
    sums.emplace_back(g, hi.values());
  }
  std::vector<std::vector<double>> out(lat.levels());
  for (int j = 0; j < lat.levels(); ++j) {
    out[j].resize(lat.count(j));
    for (std::size_t c = 0; c < out[j].size(); ++c) {
      const CellRange r = lat.cube(j, c).dilate3().clip(g);
      const double cnt = static_cast<double>(r.count(g.dim()));
      double prod = 1.0;
      for (const auto& s : sums) prod *= std::max(0.0, s.sum(r)) / cnt;
      out[j][c] = prod;
    }
  }
  return out;
}

namespace {

GridFunction m3d_from_products(const std::vector<std::vector<double>>& prods, const DyadicLattice& lat) {
  const Grid& g = lat.grid();
  std::vector<double> v(g.size(), 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Index3 c = g.unflatten(i);
    for (int j = 0; j < lat.levels(); ++j) v[i] = std::max(v[i], prods[j][lat.index_of(j, c)]);
  }
  return GridFunction(g, std::move(v));
}

}  // namespace

GridFunction m3d(std::span<const GridFunction> h, const DyadicLattice& lat) {
  return m3d_from_products(m3d_cube_products(h, lat), lat);
}

double default_cz_base(int n, int m) { return 2.0 * std::pow(4.0, n * m); }

double CZDecomposition::max_q_over_e() const {
  const double cell = grid.cell_volume();
  double worst = 0.0;
  auto visit = [&](const CZCube& c) {
    if (c.e_cells == 0) {
      worst = std::numeric_limits<double>::infinity();
      return;
    }
    worst = std::max(worst, c.cube.measure(grid) / (static_cast<double>(c.e_cells) * cell));
  };
  for (const auto& lv : levels)
    for (const auto& c : lv.cubes) visit(c);
  if (base.e_cells > 0) visit(base);
  return worst;
}

std::size_t CZDecomposition::cube_count() const {
  std::size_t c = 0;
  for (const auto& lv : levels) c += lv.cubes.size();
  return c;
}

CZDecomposition cz_decompose(std::span<const GridFunction> h, double a, const DyadicLattice& lat) {
  if (!(a > 1.0)) throw std::invalid_argument("CZ base a must exceed 1");
  const Grid& g = lat.grid();
  const auto prods = m3d_cube_products(h, lat);
  CZDecomposition cz;
  cz.grid = g;
  cz.a = a;
  cz.m = static_cast<int>(h.size());
  cz.m3d = m3d_from_products(prods, lat);
  const double root = prods[0][0];
  if (!(root > 0.0)) throw std::invalid_argument("empty decomposition: some h_i vanishes identically");
  double top = 0.0;
  for (double v : cz.m3d.values()) top = std::max(top, v);

  const double la = std::log(a);
  int k_lo = static_cast<int>(std::ceil(std::log(root) / la));
  while (std::pow(a, k_lo) < root) ++k_lo;
  while (std::pow(a, k_lo - 1) >= root) --k_lo;
  int k_hi = static_cast<int>(std::floor(std::log(top) / la));
  while (std::pow(a, k_hi) >= top) --k_hi;
  while (std::pow(a, k_hi + 1) < top) ++k_hi;
  if (k_hi - k_lo + 1 > 64) k_lo = k_hi - 63;

  cz.base.cube = Cube::whole(g);
  cz.base.level = 0;
  cz.base.prod_norm = root;
  cz.owner.assign(g.size(), -1);

  const int J = lat.levels();
  std::vector<std::vector<char>> state(J);  // 0 free, 1 selected, 2 inside a selected cube
  for (int k = k_lo; k <= k_hi; ++k) {
    CZLevel lv;
    lv.k = k;
    lv.threshold = std::pow(a, k);
    for (int j = 0; j < J; ++j) {
      state[j].assign(lat.count(j), 0);
      for (std::size_t c = 0; c < state[j].size(); ++c) {
        if (j > 0) {
          const Cube q = lat.cube(j, c);
          const std::size_t parent = lat.index_of(j - 1, q.lo);
          if (state[j - 1][parent] != 0) {
            state[j][c] = 2;
            continue;
          }
        }
        if (prods[j][c] > lv.threshold) {
          state[j][c] = 1;
          CZCube sel;
          sel.cube = lat.cube(j, c);
          sel.level = j;
          sel.prod_norm = prods[j][c];
          lv.cubes.push_back(sel);
        }
      }
    }
    if (lv.cubes.empty()) continue;
    const int pos = static_cast<int>(cz.levels.size());
    for (std::size_t c = 0; c < lv.cubes.size(); ++c) {
      const int id = static_cast<int>(cz.ids.size());
      cz.ids.emplace_back(pos, static_cast<int>(c));
      for_each_cell(g, lv.cubes[c].cube.clip(g), [&](std::size_t cell) { cz.owner[cell] = id; });
    }
    cz.levels.push_back(std::move(lv));
  }
  for (int id : cz.owner) {
    if (id < 0)
      ++cz.base.e_cells;
    else
      ++cz.levels[cz.ids[id].first].cubes[cz.ids[id].second].e_cells;
  }
  return cz;
}

std::string cz_to_json(const CZDecomposition& cz, int indent) {
  nlohmann::json j;
  j["a"] = cz.a;
  j["m"] = cz.m;
  j["grid"] = {{"n", cz.grid.dim()}, {"L", cz.grid.half_width()}, {"N", cz.grid.cells_per_axis()}};
  j["base"] = {{"prod_norm", cz.base.prod_norm}, {"E_cells", cz.base.e_cells}};
  const int n = cz.grid.dim();
  nlohmann::json levels = nlohmann::json::array();
  for (std::size_t l = 0; l < cz.levels.size(); ++l) {
    const auto& lv = cz.levels[l];
    nlohmann::json cubes = nlohmann::json::array();
    for (const auto& c : lv.cubes) {
      std::vector<double> corner;
      for (int d = 0; d < n; ++d) corner.push_back(-cz.grid.half_width() + c.cube.lo[d] * cz.grid.cell_width());
      cubes.push_back({{"corner", corner},
                       {"side", c.cube.side_length(cz.grid)},
                       {"prod_norm", c.prod_norm},
                       {"E_cells", c.e_cells}});
    }
    nlohmann::json rle = nlohmann::json::array();
    int cur = -2;
    long run = 0;
    for (int id : cz.owner) {
      const int v = id >= 0 && cz.ids[id].first == static_cast<int>(l) ? cz.ids[id].second : -1;
      if (v == cur) {
        ++run;
        continue;
      }
      if (run > 0) rle.push_back({cur, run});
      cur = v;
      run = 1;
    }
    if (run > 0) rle.push_back({cur, run});
    levels.push_back({{"k", lv.k}, {"cubes", cubes}, {"E_masks", rle}});
  }
  j["levels"] = levels;
  return j.dump(indent);
}

namespace {

class PhiQ {
 public:
  PhiQ(const Kernel& k, const DiscretizationParams& p, int nu_max) : k_(k), p_(p), nu_max_(nu_max) {}
  double operator()(double side) {
    auto it = cache_.find(side);
    if (it != cache_.end()) return it->second;
    const double v = std::pow(phi_theta(k_, p_.q, side, p_.delta, p_.eps, nu_max_).value, p_.q);
    cache_.emplace(side, v);
    return v;
  }

 private:
  const Kernel& k_;
  const DiscretizationParams& p_;
  int nu_max_;
  std::map<double, double> cache_;
};

template <class Fn>
void for_each_record(const CZDecomposition& cz, Fn fn) {
  for (const auto& lv : cz.levels)
    for (const auto& c : lv.cubes) fn(c);
  fn(cz.base);
}

}  // namespace

double discretization_rhs(const Kernel& k, std::span<const GridFunction> f, const GridFunction& u,
                          const CZDecomposition& cz0, const CZDecomposition* czj, const DiscretizationParams& p) {
  if (p.ell != 0 && p.ell != 1) throw std::invalid_argument("ell must be 0 or 1");
  if (!(p.q > 0.0 && p.q <= 1.0)) throw std::invalid_argument("discretization needs q in (0, 1]");
  for (const auto& fi : f)
    if (fi.is_zero()) return 0.0;
  const Grid& g = u.grid();
  const double cell = g.cell_volume();
  PhiQ phiq(k, p, p.nu_max >= 0 ? p.nu_max : grid_nu_max(g));

  const GridFunction uq = pow(abs(u), p.q);
  const NormSpec u_spec = NormSpec::llogl(1.0, p.ell * p.q);
  double total = 0.0;
  for_each_record(cz0, [&](const CZCube& c) {
    if (c.e_cells == 0) return;
    const Cube q3 = c.cube.dilate3();
    total += phiq(c.cube.side_length(g)) * luxemburg_norm(uq, q3, u_spec) * std::pow(c.prod_norm, p.q) *
             static_cast<double>(c.e_cells) * cell;
  });
  if (p.ell == 1) {
    if (!czj) throw std::invalid_argument("ell = 1 needs the second decomposition");
    if (p.j < 0 || p.j >= static_cast<int>(f.size())) throw std::invalid_argument("commutator slot out of range");
    const NormSpec l1 = NormSpec::lebesgue(1.0);
    const NormSpec llog = NormSpec::llogl(1.0, 1.0);
    for_each_record(*czj, [&](const CZCube& c) {
      if (c.e_cells == 0) return;
      const Cube q3 = c.cube.dilate3();
      double prod = std::pow(luxemburg_norm(u, q3, l1), p.q);
      for (std::size_t i = 0; i < f.size(); ++i)
        prod *= std::pow(luxemburg_norm(f[i], q3, static_cast<int>(i) == p.j ? llog : l1), p.q);
      total += phiq(c.cube.side_length(g)) * prod * static_cast<double>(c.e_cells) * cell;
    });
  }
  return total;
}

double discretization_lhs(const Kernel& k, std::span<const GridFunction> f, const GridFunction& u,
                          const GridFunction* b, const DiscretizationParams& p) {
  const Grid& g = u.grid();
  GridFunction t;
  if (p.ell == 0) {
    t = apply_potential(k, f, g);
  } else {
    if (!b) throw std::invalid_argument("ell = 1 needs a symbol b_j");
    std::vector<GridFunction> bs(f.size(), GridFunction::constant(g, 0.0));
    bs.at(static_cast<std::size_t>(p.j)) = *b;
    t = apply_commutator(k, bs, f, g);
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) acc += std::pow(std::abs(t[i]) * std::abs(u[i]), p.q);
  return acc * g.cell_volume();
}

DiscretizationResult discretization_check(const Kernel& k, std::span<const GridFunction> f, const GridFunction& u,
                                          const GridFunction* b, const DiscretizationParams& p, double a) {
  DiscretizationResult r;
  for (const auto& fi : f)
    if (fi.is_zero()) return r;
  const DyadicLattice lat(u.grid());
  const CZDecomposition cz0 = cz_decompose(f, a, lat);
  CZDecomposition czj;
  const CZDecomposition* czj_ptr = nullptr;
  r.max_q_over_e = cz0.max_q_over_e();
  if (p.ell == 1 && !u.is_zero()) {
    std::vector<GridFunction> hj(f.begin(), f.end());
    hj.at(static_cast<std::size_t>(p.j)) = abs(u);
    czj = cz_decompose(hj, a, lat);
    czj_ptr = &czj;
    r.max_q_over_e = std::max(r.max_q_over_e, czj.max_q_over_e());
  }
  r.lhs = discretization_lhs(k, f, u, b, p);
  if (p.ell == 1 && !czj_ptr) return r;
  r.rhs = discretization_rhs(k, f, u, cz0, czj_ptr, p);
  r.ratio = r.rhs > 0.0 ? r.lhs / r.rhs : (r.lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
  return r;
}

double dyadic_tail_check(const Kernel& k, const Cube& q0, const NormSpec& psi, const GridFunction& f, double q,
                         double delta, double eps, std::uint64_t seed) {
  const Grid& g = f.grid();
  const int N = g.cells_per_axis();
  const int n = g.dim();
  if (q0.side < 1 || (q0.side & (q0.side - 1)) != 0 || N % q0.side != 0)
    throw std::invalid_argument("tail check needs a dyadic Q0");
  for (int d = 0; d < n; ++d)
    if (q0.lo[d] % q0.side != 0 || q0.lo[d] < 0 || q0.lo[d] + q0.side > N)
      throw std::invalid_argument("tail check needs a dyadic Q0 inside the box");
  if (f.is_zero()) return 0.0;
  const int m = k.m();
  const double h = g.cell_width();
  double lhs = 0.0;
  for (int s = q0.side; s >= 1; s /= 2) {
    const double l = s * h;
    const double pb = std::pow(phi_bar(k, l / 2.0, seed), q);
    const double q3 = std::pow(3.0 * l, n);
    const double weight = pb * std::pow(q3, m * q + 1.0);
    const int per = q0.side / s;
    int total = 1;
    for (int d = 0; d < n; ++d) total *= per;
    for (int t = 0; t < total; ++t) {
      Cube c;
      c.side = s;
      int rem = t;
      for (int d = n - 1; d >= 0; --d) {
        c.lo[d] = q0.lo[d] + (rem % per) * s;
        rem /= per;
      }
      lhs += weight * luxemburg_norm(f, c.dilate3(), psi);
    }
  }
  const double l0 = q0.side * h;
  const double phi = std::pow(phi_theta(k, q, l0, delta, eps, grid_nu_max(g)).value, q);
  const double rhs = phi * std::pow(3.0 * l0, n) * luxemburg_norm(f, q0.dilate3(), psi);
  return rhs > 0.0 ? lhs / rhs : 0.0;
}

}  // namespace mlpot
