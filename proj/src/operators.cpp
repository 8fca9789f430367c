#include "mlpot/operators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace mlpot {

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// Static block partition of [0, count); each index is written by exactly one
// worker, so results do not depend on the thread count.
template <class Fn>
void parallel_for(std::size_t count, Fn fn) {
  const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = std::min<std::size_t>(hw, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (count + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(count, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

void check_inputs(const Kernel& k, std::span<const GridFunction> f, const Grid& out) {
  if (static_cast<int>(f.size()) != k.m())
    throw std::invalid_argument("operator expects " + std::to_string(k.m()) + " functions, got " +
                                std::to_string(f.size()));
  for (const auto& fi : f) {
    if (!(fi.grid() == out)) throw std::invalid_argument("all functions must live on the output grid");
  }
  if (out.dim() != k.n()) throw std::invalid_argument("kernel dimension n does not match the grid");
}

GridFunction potential_1d(const Kernel& k, std::span<const GridFunction> f, const Grid& g) {
  const int N = g.cells_per_axis();
  const int m = k.m();
  const double h = g.cell_width();
  const int smax = m * (N - 1);
  std::vector<double> kv(static_cast<std::size_t>(smax) + 1);
  const std::vector<int> zeros(m, 0);
  kv[0] = kernel_cell_value(k, zeros, h);
  for (int s = 1; s <= smax; ++s) kv[s] = k.profile(h * s);
  const double scale = std::pow(h, m);

  std::vector<double> out(static_cast<std::size_t>(N));
  parallel_for(static_cast<std::size_t>(N), [&](std::size_t xi) {
    const int x = static_cast<int>(xi);
    // F_j(d) = sum of f_j over cells at distance d from x
    std::vector<std::vector<double>> F(m, std::vector<double>(N, 0.0));
    const int dmax = std::max(x, N - 1 - x);
    for (int j = 0; j < m; ++j) {
      const auto v = f[j].values();
      for (int d = 0; d <= dmax; ++d) {
        double s = 0.0;
        if (x - d >= 0) s += v[x - d];
        if (d > 0 && x + d < N) s += v[x + d];
        F[j][d] = s;
      }
    }
    std::vector<double> a(kv.begin(), kv.begin() + (m - 1) * (N - 1) + dmax + 1);
    std::vector<double> next;
    for (int j = m - 1; j >= 0; --j) {
      const int len = j * (N - 1) + 1;
      next.assign(len, 0.0);
      for (int s = 0; s < len; ++s) {
        double acc = 0.0;
        for (int d = 0; d <= dmax; ++d) acc += a[s + d] * F[j][d];
        next[s] = acc;
      }
      a.swap(next);
    }
    out[xi] = a[0] * scale;
  });
  return GridFunction(g, std::move(out));
}

GridFunction potential_nd(const Kernel& k, std::span<const GridFunction> f, const Grid& g) {
  const int n = g.dim();
  const int m = k.m();
  const int N = g.cells_per_axis();
  const double h = g.cell_width();
  const int span = 2 * N - 1;
  std::size_t offsets = 1;
  for (int d = 0; d < n; ++d) offsets *= static_cast<std::size_t>(span);
  // Euclidean length of every offset vector, indexed like a grid of side 2N-1
  std::vector<double> radius(offsets);
  for (std::size_t o = 0; o < offsets; ++o) {
    std::size_t rem = o;
    double r2 = 0.0;
    for (int d = n - 1; d >= 0; --d) {
      const double c = static_cast<double>(static_cast<int>(rem % span) - (N - 1)) * h;
      rem /= span;
      r2 += c * c;
    }
    radius[o] = std::sqrt(r2);
  }
  const std::vector<int> zeros(static_cast<std::size_t>(n * m), 0);
  const double k0 = kernel_cell_value(k, zeros, h);
  std::vector<double> single;
  if (m == 1) {
    single.resize(offsets);
    for (std::size_t o = 0; o < offsets; ++o) single[o] = radius[o] == 0.0 ? k0 : k.profile(radius[o]);
  }
  const double scale = std::pow(h, n * m);
  const std::size_t size = g.size();

  auto offset_index = [&](const Index3& x, const Index3& y) {
    std::size_t o = 0;
    for (int d = 0; d < n; ++d) o = o * span + static_cast<std::size_t>(x[d] - y[d] + N - 1);
    return o;
  };

  std::vector<double> out(size);
  parallel_for(size, [&](std::size_t xi) {
    const Index3 x = g.unflatten(xi);
    std::vector<std::size_t> off(m);
    std::function<double(int, double, double)> rec = [&](int slot, double s, double prod) -> double {
      if (slot == m) {
        bool origin = true;
        for (int j = 0; j < m; ++j) origin = origin && radius[off[j]] == 0.0;
        return prod * (origin ? k0 : k.profile(s));
      }
      double acc = 0.0;
      const auto v = f[slot].values();
      for (std::size_t y = 0; y < size; ++y) {
        if (v[y] == 0.0) continue;
        off[slot] = offset_index(x, g.unflatten(y));
        acc += rec(slot + 1, s + radius[off[slot]], prod * v[y]);
      }
      return acc;
    };
    double val = 0.0;
    if (m == 1) {
      const auto v = f[0].values();
      for (std::size_t y = 0; y < size; ++y)
        if (v[y] != 0.0) val += single[offset_index(x, g.unflatten(y))] * v[y];
    } else {
      val = rec(0, 0.0, 1.0);
    }
    out[xi] = val * scale;
  });
  return GridFunction(g, std::move(out));
}

}  // namespace

double ExponentTuple::p() const {
  double inv = 0.0;
  for (double v : p_i) inv += 1.0 / v;
  return 1.0 / inv;
}

void ExponentTuple::validate() const {
  if (p_i.empty()) throw std::invalid_argument("exponent tuple is empty");
  for (double v : p_i)
    if (!(v > 1.0) || !std::isfinite(v)) throw std::invalid_argument("every p_i must lie in (1, inf), got " + num(v));
  if (!(p() > 1.0 / static_cast<double>(p_i.size()))) throw std::invalid_argument("derived p must exceed 1/m");
  if (!(q > 0.0)) throw std::invalid_argument("target exponent q must be positive");
}

PhiScaling PhiScaling::constant(double c) {
  PhiScaling s;
  s.fn_ = [c](double) { return c; };
  s.name_ = c == 1.0 ? "one" : "const" + num(c);
  return s;
}

PhiScaling PhiScaling::power(double c, double e) {
  PhiScaling s;
  s.fn_ = [c, e](double t) { return c * std::pow(t, e); };
  s.name_ = (c == 1.0 ? "" : num(c) + "*") + "t^" + num(e);
  return s;
}

PhiScaling PhiScaling::custom(Fn fn, std::string name) {
  if (!fn) throw std::invalid_argument("empty phi scaling");
  PhiScaling s;
  s.fn_ = std::move(fn);
  s.name_ = std::move(name);
  return s;
}

PhiScaling PhiScaling::kernel_theta(const Kernel& k, double theta, double exponent, double delta, double eps,
                                    int nu_max) {
  struct Cache {
    std::mutex mu;
    std::map<double, double> values;
  };
  auto cache = std::make_shared<Cache>();
  const int n = k.n();
  PhiScaling s;
  s.fn_ = [k, theta, exponent, delta, eps, nu_max, n, cache](double t) {
    {
      std::lock_guard<std::mutex> lock(cache->mu);
      const auto it = cache->values.find(t);
      if (it != cache->values.end()) return it->second;
    }
    const double side = std::pow(t, 1.0 / n);
    const double v = std::pow(phi_theta(k, theta, side, delta, eps, nu_max).value, exponent);
    std::lock_guard<std::mutex> lock(cache->mu);
    cache->values.emplace(t, v);
    return v;
  };
  s.name_ = "Phi_" + num(theta) + "^" + num(exponent) + "[" + k.to_string() + "]";
  return s;
}

PhiScaling PhiScaling::psi(const YoungFunction& b, int m, const PhiScaling& phi) {
  const YoungFunction bm = YoungFunction::iterate(b, m);
  PhiScaling s;
  const Fn inner = phi.fn_;
  s.fn_ = [bm, m, inner](double t) { return bm(std::pow(inner(t), 1.0 / m)); };
  s.name_ = bm.to_string() + "o(" + phi.name_ + ")^{1/" + std::to_string(m) + "}";
  return s;
}

PhiScaling PhiScaling::scaled(double c) const {
  PhiScaling s;
  const Fn inner = fn_;
  s.fn_ = [inner, c](double t) { return c * inner(t); };
  s.name_ = num(c) + "*" + name_;
  return s;
}

PhiWitness witness(const PhiScaling& phi, double t_lo, double t_hi, int samples) {
  if (samples < 4 || !(t_lo > 0.0) || !(t_hi > t_lo)) throw std::invalid_argument("bad witness sample range");
  std::vector<double> ts(samples);
  std::vector<double> vs(samples);
  for (int i = 0; i < samples; ++i) {
    ts[i] = t_lo * std::pow(t_hi / t_lo, static_cast<double>(i) / (samples - 1));
    vs[i] = phi(ts[i]);
  }
  PhiWitness w;
  double run = 0.0;
  for (int j = 0; j < samples; ++j) {
    run = std::max(run, vs[j]);
    if (run > 0.0) w.rho = std::max(w.rho, vs[j] > 0.0 ? run / vs[j] : std::numeric_limits<double>::infinity());
  }
  const int mid = samples / 2;
  const double r_mid = vs[mid] / ts[mid];
  const double r_end = vs.back() / ts.back();
  w.tail_slope = r_mid > 0.0 ? r_end / r_mid : 0.0;
  w.sublinear = true;
  for (int i = mid + 1; i < samples; ++i)
    if (vs[i] / ts[i] > vs[i - 1] / ts[i - 1] * (1.0 + 1e-12)) w.sublinear = false;
  w.sublinear = w.sublinear && w.tail_slope < 1e-2;
  return w;
}

GridFunction apply_potential(const Kernel& k, std::span<const GridFunction> f, const Grid& out_grid) {
  check_inputs(k, f, out_grid);
  for (const auto& fi : f)
    if (fi.is_zero()) return GridFunction::constant(out_grid, 0.0);
  if (out_grid.dim() == 1) return potential_1d(k, f, out_grid);
  return potential_nd(k, f, out_grid);
}

GridFunction apply_potential_naive(const Kernel& k, std::span<const GridFunction> f, const Grid& out_grid) {
  check_inputs(k, f, out_grid);
  const int n = out_grid.dim();
  const int m = k.m();
  const std::size_t size = out_grid.size();
  const double h = out_grid.cell_width();
  const double scale = std::pow(h, n * m);
  std::vector<double> out(size, 0.0);
  std::vector<std::size_t> y(m, 0);
  std::vector<int> offsets(static_cast<std::size_t>(n * m));
  for (std::size_t x = 0; x < size; ++x) {
    const Index3 xc = out_grid.unflatten(x);
    double acc = 0.0;
    std::fill(y.begin(), y.end(), 0);
    while (true) {
      double prod = 1.0;
      for (int j = 0; j < m; ++j) {
        prod *= f[j][y[j]];
        const Index3 yc = out_grid.unflatten(y[j]);
        for (int d = 0; d < n; ++d) offsets[j * n + d] = xc[d] - yc[d];
      }
      if (prod != 0.0) acc += kernel_cell_value(k, offsets, h) * prod;
      int j = m - 1;
      while (j >= 0 && ++y[j] == size) y[j--] = 0;
      if (j < 0) break;
    }
    out[x] = acc * scale;
  }
  return GridFunction(out_grid, std::move(out));
}

GridFunction apply_commutator(const Kernel& k, std::span<const GridFunction> b, std::span<const GridFunction> f,
                              const Grid& out_grid) {
  if (b.size() != f.size()) throw std::invalid_argument("commutator needs one symbol per function");
  for (const auto& bj : b)
    if (!(bj.grid() == out_grid)) throw std::invalid_argument("symbols must live on the output grid");
  const GridFunction t = apply_potential(k, f, out_grid);
  std::vector<double> acc(out_grid.size(), 0.0);
  std::vector<GridFunction> moved(f.begin(), f.end());
  for (std::size_t j = 0; j < f.size(); ++j) {
    moved[j] = b[j] * f[j];
    const GridFunction tj = apply_potential(k, moved, out_grid);
    moved[j] = f[j];
    for (std::size_t x = 0; x < acc.size(); ++x) acc[x] += b[j][x] * t[x] - tj[x];
  }
  return GridFunction(out_grid, std::move(acc));
}

std::vector<double> cube_norms(const GridFunction& f, const std::vector<Cube>& family, const NormSpec& x) {
  const Grid& g = f.grid();
  std::vector<double> out(family.size());
  if (x.is_lebesgue()) {
    const double r = x.exponent();
    std::vector<double> pw(f.size());
    for (std::size_t i = 0; i < pw.size(); ++i) pw[i] = r == 1.0 ? std::abs(f[i]) : std::pow(std::abs(f[i]), r);
    const PrefixSum ps(g, pw);
    for (std::size_t c = 0; c < family.size(); ++c) {
      const CellRange rg = family[c].clip(g);
      const double avg = std::max(0.0, ps.sum(rg)) / static_cast<double>(rg.count(g.dim()));
      out[c] = r == 1.0 ? avg : std::pow(avg, 1.0 / r);
    }
    return out;
  }
  parallel_for(family.size(), [&](std::size_t c) {
    std::vector<double> buf;
    gather(f, family[c].clip(g), buf);
    out[c] = luxemburg_norm(buf, x);
  });
  return out;
}

GridFunction maximal(const PhiScaling& phi, std::span<const NormSpec> x, std::span<const GridFunction> f,
                     const std::vector<Cube>& family) {
  if (f.empty() || x.size() != f.size()) throw std::invalid_argument("maximal needs one norm spec per function");
  if (family.empty()) throw std::invalid_argument("maximal needs a nonempty cube family");
  const Grid& g = f[0].grid();
  for (const auto& fi : f)
    if (!(fi.grid() == g)) throw std::invalid_argument("maximal: functions live on different grids");

  std::map<int, double> phi_by_side;
  for (const auto& q : family)
    if (!phi_by_side.count(q.side)) phi_by_side[q.side] = phi(q.measure(g));

  std::vector<double> value(family.size());
  for (std::size_t c = 0; c < family.size(); ++c) value[c] = phi_by_side[family[c].side];
  for (std::size_t i = 0; i < f.size(); ++i) {
    const std::vector<double> nq = cube_norms(f[i], family, x[i]);
    for (std::size_t c = 0; c < family.size(); ++c) value[c] *= nq[c];
  }

  std::vector<double> out(g.size(), -1.0);
  for (std::size_t c = 0; c < family.size(); ++c) {
    const double v = value[c];
    for_each_cell(g, family[c].clip(g), [&](std::size_t idx) { out[idx] = std::max(out[idx], v); });
  }
  for (double v : out)
    if (v < 0.0) throw std::invalid_argument("maximal: cube family leaves a grid cell uncovered");
  return GridFunction(g, std::move(out));
}

GridFunction maximal_single(const PhiScaling& phi, const NormSpec& x, const GridFunction& u,
                            const std::vector<Cube>& family) {
  const NormSpec xs[1] = {x};
  const GridFunction us[1] = {u};
  return maximal(phi, xs, us, family);
}

}  // namespace mlpot
