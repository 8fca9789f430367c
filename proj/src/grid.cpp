#include "mlpot/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace mlpot {

namespace {

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

double ipow(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

}  // namespace

Grid Grid::make(int n, double L, int N) {
  if (n < 1 || n > 3) throw std::invalid_argument("grid dimension must be 1, 2 or 3, got " + std::to_string(n));
  if (!is_power_of_two(N) || N < 4)
    throw std::invalid_argument("cells per axis must be a power of two >= 4, got " + std::to_string(N));
  if (!(L > 0.0) || !std::isfinite(L)) throw std::invalid_argument("box half-width must be positive");
  Grid g;
  g.n_ = n;
  g.N_ = N;
  g.L_ = L;
  g.h_ = 2.0 * L / N;
  g.size_ = 1;
  for (int d = 0; d < n; ++d) g.size_ *= static_cast<std::size_t>(N);
  return g;
}

Grid make_grid(int n, double L, int N) { return Grid::make(n, L, N); }

double Grid::cell_volume() const { return ipow(h_, n_); }
double Grid::box_volume() const { return ipow(2.0 * L_, n_); }

Index3 Grid::unflatten(std::size_t idx) const {
  Index3 c{0, 0, 0};
  for (int d = n_ - 1; d >= 0; --d) {
    c[d] = static_cast<int>(idx % N_);
    idx /= N_;
  }
  return c;
}

std::size_t Grid::flatten(const Index3& c) const {
  std::size_t idx = 0;
  for (int d = 0; d < n_; ++d) idx = idx * N_ + static_cast<std::size_t>(c[d]);
  return idx;
}

Point3 Grid::point(std::size_t idx) const {
  const Index3 c = unflatten(idx);
  Point3 p{0.0, 0.0, 0.0};
  for (int d = 0; d < n_; ++d) p[d] = center(c[d]);
  return p;
}

std::size_t CellRange::count(int dim) const {
  std::size_t c = 1;
  for (int d = 0; d < dim; ++d) c *= static_cast<std::size_t>(std::max(0, hi[d] - lo[d]));
  return c;
}

bool CellRange::empty(int dim) const { return count(dim) == 0; }

bool CellRange::contains(const Index3& c, int dim) const {
  for (int d = 0; d < dim; ++d)
    if (c[d] < lo[d] || c[d] >= hi[d]) return false;
  return true;
}

Cube Cube::whole(const Grid& g) { return Cube{{0, 0, 0}, g.cells_per_axis()}; }

Cube Cube::from_coords(const Grid& g, std::span<const double> corner, double side_length) {
  if (static_cast<int>(corner.size()) != g.dim()) throw std::invalid_argument("cube corner has wrong dimension");
  const double h = g.cell_width();
  auto snap = [h](double v, const char* what) {
    const double k = v / h;
    const double r = std::round(k);
    if (std::abs(k - r) > 1e-9 * std::max(1.0, std::abs(k)))
      throw std::invalid_argument(std::string("cube ") + what + " is not aligned with the grid lattice");
    return static_cast<int>(r);
  };
  Cube q;
  for (int d = 0; d < g.dim(); ++d) q.lo[d] = snap(corner[d] + g.half_width(), "corner");
  q.side = snap(side_length, "side");
  if (q.side <= 0) throw std::invalid_argument("cube side must be positive");
  return q;
}

Cube Cube::dilate3() const {
  Cube q = *this;
  for (int& c : q.lo) c -= side;
  q.side = 3 * side;
  return q;
}

double Cube::side_length(const Grid& g) const { return side * g.cell_width(); }

double Cube::measure(const Grid& g) const { return ipow(side_length(g), g.dim()); }

CellRange Cube::clip(const Grid& g) const {
  CellRange r;
  for (int d = 0; d < g.dim(); ++d) {
    r.lo[d] = std::clamp(lo[d], 0, g.cells_per_axis());
    r.hi[d] = std::clamp(lo[d] + side, 0, g.cells_per_axis());
  }
  return r;
}

bool Cube::clipped(const Grid& g) const {
  for (int d = 0; d < g.dim(); ++d)
    if (lo[d] < 0 || lo[d] + side > g.cells_per_axis()) return true;
  return false;
}

double Cube::clipped_measure(const Grid& g) const {
  return static_cast<double>(clip(g).count(g.dim())) * g.cell_volume();
}

GridFunction::GridFunction(const Grid& g, std::vector<double> values) : grid_(g), values_(std::move(values)) {
  if (values_.size() != g.size())
    throw std::invalid_argument("grid function has " + std::to_string(values_.size()) + " values, grid has " +
                                std::to_string(g.size()) + " cells");
  for (double v : values_) {
    if (!std::isfinite(v)) throw std::invalid_argument("grid function values must be finite");
    if (v < 0.0) nonnegative_ = false;
  }
}

GridFunction GridFunction::constant(const Grid& g, double c) { return GridFunction(g, std::vector<double>(g.size(), c)); }

GridFunction GridFunction::sample(const Grid& g, const PointFn& f) {
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Point3 p = g.point(i);
    v[i] = f(std::span<const double>(p.data(), static_cast<std::size_t>(g.dim())));
  }
  return GridFunction(g, std::move(v));
}

double GridFunction::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

bool GridFunction::is_zero() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; });
}

void require_same_grid(const GridFunction& a, const GridFunction& b) {
  if (!(a.grid() == b.grid())) throw std::invalid_argument("grid functions live on different grids");
}

namespace {

template <typename Op>
GridFunction zip(const GridFunction& a, const GridFunction& b, Op op) {
  require_same_grid(a, b);
  std::vector<double> v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = op(a[i], b[i]);
  return GridFunction(a.grid(), std::move(v));
}

}  // namespace

GridFunction operator+(const GridFunction& a, const GridFunction& b) {
  return zip(a, b, [](double x, double y) { return x + y; });
}
GridFunction operator-(const GridFunction& a, const GridFunction& b) {
  return zip(a, b, [](double x, double y) { return x - y; });
}
GridFunction operator*(const GridFunction& a, const GridFunction& b) {
  return zip(a, b, [](double x, double y) { return x * y; });
}
GridFunction operator*(double c, const GridFunction& a) {
  return map(a, [c](double x) { return c * x; });
}
GridFunction abs(const GridFunction& a) {
  return map(a, [](double x) { return std::abs(x); });
}
GridFunction pow(const GridFunction& a, double p) {
  return map(a, [p](double x) { return std::pow(x, p); });
}
GridFunction map(const GridFunction& a, const std::function<double(double)>& fn) {
  std::vector<double> v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(a[i]);
  return GridFunction(a.grid(), std::move(v));
}

void for_each_cell(const Grid& g, const CellRange& r, const std::function<void(std::size_t)>& fn) {
  if (r.empty(g.dim())) return;
  const int n = g.dim();
  const std::size_t N = static_cast<std::size_t>(g.cells_per_axis());
  if (n == 1) {
    for (int i = r.lo[0]; i < r.hi[0]; ++i) fn(static_cast<std::size_t>(i));
  } else if (n == 2) {
    for (int i = r.lo[0]; i < r.hi[0]; ++i)
      for (int j = r.lo[1]; j < r.hi[1]; ++j) fn(i * N + j);
  } else {
    for (int i = r.lo[0]; i < r.hi[0]; ++i)
      for (int j = r.lo[1]; j < r.hi[1]; ++j)
        for (int k = r.lo[2]; k < r.hi[2]; ++k) fn((i * N + j) * N + k);
  }
}

void gather(const GridFunction& f, const CellRange& r, std::vector<double>& out) {
  out.clear();
  const auto v = f.values();
  const Grid& g = f.grid();
  if (g.dim() == 1) {
    if (r.hi[0] > r.lo[0]) out.assign(v.begin() + r.lo[0], v.begin() + r.hi[0]);
    return;
  }
  out.reserve(r.count(g.dim()));
  for_each_cell(g, r, [&](std::size_t i) { out.push_back(v[i]); });
}

double integrate(const GridFunction& f, const Cube& q) {
  const Grid& g = f.grid();
  double s = 0.0;
  const auto v = f.values();
  for_each_cell(g, q.clip(g), [&](std::size_t i) { s += v[i]; });
  return s * g.cell_volume();
}

double integrate(const GridFunction& f) {
  double s = 0.0;
  for (double v : f.values()) s += v;
  return s * f.grid().cell_volume();
}

double average(const GridFunction& f, const Cube& q) {
  const Grid& g = f.grid();
  const std::size_t c = q.clip(g).count(g.dim());
  if (c == 0) throw std::invalid_argument("cube does not meet the box");
  return integrate(f, q) / (static_cast<double>(c) * g.cell_volume());
}

std::string to_string(FamilyKind k) { return k == FamilyKind::Dyadic ? "dyadic" : "centered"; }

FamilyKind parse_family(const std::string& s) {
  if (s == "dyadic") return FamilyKind::Dyadic;
  if (s == "centered" || s == "centered-dyadic-lengths") return FamilyKind::Centered;
  throw std::invalid_argument("unknown cube family '" + s + "' (expected dyadic or centered)");
}

std::vector<Cube> cube_family(const Grid& g, FamilyKind kind) {
  const int n = g.dim();
  const int N = g.cells_per_axis();
  std::vector<Cube> out;
  if (kind == FamilyKind::Dyadic) {
    for (int side = N; side >= 1; side /= 2) {
      const int per = N / side;
      Index3 c{0, 0, 0};
      const int total = static_cast<int>(std::pow(per, n));
      for (int t = 0; t < total; ++t) {
        int rem = t;
        for (int d = n - 1; d >= 0; --d) {
          c[d] = (rem % per) * side;
          rem /= per;
        }
        out.push_back(Cube{c, side});
      }
    }
    return out;
  }

  std::set<std::tuple<Index3, Index3, int>> seen;
  for (int side = 1; side <= N; side *= 2) {
    // odd sides center on cells, even sides on lattice vertices
    const int anchors = side == 1 ? N : N + 1;
    const int shift = side == 1 ? 0 : side / 2;
    const int total = static_cast<int>(std::pow(anchors, n));
    for (int t = 0; t < total; ++t) {
      int rem = t;
      Cube q;
      q.side = side;
      for (int d = n - 1; d >= 0; --d) {
        q.lo[d] = rem % anchors - shift;
        rem /= anchors;
      }
      const CellRange r = q.clip(g);
      if (r.empty(n)) continue;
      if (seen.emplace(r.lo, r.hi, side).second) out.push_back(q);
    }
  }
  return out;
}

PrefixSum::PrefixSum(const Grid& g, std::span<const double> values) : n_(g.dim()), N_(g.cells_per_axis()) {
  const std::size_t M = static_cast<std::size_t>(N_) + 1;
  if (n_ == 1) {
    table_.assign(M, 0.0);
    for (int i = 0; i < N_; ++i) table_[i + 1] = table_[i] + values[i];
  } else if (n_ == 2) {
    table_.assign(M * M, 0.0);
    for (int i = 0; i < N_; ++i)
      for (int j = 0; j < N_; ++j)
        table_[(i + 1) * M + j + 1] = values[static_cast<std::size_t>(i) * N_ + j] + table_[i * M + j + 1] +
                                      table_[(i + 1) * M + j] - table_[i * M + j];
  } else {
    table_.assign(M * M * M, 0.0);
    auto at = [&](std::size_t i, std::size_t j, std::size_t k) -> double& { return table_[(i * M + j) * M + k]; };
    for (int i = 0; i < N_; ++i)
      for (int j = 0; j < N_; ++j)
        for (int k = 0; k < N_; ++k)
          at(i + 1, j + 1, k + 1) = values[(static_cast<std::size_t>(i) * N_ + j) * N_ + k] + at(i, j + 1, k + 1) +
                                    at(i + 1, j, k + 1) + at(i + 1, j + 1, k) - at(i, j, k + 1) - at(i, j + 1, k) -
                                    at(i + 1, j, k) + at(i, j, k);
  }
}

double PrefixSum::sum(const CellRange& r) const {
  const std::size_t M = static_cast<std::size_t>(N_) + 1;
  for (int d = 0; d < n_; ++d)
    if (r.hi[d] <= r.lo[d]) return 0.0;
  if (n_ == 1) return table_[r.hi[0]] - table_[r.lo[0]];
  if (n_ == 2) {
    auto at = [&](int i, int j) { return table_[i * M + j]; };
    return at(r.hi[0], r.hi[1]) - at(r.lo[0], r.hi[1]) - at(r.hi[0], r.lo[1]) + at(r.lo[0], r.lo[1]);
  }
  auto at = [&](int i, int j, int k) { return table_[(i * M + j) * M + k]; };
  const auto& a = r.lo;
  const auto& b = r.hi;
  return at(b[0], b[1], b[2]) - at(a[0], b[1], b[2]) - at(b[0], a[1], b[2]) - at(b[0], b[1], a[2]) +
         at(a[0], a[1], b[2]) + at(a[0], b[1], a[2]) + at(b[0], a[1], a[2]) - at(a[0], a[1], a[2]);
}

void write_csv(std::ostream& os, const GridFunction& f) {
  const Grid& g = f.grid();
  os << std::setprecision(17);
  os << "# " << g.dim() << ',' << g.half_width() << ',' << g.cells_per_axis() << '\n';
  for (double v : f.values()) os << v << '\n';
}

GridFunction read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.size() < 2 || line[0] != '#')
    throw std::invalid_argument("grid function CSV must start with a '# n,L,N' header");
  std::istringstream hs(line.substr(1));
  int n = 0;
  int N = 0;
  double L = 0.0;
  char c1 = 0;
  char c2 = 0;
  if (!(hs >> n >> c1 >> L >> c2 >> N) || c1 != ',' || c2 != ',')
    throw std::invalid_argument("malformed grid function CSV header: '" + line + "'");
  const Grid g = Grid::make(n, L, N);
  std::vector<double> v;
  v.reserve(g.size());
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    v.push_back(std::stod(line));
  }
  return GridFunction(g, std::move(v));
}

void write_csv_file(const std::string& path, const GridFunction& f) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write_csv(os, f);
}

GridFunction read_csv_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_csv(is);
}

}  // namespace mlpot
