#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace mlpot {

using Index3 = std::array<int, 3>;
using Point3 = std::array<double, 3>;

/// Uniform cell-centered grid on the box [-L, L)^n, n in {1,2,3}, with N cells
/// per axis (N a power of two, N >= 4). Cells are stored row-major with the
/// first axis slowest.
class Grid {
 public:
  Grid() = default;

  static Grid make(int n, double L, int N);

  int dim() const { return n_; }
  double half_width() const { return L_; }
  int cells_per_axis() const { return N_; }
  double cell_width() const { return h_; }
  std::size_t size() const { return size_; }
  double cell_volume() const;
  double box_volume() const;

  /// Coordinate of the center of cell i along any axis.
  double center(int i) const { return -L_ + h_ * (i + 0.5); }
  Point3 point(std::size_t idx) const;
  Index3 unflatten(std::size_t idx) const;
  std::size_t flatten(const Index3& c) const;

  bool operator==(const Grid& o) const {
    return n_ == o.n_ && N_ == o.N_ && L_ == o.L_;
  }

 private:
  int n_ = 1;
  int N_ = 4;
  double L_ = 1.0;
  double h_ = 0.5;
  std::size_t size_ = 4;
};

Grid make_grid(int n, double L, int N);

/// Half-open index box [lo, hi) on the first `dim` axes, already clipped.
struct CellRange {
  Index3 lo{0, 0, 0};
  Index3 hi{1, 1, 1};

  std::size_t count(int dim) const;
  bool empty(int dim) const;
  bool contains(const Index3& c, int dim) const;
};

/// Grid-aligned cube: lower corner in cell units (may lie outside the box)
/// and side in cells. 3Q is the concentric dilate by 3.
struct Cube {
  Index3 lo{0, 0, 0};
  int side = 1;

  static Cube whole(const Grid& g);
  /// Builds a cube from physical coordinates; throws when the corner or the
  /// side is not on the lattice.
  static Cube from_coords(const Grid& g, std::span<const double> corner, double side_length);

  Cube dilate3() const;
  double side_length(const Grid& g) const;
  /// Unclipped measure l(Q)^n.
  double measure(const Grid& g) const;
  CellRange clip(const Grid& g) const;
  bool clipped(const Grid& g) const;
  /// Measure of Q intersected with the box.
  double clipped_measure(const Grid& g) const;

  auto operator<=>(const Cube&) const = default;
};

/// Real-valued function sampled at cell centers. Values are fixed at
/// construction.
class GridFunction {
 public:
  using PointFn = std::function<double(std::span<const double>)>;

  GridFunction() = default;
  GridFunction(const Grid& g, std::vector<double> values);

  static GridFunction constant(const Grid& g, double c);
  static GridFunction sample(const Grid& g, const PointFn& f);

  const Grid& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }
  bool nonnegative() const { return nonnegative_; }
  double max_abs() const;
  bool is_zero() const;

 private:
  Grid grid_;
  std::vector<double> values_;
  bool nonnegative_ = true;
};

// Pointwise arithmetic; operands must share a grid.
GridFunction operator+(const GridFunction& a, const GridFunction& b);
GridFunction operator-(const GridFunction& a, const GridFunction& b);
GridFunction operator*(const GridFunction& a, const GridFunction& b);
GridFunction operator*(double c, const GridFunction& a);
GridFunction abs(const GridFunction& a);
GridFunction pow(const GridFunction& a, double p);
GridFunction map(const GridFunction& a, const std::function<double(double)>& fn);

void require_same_grid(const GridFunction& a, const GridFunction& b);

/// Midpoint quadrature over Q intersected with the box.
double integrate(const GridFunction& f, const Cube& q);
double integrate(const GridFunction& f);
/// Average over Q intersected with the box (normalized by the clipped measure).
double average(const GridFunction& f, const Cube& q);

/// Visits every cell index of a clipped range in row-major order.
void for_each_cell(const Grid& g, const CellRange& r, const std::function<void(std::size_t)>& fn);
/// Copies the values of f on the clipped cube, row-major.
void gather(const GridFunction& f, const CellRange& r, std::vector<double>& out);

enum class FamilyKind { Dyadic, Centered };

std::string to_string(FamilyKind k);
FamilyKind parse_family(const std::string& s);

/// dyadic: every dyadic subcube of the box down to single cells.
/// centered: for each dyadic side s (in cells) up to N, the cube centered at
/// each lattice point (cell centers for s = 1, lattice vertices for even s),
/// clipped to the box and deduplicated on (clipped range, side).
std::vector<Cube> cube_family(const Grid& g, FamilyKind kind);

/// Summed-area table of a sampled function for O(1) clipped-box sums.
class PrefixSum {
 public:
  PrefixSum() = default;
  PrefixSum(const Grid& g, std::span<const double> values);
  double sum(const CellRange& r) const;

 private:
  int n_ = 1;
  int N_ = 0;
  std::vector<double> table_;
};

/// CSV serialization: header line "# n,L,N" (with numeric values), then one
/// value per line in row-major order.
void write_csv(std::ostream& os, const GridFunction& f);
GridFunction read_csv(std::istream& is);
void write_csv_file(const std::string& path, const GridFunction& f);
GridFunction read_csv_file(const std::string& path);

}  // namespace mlpot
