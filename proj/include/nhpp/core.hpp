#ifndef NHPP_CORE_HPP_
#define NHPP_CORE_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace nhpp {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

/// Axis-aligned observation window.
class Region {
 public:
  /// The unit square.
  Region() = default;
  Region(double xmin, double xmax, double ymin, double ymax);

  double xmin() const { return xmin_; }
  double xmax() const { return xmax_; }
  double ymin() const { return ymin_; }
  double ymax() const { return ymax_; }
  double width() const { return xmax_ - xmin_; }
  double height() const { return ymax_ - ymin_; }
  double area() const { return width() * height(); }

  /// Boundary-inclusive.
  bool contains(const Point& s) const;

  friend bool operator==(const Region&, const Region&) = default;

 private:
  double xmin_ = 0.0;
  double xmax_ = 1.0;
  double ymin_ = 0.0;
  double ymax_ = 1.0;
};

/// A realization {s_1, ..., s_k} of a point process observed on a region.
class PointPattern {
 public:
  PointPattern() = default;
  /// Throws DomainError naming the first point that lies outside `region`.
  PointPattern(std::vector<Point> points, Region region);

  std::span<const Point> points() const { return points_; }
  const Region& region() const { return region_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const Point& operator[](std::size_t i) const { return points_[i]; }

 private:
  std::vector<Point> points_;
  Region region_;
};

/// Uniform nx-by-ny partition of a region into equal cells. Cells are
/// numbered row-major starting from the minimum-y row: index = iy * nx + ix.
class QuadratureGrid {
 public:
  QuadratureGrid() : QuadratureGrid(Region{}, 100, 100) {}
  QuadratureGrid(Region region, int nx, int ny);

  const Region& region() const { return region_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  std::size_t size() const {
    return static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_);
  }
  double cell_width() const { return region_.width() / nx_; }
  double cell_height() const { return region_.height() / ny_; }
  double cell_area() const { return region_.area() / static_cast<double>(size()); }

  Point center(std::size_t cell) const;
  Point center(int ix, int iy) const;

  /// Index of the cell containing `s`. Points on an interior edge belong to
  /// the cell with the larger index; points on the outer boundary belong to
  /// the adjacent cell. Throws DomainError outside the region.
  std::size_t cell_of(const Point& s) const;

  friend bool operator==(const QuadratureGrid&, const QuadratureGrid&) = default;

 private:
  Region region_;
  int nx_ = 100;
  int ny_ = 100;
};

/// Piecewise-constant gridded values, looked up by nearest cell.
struct Raster {
  QuadratureGrid layout;
  std::vector<double> values;  // row-major, layout.size() entries

  Raster() = default;
  Raster(QuadratureGrid layout, std::vector<double> values);

  double at(const Point& s) const { return values[layout.cell_of(s)]; }
};

enum class AnalyticKind { CoordX, CoordY, Product, SquareX, DistanceTo };

struct Analytic {
  AnalyticKind kind = AnalyticKind::CoordX;
  Point anchor;  // DistanceTo only
};

/// A spatial covariate Z_j(s).
class CovariateField {
 public:
  static CovariateField coord_x();
  static CovariateField coord_y();
  static CovariateField product();
  static CovariateField square_x();
  static CovariateField distance_to(double cx, double cy);
  static CovariateField raster(Raster r, std::string name = "raster");

  CovariateField(std::variant<Analytic, Raster> source, std::string name);

  const std::string& name() const { return name_; }
  const std::variant<Analytic, Raster>& source() const { return source_; }
  bool is_raster() const { return std::holds_alternative<Raster>(source_); }
  const Raster* as_raster() const { return std::get_if<Raster>(&source_); }

 private:
  std::variant<Analytic, Raster> source_;
  std::string name_;
};

/// Z(s) for one field. Rasters throw DomainError outside their region.
double covariate_at(const CovariateField& field, const Point& s);

/// (Z_1(s), ..., Z_p(s)) in field order.
std::vector<double> design_row(std::span<const CovariateField> fields, const Point& s);

/// N_Y(A_i) for every cell, row-major. Throws ConfigError when the pattern
/// and the grid are defined on different regions.
std::vector<int> count_in_cells(const PointPattern& pattern, const QuadratureGrid& grid);

/// Throws ConfigError unless every raster field is defined on `region`.
void check_fields_on(std::span<const CovariateField> fields, const Region& region);

/// Per-pixel event counts of a pattern, for incidence covariates.
Raster incidence_raster(const PointPattern& pattern, int nx, int ny);

/// Coarsens a raster by summing fx-by-fy blocks. nx and ny must be divisible
/// by the factors.
Raster aggregate_raster(const Raster& fine, int fx, int fy);

}  // namespace nhpp

#endif  // NHPP_CORE_HPP_
