#include "nhpp/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nhpp/error.hpp"

namespace nhpp {

namespace {

std::string describe(const Point& s) {
  std::ostringstream os;
  os.precision(17);
  os << "(" << s.x << ", " << s.y << ")";
  return os.str();
}

int axis_index(double v, double lo, double extent, int n) {
  const double t = (v - lo) * n / extent;
  const int i = static_cast<int>(std::floor(t));
  return std::clamp(i, 0, n - 1);
}

}  // namespace

Region::Region(double xmin, double xmax, double ymin, double ymax)
    : xmin_(xmin), xmax_(xmax), ymin_(ymin), ymax_(ymax) {
  if (!(std::isfinite(xmin) && std::isfinite(xmax) && std::isfinite(ymin) &&
        std::isfinite(ymax)) ||
      !(xmax > xmin) || !(ymax > ymin)) {
    throw ConfigError("region must satisfy xmin < xmax and ymin < ymax");
  }
}

bool Region::contains(const Point& s) const {
  return s.x >= xmin_ && s.x <= xmax_ && s.y >= ymin_ && s.y <= ymax_;
}

PointPattern::PointPattern(std::vector<Point> points, Region region)
    : points_(std::move(points)), region_(region) {
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!region_.contains(points_[i])) {
      throw DomainError("point " + std::to_string(i) + " " + describe(points_[i]) +
                        " lies outside the region");
    }
  }
}

QuadratureGrid::QuadratureGrid(Region region, int nx, int ny)
    : region_(region), nx_(nx), ny_(ny) {
  if (nx < 1 || ny < 1) throw ConfigError("grid dimensions must be >= 1");
}

Point QuadratureGrid::center(int ix, int iy) const {
  return {region_.xmin() + (ix + 0.5) * region_.width() / nx_,
          region_.ymin() + (iy + 0.5) * region_.height() / ny_};
}

Point QuadratureGrid::center(std::size_t cell) const {
  const auto n = static_cast<std::size_t>(nx_);
  return center(static_cast<int>(cell % n), static_cast<int>(cell / n));
}

std::size_t QuadratureGrid::cell_of(const Point& s) const {
  if (!region_.contains(s)) {
    throw DomainError("point " + describe(s) + " lies outside the grid region");
  }
  const int ix = axis_index(s.x, region_.xmin(), region_.width(), nx_);
  const int iy = axis_index(s.y, region_.ymin(), region_.height(), ny_);
  return static_cast<std::size_t>(iy) * static_cast<std::size_t>(nx_) +
         static_cast<std::size_t>(ix);
}

Raster::Raster(QuadratureGrid layout_, std::vector<double> values_)
    : layout(layout_), values(std::move(values_)) {
  if (values.size() != layout.size()) {
    throw ConfigError("raster expects " + std::to_string(layout.size()) + " values, got " +
                      std::to_string(values.size()));
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw ConfigError("raster values must be finite");
  }
}

CovariateField::CovariateField(std::variant<Analytic, Raster> source, std::string name)
    : source_(std::move(source)), name_(std::move(name)) {}

CovariateField CovariateField::coord_x() { return {Analytic{AnalyticKind::CoordX, {}}, "x"}; }
CovariateField CovariateField::coord_y() { return {Analytic{AnalyticKind::CoordY, {}}, "y"}; }
CovariateField CovariateField::product() { return {Analytic{AnalyticKind::Product, {}}, "xy"}; }
CovariateField CovariateField::square_x() { return {Analytic{AnalyticKind::SquareX, {}}, "x2"}; }

CovariateField CovariateField::distance_to(double cx, double cy) {
  std::ostringstream os;
  os << "dist(" << cx << "," << cy << ")";
  return {Analytic{AnalyticKind::DistanceTo, {cx, cy}}, os.str()};
}

CovariateField CovariateField::raster(Raster r, std::string name) {
  return {std::move(r), std::move(name)};
}

double covariate_at(const CovariateField& field, const Point& s) {
  if (const Raster* r = field.as_raster()) return r->at(s);
  const auto& a = std::get<Analytic>(field.source());
  switch (a.kind) {
    case AnalyticKind::CoordX:
      return s.x;
    case AnalyticKind::CoordY:
      return s.y;
    case AnalyticKind::Product:
      return s.x * s.y;
    case AnalyticKind::SquareX:
      return s.x * s.x;
    case AnalyticKind::DistanceTo:
      return std::hypot(s.x - a.anchor.x, s.y - a.anchor.y);
  }
  return 0.0;
}

std::vector<double> design_row(std::span<const CovariateField> fields, const Point& s) {
  std::vector<double> row;
  row.reserve(fields.size());
  for (const auto& f : fields) row.push_back(covariate_at(f, s));
  return row;
}

std::vector<int> count_in_cells(const PointPattern& pattern, const QuadratureGrid& grid) {
  if (!(pattern.region() == grid.region())) {
    throw ConfigError("point pattern and grid are defined on different regions");
  }
  std::vector<int> counts(grid.size(), 0);
  for (const auto& s : pattern.points()) ++counts[grid.cell_of(s)];
  return counts;
}

void check_fields_on(std::span<const CovariateField> fields, const Region& region) {
  for (const auto& f : fields) {
    if (const Raster* r = f.as_raster(); r && !(r->layout.region() == region)) {
      throw ConfigError("raster covariate '" + f.name() +
                        "' is defined on a different region than the data");
    }
  }
}

Raster incidence_raster(const PointPattern& pattern, int nx, int ny) {
  QuadratureGrid layout(pattern.region(), nx, ny);
  const auto counts = count_in_cells(pattern, layout);
  return Raster(layout, std::vector<double>(counts.begin(), counts.end()));
}

Raster aggregate_raster(const Raster& fine, int fx, int fy) {
  const int nx = fine.layout.nx();
  const int ny = fine.layout.ny();
  if (fx < 1 || fy < 1 || nx % fx != 0 || ny % fy != 0) {
    throw ConfigError("aggregation factors must divide the raster dimensions");
  }
  QuadratureGrid coarse(fine.layout.region(), nx / fx, ny / fy);
  std::vector<double> values(coarse.size(), 0.0);
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      const auto c = static_cast<std::size_t>(iy / fy) * coarse.nx() + ix / fx;
      values[c] += fine.values[static_cast<std::size_t>(iy) * nx + ix];
    }
  }
  return Raster(coarse, std::move(values));
}

}  // namespace nhpp
