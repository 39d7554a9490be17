#include "ionlattice/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ionlattice/constants.hpp"

namespace ionlattice {

using Eigen::Vector2d;

std::string_view to_string(CellType type) {
  switch (type) {
    case CellType::kSquare:
      return "square";
    case CellType::kHexagonal:
      return "hexagonal";
    case CellType::kCenteredRectangular:
      return "centered_rectangular";
  }
  return "unknown";
}

CellType parse_cell_type(std::string_view name) {
  if (name == "square") return CellType::kSquare;
  if (name == "hexagonal") return CellType::kHexagonal;
  if (name == "centered_rectangular") return CellType::kCenteredRectangular;
  throw std::invalid_argument("unsupported cell type '" + std::string(name) +
                              "' (expected square, hexagonal or centered_rectangular)");
}

void LatticeSpec::validate() const {
  if (sites_per_side < 1) throw std::invalid_argument("sites_per_side must be >= 1");
  if (polygon_sides < 3) throw std::invalid_argument("polygon_sides must be >= 3");
  if (!(radius > 0.0)) throw std::invalid_argument("polygon radius must be > 0");
  if (!(separation > 0.0)) throw std::invalid_argument("site separation must be > 0");
  if (!(edge_gap >= 0.0)) throw std::invalid_argument("edge gap must be >= 0");
  if (!(radius < separation / 3.0))
    throw std::invalid_argument("polygon radius must be below a third of the separation");
}

double Contour::signed_area() const {
  double twice = 0.0;
  for (std::size_t k = 0; k + 1 < vertices.size(); ++k) {
    twice += vertices[k].x() * vertices[k + 1].y() - vertices[k + 1].x() * vertices[k].y();
  }
  return 0.5 * twice;
}

std::size_t ElectrodeLayout::segment_count() const {
  std::size_t n = 0;
  for (const auto& c : contours) n += c.segment_count();
  return n;
}

std::vector<SiteIndex> generate_sites(CellType cell_type, int sites_per_side, double separation) {
  if (sites_per_side < 1) throw std::invalid_argument("sites_per_side must be >= 1");
  if (!(separation > 0.0)) throw std::invalid_argument("site separation must be > 0");
  const int m = sites_per_side;
  const double a = separation;
  std::vector<SiteIndex> sites;

  switch (cell_type) {
    case CellType::kSquare:
      for (int j = 0; j < m; ++j)
        for (int i = 0; i < m; ++i) sites.push_back({i, j, Vector2d(i * a, j * a)});
      break;
    case CellType::kHexagonal: {
      const Vector2d b1(a, 0.0);
      const Vector2d b2(0.5 * a, 0.5 * std::sqrt(3.0) * a);
      for (int j = 0; j < m; ++j)
        for (int i = 0; i < m; ++i) sites.push_back({i, j, i * b1 + j * b2});
      break;
    }
    case CellType::kCenteredRectangular: {
      const double w = 1.2 * a;
      const double h = 1.6 * a;
      for (int j = 0; j < m; ++j)
        for (int i = 0; i < m; ++i) sites.push_back({2 * i, 2 * j, Vector2d(i * w, j * h)});
      for (int j = 0; j + 1 < m; ++j)
        for (int i = 0; i + 1 < m; ++i)
          sites.push_back({2 * i + 1, 2 * j + 1, Vector2d((i + 0.5) * w, (j + 0.5) * h)});
      break;
    }
    default:
      throw std::invalid_argument("unsupported cell type");
  }

  Vector2d centroid = Vector2d::Zero();
  for (const auto& s : sites) centroid += s.position;
  centroid /= static_cast<double>(sites.size());
  for (auto& s : sites) s.position -= centroid;
  return sites;
}

std::vector<Vector2d> regular_polygon(const Vector2d& center, double radius, int sides,
                                      double orientation, bool clockwise) {
  std::vector<Vector2d> v;
  v.reserve(static_cast<std::size_t>(sides) + 1);
  const double step = 2.0 * constants::kPi / sides * (clockwise ? -1.0 : 1.0);
  for (int k = 0; k < sides; ++k) {
    const double t = orientation + step * k;
    v.emplace_back(center.x() + radius * std::cos(t), center.y() + radius * std::sin(t));
  }
  v.push_back(v.front());
  return v;
}

ElectrodeLayout build_lattice_layout(const LatticeSpec& spec, double rf_amplitude) {
  spec.validate();
  const auto sites = generate_sites(spec.cell_type, spec.sites_per_side, spec.separation);

  const double min_gap = 2.0 * spec.radius;
  for (std::size_t a = 0; a < sites.size(); ++a)
    for (std::size_t b = a + 1; b < sites.size(); ++b)
      if ((sites[a].position - sites[b].position).norm() <= min_gap)
        throw std::invalid_argument("lattice polygons overlap");

  double xmin = std::numeric_limits<double>::infinity(), ymin = xmin;
  double xmax = -xmin, ymax = -xmin;
  for (const auto& s : sites) {
    xmin = std::min(xmin, s.position.x());
    xmax = std::max(xmax, s.position.x());
    ymin = std::min(ymin, s.position.y());
    ymax = std::max(ymax, s.position.y());
  }
  const double pad = spec.radius + spec.edge_gap;
  xmin -= pad;
  ymin -= pad;
  xmax += pad;
  ymax += pad;

  ElectrodeLayout layout;
  layout.rf_amplitude = rf_amplitude;
  layout.contours.push_back({ContourKind::kOuter,
                             {Vector2d(xmin, ymin), Vector2d(xmax, ymin), Vector2d(xmax, ymax),
                              Vector2d(xmin, ymax), Vector2d(xmin, ymin)}});
  for (const auto& s : sites) {
    layout.contours.push_back(
        {ContourKind::kHole, regular_polygon(s.position, spec.radius, spec.polygon_sides,
                                             spec.orientation, /*clockwise=*/true)});
  }
  return layout;
}

ElectrodeLayout build_five_wire(double rail_width, double central_width, double rail_length,
                                double rf_amplitude) {
  if (!(rail_width > 0.0) || !(central_width > 0.0) || !(rail_length > 0.0))
    throw std::invalid_argument("five-wire widths and length must be > 0");
  const double x0 = 0.5 * central_width;
  const double x1 = x0 + rail_width;
  const double y = 0.5 * rail_length;
  ElectrodeLayout layout;
  layout.rf_amplitude = rf_amplitude;
  layout.contours.push_back({ContourKind::kOuter,
                             {Vector2d(x0, -y), Vector2d(x1, -y), Vector2d(x1, y), Vector2d(x0, y),
                              Vector2d(x0, -y)}});
  layout.contours.push_back({ContourKind::kOuter,
                             {Vector2d(-x1, -y), Vector2d(-x0, -y), Vector2d(-x0, y),
                              Vector2d(-x1, y), Vector2d(-x1, -y)}});
  return layout;
}

double lattice_side_length(int sites_per_side, double separation, double radius) {
  return (sites_per_side - 1) * separation + 2.0 * radius;
}

namespace {

double cross(const Vector2d& a, const Vector2d& b) { return a.x() * b.y() - a.y() * b.x(); }

bool segments_cross(const Vector2d& p1, const Vector2d& p2, const Vector2d& q1,
                    const Vector2d& q2) {
  const double d1 = cross(p2 - p1, q1 - p1);
  const double d2 = cross(p2 - p1, q2 - p1);
  const double d3 = cross(q2 - q1, p1 - q1);
  const double d4 = cross(q2 - q1, p2 - q1);
  return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

double distance_to_segment(const Vector2d& p, const Vector2d& a, const Vector2d& b) {
  const Vector2d ab = b - a;
  const double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
  return (a + t * ab - p).norm();
}

bool inside_or_on(const Contour& outer, const Vector2d& p, double tol) {
  if (winding_number(outer, p) != 0) return true;
  for (std::size_t k = 0; k + 1 < outer.vertices.size(); ++k)
    if (distance_to_segment(p, outer.vertices[k], outer.vertices[k + 1]) <= tol) return true;
  return false;
}

}  // namespace

int winding_number(const Contour& contour, const Vector2d& point) {
  int wn = 0;
  const auto& v = contour.vertices;
  for (std::size_t k = 0; k + 1 < v.size(); ++k) {
    const Vector2d& a = v[k];
    const Vector2d& b = v[k + 1];
    if (a.y() <= point.y()) {
      if (b.y() > point.y() && cross(b - a, point - a) > 0) ++wn;
    } else if (b.y() <= point.y() && cross(b - a, point - a) < 0) {
      --wn;
    }
  }
  return wn;
}

std::string check_layout(const ElectrodeLayout& layout) {
  double scale = 0.0;
  for (const auto& c : layout.contours)
    for (const auto& v : c.vertices) scale = std::max(scale, v.cwiseAbs().maxCoeff());
  const double tol = 1e-12 * std::max(scale, 1e-9);

  for (std::size_t ci = 0; ci < layout.contours.size(); ++ci) {
    const auto& c = layout.contours[ci];
    const std::string tag = "contour " + std::to_string(ci);
    if (c.vertices.size() < 4) return tag + ": fewer than three distinct vertices";
    if ((c.vertices.front() - c.vertices.back()).norm() > tol) return tag + ": not closed";
    const double area = c.signed_area();
    if (c.kind == ContourKind::kOuter && !(area > 0)) return tag + ": outer contour not counterclockwise";
    if (c.kind == ContourKind::kHole && !(area < 0)) return tag + ": hole contour not clockwise";
    const std::size_t n = c.segment_count();
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a + 2; b < n; ++b) {
        if (a == 0 && b == n - 1) continue;
        if (segments_cross(c.vertices[a], c.vertices[a + 1], c.vertices[b], c.vertices[b + 1]))
          return tag + ": self-intersecting";
      }
  }

  for (std::size_t ci = 0; ci < layout.contours.size(); ++ci) {
    const auto& hole = layout.contours[ci];
    if (hole.kind != ContourKind::kHole) continue;
    int owners = 0;
    for (const auto& outer : layout.contours) {
      if (outer.kind != ContourKind::kOuter) continue;
      const bool all_in = std::all_of(hole.vertices.begin(), hole.vertices.end(),
                                      [&](const Vector2d& p) { return inside_or_on(outer, p, tol); });
      if (all_in) ++owners;
    }
    if (owners != 1)
      return "contour " + std::to_string(ci) + ": hole not inside exactly one outer contour";
  }
  return {};
}

}  // namespace ionlattice
