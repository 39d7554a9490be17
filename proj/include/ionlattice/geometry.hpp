#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace ionlattice {

enum class CellType { kSquare, kHexagonal, kCenteredRectangular };

std::string_view to_string(CellType type);
// Accepts "square", "hexagonal", "centered_rectangular". Anything else,
// including the rectangular and oblique cells, throws std::invalid_argument.
CellType parse_cell_type(std::string_view name);

/// Parameters of a polygon lattice. Lengths are in meters.
struct LatticeSpec {
  CellType cell_type = CellType::kSquare;
  int sites_per_side = 3;   // M
  int polygon_sides = 25;   // n
  double radius = 14e-6;    // R, polygon circumradius
  double separation = 52e-6;  // A, nearest-neighbour site distance
  double edge_gap = 0.0;    // g, outer polygons to rf island edge
  double orientation = 0.0; // angle of the first polygon vertex

  // Throws std::invalid_argument when a parameter is out of range,
  // including the merged-site region R >= A/3.
  void validate() const;
};

struct SiteIndex {
  int i = 0;
  int j = 0;
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
};

enum class ContourKind { kOuter, kHole };

/// Closed polyline in the z = 0 plane; the first vertex is repeated at the end.
/// Outer contours run counterclockwise and enclose rf; holes run clockwise.
struct Contour {
  ContourKind kind = ContourKind::kOuter;
  std::vector<Eigen::Vector2d> vertices;

  double signed_area() const;
  std::size_t segment_count() const { return vertices.empty() ? 0 : vertices.size() - 1; }
};

/// Gapless-plane electrode: the union of outer contours minus holes is held at
/// rf_amplitude, the rest of the plane at zero.
struct ElectrodeLayout {
  std::vector<Contour> contours;
  double rf_amplitude = 1.0;  // volts

  std::size_t segment_count() const;
};

// Site centers of an M-per-side patch, centered on the origin.
//  square: M x M grid, N = M^2.
//  hexagonal: rhombic M x M patch of the triangular lattice, N = M^2.
//  centered_rectangular: M x M rectangle corners plus (M-1)^2 cell centers on a
//    1.2A x 1.6A cell, so every corner-center pair is A apart.
// Index pairs are unique; centered-rectangular uses doubled coordinates.
std::vector<SiteIndex> generate_sites(CellType cell_type, int sites_per_side, double separation);

// Regular n-gon of circumradius R; counterclockwise unless `clockwise`.
std::vector<Eigen::Vector2d> regular_polygon(const Eigen::Vector2d& center, double radius,
                                             int sides, double orientation, bool clockwise);

// One rectangular rf island with a clockwise polygonal hole at every site.
ElectrodeLayout build_lattice_layout(const LatticeSpec& spec, double rf_amplitude = 1.0);

// Two rf rails of width `rail_width` either side of a grounded central strip.
ElectrodeLayout build_five_wire(double rail_width, double central_width,
                                double rail_length = 3000e-6, double rf_amplitude = 1.0);

// L = (M - 1) A + 2R
double lattice_side_length(int sites_per_side, double separation, double radius);

// Checks closure, orientation, simple-polygon and hole containment. Returns an
// empty string for a valid layout, otherwise a description of the first fault.
std::string check_layout(const ElectrodeLayout& layout);

// Winding number of a closed contour about a point.
int winding_number(const Contour& contour, const Eigen::Vector2d& point);

}  // namespace ionlattice
