#pragma once

#include <span>
#include <string>

namespace sarplan::geo {

// One degree of latitude in miles; longitude is scaled by cos(origin lat).
inline constexpr double kMilesPerDegree = 69.0;

// Raster cell edge used by union_area, in miles.
inline constexpr double kUnionRasterCellMiles = 0.05;

// Local planar coordinates in miles, east/north of a per-case origin.
struct PlanarPoint {
  double x{};
  double y{};
  bool operator==(const PlanarPoint&) const = default;
};

struct GeoPoint {
  double lat{};
  double lon{};
  bool operator==(const GeoPoint&) const = default;
};

// Axis-aligned search square. All cases share one planar frame, so squares
// never need a rotation.
struct GridSquare {
  PlanarPoint center;
  double side{1.0};
  bool operator==(const GridSquare&) const = default;
};

// Throws ValidationError unless lat in [-90, 90] and lon in [-180, 180],
// both finite. `what` names the offending value in the error message.
void validate(const GeoPoint& g, const std::string& what = "point");

// Equirectangular projection into miles around `origin`. The origin latitude
// must lie strictly inside (-90, 90) so the longitude scale is nonzero.
PlanarPoint project(const GeoPoint& g, const GeoPoint& origin);

// Inverse of project() for the same origin.
GeoPoint unproject(const PlanarPoint& p, const GeoPoint& origin);

double distance(const PlanarPoint& a, const PlanarPoint& b);

// True when `p` lies within the square grown by `expansion` miles on every
// side. Boundaries are closed: a point exactly on the edge counts.
bool square_covers(const GridSquare& sq, const PlanarPoint& p, double expansion = 0.0);

// Area of the union of the squares, by rasterization at kUnionRasterCellMiles.
// Exact for cell-aligned layouts, otherwise within one cell-row per square
// edge. The list must be nonempty.
double union_area(std::span<const GridSquare> squares);

}  // namespace sarplan::geo
