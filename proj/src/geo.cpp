#include "sarplan/geo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "sarplan/error.hpp"

namespace sarplan::geo {

namespace {
constexpr double kPi = 3.14159265358979323846;

double deg2rad(double deg) { return deg * kPi / 180.0; }
}  // namespace

void validate(const GeoPoint& g, const std::string& what) {
  if (!std::isfinite(g.lat) || !std::isfinite(g.lon)) {
    throw ValidationError(what + ": coordinates must be finite");
  }
  if (g.lat < -90.0 || g.lat > 90.0) {
    throw ValidationError(what + ": latitude " + std::to_string(g.lat) +
                          " outside [-90, 90]");
  }
  if (g.lon < -180.0 || g.lon > 180.0) {
    throw ValidationError(what + ": longitude " + std::to_string(g.lon) +
                          " outside [-180, 180]");
  }
}

PlanarPoint project(const GeoPoint& g, const GeoPoint& origin) {
  validate(g, "project: point");
  validate(origin, "project: origin");
  if (origin.lat <= -90.0 || origin.lat >= 90.0) {
    throw ValidationError("project: origin latitude must lie strictly inside (-90, 90)");
  }
  return {(g.lon - origin.lon) * kMilesPerDegree * std::cos(deg2rad(origin.lat)),
          (g.lat - origin.lat) * kMilesPerDegree};
}

GeoPoint unproject(const PlanarPoint& p, const GeoPoint& origin) {
  validate(origin, "unproject: origin");
  if (origin.lat <= -90.0 || origin.lat >= 90.0) {
    throw ValidationError("unproject: origin latitude must lie strictly inside (-90, 90)");
  }
  if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
    throw ValidationError("unproject: planar coordinates must be finite");
  }
  return {origin.lat + p.y / kMilesPerDegree,
          origin.lon + p.x / (kMilesPerDegree * std::cos(deg2rad(origin.lat)))};
}

double distance(const PlanarPoint& a, const PlanarPoint& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

bool square_covers(const GridSquare& sq, const PlanarPoint& p, double expansion) {
  if (!(sq.side > 0.0)) throw ValidationError("square_covers: side must be positive");
  if (expansion < 0.0) throw ValidationError("square_covers: expansion must be >= 0");
  const double half = sq.side / 2.0 + expansion;
  return std::abs(p.x - sq.center.x) <= half && std::abs(p.y - sq.center.y) <= half;
}

double union_area(std::span<const GridSquare> squares) {
  if (squares.empty()) throw ValidationError("union_area: empty square list");

  double minx = std::numeric_limits<double>::infinity();
  double miny = minx;
  double maxx = -minx;
  double maxy = -minx;
  for (const auto& s : squares) {
    if (!(s.side > 0.0)) throw ValidationError("union_area: side must be positive");
    if (!std::isfinite(s.center.x) || !std::isfinite(s.center.y)) {
      throw ValidationError("union_area: square center must be finite");
    }
    minx = std::min(minx, s.center.x - s.side / 2.0);
    maxx = std::max(maxx, s.center.x + s.side / 2.0);
    miny = std::min(miny, s.center.y - s.side / 2.0);
    maxy = std::max(maxy, s.center.y + s.side / 2.0);
  }

  const double cell = kUnionRasterCellMiles;
  const auto nx = static_cast<long>(std::ceil((maxx - minx) / cell));
  const auto ny = static_cast<long>(std::ceil((maxy - miny) / cell));
  if (nx <= 0 || ny <= 0) throw ValidationError("union_area: degenerate extent");
  if (nx * ny > 400'000'000L) {
    throw ValidationError("union_area: raster of " + std::to_string(nx * ny) +
                          " cells exceeds budget; extent too large");
  }

  // Mark every cell whose center falls inside a square. The 1e-9 slop keeps
  // closed boundaries stable when an edge lands exactly on a cell center.
  std::vector<char> covered(static_cast<size_t>(nx * ny), 0);
  for (const auto& s : squares) {
    const double x0 = s.center.x - s.side / 2.0;
    const double x1 = s.center.x + s.side / 2.0;
    const double y0 = s.center.y - s.side / 2.0;
    const double y1 = s.center.y + s.side / 2.0;
    const auto i0 = std::max<long>(0, static_cast<long>(std::ceil((x0 - minx) / cell - 0.5 - 1e-9)));
    const auto i1 = std::min<long>(nx - 1, static_cast<long>(std::floor((x1 - minx) / cell - 0.5 + 1e-9)));
    const auto j0 = std::max<long>(0, static_cast<long>(std::ceil((y0 - miny) / cell - 0.5 - 1e-9)));
    const auto j1 = std::min<long>(ny - 1, static_cast<long>(std::floor((y1 - miny) / cell - 0.5 + 1e-9)));
    for (long j = j0; j <= j1; ++j) {
      for (long i = i0; i <= i1; ++i) {
        covered[static_cast<size_t>(j * nx + i)] = 1;
      }
    }
  }

  long count = 0;
  for (char c : covered) count += c;
  return static_cast<double>(count) * cell * cell;
}

}  // namespace sarplan::geo
