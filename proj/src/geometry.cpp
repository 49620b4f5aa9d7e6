#include "geometry.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"

namespace orchard {

namespace {

constexpr double kTangencySlackM = 1e-9;

bool finite_point(Point2D p) {
  return std::isfinite(p.x_m) && std::isfinite(p.y_m);
}

// Signed count of grid lines k * spacing (k integer) crossed when moving
// from coordinate a to coordinate b, both relative to the layout origin.
// Half-open on the lower side (a < k * spacing <= b after ordering), so an
// endpoint sitting exactly on a line is counted once, never twice, and
// on-grid endpoints give |count| == round(|b - a| / spacing).
int lines_crossed(double a, double b, double spacing) {
  int sign = 1;
  if (a > b) {
    std::swap(a, b);
    sign = -1;
  }
  constexpr double eps = 1e-9;
  double lo = std::floor(a / spacing + eps);
  double hi = std::floor(b / spacing + eps);
  return sign * static_cast<int>(hi - lo);
}

}  // namespace

Layout::Layout(int rows, int cols, double row_spacing_m, double col_spacing_m,
               double canopy_radius_m, Point2D origin)
    : rows_(rows),
      cols_(cols),
      row_spacing_m_(row_spacing_m),
      col_spacing_m_(col_spacing_m),
      canopy_radius_m_(canopy_radius_m),
      origin_(origin) {
  if (rows < 1 || cols < 1)
    fail(Errc::invalid_argument, "layout requires at least one row and one column");
  if (!(row_spacing_m > 0.0) || !std::isfinite(row_spacing_m) ||
      !(col_spacing_m > 0.0) || !std::isfinite(col_spacing_m))
    fail(Errc::invalid_argument, "layout spacings must be finite and positive");
  if (!(canopy_radius_m > 0.0) || !std::isfinite(canopy_radius_m))
    fail(Errc::invalid_argument, "canopy radius must be finite and positive");
  if (!finite_point(origin))
    fail(Errc::invalid_argument, "layout origin must be finite");

  trees_.reserve(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols));
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      trees_.push_back({origin.x_m + j * col_spacing_m,
                        origin.y_m + i * row_spacing_m});
}

double point_segment_distance(Point2D p, Point2D a, Point2D b) {
  double vx = b.x_m - a.x_m;
  double vy = b.y_m - a.y_m;
  double wx = p.x_m - a.x_m;
  double wy = p.y_m - a.y_m;
  double vv = vx * vx + vy * vy;
  if (vv == 0.0) return std::hypot(wx, wy);  // degenerate segment
  double t = std::clamp((wx * vx + wy * vy) / vv, 0.0, 1.0);
  return std::hypot(wx - t * vx, wy - t * vy);
}

int count_canopy_intersections(const Layout& layout, Point2D tx, Point2D rx) {
  if (!finite_point(tx) || !finite_point(rx))
    fail(Errc::invalid_argument, "link endpoints must be finite");

  double limit = layout.canopy_radius_m() + kTangencySlackM;
  int count = 0;
  for (Point2D tree : layout.tree_positions())
    if (point_segment_distance(tree, tx, rx) <= limit) ++count;
  return count;
}

LinkGeometry link_geometry(const Layout& layout, Point2D tx, Point2D rx) {
  if (!finite_point(tx) || !finite_point(rx))
    fail(Errc::invalid_argument, "link endpoints must be finite");

  LinkGeometry g;
  g.dx_m = rx.x_m - tx.x_m;
  g.dy_m = rx.y_m - tx.y_m;
  g.d_euclid_m = std::hypot(g.dx_m, g.dy_m);
  g.d_manhattan_m = std::abs(g.dx_m) + std::abs(g.dy_m);
  Point2D o = layout.origin();
  g.row_offset = lines_crossed(tx.y_m - o.y_m, rx.y_m - o.y_m, layout.row_spacing_m());
  g.col_offset = lines_crossed(tx.x_m - o.x_m, rx.x_m - o.x_m, layout.col_spacing_m());
  g.n_canopies = count_canopy_intersections(layout, tx, rx);
  return g;
}

}  // namespace orchard
