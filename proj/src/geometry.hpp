#pragma once

#include <vector>

namespace orchard {

struct Point2D {
  double x_m = 0.0;
  double y_m = 0.0;
};

// Regular planting grid: rows run along x, so row i sits at
// origin.y + i * row_spacing and column j at origin.x + j * col_spacing.
// Every tree carries the same circular canopy footprint.
class Layout {
 public:
  Layout(int rows, int cols, double row_spacing_m, double col_spacing_m,
         double canopy_radius_m, Point2D origin = {});

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double row_spacing_m() const { return row_spacing_m_; }
  double col_spacing_m() const { return col_spacing_m_; }
  double canopy_radius_m() const { return canopy_radius_m_; }
  Point2D origin() const { return origin_; }

  // Row-major: index = row * cols + col.
  const std::vector<Point2D>& tree_positions() const { return trees_; }

 private:
  int rows_;
  int cols_;
  double row_spacing_m_;
  double col_spacing_m_;
  double canopy_radius_m_;
  Point2D origin_;
  std::vector<Point2D> trees_;
};

struct LinkGeometry {
  double dx_m = 0.0;
  double dy_m = 0.0;
  double d_euclid_m = 0.0;
  double d_manhattan_m = 0.0;
  // Signed counts of planting grid lines crossed by the displacement,
  // positive in the direction of increasing coordinate.
  int row_offset = 0;
  int col_offset = 0;
  int n_canopies = 0;
};

double point_segment_distance(Point2D p, Point2D a, Point2D b);

// Number of canopy discs the closed segment tx-rx touches. Tangency counts:
// discs are treated as closed, with a 1e-9 m slack so analytically tangent
// configurations are not lost to rounding.
int count_canopy_intersections(const Layout& layout, Point2D tx, Point2D rx);

LinkGeometry link_geometry(const Layout& layout, Point2D tx, Point2D rx);

}  // namespace orchard
