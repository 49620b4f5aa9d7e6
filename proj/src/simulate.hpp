#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "dataset.hpp"
#include "geometry.hpp"
#include "models.hpp"

namespace orchard {

enum class ValueKind { RssiDbm, ErrorDb, PlDb };

struct GridSpec {
  int nx = 43;
  int ny = 38;
  double cell_size_m = 1.0;
  Point2D origin{};  // lower-left corner of cell (0, 0)
};

struct HeatmapGrid {
  int nx = 0;
  int ny = 0;
  double cell_size_m = 1.0;
  Point2D origin{};
  ValueKind value_kind = ValueKind::RssiDbm;
  std::vector<double> values;  // row-major, index = iy * nx + ix
  std::vector<std::uint8_t> mask;  // 1 = valid; masked cells carry no value

  double value(int ix, int iy) const { return values[std::size_t(iy) * nx + ix]; }
  bool valid(int ix, int iy) const { return mask[std::size_t(iy) * nx + ix] != 0; }
  Point2D cell_center(int ix, int iy) const {
    return {origin.x_m + (ix + 0.5) * cell_size_m,
            origin.y_m + (iy + 0.5) * cell_size_m};
  }
};

struct Trajectory {
  std::vector<Point2D> waypoints;  // ordered; consecutive entries distinct
  std::vector<int> dwell;          // per-waypoint sample count
};

struct TrajectorySample {
  int index = 0;
  Point2D position;
  double distance_m = 0.0;
  double rssi_dbm = 0.0;
};

struct SimOptions {
  std::optional<Metric> metric{};  // empty = model default
  ShortRangePolicy policy = ShortRangePolicy::Clamp;
  std::uint64_t seed = 0;
  int threads = 1;
  FlogOptions flog{};
};

struct ErrorMapResult {
  HeatmapGrid grid;          // signed measured-minus-modeled per matched cell
  double mse_db2 = 0.0;
  double rmse_db = 0.0;
  std::size_t n_matched = 0;  // waypoints matched to cells
};

// Evaluates the model from tx to every cell center and stores predicted
// RSSI. Deterministic for fixed (options.seed, grid): cells own their
// stream keys, so the thread count cannot change any value.
HeatmapGrid model_heatmap(const Layout& layout, ModelId id,
                          const ModelParams& params, const RadioConfig& radio,
                          Point2D tx, const GridSpec& spec,
                          const SimOptions& options = {});

// Matches each measured waypoint to its nearest cell center (ties toward
// the lower index) and stores measured minus modeled there. Cells without
// a measurement stay masked. Statistics run over the matched waypoint
// pairs; a cell holding several waypoints stores their mean error.
ErrorMapResult error_heatmap(const MeasurementDataset& measured,
                             const HeatmapGrid& modeled);

// Boustrophedon sweep: one pass along each inter-row corridor mid-line,
// alternating direction, waypoints_per_corridor evenly spaced points per
// pass. Needs at least 2 rows (a corridor) and 2 columns (nonzero width).
Trajectory zigzag_path(const Layout& layout, int waypoints_per_corridor);

// Model RSSI from the node to every trajectory waypoint plus an optional
// seeded shadowing draw (keyed by waypoint index). distance_m is the
// Euclidean node-to-waypoint range.
std::vector<TrajectorySample> trajectory_rssi(
    const Trajectory& traj, Point2D node, const Layout& layout, ModelId id,
    const ModelParams& params, const RadioConfig& radio,
    double shadow_sigma_db, std::uint64_t seed,
    const SimOptions& options = {});

// Zero-mean Gaussian, sigma_db scale. The draw depends only on
// (seed, index), never on call order.
double shadowing_sample(double sigma_db, std::uint64_t seed,
                        std::uint64_t index);

// CSV header `x_m,y_m,value`; masked cells omitted; full precision.
void write_heatmap_csv(const HeatmapGrid& grid, std::ostream& os);

// ASCII PGM (P2). Valid cells map linearly from [vmin, vmax] to 1..255,
// masked cells to 0; the mapping is recorded in a comment line. Row order
// is top-down (highest y first) to match image conventions.
void write_heatmap_pgm(const HeatmapGrid& grid, std::ostream& os);

// CSV header `index,x_m,y_m,distance_m,rssi_dbm`; full precision.
void write_trajectory_csv(const std::vector<TrajectorySample>& samples,
                          std::ostream& os);

struct SyntheticSpec {
  int waypoints_x = 5;
  int waypoints_y = 5;
  Point2D area_origin{};     // waypoint grid covers this rectangle
  double area_width_m = 43.0;
  double area_height_m = 38.0;
  int packets_per_waypoint = 30;
  double noise_sigma_db = 0.0;
  std::uint64_t seed = 0;
};

// Emits a packet log and matching positions file for a synthetic field:
// waypoints at the centers of an x-by-y partition of the area, ground-truth
// RSSI from the chosen model, per-packet Gaussian noise, integer dBm
// readings (receivers report whole dB). Timestamps step one second per
// packet from a fixed epoch so output is reproducible.
void write_synthetic_log(const Layout& layout, ModelId id,
                         const ModelParams& params, const RadioConfig& radio,
                         Point2D tx, const SyntheticSpec& spec,
                         const SimOptions& options, std::ostream& log_os,
                         std::ostream& positions_os);

}  // namespace orchard
