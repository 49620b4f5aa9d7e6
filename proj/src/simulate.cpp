#include "simulate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <exception>
#include <ostream>
#include <thread>

#include "calibration.hpp"
#include "error.hpp"
#include "format.hpp"
#include "rng.hpp"

namespace orchard {

namespace {

void check_grid(const GridSpec& spec) {
  if (spec.nx < 1 || spec.ny < 1)
    fail(Errc::invalid_argument, "grid needs at least one cell per axis");
  if (!(spec.cell_size_m > 0.0) || !std::isfinite(spec.cell_size_m))
    fail(Errc::invalid_argument, "cell size must be finite and positive");
  if (!std::isfinite(spec.origin.x_m) || !std::isfinite(spec.origin.y_m))
    fail(Errc::invalid_argument, "grid origin must be finite");
}

// Nearest cell center along one axis, ties toward the lower index. An
// on-edge coordinate (within 1e-9 cells) belongs to the cell below the
// edge, except at the grid's own lower boundary.
int match_axis(double coord, double origin, double cell, int n) {
  double f = (coord - origin) / cell;
  double nearest = std::round(f);
  int i;
  if (std::abs(f - nearest) < 1e-9) {
    i = static_cast<int>(nearest) - 1;
    if (i == -1 && nearest == 0.0) i = 0;  // the grid's own lower edge
  } else {
    i = static_cast<int>(std::floor(f));
  }
  if (i < 0 || i >= n) return -1;
  return i;
}

void check_trajectory(const Trajectory& traj) {
  if (traj.waypoints.size() < 2)
    fail(Errc::invalid_argument, "trajectory needs at least 2 waypoints");
  if (!traj.dwell.empty() && traj.dwell.size() != traj.waypoints.size())
    fail(Errc::invalid_argument, "dwell list length must match waypoints");
  for (std::size_t i = 1; i < traj.waypoints.size(); ++i) {
    if (traj.waypoints[i].x_m == traj.waypoints[i - 1].x_m &&
        traj.waypoints[i].y_m == traj.waypoints[i - 1].y_m)
      fail(Errc::invalid_argument,
           "trajectory waypoints " + std::to_string(i - 1) + " and " +
               std::to_string(i) + " coincide");
  }
}

std::string iso_timestamp(std::int64_t epoch_s) {
  std::time_t t = static_cast<std::time_t>(epoch_s);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[80];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ",
                tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour,
                tm.tm_min, tm.tm_sec);
  return buf;
}

}  // namespace

HeatmapGrid model_heatmap(const Layout& layout, ModelId id,
                          const ModelParams& params, const RadioConfig& radio,
                          Point2D tx, const GridSpec& spec,
                          const SimOptions& options) {
  check_grid(spec);
  if (options.threads < 1)
    fail(Errc::invalid_argument, "thread count must be at least 1");

  HeatmapGrid grid;
  grid.nx = spec.nx;
  grid.ny = spec.ny;
  grid.cell_size_m = spec.cell_size_m;
  grid.origin = spec.origin;
  grid.value_kind = ValueKind::RssiDbm;
  std::size_t n_cells = std::size_t(spec.nx) * std::size_t(spec.ny);
  grid.values.assign(n_cells, 0.0);
  grid.mask.assign(n_cells, 1);

  Metric metric = options.metric.value_or(default_metric(id));

  // Each cell derives its own stream key from (seed, cell index), so the
  // partition into threads cannot influence any value.
  auto eval_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t idx = begin; idx < end; ++idx) {
      int ix = static_cast<int>(idx % std::size_t(spec.nx));
      int iy = static_cast<int>(idx / std::size_t(spec.nx));
      double pl = eval_model_pl(id, params, radio, layout, tx,
                                grid.cell_center(ix, iy), metric,
                                options.policy, rng::mix(options.seed, idx),
                                options.flog);
      grid.values[idx] = predict_rssi(pl, radio);
    }
  };

  std::size_t n_threads = std::min<std::size_t>(options.threads, n_cells);
  if (n_threads <= 1) {
    eval_range(0, n_cells);
    return grid;
  }

  std::size_t chunk = (n_cells + n_threads - 1) / n_threads;
  std::vector<std::thread> workers;
  std::vector<std::exception_ptr> errors(n_threads);
  for (std::size_t t = 0; t < n_threads; ++t) {
    std::size_t begin = t * chunk;
    std::size_t end = std::min(begin + chunk, n_cells);
    workers.emplace_back([&, t, begin, end] {
      try {
        eval_range(begin, end);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (std::thread& w : workers) w.join();
  for (const std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);
  return grid;
}

ErrorMapResult error_heatmap(const MeasurementDataset& measured,
                             const HeatmapGrid& modeled) {
  if (modeled.value_kind != ValueKind::RssiDbm)
    fail(Errc::invalid_argument, "modeled grid must hold RSSI values");
  if (measured.waypoints.empty())
    fail(Errc::no_data, "dataset has no waypoints");

  ErrorMapResult out;
  out.grid.nx = modeled.nx;
  out.grid.ny = modeled.ny;
  out.grid.cell_size_m = modeled.cell_size_m;
  out.grid.origin = modeled.origin;
  out.grid.value_kind = ValueKind::ErrorDb;
  std::size_t n_cells = std::size_t(modeled.nx) * std::size_t(modeled.ny);
  out.grid.values.assign(n_cells, 0.0);
  out.grid.mask.assign(n_cells, 0);

  std::vector<double> meas, model;
  std::vector<double> cell_sum(n_cells, 0.0);
  std::vector<int> cell_count(n_cells, 0);

  for (const Waypoint& wp : measured.waypoints) {
    int ix = match_axis(wp.position.x_m, modeled.origin.x_m,
                        modeled.cell_size_m, modeled.nx);
    int iy = match_axis(wp.position.y_m, modeled.origin.y_m,
                        modeled.cell_size_m, modeled.ny);
    if (ix < 0 || iy < 0)
      fail(Errc::not_found, "waypoint '" + wp.waypoint_id +
                                "' falls outside the heatmap grid");
    if (!modeled.valid(ix, iy))
      fail(Errc::invalid_argument, "waypoint '" + wp.waypoint_id +
                                       "' maps to a masked modeled cell");
    std::size_t idx = std::size_t(iy) * modeled.nx + ix;
    double err = wp.mean_rssi_dbm - modeled.value(ix, iy);
    cell_sum[idx] += err;
    ++cell_count[idx];
    meas.push_back(wp.mean_rssi_dbm);
    model.push_back(modeled.value(ix, iy));
  }

  for (std::size_t idx = 0; idx < n_cells; ++idx) {
    if (cell_count[idx] == 0) continue;
    out.grid.values[idx] = cell_sum[idx] / cell_count[idx];
    out.grid.mask[idx] = 1;
  }

  ErrorStats stats = error_stats(meas, model);
  out.mse_db2 = stats.mse_db2;
  out.rmse_db = stats.rmse_db;
  out.n_matched = meas.size();
  return out;
}

Trajectory zigzag_path(const Layout& layout, int waypoints_per_corridor) {
  if (layout.rows() < 2)
    fail(Errc::invalid_argument,
         "zigzag path needs at least 2 rows to form a corridor");
  if (layout.cols() < 2)
    fail(Errc::invalid_argument,
         "zigzag path needs at least 2 columns for a corridor of nonzero length");
  if (waypoints_per_corridor < 2)
    fail(Errc::invalid_argument, "waypoints_per_corridor must be at least 2");

  double width = (layout.cols() - 1) * layout.col_spacing_m();
  Point2D o = layout.origin();

  Trajectory traj;
  int corridors = layout.rows() - 1;
  traj.waypoints.reserve(std::size_t(corridors) * waypoints_per_corridor);
  for (int c = 0; c < corridors; ++c) {
    double y = o.y_m + (c + 0.5) * layout.row_spacing_m();
    for (int j = 0; j < waypoints_per_corridor; ++j) {
      double t = static_cast<double>(j) / (waypoints_per_corridor - 1);
      if (c % 2 != 0) t = 1.0 - t;  // alternate travel direction
      traj.waypoints.push_back({o.x_m + t * width, y});
    }
  }
  traj.dwell.assign(traj.waypoints.size(), 1);
  return traj;
}

std::vector<TrajectorySample> trajectory_rssi(
    const Trajectory& traj, Point2D node, const Layout& layout, ModelId id,
    const ModelParams& params, const RadioConfig& radio,
    double shadow_sigma_db, std::uint64_t seed, const SimOptions& options) {
  check_trajectory(traj);
  if (!(shadow_sigma_db >= 0.0) || !std::isfinite(shadow_sigma_db))
    fail(Errc::invalid_argument, "shadowing sigma must be finite and non-negative");

  Metric metric = options.metric.value_or(default_metric(id));

  std::vector<TrajectorySample> out;
  out.reserve(traj.waypoints.size());
  for (std::size_t i = 0; i < traj.waypoints.size(); ++i) {
    Point2D wp = traj.waypoints[i];
    // Shadowing and the FLog sampler draw from separate keyed streams, so
    // enabling one never shifts the other.
    double pl = eval_model_pl(id, params, radio, layout, node, wp, metric,
                              options.policy, rng::mix(options.seed, i),
                              options.flog);
    double shadow =
        shadow_sigma_db > 0.0 ? shadowing_sample(shadow_sigma_db, seed, i) : 0.0;
    TrajectorySample s;
    s.index = static_cast<int>(i);
    s.position = wp;
    s.distance_m = std::hypot(wp.x_m - node.x_m, wp.y_m - node.y_m);
    s.rssi_dbm = predict_rssi(pl + shadow, radio);
    out.push_back(s);
  }
  return out;
}

double shadowing_sample(double sigma_db, std::uint64_t seed,
                        std::uint64_t index) {
  if (!(sigma_db >= 0.0) || !std::isfinite(sigma_db))
    fail(Errc::invalid_argument, "sigma must be finite and non-negative");
  if (sigma_db == 0.0) return 0.0;
  rng::SplitMix64 gen(rng::mix(seed, index));
  return sigma_db * gen.gaussian();
}

void write_heatmap_csv(const HeatmapGrid& grid, std::ostream& os) {
  os << "x_m,y_m,value\n";
  for (int iy = 0; iy < grid.ny; ++iy) {
    for (int ix = 0; ix < grid.nx; ++ix) {
      if (!grid.valid(ix, iy)) continue;
      Point2D c = grid.cell_center(ix, iy);
      os << format_double(c.x_m) << ',' << format_double(c.y_m) << ','
         << format_double(grid.value(ix, iy)) << '\n';
    }
  }
}

void write_heatmap_pgm(const HeatmapGrid& grid, std::ostream& os) {
  double vmin = 0.0, vmax = 0.0;
  bool any = false;
  for (int iy = 0; iy < grid.ny; ++iy)
    for (int ix = 0; ix < grid.nx; ++ix) {
      if (!grid.valid(ix, iy)) continue;
      double v = grid.value(ix, iy);
      if (!any) {
        vmin = vmax = v;
        any = true;
      } else {
        vmin = std::min(vmin, v);
        vmax = std::max(vmax, v);
      }
    }

  double span = vmax - vmin;
  os << "P2\n";
  os << "# gray = 1 + round(254*(value-vmin)/(vmax-vmin)); masked cells = 0; "
        "vmin="
     << format_double(vmin) << "; vmax=" << format_double(vmax) << "\n";
  os << grid.nx << ' ' << grid.ny << "\n255\n";
  // Top row first so the image orientation matches a plot with y upward.
  for (int iy = grid.ny - 1; iy >= 0; --iy) {
    for (int ix = 0; ix < grid.nx; ++ix) {
      int gray = 0;
      if (grid.valid(ix, iy)) {
        if (span > 0.0) {
          double v = (grid.value(ix, iy) - vmin) / span;
          gray = 1 + static_cast<int>(std::lround(254.0 * v));
        } else {
          gray = 255;  // flat field
        }
      }
      os << gray;
      os << (ix + 1 == grid.nx ? '\n' : ' ');
    }
  }
}

void write_trajectory_csv(const std::vector<TrajectorySample>& samples,
                          std::ostream& os) {
  os << "index,x_m,y_m,distance_m,rssi_dbm\n";
  for (const TrajectorySample& s : samples) {
    os << s.index << ',' << format_double(s.position.x_m) << ','
       << format_double(s.position.y_m) << ',' << format_double(s.distance_m)
       << ',' << format_double(s.rssi_dbm) << '\n';
  }
}

void write_synthetic_log(const Layout& layout, ModelId id,
                         const ModelParams& params, const RadioConfig& radio,
                         Point2D tx, const SyntheticSpec& spec,
                         const SimOptions& options, std::ostream& log_os,
                         std::ostream& positions_os) {
  if (spec.waypoints_x < 1 || spec.waypoints_y < 1)
    fail(Errc::invalid_argument, "waypoint grid needs at least one point per axis");
  if (spec.packets_per_waypoint < 1)
    fail(Errc::invalid_argument, "packets_per_waypoint must be at least 1");
  if (!(spec.noise_sigma_db >= 0.0) || !std::isfinite(spec.noise_sigma_db))
    fail(Errc::invalid_argument, "noise sigma must be finite and non-negative");
  if (!(spec.area_width_m > 0.0) || !(spec.area_height_m > 0.0) ||
      !std::isfinite(spec.area_width_m) || !std::isfinite(spec.area_height_m))
    fail(Errc::invalid_argument, "area dimensions must be finite and positive");

  Metric metric = options.metric.value_or(default_metric(id));

  using namespace std::chrono;
  const std::int64_t base_epoch =
      sys_seconds(sys_days(year{2025} / 10 / 2) + hours{10})
          .time_since_epoch()
          .count();

  log_os << "waypoint_id,timestamp,rssi_dbm\n";
  positions_os << "waypoint_id,x_m,y_m\n";

  double dx = spec.area_width_m / spec.waypoints_x;
  double dy = spec.area_height_m / spec.waypoints_y;
  std::int64_t pkt = 0;
  int wp_index = 0;
  for (int j = 0; j < spec.waypoints_y; ++j) {
    for (int i = 0; i < spec.waypoints_x; ++i, ++wp_index) {
      Point2D wp{spec.area_origin.x_m + (i + 0.5) * dx,
                 spec.area_origin.y_m + (j + 0.5) * dy};
      char idbuf[16];
      std::snprintf(idbuf, sizeof(idbuf), "wp%03d", wp_index + 1);

      positions_os << idbuf << ',' << format_double(wp.x_m) << ','
                   << format_double(wp.y_m) << '\n';

      double pl = eval_model_pl(id, params, radio, layout, tx, wp, metric,
                                options.policy,
                                rng::mix(spec.seed, 0x5f00u + wp_index),
                                options.flog);
      double rssi_true = predict_rssi(pl, radio);
      for (int p = 0; p < spec.packets_per_waypoint; ++p, ++pkt) {
        double noise = spec.noise_sigma_db > 0.0
                           ? shadowing_sample(spec.noise_sigma_db, spec.seed,
                                              static_cast<std::uint64_t>(pkt))
                           : 0.0;
        // Receivers report whole dBm.
        double reading = std::round(rssi_true + noise);
        log_os << idbuf << ',' << iso_timestamp(base_epoch + pkt) << ','
               << format_double(reading) << '\n';
      }
    }
  }
}

}  // namespace orchard
