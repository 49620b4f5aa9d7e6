#include "orchardprop/orchardprop.h"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <new>
#include <sstream>
#include <string>

#include "calibration.hpp"
#include "dataset.hpp"
#include "error.hpp"
#include "geometry.hpp"
#include "models.hpp"
#include "rng.hpp"
#include "simulate.hpp"

using namespace orchard;

struct op_layout {
  Layout impl;
};
struct op_packet_log {
  PacketLog impl;
};
struct op_positions {
  std::map<std::string, Point2D> impl;
};
struct op_dataset {
  AggregationResult impl;
};
struct op_fit_result {
  FitResult impl;
};
struct op_heatmap {
  HeatmapGrid impl;
};
struct op_trajectory {
  Trajectory impl;
};

namespace {

thread_local std::string g_last_error;

int code_of(Errc c) {
  switch (c) {
    case Errc::invalid_argument: return OP_EINVAL;
    case Errc::domain: return OP_EDOMAIN;
    case Errc::parse: return OP_EPARSE;
    case Errc::io: return OP_EIO;
    case Errc::no_data: return OP_ENODATA;
    case Errc::singular_fit: return OP_ESINGULAR;
    case Errc::not_found: return OP_ENOENT;
    case Errc::out_of_range: return OP_ERANGE;
    case Errc::internal: return OP_EINTERNAL;
  }
  return OP_EINTERNAL;
}

int set_error(int code, const std::string& message) {
  g_last_error = message;
  return code;
}

// Runs the body, translating exceptions into status codes.
template <typename Fn>
int guarded(Fn&& fn) {
  try {
    fn();
    return OP_OK;
  } catch (const Error& e) {
    return set_error(code_of(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(OP_EINTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(OP_EINTERNAL, e.what());
  } catch (...) {
    return set_error(OP_EINTERNAL, "unknown error");
  }
}

void require(bool ok, const char* what) {
  if (!ok) fail(Errc::invalid_argument, what);
}

Metric to_metric(int metric, ModelId id) {
  switch (metric) {
    case OP_METRIC_DEFAULT: return default_metric(id);
    case OP_METRIC_EUCLID: return Metric::Euclid;
    case OP_METRIC_MANHATTAN: return Metric::Manhattan;
  }
  fail(Errc::invalid_argument, "unknown metric");
}

ShortRangePolicy to_policy(int policy) {
  switch (policy) {
    case OP_SHORT_RANGE_CLAMP: return ShortRangePolicy::Clamp;
    case OP_SHORT_RANGE_STRICT: return ShortRangePolicy::Strict;
  }
  fail(Errc::invalid_argument, "unknown short-range policy");
}

ModelId to_model(int model_id) {
  switch (model_id) {
    case OP_MODEL_FSPL: return ModelId::Fspl;
    case OP_MODEL_ITU: return ModelId::Itu;
    case OP_MODEL_MULTIWALL: return ModelId::Multiwall;
    case OP_MODEL_PMW: return ModelId::Pmw;
    case OP_MODEL_PROPOSED: return ModelId::Proposed;
    case OP_MODEL_FLOG: return ModelId::Flog;
  }
  fail(Errc::invalid_argument, "unknown model id");
}

RadioConfig to_radio(const op_radio* radio) {
  require(radio != nullptr, "radio must not be null");
  RadioConfig r;
  r.freq_mhz = radio->freq_mhz;
  r.tx_power_dbm = radio->tx_power_dbm;
  if (radio->has_sensitivity) r.sensitivity_dbm = radio->sensitivity_dbm;
  return r;
}

ModelParams to_params(const op_model_params* params) {
  require(params != nullptr, "params must not be null");
  ModelParams p;
  p.pl0_db = params->pl0_db;
  p.exponent = params->exponent;
  p.canopy_loss_db = params->canopy_loss_db;
  if (params->wall_loss_count > 0) {
    require(params->wall_losses_db != nullptr,
            "wall_losses_db must not be null when wall_loss_count > 0");
    p.wall_losses_db.assign(params->wall_losses_db,
                            params->wall_losses_db + params->wall_loss_count);
  }
  p.flog_alpha = params->flog_alpha;
  p.flog_beta = params->flog_beta;
  p.flog_gamma = params->flog_gamma;
  p.shadow_sigma_db = params->shadow_sigma_db;
  p.d0_m = params->d0_m;
  return p;
}

FlogOptions to_flog(const op_flog_options& flog) {
  FlogOptions f;
  f.tx_height_m = flog.tx_height_m;
  f.rx_height_m = flog.rx_height_m;
  f.ffz_samples = flog.ffz_samples;
  f.canopy_center_height_m = flog.canopy_center_height_m;
  return f;
}

SimOptions to_sim(const op_sim_options* options, ModelId id) {
  SimOptions s;
  if (!options) {
    s.metric = default_metric(id);
    return s;
  }
  s.metric = to_metric(options->metric, id);
  s.policy = to_policy(options->short_range_policy);
  s.seed = options->seed;
  s.threads = options->threads;
  s.flog = to_flog(options->flog);
  return s;
}

// Writes through a temporary in the same directory and renames into place,
// so a failed run never leaves a truncated file behind.
template <typename Fn>
void write_file_atomic(const char* path, Fn&& body) {
  require(path != nullptr, "path must not be null");
  std::string tmp = std::string(path) + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) fail(Errc::io, std::string("cannot open '") + tmp + "' for writing");
    body(os);
    os.flush();
    if (!os) {
      os.close();
      std::remove(tmp.c_str());
      fail(Errc::io, std::string("write to '") + tmp + "' failed");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::remove(tmp.c_str());
    fail(Errc::io, std::string("cannot rename '") + tmp + "' to '" + path +
                       "': " + ec.message());
  }
}

std::ifstream open_input(const char* path) {
  require(path != nullptr, "path must not be null");
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io, std::string("cannot open '") + path + "'");
  return in;
}

}  // namespace

extern "C" {

const char* op_strerror(int status) {
  switch (status) {
    case OP_OK: return "success";
    case OP_EINVAL: return "invalid argument";
    case OP_EDOMAIN: return "input outside model domain";
    case OP_EPARSE: return "malformed input";
    case OP_EIO: return "I/O failure";
    case OP_ENODATA: return "not enough data";
    case OP_ESINGULAR: return "rank-deficient fit";
    case OP_ENOENT: return "not found";
    case OP_ERANGE: return "index out of range";
    case OP_EINTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* op_last_error_message(void) { return g_last_error.c_str(); }

const char* op_version(void) { return "1.0.0"; }

int op_model_id_from_name(const char* name, int* out_id) {
  return guarded([&] {
    require(name != nullptr && out_id != nullptr, "name and out_id required");
    static const std::pair<const char*, int> kNames[] = {
        {"fspl", OP_MODEL_FSPL},         {"itu", OP_MODEL_ITU},
        {"multiwall", OP_MODEL_MULTIWALL}, {"pmw", OP_MODEL_PMW},
        {"proposed", OP_MODEL_PROPOSED}, {"flog", OP_MODEL_FLOG},
    };
    for (const auto& [n, id] : kNames)
      if (std::strcmp(name, n) == 0) {
        *out_id = id;
        return;
      }
    fail(Errc::invalid_argument, std::string("unknown model '") + name + "'");
  });
}

const char* op_model_name(int model_id) {
  switch (model_id) {
    case OP_MODEL_FSPL: return "fspl";
    case OP_MODEL_ITU: return "itu";
    case OP_MODEL_MULTIWALL: return "multiwall";
    case OP_MODEL_PMW: return "pmw";
    case OP_MODEL_PROPOSED: return "proposed";
    case OP_MODEL_FLOG: return "flog";
  }
  return nullptr;
}

void op_radio_init(op_radio* radio) {
  if (!radio) return;
  radio->freq_mhz = 868.0;
  radio->tx_power_dbm = 21.0;
  radio->sensitivity_dbm = 0.0;
  radio->has_sensitivity = 0;
}

void op_model_params_init(op_model_params* params, double freq_mhz) {
  if (!params) return;
  params->pl0_db = -27.55 + 20.0 * std::log10(freq_mhz);
  params->exponent = 2.0;
  params->canopy_loss_db = 0.0;
  params->wall_losses_db = nullptr;
  params->wall_loss_count = 0;
  params->flog_alpha = 2.0;
  params->flog_beta = 2.0;
  params->flog_gamma = 2.0;
  params->shadow_sigma_db = 0.0;
  params->d0_m = 1.0;
}

void op_flog_options_init(op_flog_options* flog) {
  if (!flog) return;
  flog->tx_height_m = 1.2;
  flog->rx_height_m = 1.2;
  flog->ffz_samples = 4096;
  flog->canopy_center_height_m = 2.5;
}

void op_grid_spec_init(op_grid_spec* spec) {
  if (!spec) return;
  spec->nx = 43;
  spec->ny = 38;
  spec->cell_size_m = 1.0;
  spec->origin_x_m = 0.0;
  spec->origin_y_m = 0.0;
}

void op_sim_options_init(op_sim_options* options) {
  if (!options) return;
  options->metric = OP_METRIC_DEFAULT;
  options->short_range_policy = OP_SHORT_RANGE_CLAMP;
  options->seed = 0;
  options->threads = 1;
  op_flog_options_init(&options->flog);
}

/* ---- geometry ---- */

int op_layout_create(int rows, int cols, double row_spacing_m,
                     double col_spacing_m, double canopy_radius_m,
                     double origin_x_m, double origin_y_m, op_layout** out) {
  return guarded([&] {
    require(out != nullptr, "out must not be null");
    *out = new op_layout{Layout(rows, cols, row_spacing_m, col_spacing_m,
                                canopy_radius_m,
                                Point2D{origin_x_m, origin_y_m})};
  });
}

void op_layout_free(op_layout* layout) { delete layout; }

int op_layout_tree_count(const op_layout* layout, size_t* out) {
  return guarded([&] {
    require(layout != nullptr && out != nullptr, "layout and out required");
    *out = layout->impl.tree_positions().size();
  });
}

int op_layout_tree_position(const op_layout* layout, size_t index,
                            double* x_m, double* y_m) {
  return guarded([&] {
    require(layout != nullptr && x_m != nullptr && y_m != nullptr,
            "layout and outputs required");
    const auto& trees = layout->impl.tree_positions();
    if (index >= trees.size())
      fail(Errc::out_of_range, "tree index " + std::to_string(index) +
                                   " out of range (have " +
                                   std::to_string(trees.size()) + ")");
    *x_m = trees[index].x_m;
    *y_m = trees[index].y_m;
  });
}

int op_link_geometry_compute(const op_layout* layout, double tx_x_m,
                             double tx_y_m, double rx_x_m, double rx_y_m,
                             op_link_geometry* out) {
  return guarded([&] {
    require(layout != nullptr && out != nullptr, "layout and out required");
    LinkGeometry g = link_geometry(layout->impl, Point2D{tx_x_m, tx_y_m},
                                   Point2D{rx_x_m, rx_y_m});
    out->dx_m = g.dx_m;
    out->dy_m = g.dy_m;
    out->d_euclid_m = g.d_euclid_m;
    out->d_manhattan_m = g.d_manhattan_m;
    out->row_offset = g.row_offset;
    out->col_offset = g.col_offset;
    out->n_canopies = g.n_canopies;
  });
}

int op_count_canopy_intersections(const op_layout* layout, double tx_x_m,
                                  double tx_y_m, double rx_x_m, double rx_y_m,
                                  int* out) {
  return guarded([&] {
    require(layout != nullptr && out != nullptr, "layout and out required");
    *out = count_canopy_intersections(layout->impl, Point2D{tx_x_m, tx_y_m},
                                      Point2D{rx_x_m, rx_y_m});
  });
}

/* ---- models ---- */

int op_fspl(double freq_mhz, double d_m, int short_range_policy,
            double* out_db) {
  return guarded([&] {
    require(out_db != nullptr, "out_db must not be null");
    *out_db = fspl(freq_mhz, d_m, to_policy(short_range_policy));
  });
}

int op_itu_vegetation_loss(double freq_mhz, double d_m, double* out_db,
                           int* beyond_validity) {
  return guarded([&] {
    require(out_db != nullptr, "out_db must not be null");
    bool beyond = false;
    *out_db = itu_vegetation_loss(freq_mhz, d_m, &beyond);
    if (beyond_validity) *beyond_validity = beyond ? 1 : 0;
  });
}

int op_itu_total(double freq_mhz, double d_m, int short_range_policy,
                 double* out_db) {
  return guarded([&] {
    require(out_db != nullptr, "out_db must not be null");
    *out_db = itu_total(freq_mhz, d_m, to_policy(short_range_policy));
  });
}

int op_multiwall(const op_model_params* params, double d_m,
                 const double* wall_losses_db, size_t wall_loss_count,
                 int short_range_policy, double* out_db) {
  return guarded([&] {
    require(out_db != nullptr, "out_db must not be null");
    std::vector<double> walls;
    if (wall_loss_count > 0) {
      require(wall_losses_db != nullptr,
              "wall_losses_db must not be null when wall_loss_count > 0");
      walls.assign(wall_losses_db, wall_losses_db + wall_loss_count);
    }
    *out_db = multiwall(to_params(params), d_m, walls,
                        to_policy(short_range_policy));
  });
}

int op_pmw(const op_model_params* params, double d_m, int n_canopies,
           int short_range_policy, double* out_db) {
  return guarded([&] {
    require(out_db != nullptr, "out_db must not be null");
    *out_db = pmw(to_params(params), d_m, n_canopies,
                  to_policy(short_range_policy));
  });
}

int op_proposed_pl(const op_model_params* params, const op_link_geometry* geom,
                   int short_range_policy, double* out_db) {
  return guarded([&] {
    require(geom != nullptr && out_db != nullptr, "geom and out_db required");
    LinkGeometry g;
    g.dx_m = geom->dx_m;
    g.dy_m = geom->dy_m;
    g.d_euclid_m = geom->d_euclid_m;
    g.d_manhattan_m = geom->d_manhattan_m;
    g.row_offset = geom->row_offset;
    g.col_offset = geom->col_offset;
    g.n_canopies = geom->n_canopies;
    *out_db = proposed_pl(to_params(params), g, to_policy(short_range_policy));
  });
}

int op_flog_exponent(const op_ffz_fractions* fr, double alpha, double beta,
                     double gamma, double* out) {
  return guarded([&] {
    require(fr != nullptr && out != nullptr, "fr and out required");
    *out = flog_exponent(FfzFractions{fr->p_open, fr->p_foliage, fr->p_ground},
                         alpha, beta, gamma);
  });
}

int op_flog_pl(const op_model_params* params, const op_ffz_fractions* fr,
               double d_m, double shadow_db, int short_range_policy,
               double* out_db) {
  return guarded([&] {
    require(fr != nullptr && out_db != nullptr, "fr and out_db required");
    *out_db = flog_pl(to_params(params),
                      FfzFractions{fr->p_open, fr->p_foliage, fr->p_ground},
                      d_m, shadow_db, to_policy(short_range_policy));
  });
}

int op_ffz_fractions_estimate(const op_layout* layout, double tx_x_m,
                              double tx_y_m, double tx_h_m, double rx_x_m,
                              double rx_y_m, double rx_h_m, double freq_mhz,
                              long n_samples, uint64_t seed,
                              double canopy_center_height_m,
                              op_ffz_fractions* out) {
  return guarded([&] {
    require(layout != nullptr && out != nullptr, "layout and out required");
    FfzFractions fr = ffz_fractions(layout->impl, Point2D{tx_x_m, tx_y_m},
                                    tx_h_m, Point2D{rx_x_m, rx_y_m}, rx_h_m,
                                    freq_mhz, n_samples, seed,
                                    canopy_center_height_m);
    out->p_open = fr.p_open;
    out->p_foliage = fr.p_foliage;
    out->p_ground = fr.p_ground;
  });
}

int op_predict_rssi(double model_pl_db, const op_radio* radio,
                    double* out_dbm) {
  return guarded([&] {
    require(out_dbm != nullptr, "out_dbm must not be null");
    *out_dbm = predict_rssi(model_pl_db, to_radio(radio));
  });
}

int op_model_eval(const op_layout* layout, int model_id,
                  const op_model_params* params, const op_radio* radio,
                  double tx_x_m, double tx_y_m, double rx_x_m, double rx_y_m,
                  const op_sim_options* options, double* pl_db,
                  double* rssi_dbm) {
  return guarded([&] {
    require(layout != nullptr, "layout must not be null");
    ModelId id = to_model(model_id);
    SimOptions sim = to_sim(options, id);
    RadioConfig r = to_radio(radio);
    double pl = eval_model_pl(id, to_params(params), r, layout->impl,
                              Point2D{tx_x_m, tx_y_m}, Point2D{rx_x_m, rx_y_m},
                              *sim.metric, sim.policy,
                              rng::mix(sim.seed, 0), sim.flog);
    if (pl_db) *pl_db = pl;
    if (rssi_dbm) *rssi_dbm = predict_rssi(pl, r);
  });
}

/* ---- measurement ingestion ---- */

int op_packet_log_parse_file(const char* path, op_packet_log** out) {
  return guarded([&] {
    require(out != nullptr, "out must not be null");
    std::ifstream in = open_input(path);
    *out = new op_packet_log{parse_log(in)};
  });
}

int op_packet_log_parse_string(const char* text, op_packet_log** out) {
  return guarded([&] {
    require(text != nullptr && out != nullptr, "text and out required");
    std::istringstream in{std::string(text)};
    *out = new op_packet_log{parse_log(in)};
  });
}

void op_packet_log_free(op_packet_log* log) { delete log; }

int op_packet_log_record_count(const op_packet_log* log, size_t* out) {
  return guarded([&] {
    require(log != nullptr && out != nullptr, "log and out required");
    *out = log->impl.records.size();
  });
}

int op_packet_log_record(const op_packet_log* log, size_t index,
                         const char** waypoint_id, const char** timestamp,
                         double* rssi_dbm) {
  return guarded([&] {
    require(log != nullptr, "log must not be null");
    if (index >= log->impl.records.size())
      fail(Errc::out_of_range, "record index out of range");
    const PacketRecord& r = log->impl.records[index];
    if (waypoint_id) *waypoint_id = r.waypoint_id.c_str();
    if (timestamp) *timestamp = r.timestamp.c_str();
    if (rssi_dbm) *rssi_dbm = r.rssi_dbm;
  });
}

int op_packet_log_diagnostic_count(const op_packet_log* log, size_t* out) {
  return guarded([&] {
    require(log != nullptr && out != nullptr, "log and out required");
    *out = log->impl.diagnostics.size();
  });
}

int op_packet_log_diagnostic(const op_packet_log* log, size_t index,
                             size_t* line_no, const char** message) {
  return guarded([&] {
    require(log != nullptr, "log must not be null");
    if (index >= log->impl.diagnostics.size())
      fail(Errc::out_of_range, "diagnostic index out of range");
    const ParseDiagnostic& d = log->impl.diagnostics[index];
    if (line_no) *line_no = d.line_no;
    if (message) *message = d.message.c_str();
  });
}

int op_positions_parse_file(const char* path, op_positions** out) {
  return guarded([&] {
    require(out != nullptr, "out must not be null");
    std::ifstream in = open_input(path);
    *out = new op_positions{parse_positions(in)};
  });
}

int op_positions_parse_string(const char* text, op_positions** out) {
  return guarded([&] {
    require(text != nullptr && out != nullptr, "text and out required");
    std::istringstream in{std::string(text)};
    *out = new op_positions{parse_positions(in)};
  });
}

void op_positions_free(op_positions* positions) { delete positions; }

int op_positions_count(const op_positions* positions, size_t* out) {
  return guarded([&] {
    require(positions != nullptr && out != nullptr,
            "positions and out required");
    *out = positions->impl.size();
  });
}

int op_dataset_aggregate(const op_packet_log* log,
                         const op_positions* positions, int min_samples,
                         op_dataset** out) {
  return guarded([&] {
    require(log != nullptr && positions != nullptr && out != nullptr,
            "log, positions and out required");
    *out = new op_dataset{
        aggregate_waypoints(log->impl.records, positions->impl, min_samples)};
  });
}

void op_dataset_free(op_dataset* dataset) { delete dataset; }

int op_dataset_waypoint_count(const op_dataset* dataset, size_t* out) {
  return guarded([&] {
    require(dataset != nullptr && out != nullptr, "dataset and out required");
    *out = dataset->impl.dataset.waypoints.size();
  });
}

int op_dataset_waypoint(const op_dataset* dataset, size_t index,
                        const char** waypoint_id, double* x_m, double* y_m,
                        double* mean_rssi_dbm, int* n_samples,
                        double* raw_min_dbm, double* raw_max_dbm) {
  return guarded([&] {
    require(dataset != nullptr, "dataset must not be null");
    const auto& wps = dataset->impl.dataset.waypoints;
    if (index >= wps.size())
      fail(Errc::out_of_range, "waypoint index out of range");
    const Waypoint& w = wps[index];
    if (waypoint_id) *waypoint_id = w.waypoint_id.c_str();
    if (x_m) *x_m = w.position.x_m;
    if (y_m) *y_m = w.position.y_m;
    if (mean_rssi_dbm) *mean_rssi_dbm = w.mean_rssi_dbm;
    if (n_samples) *n_samples = w.n_samples;
    if (raw_min_dbm) *raw_min_dbm = w.raw_min_dbm;
    if (raw_max_dbm) *raw_max_dbm = w.raw_max_dbm;
  });
}

int op_dataset_excluded_count(const op_dataset* dataset, size_t* out) {
  return guarded([&] {
    require(dataset != nullptr && out != nullptr, "dataset and out required");
    *out = dataset->impl.excluded.size();
  });
}

int op_dataset_excluded(const op_dataset* dataset, size_t index,
                        const char** waypoint_id, int* n_samples) {
  return guarded([&] {
    require(dataset != nullptr, "dataset must not be null");
    if (index >= dataset->impl.excluded.size())
      fail(Errc::out_of_range, "excluded index out of range");
    const ExcludedWaypoint& e = dataset->impl.excluded[index];
    if (waypoint_id) *waypoint_id = e.waypoint_id.c_str();
    if (n_samples) *n_samples = e.n_samples;
  });
}

/* ---- calibration ---- */

int op_reference_pl0(double freq_mhz, double* out_db) {
  return guarded([&] {
    require(out_db != nullptr, "out_db must not be null");
    *out_db = reference_pl0(freq_mhz);
  });
}

int op_one_slope_exponent(double pr_d0_dbm, double pr_d_dbm, double d_m,
                          double* out) {
  return guarded([&] {
    require(out != nullptr, "out must not be null");
    *out = one_slope_exponent(pr_d0_dbm, pr_d_dbm, d_m);
  });
}

int op_error_stats(const double* measured_dbm, const double* modeled_dbm,
                   size_t count, double* mse_db2, double* rmse_db) {
  return guarded([&] {
    require(measured_dbm != nullptr && modeled_dbm != nullptr,
            "measured and modeled arrays required");
    ErrorStats s = error_stats(
        std::vector<double>(measured_dbm, measured_dbm + count),
        std::vector<double>(modeled_dbm, modeled_dbm + count));
    if (mse_db2) *mse_db2 = s.mse_db2;
    if (rmse_db) *rmse_db = s.rmse_db;
  });
}

int op_fit_canopy_model(const op_dataset* dataset, const op_layout* layout,
                        const op_radio* radio, double tx_x_m, double tx_y_m,
                        int metric, int fit_exponent, double fixed_exponent,
                        op_fit_result** out) {
  return guarded([&] {
    require(dataset != nullptr && layout != nullptr && out != nullptr,
            "dataset, layout and out required");
    Metric m = metric == OP_METRIC_DEFAULT
                   ? Metric::Euclid
                   : to_metric(metric, ModelId::Proposed);
    *out = new op_fit_result{fit_canopy_model(
        dataset->impl.dataset, layout->impl, to_radio(radio),
        Point2D{tx_x_m, tx_y_m}, m, fit_exponent != 0, fixed_exponent)};
  });
}

void op_fit_result_free(op_fit_result* fit) { delete fit; }

int op_fit_result_params(const op_fit_result* fit, double* pl0_db,
                         double* exponent, double* canopy_loss_db) {
  return guarded([&] {
    require(fit != nullptr, "fit must not be null");
    if (pl0_db) *pl0_db = fit->impl.params.pl0_db;
    if (exponent) *exponent = fit->impl.params.exponent;
    if (canopy_loss_db) *canopy_loss_db = fit->impl.params.canopy_loss_db;
  });
}

int op_fit_result_stats(const op_fit_result* fit, double* mse_db2,
                        double* rmse_db, size_t* n_points) {
  return guarded([&] {
    require(fit != nullptr, "fit must not be null");
    if (mse_db2) *mse_db2 = fit->impl.mse_db2;
    if (rmse_db) *rmse_db = fit->impl.rmse_db;
    if (n_points) *n_points = fit->impl.n_points;
  });
}

int op_fit_result_residual(const op_fit_result* fit, size_t index,
                           double* residual_db) {
  return guarded([&] {
    require(fit != nullptr && residual_db != nullptr,
            "fit and residual_db required");
    if (index >= fit->impl.residuals_db.size())
      fail(Errc::out_of_range, "residual index out of range");
    *residual_db = fit->impl.residuals_db[index];
  });
}

/* ---- simulation ---- */

int op_model_heatmap(const op_layout* layout, int model_id,
                     const op_model_params* params, const op_radio* radio,
                     double tx_x_m, double tx_y_m, const op_grid_spec* spec,
                     const op_sim_options* options, op_heatmap** out) {
  return guarded([&] {
    require(layout != nullptr && spec != nullptr && out != nullptr,
            "layout, spec and out required");
    ModelId id = to_model(model_id);
    GridSpec g;
    g.nx = spec->nx;
    g.ny = spec->ny;
    g.cell_size_m = spec->cell_size_m;
    g.origin = Point2D{spec->origin_x_m, spec->origin_y_m};
    *out = new op_heatmap{model_heatmap(layout->impl, id, to_params(params),
                                        to_radio(radio),
                                        Point2D{tx_x_m, tx_y_m}, g,
                                        to_sim(options, id))};
  });
}

void op_heatmap_free(op_heatmap* heatmap) { delete heatmap; }

int op_heatmap_spec(const op_heatmap* heatmap, op_grid_spec* spec,
                    int* value_kind) {
  return guarded([&] {
    require(heatmap != nullptr, "heatmap must not be null");
    if (spec) {
      spec->nx = heatmap->impl.nx;
      spec->ny = heatmap->impl.ny;
      spec->cell_size_m = heatmap->impl.cell_size_m;
      spec->origin_x_m = heatmap->impl.origin.x_m;
      spec->origin_y_m = heatmap->impl.origin.y_m;
    }
    if (value_kind) {
      switch (heatmap->impl.value_kind) {
        case ValueKind::RssiDbm: *value_kind = OP_VALUE_RSSI_DBM; break;
        case ValueKind::ErrorDb: *value_kind = OP_VALUE_ERROR_DB; break;
        case ValueKind::PlDb: *value_kind = OP_VALUE_PL_DB; break;
      }
    }
  });
}

int op_heatmap_value(const op_heatmap* heatmap, int ix, int iy, double* value,
                     int* valid) {
  return guarded([&] {
    require(heatmap != nullptr, "heatmap must not be null");
    if (ix < 0 || ix >= heatmap->impl.nx || iy < 0 || iy >= heatmap->impl.ny)
      fail(Errc::out_of_range, "cell index out of range");
    if (value) *value = heatmap->impl.value(ix, iy);
    if (valid) *valid = heatmap->impl.valid(ix, iy) ? 1 : 0;
  });
}

int op_heatmap_write_csv(const op_heatmap* heatmap, const char* path) {
  return guarded([&] {
    require(heatmap != nullptr, "heatmap must not be null");
    write_file_atomic(path,
                      [&](std::ostream& os) { write_heatmap_csv(heatmap->impl, os); });
  });
}

int op_heatmap_write_pgm(const op_heatmap* heatmap, const char* path) {
  return guarded([&] {
    require(heatmap != nullptr, "heatmap must not be null");
    write_file_atomic(path,
                      [&](std::ostream& os) { write_heatmap_pgm(heatmap->impl, os); });
  });
}

int op_error_heatmap(const op_dataset* dataset, const op_heatmap* modeled,
                     op_heatmap** out, double* mse_db2, double* rmse_db,
                     size_t* n_matched) {
  return guarded([&] {
    require(dataset != nullptr && modeled != nullptr && out != nullptr,
            "dataset, modeled and out required");
    ErrorMapResult r = error_heatmap(dataset->impl.dataset, modeled->impl);
    *out = new op_heatmap{std::move(r.grid)};
    if (mse_db2) *mse_db2 = r.mse_db2;
    if (rmse_db) *rmse_db = r.rmse_db;
    if (n_matched) *n_matched = r.n_matched;
  });
}

int op_zigzag_path(const op_layout* layout, int waypoints_per_corridor,
                   op_trajectory** out) {
  return guarded([&] {
    require(layout != nullptr && out != nullptr, "layout and out required");
    *out = new op_trajectory{zigzag_path(layout->impl, waypoints_per_corridor)};
  });
}

void op_trajectory_free(op_trajectory* trajectory) { delete trajectory; }

int op_trajectory_waypoint_count(const op_trajectory* trajectory,
                                 size_t* out) {
  return guarded([&] {
    require(trajectory != nullptr && out != nullptr,
            "trajectory and out required");
    *out = trajectory->impl.waypoints.size();
  });
}

int op_trajectory_waypoint(const op_trajectory* trajectory, size_t index,
                           double* x_m, double* y_m) {
  return guarded([&] {
    require(trajectory != nullptr, "trajectory must not be null");
    if (index >= trajectory->impl.waypoints.size())
      fail(Errc::out_of_range, "waypoint index out of range");
    if (x_m) *x_m = trajectory->impl.waypoints[index].x_m;
    if (y_m) *y_m = trajectory->impl.waypoints[index].y_m;
  });
}

int op_trajectory_rssi_csv(const op_trajectory* trajectory, double node_x_m,
                           double node_y_m, const op_layout* layout,
                           int model_id, const op_model_params* params,
                           const op_radio* radio, double shadow_sigma_db,
                           const op_sim_options* options,
                           const char* csv_path) {
  return guarded([&] {
    require(trajectory != nullptr && layout != nullptr,
            "trajectory and layout required");
    ModelId id = to_model(model_id);
    SimOptions sim = to_sim(options, id);
    std::vector<TrajectorySample> samples = trajectory_rssi(
        trajectory->impl, Point2D{node_x_m, node_y_m}, layout->impl, id,
        to_params(params), to_radio(radio), shadow_sigma_db, sim.seed, sim);
    write_file_atomic(csv_path, [&](std::ostream& os) {
      write_trajectory_csv(samples, os);
    });
  });
}

int op_shadowing_sample(double sigma_db, uint64_t seed, uint64_t index,
                        double* out_db) {
  return guarded([&] {
    require(out_db != nullptr, "out_db must not be null");
    *out_db = shadowing_sample(sigma_db, seed, index);
  });
}

int op_synthetic_log_write(const op_layout* layout, int model_id,
                           const op_model_params* params,
                           const op_radio* radio, double tx_x_m,
                           double tx_y_m, int waypoints_x, int waypoints_y,
                           double area_origin_x_m, double area_origin_y_m,
                           double area_width_m, double area_height_m,
                           int packets_per_waypoint, double noise_sigma_db,
                           uint64_t seed, const op_sim_options* options,
                           const char* log_path, const char* positions_path) {
  return guarded([&] {
    require(layout != nullptr, "layout must not be null");
    ModelId id = to_model(model_id);
    SyntheticSpec spec;
    spec.waypoints_x = waypoints_x;
    spec.waypoints_y = waypoints_y;
    spec.area_origin = Point2D{area_origin_x_m, area_origin_y_m};
    spec.area_width_m = area_width_m;
    spec.area_height_m = area_height_m;
    spec.packets_per_waypoint = packets_per_waypoint;
    spec.noise_sigma_db = noise_sigma_db;
    spec.seed = seed;
    // Buffer both outputs so a failure mid-generation leaves no file.
    std::ostringstream log_os, pos_os;
    write_synthetic_log(layout->impl, id, to_params(params), to_radio(radio),
                        Point2D{tx_x_m, tx_y_m}, spec, to_sim(options, id),
                        log_os, pos_os);
    write_file_atomic(log_path,
                      [&](std::ostream& os) { os << log_os.str(); });
    write_file_atomic(positions_path,
                      [&](std::ostream& os) { os << pos_os.str(); });
  });
}

} /* extern "C" */
