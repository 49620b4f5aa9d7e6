// Command-line front end for the orchardprop shared library. Everything
// goes through the public C API; run settings come from an optional
// key=value config file plus flag overrides (flags win).

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "orchardprop/orchardprop.h"

namespace {

constexpr const char* kConfigEnvVar = "ORCHARDPROP_CONFIG";

// Thrown on any failed library call or CLI-level check; main() turns it
// into the one-line machine-parsable error and exit status 1.
struct Fatal {
  int status;
  std::string message;
};

[[noreturn]] void die(int status, const std::string& message) {
  throw Fatal{status, message};
}

const char* code_name(int status) {
  switch (status) {
    case OP_EINVAL: return "EINVAL";
    case OP_EDOMAIN: return "EDOMAIN";
    case OP_EPARSE: return "EPARSE";
    case OP_EIO: return "EIO";
    case OP_ENODATA: return "ENODATA";
    case OP_ESINGULAR: return "ESINGULAR";
    case OP_ENOENT: return "ENOENT";
    case OP_ERANGE: return "ERANGE";
    case OP_EINTERNAL: return "EINTERNAL";
  }
  return "EINTERNAL";
}

void check(int status) {
  if (status != OP_OK) die(status, op_last_error_message());
}

// Files already produced by the current run; removed if a later step
// fails so a failed run never leaves a partial output set.
class OutputTracker {
 public:
  void add(const std::string& path) { written_.push_back(path); }
  void discard_all() {
    for (const std::string& p : written_) std::remove(p.c_str());
    written_.clear();
  }

 private:
  std::vector<std::string> written_;
};

OutputTracker g_outputs;

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// ---- run settings ----

struct Settings {
  // orchard layout
  int rows = 6;
  int cols = 7;
  double row_spacing_m = 7.12;
  double col_spacing_m = 7.12;
  double canopy_radius_m = 4.16;
  double origin_x_m = 0.0;
  double origin_y_m = 0.0;
  // radio (EU-868 profile)
  double freq_mhz = 868.0;
  double tx_power_dbm = 21.0;
  std::optional<double> sensitivity_dbm{};
  // model selection and parameters
  std::string model = "proposed";
  std::optional<double> pl0_db{};  // default: reference loss at 1 m
  double exponent = 2.0;
  double canopy_loss_db = 0.0;
  std::vector<double> wall_losses_db{};
  double flog_alpha = 2.0;
  double flog_beta = 2.0;
  double flog_gamma = 2.0;
  double shadow_sigma_db = 0.0;
  // FLog Fresnel-zone sampling
  double flog_tx_height_m = 1.2;
  double flog_rx_height_m = 1.2;
  long flog_ffz_samples = 4096;
  double flog_canopy_center_height_m = 2.5;
  // transmitter node position
  double node_x_m = 0.0;
  double node_y_m = 0.0;
  // heatmap grid
  int grid_nx = 43;
  int grid_ny = 38;
  double grid_cell_size_m = 1.0;
  double grid_origin_x_m = 0.0;
  double grid_origin_y_m = 0.0;
  // run controls
  std::uint64_t seed = 0;
  std::string metric = "default";
  std::string policy = "clamp";
  int threads = 1;
  int min_samples = 30;
  int waypoints_per_corridor = 8;
  // synthetic generator
  int syn_waypoints_x = 5;
  int syn_waypoints_y = 5;
  double syn_area_origin_x_m = 0.0;
  double syn_area_origin_y_m = 0.0;
  double syn_area_width_m = 43.0;
  double syn_area_height_m = 38.0;
  int syn_packets = 30;
  double syn_noise_sigma_db = 0.0;
  // default io paths
  std::string path_log;
  std::string path_positions;
  std::string path_out;
  std::string path_out_dir;
  std::string path_out_log;
  std::string path_out_positions;
};

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  std::istringstream ss(value);
  T out{};
  ss >> out;
  if (ss.fail() || !ss.eof())
    die(OP_EPARSE, "config key '" + key + "': bad value '" + value + "'");
  return out;
}

std::vector<double> parse_double_list(const std::string& key,
                                      const std::string& value) {
  std::vector<double> out;
  if (trim(value).empty()) return out;
  std::istringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ','))
    out.push_back(parse_number<double>(key, trim(item)));
  return out;
}

void apply_config_entry(Settings& s, const std::string& key,
                        const std::string& value) {
  if (key == "layout.rows") s.rows = parse_number<int>(key, value);
  else if (key == "layout.cols") s.cols = parse_number<int>(key, value);
  else if (key == "layout.row_spacing_m") s.row_spacing_m = parse_number<double>(key, value);
  else if (key == "layout.col_spacing_m") s.col_spacing_m = parse_number<double>(key, value);
  else if (key == "layout.canopy_radius_m") s.canopy_radius_m = parse_number<double>(key, value);
  else if (key == "layout.origin_x_m") s.origin_x_m = parse_number<double>(key, value);
  else if (key == "layout.origin_y_m") s.origin_y_m = parse_number<double>(key, value);
  else if (key == "radio.freq_mhz") s.freq_mhz = parse_number<double>(key, value);
  else if (key == "radio.tx_power_dbm") s.tx_power_dbm = parse_number<double>(key, value);
  else if (key == "radio.sensitivity_dbm") s.sensitivity_dbm = parse_number<double>(key, value);
  else if (key == "model.id") s.model = value;
  else if (key == "model.pl0_db") s.pl0_db = parse_number<double>(key, value);
  else if (key == "model.exponent") s.exponent = parse_number<double>(key, value);
  else if (key == "model.canopy_loss_db") s.canopy_loss_db = parse_number<double>(key, value);
  else if (key == "model.wall_losses_db") s.wall_losses_db = parse_double_list(key, value);
  else if (key == "model.flog_alpha") s.flog_alpha = parse_number<double>(key, value);
  else if (key == "model.flog_beta") s.flog_beta = parse_number<double>(key, value);
  else if (key == "model.flog_gamma") s.flog_gamma = parse_number<double>(key, value);
  else if (key == "model.shadow_sigma_db") s.shadow_sigma_db = parse_number<double>(key, value);
  else if (key == "flog.tx_height_m") s.flog_tx_height_m = parse_number<double>(key, value);
  else if (key == "flog.rx_height_m") s.flog_rx_height_m = parse_number<double>(key, value);
  else if (key == "flog.ffz_samples") s.flog_ffz_samples = parse_number<long>(key, value);
  else if (key == "flog.canopy_center_height_m") s.flog_canopy_center_height_m = parse_number<double>(key, value);
  else if (key == "node.x_m") s.node_x_m = parse_number<double>(key, value);
  else if (key == "node.y_m") s.node_y_m = parse_number<double>(key, value);
  else if (key == "grid.nx") s.grid_nx = parse_number<int>(key, value);
  else if (key == "grid.ny") s.grid_ny = parse_number<int>(key, value);
  else if (key == "grid.cell_size_m") s.grid_cell_size_m = parse_number<double>(key, value);
  else if (key == "grid.origin_x_m") s.grid_origin_x_m = parse_number<double>(key, value);
  else if (key == "grid.origin_y_m") s.grid_origin_y_m = parse_number<double>(key, value);
  else if (key == "seed") s.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "metric") s.metric = value;
  else if (key == "policy") s.policy = value;
  else if (key == "threads") s.threads = parse_number<int>(key, value);
  else if (key == "dataset.min_samples") s.min_samples = parse_number<int>(key, value);
  else if (key == "trajectory.waypoints_per_corridor") s.waypoints_per_corridor = parse_number<int>(key, value);
  else if (key == "synthetic.waypoints_x") s.syn_waypoints_x = parse_number<int>(key, value);
  else if (key == "synthetic.waypoints_y") s.syn_waypoints_y = parse_number<int>(key, value);
  else if (key == "synthetic.area_origin_x_m") s.syn_area_origin_x_m = parse_number<double>(key, value);
  else if (key == "synthetic.area_origin_y_m") s.syn_area_origin_y_m = parse_number<double>(key, value);
  else if (key == "synthetic.area_width_m") s.syn_area_width_m = parse_number<double>(key, value);
  else if (key == "synthetic.area_height_m") s.syn_area_height_m = parse_number<double>(key, value);
  else if (key == "synthetic.packets_per_waypoint") s.syn_packets = parse_number<int>(key, value);
  else if (key == "synthetic.noise_sigma_db") s.syn_noise_sigma_db = parse_number<double>(key, value);
  else if (key == "paths.log") s.path_log = value;
  else if (key == "paths.positions") s.path_positions = value;
  else if (key == "paths.out") s.path_out = value;
  else if (key == "paths.out_dir") s.path_out_dir = value;
  else if (key == "paths.out_log") s.path_out_log = value;
  else if (key == "paths.out_positions") s.path_out_positions = value;
  else die(OP_EPARSE, "unknown config key '" + key + "'");
}

void load_config_file(Settings& s, const std::string& path) {
  std::ifstream in(path);
  if (!in) die(OP_EIO, "cannot open config file '" + path + "'");
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      die(OP_EPARSE, "config line " + std::to_string(line_no) +
                         ": expected key = value");
    apply_config_entry(s, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
}

// Flag overrides shared by the subcommands; applied after the config file.
struct Common {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> metric;
  std::optional<std::string> model;
  std::optional<std::string> policy;
  std::optional<int> threads;
};

void add_common_flags(CLI::App* cmd, Common& c) {
  cmd->add_option("-c,--config", c.config,
                  "config file (default: $" + std::string(kConfigEnvVar) + ")");
  cmd->add_option("--seed", c.seed, "random stream seed");
  cmd->add_option("--metric", c.metric,
                  "distance metric: euclid, manhattan or default");
  cmd->add_option("--model", c.model,
                  "model: fspl, itu, multiwall, pmw, proposed, flog");
  cmd->add_option("--policy", c.policy,
                  "short-range policy: clamp or strict");
  cmd->add_option("--threads", c.threads, "worker threads for grid evaluation");
}

Settings make_settings(const Common& c) {
  Settings s;
  std::string config_path;
  if (c.config) {
    config_path = *c.config;
  } else if (const char* env = std::getenv(kConfigEnvVar)) {
    config_path = env;
  }
  if (!config_path.empty()) load_config_file(s, config_path);
  if (c.seed) s.seed = *c.seed;
  if (c.metric) s.metric = *c.metric;
  if (c.model) s.model = *c.model;
  if (c.policy) s.policy = *c.policy;
  if (c.threads) s.threads = *c.threads;
  return s;
}

int metric_code(const Settings& s) {
  if (s.metric == "default") return OP_METRIC_DEFAULT;
  if (s.metric == "euclid") return OP_METRIC_EUCLID;
  if (s.metric == "manhattan") return OP_METRIC_MANHATTAN;
  die(OP_EINVAL, "unknown metric '" + s.metric + "'");
}

int policy_code(const Settings& s) {
  if (s.policy == "clamp") return OP_SHORT_RANGE_CLAMP;
  if (s.policy == "strict") return OP_SHORT_RANGE_STRICT;
  die(OP_EINVAL, "unknown policy '" + s.policy + "'");
}

int model_code(const Settings& s) {
  int id = 0;
  check(op_model_id_from_name(s.model.c_str(), &id));
  return id;
}

op_radio make_radio(const Settings& s) {
  op_radio r;
  op_radio_init(&r);
  r.freq_mhz = s.freq_mhz;
  r.tx_power_dbm = s.tx_power_dbm;
  if (s.sensitivity_dbm) {
    r.sensitivity_dbm = *s.sensitivity_dbm;
    r.has_sensitivity = 1;
  }
  return r;
}

// The wall-loss storage must outlive the returned struct; the caller keeps
// the Settings alive for the whole run.
op_model_params make_params(const Settings& s) {
  op_model_params p;
  op_model_params_init(&p, s.freq_mhz);
  if (s.pl0_db) p.pl0_db = *s.pl0_db;
  p.exponent = s.exponent;
  p.canopy_loss_db = s.canopy_loss_db;
  if (!s.wall_losses_db.empty()) {
    p.wall_losses_db = s.wall_losses_db.data();
    p.wall_loss_count = s.wall_losses_db.size();
  }
  p.flog_alpha = s.flog_alpha;
  p.flog_beta = s.flog_beta;
  p.flog_gamma = s.flog_gamma;
  p.shadow_sigma_db = s.shadow_sigma_db;
  return p;
}

op_sim_options make_sim_options(const Settings& s) {
  op_sim_options o;
  op_sim_options_init(&o);
  o.metric = metric_code(s);
  o.short_range_policy = policy_code(s);
  o.seed = s.seed;
  o.threads = s.threads;
  o.flog.tx_height_m = s.flog_tx_height_m;
  o.flog.rx_height_m = s.flog_rx_height_m;
  o.flog.ffz_samples = s.flog_ffz_samples;
  o.flog.canopy_center_height_m = s.flog_canopy_center_height_m;
  return o;
}

op_grid_spec make_grid(const Settings& s) {
  op_grid_spec g;
  op_grid_spec_init(&g);
  g.nx = s.grid_nx;
  g.ny = s.grid_ny;
  g.cell_size_m = s.grid_cell_size_m;
  g.origin_x_m = s.grid_origin_x_m;
  g.origin_y_m = s.grid_origin_y_m;
  return g;
}

struct LayoutDeleter {
  void operator()(op_layout* p) const { op_layout_free(p); }
};
using LayoutPtr = std::unique_ptr<op_layout, LayoutDeleter>;

LayoutPtr make_layout(const Settings& s) {
  op_layout* raw = nullptr;
  check(op_layout_create(s.rows, s.cols, s.row_spacing_m, s.col_spacing_m,
                         s.canopy_radius_m, s.origin_x_m, s.origin_y_m, &raw));
  return LayoutPtr(raw);
}

struct HeatmapDeleter {
  void operator()(op_heatmap* p) const { op_heatmap_free(p); }
};
using HeatmapPtr = std::unique_ptr<op_heatmap, HeatmapDeleter>;

struct PacketLogDeleter {
  void operator()(op_packet_log* p) const { op_packet_log_free(p); }
};
using PacketLogPtr = std::unique_ptr<op_packet_log, PacketLogDeleter>;

struct PositionsDeleter {
  void operator()(op_positions* p) const { op_positions_free(p); }
};
using PositionsPtr = std::unique_ptr<op_positions, PositionsDeleter>;

struct DatasetDeleter {
  void operator()(op_dataset* p) const { op_dataset_free(p); }
};
using DatasetPtr = std::unique_ptr<op_dataset, DatasetDeleter>;

struct FitDeleter {
  void operator()(op_fit_result* p) const { op_fit_result_free(p); }
};
using FitPtr = std::unique_ptr<op_fit_result, FitDeleter>;

struct TrajectoryDeleter {
  void operator()(op_trajectory* p) const { op_trajectory_free(p); }
};
using TrajectoryPtr = std::unique_ptr<op_trajectory, TrajectoryDeleter>;

DatasetPtr load_dataset(const Settings& s, const std::string& log_path,
                        const std::string& positions_path,
                        std::size_t* n_diagnostics) {
  if (log_path.empty()) die(OP_EINVAL, "no packet log given (--log or paths.log)");
  if (positions_path.empty())
    die(OP_EINVAL, "no positions file given (--positions or paths.positions)");

  op_packet_log* log_raw = nullptr;
  check(op_packet_log_parse_file(log_path.c_str(), &log_raw));
  PacketLogPtr log(log_raw);
  op_positions* pos_raw = nullptr;
  check(op_positions_parse_file(positions_path.c_str(), &pos_raw));
  PositionsPtr positions(pos_raw);

  if (n_diagnostics)
    check(op_packet_log_diagnostic_count(log.get(), n_diagnostics));

  op_dataset* ds_raw = nullptr;
  check(op_dataset_aggregate(log.get(), positions.get(), s.min_samples, &ds_raw));
  return DatasetPtr(ds_raw);
}

// ---- subcommands ----

struct PredictArgs {
  Common common;
  std::vector<double> tx;
  std::vector<double> rx;
};

void run_predict(const PredictArgs& a) {
  Settings s = make_settings(a.common);
  LayoutPtr layout = make_layout(s);
  double tx_x = a.tx.empty() ? s.node_x_m : a.tx[0];
  double tx_y = a.tx.empty() ? s.node_y_m : a.tx[1];

  op_link_geometry geom;
  check(op_link_geometry_compute(layout.get(), tx_x, tx_y, a.rx[0], a.rx[1],
                                 &geom));
  op_model_params params = make_params(s);
  op_radio radio = make_radio(s);
  op_sim_options sim = make_sim_options(s);
  double pl = 0.0, rssi = 0.0;
  check(op_model_eval(layout.get(), model_code(s), &params, &radio, tx_x,
                      tx_y, a.rx[0], a.rx[1], &sim, &pl, &rssi));

  std::cout << "model: " << s.model << '\n'
            << "tx: (" << fixed2(tx_x) << ", " << fixed2(tx_y) << ") m\n"
            << "rx: (" << fixed2(a.rx[0]) << ", " << fixed2(a.rx[1]) << ") m\n"
            << "d_euclid_m: " << fixed2(geom.d_euclid_m) << '\n'
            << "d_manhattan_m: " << fixed2(geom.d_manhattan_m) << '\n'
            << "row_offset: " << geom.row_offset << '\n'
            << "col_offset: " << geom.col_offset << '\n'
            << "n_canopies: " << geom.n_canopies << '\n'
            << "path_loss_db: " << fixed2(pl) << '\n'
            << "rssi_dbm: " << fixed2(rssi) << '\n';
}

struct HeatmapArgs {
  Common common;
  std::vector<double> tx;
  std::string out;
};

void run_heatmap(const HeatmapArgs& a) {
  Settings s = make_settings(a.common);
  std::string out = a.out.empty() ? s.path_out : a.out;
  if (out.empty()) die(OP_EINVAL, "no output prefix given (--out or paths.out)");

  LayoutPtr layout = make_layout(s);
  double tx_x = a.tx.empty() ? s.node_x_m : a.tx[0];
  double tx_y = a.tx.empty() ? s.node_y_m : a.tx[1];
  op_model_params params = make_params(s);
  op_radio radio = make_radio(s);
  op_sim_options sim = make_sim_options(s);
  op_grid_spec grid = make_grid(s);

  op_heatmap* raw = nullptr;
  check(op_model_heatmap(layout.get(), model_code(s), &params, &radio, tx_x,
                         tx_y, &grid, &sim, &raw));
  HeatmapPtr heatmap(raw);

  double vmin = 0.0, vmax = 0.0;
  bool any = false;
  for (int iy = 0; iy < grid.ny; ++iy)
    for (int ix = 0; ix < grid.nx; ++ix) {
      double v = 0.0;
      int valid = 0;
      check(op_heatmap_value(heatmap.get(), ix, iy, &v, &valid));
      if (!valid) continue;
      if (!any) {
        vmin = vmax = v;
        any = true;
      } else {
        vmin = std::min(vmin, v);
        vmax = std::max(vmax, v);
      }
    }

  std::string csv = out + ".csv";
  std::string pgm = out + ".pgm";
  check(op_heatmap_write_csv(heatmap.get(), csv.c_str()));
  g_outputs.add(csv);
  check(op_heatmap_write_pgm(heatmap.get(), pgm.c_str()));
  g_outputs.add(pgm);

  std::cout << "model: " << s.model << '\n'
            << "grid: " << grid.nx << 'x' << grid.ny << " cells of "
            << fixed2(grid.cell_size_m) << " m\n"
            << "rssi_dbm_range: [" << fixed2(vmin) << ", " << fixed2(vmax)
            << "]\n"
            << "wrote: " << csv << '\n'
            << "wrote: " << pgm << '\n';
}

struct EvaluateArgs {
  Common common;
  std::string log;
  std::string positions;
  std::string out_dir;
  std::string models = "proposed,multiwall,itu";
  std::vector<double> tx;
  std::optional<int> min_samples;
};

void run_evaluate(const EvaluateArgs& a) {
  Settings s = make_settings(a.common);
  if (a.min_samples) s.min_samples = *a.min_samples;
  std::string out_dir = a.out_dir.empty() ? s.path_out_dir : a.out_dir;
  if (out_dir.empty()) die(OP_EINVAL, "no output directory given (--out-dir or paths.out_dir)");
  std::error_code dir_ec;
  std::filesystem::create_directories(out_dir, dir_ec);
  if (dir_ec) die(OP_EIO, "cannot create output directory '" + out_dir + "'");

  std::size_t n_diag = 0;
  DatasetPtr dataset = load_dataset(
      s, a.log.empty() ? s.path_log : a.log,
      a.positions.empty() ? s.path_positions : a.positions, &n_diag);

  std::size_t n_wp = 0, n_excluded = 0;
  check(op_dataset_waypoint_count(dataset.get(), &n_wp));
  check(op_dataset_excluded_count(dataset.get(), &n_excluded));
  std::cout << "waypoints: " << n_wp << " (excluded: " << n_excluded
            << ", parse diagnostics: " << n_diag << ")\n";

  LayoutPtr layout = make_layout(s);
  op_radio radio = make_radio(s);
  op_grid_spec grid = make_grid(s);

  std::vector<std::string> model_names;
  {
    std::istringstream ss(a.models);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (!item.empty()) model_names.push_back(item);
    }
  }
  if (model_names.empty()) die(OP_EINVAL, "empty model list");

  std::ostringstream report;
  report << "model,mse_db2,rmse_db,n_waypoints\n";
  std::cout << "model,mse_db2,rmse_db\n";

  for (const std::string& name : model_names) {
    Settings ms = s;
    ms.model = name;
    op_model_params params = make_params(ms);
    op_sim_options sim = make_sim_options(ms);

    op_heatmap* model_raw = nullptr;
    check(op_model_heatmap(layout.get(), model_code(ms), &params, &radio,
                           a.tx.empty() ? s.node_x_m : a.tx[0],
                           a.tx.empty() ? s.node_y_m : a.tx[1], &grid, &sim,
                           &model_raw));
    HeatmapPtr modeled(model_raw);

    op_heatmap* err_raw = nullptr;
    double mse = 0.0, rmse = 0.0;
    std::size_t matched = 0;
    check(op_error_heatmap(dataset.get(), modeled.get(), &err_raw, &mse,
                           &rmse, &matched));
    HeatmapPtr errors(err_raw);

    std::string err_csv = out_dir + "/" + name + "_error.csv";
    std::string err_pgm = out_dir + "/" + name + "_error.pgm";
    check(op_heatmap_write_csv(errors.get(), err_csv.c_str()));
    g_outputs.add(err_csv);
    check(op_heatmap_write_pgm(errors.get(), err_pgm.c_str()));
    g_outputs.add(err_pgm);

    report << name << ',' << full(mse) << ',' << full(rmse) << ',' << matched
           << '\n';
    std::cout << name << ',' << fixed2(mse) << ',' << fixed2(rmse) << '\n';
  }

  std::string report_path = out_dir + "/report.csv";
  {
    std::string tmp = report_path + ".tmp";
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) die(OP_EIO, "cannot open '" + tmp + "' for writing");
    os << report.str();
    os.flush();
    if (!os) die(OP_EIO, "write to '" + tmp + "' failed");
    os.close();
    if (std::rename(tmp.c_str(), report_path.c_str()) != 0)
      die(OP_EIO, "cannot rename '" + tmp + "'");
    g_outputs.add(report_path);
  }

  for (const std::string& name : model_names)
    std::cout << "wrote: " << out_dir << "/" << name << "_error.csv\n"
              << "wrote: " << out_dir << "/" << name << "_error.pgm\n";
  std::cout << "wrote: " << report_path << '\n';
}

struct CalibrateArgs {
  Common common;
  std::string log;
  std::string positions;
  std::string out;
  std::vector<double> tx;
  std::optional<double> fixed_exponent;
  std::optional<int> min_samples;
};

void run_calibrate(const CalibrateArgs& a) {
  Settings s = make_settings(a.common);
  if (a.min_samples) s.min_samples = *a.min_samples;

  std::size_t n_diag = 0;
  DatasetPtr dataset = load_dataset(
      s, a.log.empty() ? s.path_log : a.log,
      a.positions.empty() ? s.path_positions : a.positions, &n_diag);

  std::size_t n_wp = 0, n_excluded = 0;
  check(op_dataset_waypoint_count(dataset.get(), &n_wp));
  check(op_dataset_excluded_count(dataset.get(), &n_excluded));

  LayoutPtr layout = make_layout(s);
  op_radio radio = make_radio(s);

  // Calibration fits the canopy family; the metric default is Euclidean
  // unless overridden (use --metric manhattan for the direction-dependent
  // variant).
  int metric = metric_code(s);
  double tx_x = a.tx.empty() ? s.node_x_m : a.tx[0];
  double tx_y = a.tx.empty() ? s.node_y_m : a.tx[1];

  op_fit_result* fit_raw = nullptr;
  check(op_fit_canopy_model(dataset.get(), layout.get(), &radio, tx_x, tx_y,
                            metric, a.fixed_exponent ? 0 : 1,
                            a.fixed_exponent.value_or(2.0), &fit_raw));
  FitPtr fit(fit_raw);

  double pl0 = 0.0, exponent = 0.0, canopy = 0.0;
  double mse = 0.0, rmse = 0.0;
  std::size_t n_points = 0;
  check(op_fit_result_params(fit.get(), &pl0, &exponent, &canopy));
  check(op_fit_result_stats(fit.get(), &mse, &rmse, &n_points));

  std::cout << "waypoints: " << n_wp << " (excluded: " << n_excluded
            << ", parse diagnostics: " << n_diag << ")\n"
            << "pl0_db: " << fixed2(pl0) << '\n'
            << "exponent: " << fixed2(exponent) << '\n'
            << "canopy_loss_db: " << fixed2(canopy) << '\n'
            << "mse_db2: " << fixed2(mse) << '\n'
            << "rmse_db: " << fixed2(rmse) << '\n'
            << "n_points: " << n_points << '\n';

  std::string out = a.out.empty() ? s.path_out : a.out;
  if (!out.empty()) {
    std::string tmp = out + ".tmp";
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) die(OP_EIO, "cannot open '" + tmp + "' for writing");
    os << "# fitted parameters (config fragment)\n"
       << "model.pl0_db = " << full(pl0) << '\n'
       << "model.exponent = " << full(exponent) << '\n'
       << "model.canopy_loss_db = " << full(canopy) << '\n'
       << "# fit statistics\n"
       << "# fit.mse_db2 = " << full(mse) << '\n'
       << "# fit.rmse_db = " << full(rmse) << '\n'
       << "# fit.n_points = " << n_points << '\n';
    os.flush();
    if (!os) die(OP_EIO, "write to '" + tmp + "' failed");
    os.close();
    if (std::rename(tmp.c_str(), out.c_str()) != 0)
      die(OP_EIO, "cannot rename '" + tmp + "'");
    g_outputs.add(out);
    std::cout << "wrote: " << out << '\n';
  }
}

struct TrajectoryArgs {
  Common common;
  std::string out;
  std::vector<double> node;
  std::optional<int> waypoints_per_corridor;
  std::optional<double> shadow_sigma;
};

void run_trajectory(const TrajectoryArgs& a) {
  Settings s = make_settings(a.common);
  std::string out = a.out.empty() ? s.path_out : a.out;
  if (out.empty()) die(OP_EINVAL, "no output path given (--out or paths.out)");
  int per_corridor =
      a.waypoints_per_corridor.value_or(s.waypoints_per_corridor);
  double sigma = a.shadow_sigma.value_or(s.shadow_sigma_db);

  LayoutPtr layout = make_layout(s);
  op_trajectory* traj_raw = nullptr;
  check(op_zigzag_path(layout.get(), per_corridor, &traj_raw));
  TrajectoryPtr traj(traj_raw);

  std::size_t n_wp = 0;
  check(op_trajectory_waypoint_count(traj.get(), &n_wp));

  op_model_params params = make_params(s);
  op_radio radio = make_radio(s);
  op_sim_options sim = make_sim_options(s);
  double node_x = a.node.empty() ? s.node_x_m : a.node[0];
  double node_y = a.node.empty() ? s.node_y_m : a.node[1];

  check(op_trajectory_rssi_csv(traj.get(), node_x, node_y, layout.get(),
                               model_code(s), &params, &radio, sigma, &sim,
                               out.c_str()));
  g_outputs.add(out);

  std::cout << "model: " << s.model << '\n'
            << "waypoints: " << n_wp << '\n'
            << "shadow_sigma_db: " << fixed2(sigma) << '\n'
            << "wrote: " << out << '\n';
}

struct GenSyntheticArgs {
  Common common;
  std::string out_log;
  std::string out_positions;
  std::vector<double> tx;
  std::optional<int> waypoints_x;
  std::optional<int> waypoints_y;
  std::optional<int> packets;
  std::optional<double> noise_sigma;
};

void run_gen_synthetic(const GenSyntheticArgs& a) {
  Settings s = make_settings(a.common);
  std::string out_log = a.out_log.empty() ? s.path_out_log : a.out_log;
  std::string out_positions =
      a.out_positions.empty() ? s.path_out_positions : a.out_positions;
  if (out_log.empty())
    die(OP_EINVAL, "no log output path given (--out-log or paths.out_log)");
  if (out_positions.empty())
    die(OP_EINVAL,
        "no positions output path given (--out-positions or paths.out_positions)");

  int wx = a.waypoints_x.value_or(s.syn_waypoints_x);
  int wy = a.waypoints_y.value_or(s.syn_waypoints_y);
  int packets = a.packets.value_or(s.syn_packets);
  double sigma = a.noise_sigma.value_or(s.syn_noise_sigma_db);

  LayoutPtr layout = make_layout(s);
  op_model_params params = make_params(s);
  op_radio radio = make_radio(s);
  op_sim_options sim = make_sim_options(s);

  check(op_synthetic_log_write(
      layout.get(), model_code(s), &params, &radio,
      a.tx.empty() ? s.node_x_m : a.tx[0], a.tx.empty() ? s.node_y_m : a.tx[1],
      wx, wy, s.syn_area_origin_x_m, s.syn_area_origin_y_m, s.syn_area_width_m,
      s.syn_area_height_m, packets, sigma, s.seed, &sim, out_log.c_str(),
      out_positions.c_str()));
  g_outputs.add(out_log);
  g_outputs.add(out_positions);

  std::cout << "model: " << s.model << '\n'
            << "waypoints: " << (wx * wy) << '\n'
            << "packets: " << (wx * wy * packets) << '\n'
            << "noise_sigma_db: " << fixed2(sigma) << '\n'
            << "wrote: " << out_log << '\n'
            << "wrote: " << out_positions << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"orchardprop: path-loss modeling for row-structured orchards"};
  app.require_subcommand(0, 1);
  app.set_version_flag("--version", []() { return std::string(op_version()); });

  PredictArgs predict_args;
  CLI::App* predict = app.add_subcommand(
      "predict", "evaluate one Tx-Rx link and print the breakdown");
  add_common_flags(predict, predict_args.common);
  predict->add_option("--tx", predict_args.tx, "transmitter x y (meters)")
      ->expected(2);
  predict->add_option("--rx", predict_args.rx, "receiver x y (meters)")
      ->expected(2)
      ->required();

  HeatmapArgs heatmap_args;
  CLI::App* heatmap = app.add_subcommand(
      "heatmap", "write a model RSSI heatmap (CSV + PGM)");
  add_common_flags(heatmap, heatmap_args.common);
  heatmap->add_option("--tx", heatmap_args.tx, "transmitter x y (meters)")
      ->expected(2);
  heatmap->add_option("--out", heatmap_args.out,
                      "output path prefix (.csv/.pgm appended)");

  EvaluateArgs evaluate_args;
  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "compare models against a measurement log");
  add_common_flags(evaluate, evaluate_args.common);
  evaluate->add_option("--log", evaluate_args.log, "packet log CSV");
  evaluate->add_option("--positions", evaluate_args.positions,
                       "waypoint positions CSV");
  evaluate->add_option("--out-dir", evaluate_args.out_dir,
                       "directory for error maps and report");
  evaluate->add_option("--models", evaluate_args.models,
                       "comma-separated model list");
  evaluate->add_option("--tx", evaluate_args.tx, "transmitter x y (meters)")
      ->expected(2);
  evaluate->add_option("--min-samples", evaluate_args.min_samples,
                       "per-waypoint packet threshold");

  CalibrateArgs calibrate_args;
  CLI::App* calibrate = app.add_subcommand(
      "calibrate", "fit exponent and per-canopy loss from measurements");
  add_common_flags(calibrate, calibrate_args.common);
  calibrate->add_option("--log", calibrate_args.log, "packet log CSV");
  calibrate->add_option("--positions", calibrate_args.positions,
                        "waypoint positions CSV");
  calibrate->add_option("--out", calibrate_args.out,
                        "write fitted parameters as a config fragment");
  calibrate->add_option("--tx", calibrate_args.tx, "transmitter x y (meters)")
      ->expected(2);
  calibrate->add_option("--fixed-exponent", calibrate_args.fixed_exponent,
                        "freeze the slope and fit only the canopy loss");
  calibrate->add_option("--min-samples", calibrate_args.min_samples,
                        "per-waypoint packet threshold");

  TrajectoryArgs trajectory_args;
  CLI::App* trajectory = app.add_subcommand(
      "trajectory", "write RSSI along the zigzag gateway path");
  add_common_flags(trajectory, trajectory_args.common);
  trajectory->add_option("--out", trajectory_args.out, "output CSV path");
  trajectory->add_option("--node", trajectory_args.node,
                         "transmitter node x y (meters)")
      ->expected(2);
  trajectory->add_option("--waypoints-per-corridor",
                         trajectory_args.waypoints_per_corridor,
                         "samples per corridor pass");
  trajectory->add_option("--shadow-sigma", trajectory_args.shadow_sigma,
                         "shadowing std-dev in dB");

  GenSyntheticArgs gen_args;
  CLI::App* gen = app.add_subcommand(
      "gen-synthetic", "generate a synthetic measurement log and positions");
  add_common_flags(gen, gen_args.common);
  gen->add_option("--out-log", gen_args.out_log, "packet log output path");
  gen->add_option("--out-positions", gen_args.out_positions,
                  "positions output path");
  gen->add_option("--tx", gen_args.tx, "transmitter x y (meters)")
      ->expected(2);
  gen->add_option("--waypoints-x", gen_args.waypoints_x,
                  "waypoint count along x");
  gen->add_option("--waypoints-y", gen_args.waypoints_y,
                  "waypoint count along y");
  gen->add_option("--packets", gen_args.packets, "packets per waypoint");
  gen->add_option("--noise-sigma", gen_args.noise_sigma,
                  "per-packet noise std-dev in dB");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error[USAGE]: " << e.what() << '\n';
    std::cerr << app.help();
    return 2;
  }

  if (app.get_subcommands().empty()) {
    std::cerr << "error[USAGE]: a subcommand is required\n";
    std::cerr << app.help();
    return 2;
  }

  try {
    if (*predict) run_predict(predict_args);
    else if (*heatmap) run_heatmap(heatmap_args);
    else if (*evaluate) run_evaluate(evaluate_args);
    else if (*calibrate) run_calibrate(calibrate_args);
    else if (*trajectory) run_trajectory(trajectory_args);
    else if (*gen) run_gen_synthetic(gen_args);
  } catch (const Fatal& f) {
    g_outputs.discard_all();
    std::cerr << "error[" << code_name(f.status) << "]: " << f.message << '\n';
    return 1;
  } catch (const std::exception& e) {
    g_outputs.discard_all();
    std::cerr << "error[EINTERNAL]: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
