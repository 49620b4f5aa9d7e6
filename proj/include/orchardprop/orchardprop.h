/*
 * orchardprop - path-loss modeling for row-structured orchards.
 *
 * C interface to the shared library. All functions return a status code
 * (OP_OK on success); results travel through out-parameters. Objects
 * returned through double pointers are owned by the caller and released
 * with the matching *_free function. Pointers returned by accessor
 * functions (strings, etc.) stay valid until the owning handle is freed.
 *
 * On failure, op_last_error_message() returns a human-readable detail
 * string for the most recent failing call on the current thread.
 */

#ifndef ORCHARDPROP_H
#define ORCHARDPROP_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#ifndef OP_API
#define OP_API __attribute__((visibility("default")))
#endif

/* ---- status codes ---- */

#define OP_OK 0         /* success */
#define OP_EINVAL 1     /* invalid argument */
#define OP_EDOMAIN 2    /* input outside a model's domain */
#define OP_EPARSE 3     /* malformed input file */
#define OP_EIO 4        /* file system failure */
#define OP_ENODATA 5    /* not enough data */
#define OP_ESINGULAR 6  /* rank-deficient fit */
#define OP_ENOENT 7     /* named item not found */
#define OP_ERANGE 8     /* index out of range */
#define OP_EINTERNAL 9  /* internal error */

OP_API const char* op_strerror(int status);
OP_API const char* op_last_error_message(void);
OP_API const char* op_version(void);

/* ---- enums ---- */

#define OP_MODEL_FSPL 0
#define OP_MODEL_ITU 1
#define OP_MODEL_MULTIWALL 2
#define OP_MODEL_PMW 3
#define OP_MODEL_PROPOSED 4
#define OP_MODEL_FLOG 5

#define OP_METRIC_DEFAULT (-1) /* model's own default metric */
#define OP_METRIC_EUCLID 0
#define OP_METRIC_MANHATTAN 1

#define OP_SHORT_RANGE_CLAMP 0  /* distances below 1 m clamp to 1 m */
#define OP_SHORT_RANGE_STRICT 1 /* distances below 1 m are domain errors */

#define OP_VALUE_RSSI_DBM 0
#define OP_VALUE_ERROR_DB 1
#define OP_VALUE_PL_DB 2

/* Resolves a model name ("fspl", "itu", "multiwall", "pmw", "proposed",
 * "flog") to its OP_MODEL_* id. */
OP_API int op_model_id_from_name(const char* name, int* out_id);
OP_API const char* op_model_name(int model_id);

/* ---- value types ---- */

typedef struct {
  double freq_mhz;
  double tx_power_dbm; /* effective, antenna offsets absorbed */
  double sensitivity_dbm;
  int has_sensitivity;
} op_radio;

typedef struct {
  double pl0_db;
  double exponent;
  double canopy_loss_db;
  const double* wall_losses_db;
  size_t wall_loss_count;
  double flog_alpha;
  double flog_beta;
  double flog_gamma;
  double shadow_sigma_db;
  double d0_m;
} op_model_params;

typedef struct {
  double dx_m;
  double dy_m;
  double d_euclid_m;
  double d_manhattan_m;
  int row_offset;
  int col_offset;
  int n_canopies;
} op_link_geometry;

typedef struct {
  double p_open;
  double p_foliage;
  double p_ground;
} op_ffz_fractions;

typedef struct {
  double tx_height_m;
  double rx_height_m;
  long ffz_samples;
  double canopy_center_height_m;
} op_flog_options;

typedef struct {
  int nx;
  int ny;
  double cell_size_m;
  double origin_x_m;
  double origin_y_m;
} op_grid_spec;

typedef struct {
  int metric; /* OP_METRIC_* or OP_METRIC_DEFAULT */
  int short_range_policy;
  uint64_t seed;
  int threads;
  op_flog_options flog;
} op_sim_options;

/* Fill with documented defaults. op_radio_init uses the EU-868 profile
 * (868 MHz, 21 dBm effective). op_model_params_init sets the reference
 * loss pl0_db for the given frequency and exponent 2. */
OP_API void op_radio_init(op_radio* radio);
OP_API void op_model_params_init(op_model_params* params, double freq_mhz);
OP_API void op_flog_options_init(op_flog_options* flog);
OP_API void op_grid_spec_init(op_grid_spec* spec);
OP_API void op_sim_options_init(op_sim_options* options);

/* ---- opaque handles ---- */

typedef struct op_layout op_layout;
typedef struct op_packet_log op_packet_log;
typedef struct op_positions op_positions;
typedef struct op_dataset op_dataset;
typedef struct op_fit_result op_fit_result;
typedef struct op_heatmap op_heatmap;
typedef struct op_trajectory op_trajectory;

/* ---- orchard geometry ---- */

OP_API int op_layout_create(int rows, int cols, double row_spacing_m,
                            double col_spacing_m, double canopy_radius_m,
                            double origin_x_m, double origin_y_m,
                            op_layout** out);
OP_API void op_layout_free(op_layout* layout);
OP_API int op_layout_tree_count(const op_layout* layout, size_t* out);
OP_API int op_layout_tree_position(const op_layout* layout, size_t index,
                                   double* x_m, double* y_m);

OP_API int op_link_geometry_compute(const op_layout* layout, double tx_x_m,
                                    double tx_y_m, double rx_x_m,
                                    double rx_y_m, op_link_geometry* out);
OP_API int op_count_canopy_intersections(const op_layout* layout,
                                         double tx_x_m, double tx_y_m,
                                         double rx_x_m, double rx_y_m,
                                         int* out);

/* ---- path-loss models ---- */

OP_API int op_fspl(double freq_mhz, double d_m, int short_range_policy,
                   double* out_db);
/* beyond_validity (optional) is set when d_m is past the 400 m foliage
 * depth the vegetation curve was derived for. */
OP_API int op_itu_vegetation_loss(double freq_mhz, double d_m,
                                  double* out_db, int* beyond_validity);
OP_API int op_itu_total(double freq_mhz, double d_m, int short_range_policy,
                        double* out_db);
OP_API int op_multiwall(const op_model_params* params, double d_m,
                        const double* wall_losses_db, size_t wall_loss_count,
                        int short_range_policy, double* out_db);
OP_API int op_pmw(const op_model_params* params, double d_m, int n_canopies,
                  int short_range_policy, double* out_db);
OP_API int op_proposed_pl(const op_model_params* params,
                          const op_link_geometry* geom,
                          int short_range_policy, double* out_db);
OP_API int op_flog_exponent(const op_ffz_fractions* fr, double alpha,
                            double beta, double gamma, double* out);
OP_API int op_flog_pl(const op_model_params* params,
                      const op_ffz_fractions* fr, double d_m,
                      double shadow_db, int short_range_policy,
                      double* out_db);
OP_API int op_ffz_fractions_estimate(const op_layout* layout, double tx_x_m,
                                     double tx_y_m, double tx_h_m,
                                     double rx_x_m, double rx_y_m,
                                     double rx_h_m, double freq_mhz,
                                     long n_samples, uint64_t seed,
                                     double canopy_center_height_m,
                                     op_ffz_fractions* out);
OP_API int op_predict_rssi(double model_pl_db, const op_radio* radio,
                           double* out_dbm);

/* One model over one link: path loss and predicted RSSI. */
OP_API int op_model_eval(const op_layout* layout, int model_id,
                         const op_model_params* params, const op_radio* radio,
                         double tx_x_m, double tx_y_m, double rx_x_m,
                         double rx_y_m, const op_sim_options* options,
                         double* pl_db, double* rssi_dbm);

/* ---- measurement ingestion ---- */

OP_API int op_packet_log_parse_file(const char* path, op_packet_log** out);
OP_API int op_packet_log_parse_string(const char* text, op_packet_log** out);
OP_API void op_packet_log_free(op_packet_log* log);
OP_API int op_packet_log_record_count(const op_packet_log* log, size_t* out);
OP_API int op_packet_log_record(const op_packet_log* log, size_t index,
                                const char** waypoint_id,
                                const char** timestamp, double* rssi_dbm);
OP_API int op_packet_log_diagnostic_count(const op_packet_log* log,
                                          size_t* out);
OP_API int op_packet_log_diagnostic(const op_packet_log* log, size_t index,
                                    size_t* line_no, const char** message);

OP_API int op_positions_parse_file(const char* path, op_positions** out);
OP_API int op_positions_parse_string(const char* text, op_positions** out);
OP_API void op_positions_free(op_positions* positions);
OP_API int op_positions_count(const op_positions* positions, size_t* out);

/* Waypoints with fewer than min_samples packets are excluded and listed
 * through op_dataset_excluded*. */
OP_API int op_dataset_aggregate(const op_packet_log* log,
                                const op_positions* positions,
                                int min_samples, op_dataset** out);
OP_API void op_dataset_free(op_dataset* dataset);
OP_API int op_dataset_waypoint_count(const op_dataset* dataset, size_t* out);
OP_API int op_dataset_waypoint(const op_dataset* dataset, size_t index,
                               const char** waypoint_id, double* x_m,
                               double* y_m, double* mean_rssi_dbm,
                               int* n_samples, double* raw_min_dbm,
                               double* raw_max_dbm);
OP_API int op_dataset_excluded_count(const op_dataset* dataset, size_t* out);
OP_API int op_dataset_excluded(const op_dataset* dataset, size_t index,
                               const char** waypoint_id, int* n_samples);

/* ---- calibration ---- */

OP_API int op_reference_pl0(double freq_mhz, double* out_db);
OP_API int op_one_slope_exponent(double pr_d0_dbm, double pr_d_dbm,
                                 double d_m, double* out);
OP_API int op_error_stats(const double* measured_dbm,
                          const double* modeled_dbm, size_t count,
                          double* mse_db2, double* rmse_db);

/* Least-squares fit of (exponent, canopy_loss_db) against measured path
 * loss, reference loss fixed analytically from the radio frequency.
 * fit_exponent == 0 freezes the slope at fixed_exponent and fits only the
 * canopy term. */
OP_API int op_fit_canopy_model(const op_dataset* dataset,
                               const op_layout* layout, const op_radio* radio,
                               double tx_x_m, double tx_y_m, int metric,
                               int fit_exponent, double fixed_exponent,
                               op_fit_result** out);
OP_API void op_fit_result_free(op_fit_result* fit);
OP_API int op_fit_result_params(const op_fit_result* fit, double* pl0_db,
                                double* exponent, double* canopy_loss_db);
OP_API int op_fit_result_stats(const op_fit_result* fit, double* mse_db2,
                               double* rmse_db, size_t* n_points);
OP_API int op_fit_result_residual(const op_fit_result* fit, size_t index,
                                  double* residual_db);

/* ---- simulation ---- */

OP_API int op_model_heatmap(const op_layout* layout, int model_id,
                            const op_model_params* params,
                            const op_radio* radio, double tx_x_m,
                            double tx_y_m, const op_grid_spec* spec,
                            const op_sim_options* options, op_heatmap** out);
OP_API void op_heatmap_free(op_heatmap* heatmap);
OP_API int op_heatmap_spec(const op_heatmap* heatmap, op_grid_spec* spec,
                           int* value_kind);
OP_API int op_heatmap_value(const op_heatmap* heatmap, int ix, int iy,
                            double* value, int* valid);
OP_API int op_heatmap_write_csv(const op_heatmap* heatmap, const char* path);
OP_API int op_heatmap_write_pgm(const op_heatmap* heatmap, const char* path);

/* Signed measured-minus-modeled map plus summary statistics over the
 * matched waypoints. */
OP_API int op_error_heatmap(const op_dataset* dataset,
                            const op_heatmap* modeled, op_heatmap** out,
                            double* mse_db2, double* rmse_db,
                            size_t* n_matched);

OP_API int op_zigzag_path(const op_layout* layout, int waypoints_per_corridor,
                          op_trajectory** out);
OP_API void op_trajectory_free(op_trajectory* trajectory);
OP_API int op_trajectory_waypoint_count(const op_trajectory* trajectory,
                                        size_t* out);
OP_API int op_trajectory_waypoint(const op_trajectory* trajectory,
                                  size_t index, double* x_m, double* y_m);

/* Writes `index,x_m,y_m,distance_m,rssi_dbm` rows for the node-to-waypoint
 * links. Shadowing draws are keyed by (options->seed, waypoint index). */
OP_API int op_trajectory_rssi_csv(const op_trajectory* trajectory,
                                  double node_x_m, double node_y_m,
                                  const op_layout* layout, int model_id,
                                  const op_model_params* params,
                                  const op_radio* radio,
                                  double shadow_sigma_db,
                                  const op_sim_options* options,
                                  const char* csv_path);

OP_API int op_shadowing_sample(double sigma_db, uint64_t seed, uint64_t index,
                               double* out_db);

/* Synthetic field generator: waypoint grid over a rectangle, ground truth
 * from the chosen model, per-packet Gaussian noise, integer dBm readings.
 * Writes a packet log and a positions file. */
OP_API int op_synthetic_log_write(const op_layout* layout, int model_id,
                                  const op_model_params* params,
                                  const op_radio* radio, double tx_x_m,
                                  double tx_y_m, int waypoints_x,
                                  int waypoints_y, double area_origin_x_m,
                                  double area_origin_y_m, double area_width_m,
                                  double area_height_m,
                                  int packets_per_waypoint,
                                  double noise_sigma_db, uint64_t seed,
                                  const op_sim_options* options,
                                  const char* log_path,
                                  const char* positions_path);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* ORCHARDPROP_H */
