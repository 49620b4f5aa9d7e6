#pragma once

#include <vector>

#include "dataset.hpp"
#include "geometry.hpp"
#include "models.hpp"

namespace orchard {

struct FitResult {
  ModelParams params;               // fitted fields populated
  std::vector<double> residuals_db; // measured PL minus fitted PL, per waypoint
  double mse_db2 = 0.0;
  double rmse_db = 0.0;
  std::size_t n_points = 0;
};

struct ErrorStats {
  double mse_db2 = 0.0;
  double rmse_db = 0.0;
};

// Free-space loss at the 1 m reference distance.
double reference_pl0(double freq_mhz);

// One-slope exponent from received power at 1 m and at d_m.
double one_slope_exponent(double pr_d0_dbm, double pr_d_dbm, double d_m);

// Mean squared error and its root over paired measured/modeled values.
ErrorStats error_stats(const std::vector<double>& measured_dbm,
                       const std::vector<double>& modeled_dbm);

// Least-squares fit of (exponent, canopy_loss_db) to measured path loss
// Y_i - PL0 = 10 * exponent * log10(d_i) + canopy_loss_db * N_i with PL0
// fixed analytically at reference_pl0(radio.freq_mhz). When fit_exponent is
// false only canopy_loss_db is fitted and fixed_exponent supplies the slope.
// canopy_loss_db is kept non-negative by projection: a negative solution is
// clamped to 0 and the exponent re-solved. Distances below 1 m clamp to 1 m.
FitResult fit_canopy_model(const MeasurementDataset& dataset,
                           const Layout& layout, const RadioConfig& radio,
                           Point2D tx, Metric metric, bool fit_exponent,
                           double fixed_exponent = 2.0);

}  // namespace orchard
