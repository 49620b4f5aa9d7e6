#include "calibration.hpp"

#include <cmath>

#include "error.hpp"

namespace orchard {

namespace {

// Design row for the 2-parameter least squares: y = e * x1 + L * x2.
struct DesignRow {
  double x1;  // 10 * log10(d)
  double x2;  // canopy count
  double y;   // measured PL minus PL0
};

}  // namespace

double reference_pl0(double freq_mhz) {
  if (!(freq_mhz > 0.0) || !std::isfinite(freq_mhz))
    fail(Errc::invalid_argument, "frequency must be finite and positive");
  return 20.0 * std::log10(freq_mhz) - 27.55;
}

double one_slope_exponent(double pr_d0_dbm, double pr_d_dbm, double d_m) {
  if (!std::isfinite(pr_d0_dbm) || !std::isfinite(pr_d_dbm))
    fail(Errc::invalid_argument, "received powers must be finite");
  if (!std::isfinite(d_m) || d_m <= 1.0)
    fail(Errc::domain, "distance must exceed the 1 m reference");
  return (pr_d0_dbm - pr_d_dbm) / (10.0 * std::log10(d_m));
}

ErrorStats error_stats(const std::vector<double>& measured_dbm,
                       const std::vector<double>& modeled_dbm) {
  if (measured_dbm.size() != modeled_dbm.size())
    fail(Errc::invalid_argument, "measured and modeled lengths differ");
  if (measured_dbm.empty())
    fail(Errc::no_data, "error statistics need at least one pair");
  double sum2 = 0.0;
  for (std::size_t i = 0; i < measured_dbm.size(); ++i) {
    double r = measured_dbm[i] - modeled_dbm[i];
    if (!std::isfinite(r)) fail(Errc::invalid_argument, "non-finite value");
    sum2 += r * r;
  }
  double mse = sum2 / static_cast<double>(measured_dbm.size());
  return {mse, std::sqrt(mse)};
}

FitResult fit_canopy_model(const MeasurementDataset& dataset,
                           const Layout& layout, const RadioConfig& radio,
                           Point2D tx, Metric metric, bool fit_exponent,
                           double fixed_exponent) {
  if (!std::isfinite(radio.tx_power_dbm))
    fail(Errc::invalid_argument, "tx power must be finite");
  if (!fit_exponent &&
      (!(fixed_exponent > 0.0) || !std::isfinite(fixed_exponent)))
    fail(Errc::invalid_argument, "fixed exponent must be finite and positive");

  double pl0 = reference_pl0(radio.freq_mhz);

  std::vector<DesignRow> rows;
  rows.reserve(dataset.waypoints.size());
  for (const Waypoint& wp : dataset.waypoints) {
    LinkGeometry g = link_geometry(layout, tx, wp.position);
    double d = (metric == Metric::Manhattan) ? g.d_manhattan_m : g.d_euclid_m;
    if (d < 1.0) d = 1.0;  // clamp below the reference distance
    double measured_pl = radio.tx_power_dbm - wp.mean_rssi_dbm;
    rows.push_back({10.0 * std::log10(d),
                    static_cast<double>(g.n_canopies), measured_pl - pl0});
  }

  std::size_t distinct = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    bool seen = false;
    for (std::size_t j = 0; j < i; ++j)
      if (rows[j].x1 == rows[i].x1 && rows[j].x2 == rows[i].x2) {
        seen = true;
        break;
      }
    if (!seen) ++distinct;
  }
  if (distinct < 2)
    fail(Errc::no_data, "need at least 2 distinct design rows, got " +
                            std::to_string(distinct));

  // Normal equations. a11/a22 are sums of squares, so zero means the
  // corresponding column is identically zero.
  double a11 = 0.0, a12 = 0.0, a22 = 0.0, b1 = 0.0, b2 = 0.0;
  for (const DesignRow& r : rows) {
    a11 += r.x1 * r.x1;
    a12 += r.x1 * r.x2;
    a22 += r.x2 * r.x2;
    b1 += r.x1 * r.y;
    b2 += r.x2 * r.y;
  }

  // x1 carries the factor 10, so the solved coefficient on x1 is the
  // exponent itself.
  double exponent = 0.0;
  double canopy_loss = 0.0;
  if (fit_exponent) {
    double det = a11 * a22 - a12 * a12;
    if (a11 == 0.0 || a22 == 0.0 || det < 1e-12 * a11 * a22)
      fail(Errc::singular_fit,
           a22 == 0.0 ? "design is rank-deficient: no canopy crossings vary"
                      : "design is rank-deficient: distances do not vary");
    exponent = (b1 * a22 - b2 * a12) / det;
    canopy_loss = (a11 * b2 - a12 * b1) / det;
    if (canopy_loss < 0.0) {
      // Non-negative projection: pin the canopy term and re-solve the slope.
      canopy_loss = 0.0;
      exponent = b1 / a11;
    }
  } else {
    if (a22 == 0.0)
      fail(Errc::singular_fit,
           "design is rank-deficient: no canopy crossings vary");
    exponent = fixed_exponent;
    double resid_b2 = 0.0;
    for (const DesignRow& r : rows)
      resid_b2 += (r.y - exponent * r.x1) * r.x2;
    canopy_loss = resid_b2 / a22;
    if (canopy_loss < 0.0) canopy_loss = 0.0;
  }

  FitResult fit;
  fit.params.pl0_db = pl0;
  fit.params.exponent = exponent;
  fit.params.canopy_loss_db = canopy_loss;

  std::vector<double> measured, modeled;
  measured.reserve(rows.size());
  modeled.reserve(rows.size());
  for (const DesignRow& r : rows) {
    double model_pl = pl0 + exponent * r.x1 + canopy_loss * r.x2;
    double meas_pl = pl0 + r.y;
    measured.push_back(meas_pl);
    modeled.push_back(model_pl);
    fit.residuals_db.push_back(meas_pl - model_pl);
  }
  ErrorStats stats = error_stats(measured, modeled);
  fit.mse_db2 = stats.mse_db2;
  fit.rmse_db = stats.rmse_db;
  fit.n_points = rows.size();
  return fit;
}

}  // namespace orchard
