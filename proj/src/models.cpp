#include "models.hpp"

#include <cmath>

#include "error.hpp"
#include "rng.hpp"

namespace orchard {

namespace {

constexpr double kSpeedOfLightMps = 299792458.0;
constexpr double kItuMaxDepthM = 400.0;

void check_freq(double freq_mhz) {
  if (!(freq_mhz > 0.0) || !std::isfinite(freq_mhz))
    fail(Errc::invalid_argument, "frequency must be finite and positive");
}

// Distances below d_min are clamped or rejected per policy; negative and
// non-finite distances are invalid under either policy.
double effective_distance(double d_m, ShortRangePolicy policy,
                          double d_min = 1.0) {
  if (!std::isfinite(d_m) || d_m < 0.0)
    fail(Errc::invalid_argument, "distance must be finite and non-negative");
  if (d_m < d_min) {
    if (policy == ShortRangePolicy::Strict)
      fail(Errc::domain, "distance below the 1 m reference");
    return d_min;
  }
  return d_m;
}

void check_slope_params(const ModelParams& params) {
  if (!std::isfinite(params.pl0_db))
    fail(Errc::invalid_argument, "pl0_db must be finite");
  if (!(params.exponent > 0.0) || !std::isfinite(params.exponent))
    fail(Errc::invalid_argument, "exponent must be finite and positive");
}

void check_d0(const ModelParams& params) {
  if (params.d0_m != 1.0)
    fail(Errc::invalid_argument, "reference distance is fixed at 1 m");
}

}  // namespace

double fspl(double freq_mhz, double d_m, ShortRangePolicy policy) {
  check_freq(freq_mhz);
  double d = effective_distance(d_m, policy);
  return -27.55 + 20.0 * std::log10(freq_mhz) + 20.0 * std::log10(d);
}

double itu_vegetation_loss(double freq_mhz, double d_m,
                           bool* beyond_validity) {
  check_freq(freq_mhz);
  if (!std::isfinite(d_m) || d_m < 0.0)
    fail(Errc::invalid_argument, "foliage depth must be finite and non-negative");
  if (beyond_validity) *beyond_validity = d_m >= kItuMaxDepthM;
  if (d_m == 0.0) return 0.0;
  return 0.2 * std::pow(freq_mhz, 0.3) * std::pow(d_m, 0.6);
}

double itu_total(double freq_mhz, double d_m, ShortRangePolicy policy,
                 bool* beyond_validity) {
  check_freq(freq_mhz);
  // Clamp once so the additivity with fspl at the same distance stays exact.
  double d = effective_distance(d_m, policy);
  return fspl(freq_mhz, d, policy) +
         itu_vegetation_loss(freq_mhz, d, beyond_validity);
}

double multiwall(const ModelParams& params, double d_m,
                 const std::vector<double>& wall_losses_db,
                 ShortRangePolicy policy) {
  if (!std::isfinite(params.pl0_db))
    fail(Errc::invalid_argument, "pl0_db must be finite");
  double d = effective_distance(d_m, policy);
  double walls = 0.0;
  for (double w : wall_losses_db) {
    if (!std::isfinite(w)) fail(Errc::invalid_argument, "wall losses must be finite");
    walls += w;
  }
  return params.pl0_db + 20.0 * std::log10(d) + walls;
}

double pmw(const ModelParams& params, double d_m, int n_canopies,
           ShortRangePolicy policy) {
  check_slope_params(params);
  if (n_canopies < 0)
    fail(Errc::invalid_argument, "canopy count must be non-negative");
  if (!(params.canopy_loss_db >= 0.0) || !std::isfinite(params.canopy_loss_db))
    fail(Errc::invalid_argument, "canopy loss must be finite and non-negative");
  double d = effective_distance(d_m, policy);
  return params.pl0_db + 10.0 * params.exponent * std::log10(d) +
         params.canopy_loss_db * n_canopies;
}

double proposed_pl(const ModelParams& params, const LinkGeometry& geom,
                   ShortRangePolicy policy) {
  return pmw(params, geom.d_manhattan_m, geom.n_canopies, policy);
}

double flog_exponent(const FfzFractions& fr, double alpha, double beta,
                     double gamma) {
  if (!(alpha > 0.0) || !std::isfinite(alpha) || !(beta > 0.0) ||
      !std::isfinite(beta) || !(gamma > 0.0) || !std::isfinite(gamma))
    fail(Errc::invalid_argument, "intrinsic exponents must be finite and positive");
  auto valid_fraction = [](double p) {
    return std::isfinite(p) && p >= 0.0 && p <= 1.0;
  };
  if (!valid_fraction(fr.p_open) || !valid_fraction(fr.p_foliage) ||
      !valid_fraction(fr.p_ground))
    fail(Errc::invalid_argument, "occupancy fractions must lie in [0,1]");
  if (std::abs(fr.p_open + fr.p_foliage + fr.p_ground - 1.0) > 1e-9)
    fail(Errc::invalid_argument, "occupancy fractions must sum to 1");
  return fr.p_open * alpha + fr.p_foliage * beta + fr.p_ground * gamma;
}

double flog_pl(const ModelParams& params, const FfzFractions& fr, double d_m,
               double shadow_db, ShortRangePolicy policy) {
  if (!std::isfinite(params.pl0_db))
    fail(Errc::invalid_argument, "pl0_db must be finite");
  check_d0(params);
  if (!std::isfinite(shadow_db))
    fail(Errc::invalid_argument, "shadow term must be finite");
  double n = flog_exponent(fr, params.flog_alpha, params.flog_beta,
                           params.flog_gamma);
  double d = effective_distance(d_m, policy, params.d0_m);
  return params.pl0_db + 10.0 * n * std::log10(d / params.d0_m) + shadow_db;
}

FfzFractions ffz_fractions(const Layout& layout, Point2D tx, double tx_h_m,
                           Point2D rx, double rx_h_m, double freq_mhz,
                           long n_samples, std::uint64_t seed,
                           double canopy_center_height_m) {
  check_freq(freq_mhz);
  if (n_samples < 1)
    fail(Errc::invalid_argument, "sample count must be at least 1");
  if (!std::isfinite(tx_h_m) || tx_h_m < 0.0 || !std::isfinite(rx_h_m) ||
      rx_h_m < 0.0)
    fail(Errc::invalid_argument, "antenna heights must be finite and non-negative");
  if (!std::isfinite(canopy_center_height_m))
    fail(Errc::invalid_argument, "canopy center height must be finite");
  if (!std::isfinite(tx.x_m) || !std::isfinite(tx.y_m) ||
      !std::isfinite(rx.x_m) || !std::isfinite(rx.y_m))
    fail(Errc::invalid_argument, "link endpoints must be finite");
  if (tx.x_m == rx.x_m && tx.y_m == rx.y_m)
    fail(Errc::invalid_argument, "degenerate link: endpoints coincide");

  double ax = tx.x_m, ay = tx.y_m, az = tx_h_m;
  double dx = rx.x_m - ax, dy = rx.y_m - ay, dz = rx_h_m - az;
  double dist = std::sqrt(dx * dx + dy * dy + dz * dz);
  double ux = dx / dist, uy = dy / dist, uz = dz / dist;

  // Orthonormal frame (u, v, w) around the link axis. u is never parallel
  // to the z axis because the endpoints differ in the horizontal plane.
  double vx = -uy, vy = ux, vz = 0.0;
  double vn = std::sqrt(vx * vx + vy * vy);
  vx /= vn;
  vy /= vn;
  double wx = uy * vz - uz * vy;
  double wy = uz * vx - ux * vz;
  double wz = ux * vy - uy * vx;

  double lambda = kSpeedOfLightMps / (freq_mhz * 1e6);
  double r_mid = std::sqrt(lambda * dist) * 0.5;  // widest at the midpoint

  const auto& trees = layout.tree_positions();
  double rc2 = layout.canopy_radius_m() * layout.canopy_radius_m();

  rng::SplitMix64 gen(rng::mix(seed, 0x0ff2));
  constexpr double two_pi = 6.283185307179586476925286766559;

  long open = 0, foliage = 0, ground = 0;
  for (long accepted = 0; accepted < n_samples;) {
    // Rejection sampling from the bounding cylinder keeps the density
    // uniform over the ellipsoid volume.
    double s = gen.uniform01();
    double rho = r_mid * std::sqrt(gen.uniform01());
    double r_here = std::sqrt(lambda * s * (1.0 - s) * dist);
    if (rho > r_here) continue;
    double theta = two_pi * gen.uniform01();
    double c = std::cos(theta), sn = std::sin(theta);

    double px = ax + s * dx + rho * (c * vx + sn * wx);
    double py = ay + s * dy + rho * (c * vy + sn * wy);
    double pz = az + s * dz + rho * (c * vz + sn * wz);
    ++accepted;

    if (pz <= 0.0) {
      ++ground;
      continue;
    }
    bool inside = false;
    double hz = pz - canopy_center_height_m;
    double hz2 = hz * hz;
    if (hz2 <= rc2) {
      for (const Point2D& t : trees) {
        double tdx = px - t.x_m, tdy = py - t.y_m;
        if (tdx * tdx + tdy * tdy + hz2 <= rc2) {
          inside = true;
          break;
        }
      }
    }
    if (inside)
      ++foliage;
    else
      ++open;
  }

  double inv = 1.0 / static_cast<double>(n_samples);
  return {open * inv, foliage * inv, ground * inv};
}

double predict_rssi(double model_pl_db, const RadioConfig& radio) {
  if (!std::isfinite(model_pl_db))
    fail(Errc::invalid_argument, "path loss must be finite");
  if (!std::isfinite(radio.tx_power_dbm))
    fail(Errc::invalid_argument, "tx power must be finite");
  return radio.tx_power_dbm - model_pl_db;
}

Metric default_metric(ModelId id) {
  return id == ModelId::Proposed ? Metric::Manhattan : Metric::Euclid;
}

double eval_model_pl(ModelId id, const ModelParams& params,
                     const RadioConfig& radio, const Layout& layout,
                     Point2D tx, Point2D rx, Metric metric,
                     ShortRangePolicy policy, std::uint64_t flog_stream_key,
                     const FlogOptions& flog) {
  LinkGeometry g = link_geometry(layout, tx, rx);
  double d = (metric == Metric::Manhattan) ? g.d_manhattan_m : g.d_euclid_m;
  switch (id) {
    case ModelId::Fspl:
      return fspl(radio.freq_mhz, d, policy);
    case ModelId::Itu:
      return itu_total(radio.freq_mhz, d, policy);
    case ModelId::Multiwall:
      return multiwall(params, d, params.wall_losses_db, policy);
    case ModelId::Pmw:
    case ModelId::Proposed:
      // Same surface once the distance metric is fixed; the two ids differ
      // only in their default metric.
      return pmw(params, d, g.n_canopies, policy);
    case ModelId::Flog: {
      check_d0(params);
      // At the reference distance the log term vanishes, so the occupancy
      // blend cannot contribute and no ellipsoid needs sampling. This also
      // covers the cell containing the transmitter, whose link would
      // otherwise be too short to orient.
      if (effective_distance(d, policy, params.d0_m) == params.d0_m)
        return flog_pl(params, FfzFractions{1.0, 0.0, 0.0}, params.d0_m, 0.0,
                       policy);
      FfzFractions fr = ffz_fractions(
          layout, tx, flog.tx_height_m, rx, flog.rx_height_m, radio.freq_mhz,
          flog.ffz_samples, flog_stream_key, flog.canopy_center_height_m);
      return flog_pl(params, fr, d, 0.0, policy);
    }
  }
  fail(Errc::internal, "unhandled model id");
}

}  // namespace orchard
