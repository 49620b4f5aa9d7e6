#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "geometry.hpp"

namespace orchard {

enum class Metric { Euclid, Manhattan };

// Behavior for distances below the 1 m reference: clamp up to the reference
// (default) or refuse with a domain error.
enum class ShortRangePolicy { Clamp, Strict };

enum class ModelId { Fspl, Itu, Multiwall, Pmw, Proposed, Flog };

struct RadioConfig {
  double freq_mhz = 868.0;
  double tx_power_dbm = 21.0;  // effective, antenna offsets absorbed
  std::optional<double> sensitivity_dbm{};
};

struct ModelParams {
  double pl0_db = 0.0;              // reference loss at d0
  double exponent = 2.0;            // one-slope path-loss exponent
  double canopy_loss_db = 0.0;      // per intercepted canopy
  std::vector<double> wall_losses_db{};
  double flog_alpha = 2.0;          // intrinsic exponents for the FFZ blend
  double flog_beta = 2.0;
  double flog_gamma = 2.0;
  double shadow_sigma_db = 0.0;
  double d0_m = 1.0;                // fixed reference distance
};

struct FfzFractions {
  double p_open = 1.0;
  double p_foliage = 0.0;
  double p_ground = 0.0;
};

// Free-space path loss, frequency in MHz, distance in meters.
double fspl(double freq_mhz, double d_m,
            ShortRangePolicy policy = ShortRangePolicy::Clamp);

// Excess vegetation loss 0.2 * f^0.3 * d^0.6 over the foliage depth d_m.
// Stated validity ends at 400 m of foliage; beyond that the value is still
// returned and *beyond_validity (if non-null) is set.
double itu_vegetation_loss(double freq_mhz, double d_m,
                           bool* beyond_validity = nullptr);

// Free-space plus vegetation excess at the same distance.
double itu_total(double freq_mhz, double d_m,
                 ShortRangePolicy policy = ShortRangePolicy::Clamp,
                 bool* beyond_validity = nullptr);

// Reference loss plus 20 dB/decade plus the sum of per-obstacle penalties.
double multiwall(const ModelParams& params, double d_m,
                 const std::vector<double>& wall_losses_db,
                 ShortRangePolicy policy = ShortRangePolicy::Clamp);

// Log-distance slope with a linear per-canopy penalty.
double pmw(const ModelParams& params, double d_m, int n_canopies,
           ShortRangePolicy policy = ShortRangePolicy::Clamp);

// Direction-dependent form: pmw evaluated at the grid-aligned (Manhattan)
// distance with the straight-segment canopy count.
double proposed_pl(const ModelParams& params, const LinkGeometry& geom,
                   ShortRangePolicy policy = ShortRangePolicy::Clamp);

// Convex blend of intrinsic exponents weighted by FFZ occupancy fractions.
double flog_exponent(const FfzFractions& fr, double alpha, double beta,
                     double gamma);

// FFZ-blended log-distance loss. shadow_db is a caller-supplied draw
// (see simulate's shadowing_sample), 0 for the deterministic mean.
double flog_pl(const ModelParams& params, const FfzFractions& fr, double d_m,
               double shadow_db,
               ShortRangePolicy policy = ShortRangePolicy::Clamp);

// Monte-Carlo occupancy of the first Fresnel ellipsoid between two antennas.
// Ground when z <= 0, foliage when inside any canopy sphere (centers at
// canopy_center_height_m above each tree, radius = layout canopy radius),
// open otherwise. Deterministic for fixed (seed, n_samples).
FfzFractions ffz_fractions(const Layout& layout, Point2D tx, double tx_h_m,
                           Point2D rx, double rx_h_m, double freq_mhz,
                           long n_samples, std::uint64_t seed,
                           double canopy_center_height_m = 2.5);

// Link budget: effective Tx power minus path loss.
double predict_rssi(double model_pl_db, const RadioConfig& radio);

struct FlogOptions {
  double tx_height_m = 1.2;
  double rx_height_m = 1.2;
  long ffz_samples = 4096;
  double canopy_center_height_m = 2.5;
};

// Manhattan for the direction-dependent model, Euclidean for the baselines.
Metric default_metric(ModelId id);

// Evaluates one model over one link with an explicit distance metric.
// flog_stream_key seeds the FFZ sampler; unused by the other models.
double eval_model_pl(ModelId id, const ModelParams& params,
                     const RadioConfig& radio, const Layout& layout,
                     Point2D tx, Point2D rx, Metric metric,
                     ShortRangePolicy policy, std::uint64_t flog_stream_key,
                     const FlogOptions& flog = {});

}  // namespace orchard
