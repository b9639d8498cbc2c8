#pragma once

#include <random>

#include "beamprint/geometry.hpp"
#include "beamprint/paam.hpp"

namespace beamprint::link {

inline constexpr double kSpeedOfLight = 299792458.0;

struct LinkBudgetConfig {
  double tx_power_dbm_per_beam = 30.0;
  double noise_figure_db = 9.0;
  double shadow_sigma_db = 0.0;
  double ue_gain_dbi = 0.0;
  // Co-located polarization pair combining term added to every beam.
  double xpol_gain_db = 0.0;

  void validate() const;
  /// Thermal noise over `bandwidth_hz` plus the noise figure.
  double noise_floor_dbm(double bandwidth_hz) const;
};

struct BeamMeasurement {
  paam::BeamId nb_index = -1;
  double rsrp_dbm = 0.0;

  friend bool operator==(const BeamMeasurement&, const BeamMeasurement&) = default;
};

/// Friis free-space loss 20*log10(4*pi*d*f/c).
double fspl_db(double distance_m, double freq_hz);

/// Everything needed to evaluate a link from the BS to a UE position.
struct RadioContext {
  paam::ArrayConfig array;
  paam::GridOfBeams gob;
  LinkBudgetConfig link;
  Vec3 bs_position;
};

/// Deterministic (shadowing-free) received power of `beam` at `ue_pos`.
double mean_rsrp_dbm(const RadioContext& ctx, const paam::Beam& beam, Vec3 ue_pos);

/// Received power including a zero-mean log-normal shadowing draw from `rng`
/// when shadow_sigma_db > 0.
BeamMeasurement rsrp(const RadioContext& ctx, const paam::Beam& beam, Vec3 ue_pos,
                     std::mt19937_64& rng);

}  // namespace beamprint::link
