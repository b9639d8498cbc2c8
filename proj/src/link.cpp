#include "beamprint/link.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace beamprint::link {

void LinkBudgetConfig::validate() const {
  if (shadow_sigma_db < 0.0) {
    throw std::invalid_argument("shadow_sigma_db must be non-negative");
  }
}

double LinkBudgetConfig::noise_floor_dbm(double bandwidth_hz) const {
  return -174.0 + 10.0 * std::log10(bandwidth_hz) + noise_figure_db;
}

double fspl_db(double distance_m, double freq_hz) {
  if (!(distance_m > 0.0)) throw std::invalid_argument("distance must be positive");
  if (!(freq_hz > 0.0)) throw std::invalid_argument("frequency must be positive");
  return 20.0 * std::log10(4.0 * std::numbers::pi * distance_m * freq_hz / kSpeedOfLight);
}

double mean_rsrp_dbm(const RadioContext& ctx, const paam::Beam& beam, Vec3 ue_pos) {
  const Direction dir = direction_from(ctx.bs_position, ue_pos);
  return ctx.link.tx_power_dbm_per_beam + ctx.link.xpol_gain_db +
         paam::beam_gain(ctx.array, beam, dir.az_deg, dir.el_deg) + ctx.link.ue_gain_dbi -
         fspl_db(norm(ue_pos - ctx.bs_position), ctx.array.carrier_freq_hz);
}

BeamMeasurement rsrp(const RadioContext& ctx, const paam::Beam& beam, Vec3 ue_pos,
                     std::mt19937_64& rng) {
  double value = mean_rsrp_dbm(ctx, beam, ue_pos);
  if (ctx.link.shadow_sigma_db > 0.0) {
    std::normal_distribution<double> shadow(0.0, ctx.link.shadow_sigma_db);
    value += shadow(rng);
  }
  return {beam.beam_id, value};
}

}  // namespace beamprint::link
