#include "beamprint/beam_mgmt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "beamprint/rng.hpp"

namespace beamprint::beam_mgmt {

namespace {

bool stronger(const link::BeamMeasurement& a, const link::BeamMeasurement& b) {
  if (a.rsrp_dbm != b.rsrp_dbm) return a.rsrp_dbm > b.rsrp_dbm;
  return a.nb_index < b.nb_index;
}

}  // namespace

void SimulationConfig::validate(const paam::GridOfBeams& gob) const {
  if (!(report_period_s > 0.0)) throw std::invalid_argument("report_period_s must be positive");
  if (!(duration_s > 0.0)) throw std::invalid_argument("duration_s must be positive");
  if (report_width < 1) throw std::invalid_argument("report_width must be at least 1");
  if (static_cast<std::size_t>(report_width) > gob.narrow_beams().size()) {
    throw std::invalid_argument("report_width exceeds the number of narrow beams");
  }
  if (switch_hysteresis_db < 0.0 || reacquisition_margin_db < 0.0) {
    throw std::invalid_argument("hysteresis and re-acquisition margin must be non-negative");
  }
  if (report_jitter_s < 0.0 || report_jitter_s >= report_period_s) {
    throw std::invalid_argument("report_jitter_s must lie in [0, report_period_s)");
  }
}

std::mt19937_64 ue_rng(std::uint64_t seed, int ue_id) {
  return std::mt19937_64(derive_seed(seed, static_cast<std::uint64_t>(ue_id)));
}

BeamId acquire_wb(const link::RadioContext& ctx, Vec3 ue_pos) {
  BeamId best = -1;
  double best_rsrp = -std::numeric_limits<double>::infinity();
  for (const paam::Beam& wb : ctx.gob.wide_beams()) {
    const double r = link::mean_rsrp_dbm(ctx, wb, ue_pos);
    if (r > best_rsrp || (r == best_rsrp && wb.beam_id < best)) {
      best = wb.beam_id;
      best_rsrp = r;
    }
  }
  return best;
}

MeasurementReport p2_sweep(const link::RadioContext& ctx, const ServingState& state, Vec3 ue_pos,
                           double t, const SimulationConfig& config, std::mt19937_64& rng) {
  const paam::GridOfBeams& gob = ctx.gob;
  std::vector<BeamId> scope_wbs = {state.serving_wb};
  if (config.sweep_scope == SweepScope::ServingPlusNeighbors) {
    for (BeamId wb : gob.adjacent_wbs(state.serving_wb)) scope_wbs.push_back(wb);
  }
  std::set<BeamId> scope;
  for (BeamId wb : scope_wbs) {
    for (BeamId nb : gob.children(wb)) scope.insert(nb);
  }

  std::vector<link::BeamMeasurement> measured;
  measured.reserve(scope.size());
  for (BeamId nb : scope) measured.push_back(link::rsrp(ctx, gob.beam(nb), ue_pos, rng));
  std::sort(measured.begin(), measured.end(), stronger);

  const auto width = static_cast<std::size_t>(config.report_width);
  if (measured.size() > width) {
    measured.resize(width);
  } else if (measured.size() < width) {
    const std::size_t missing = width - measured.size();
    if (config.padding == PaddingRule::Sentinel) {
      const double floor = ctx.link.noise_floor_dbm(ctx.array.bandwidth_hz);
      measured.insert(measured.end(), missing, link::BeamMeasurement{-1, floor});
    } else {
      // Adjacent WBs first, then the rest of the grid.
      const std::vector<BeamId> adjacent = gob.adjacent_wbs(state.serving_wb);
      std::vector<std::vector<BeamId>> tiers(2);
      for (const paam::Beam& wb : gob.wide_beams()) {
        if (wb.beam_id == state.serving_wb) continue;
        const bool adj = std::find(adjacent.begin(), adjacent.end(), wb.beam_id) != adjacent.end();
        for (BeamId nb : gob.children(wb.beam_id)) {
          if (!scope.contains(nb)) tiers[adj ? 0 : 1].push_back(nb);
        }
      }
      std::vector<link::BeamMeasurement> extra;
      for (const auto& tier_beams : tiers) {
        if (extra.size() == missing) break;
        std::vector<link::BeamMeasurement> tier;
        for (BeamId nb : tier_beams) tier.push_back(link::rsrp(ctx, gob.beam(nb), ue_pos, rng));
        std::sort(tier.begin(), tier.end(), stronger);
        for (const auto& m : tier) {
          if (extra.size() == missing) break;
          extra.push_back(m);
        }
      }
      measured.insert(measured.end(), extra.begin(), extra.end());
    }
    std::sort(measured.begin(), measured.end(), stronger);
  }

  MeasurementReport report;
  report.ue_id = state.ue_id;
  report.t_s = t;
  report.entries = std::move(measured);
  report.serving_nb = state.serving_nb;
  return report;
}

ServingState maybe_switch(const paam::GridOfBeams& gob, const ServingState& state,
                          const MeasurementReport& report, double hysteresis_db) {
  if (report.entries.empty()) return state;
  const link::BeamMeasurement& best = report.entries.front();
  if (best.nb_index < 0 || best.nb_index == state.serving_nb) return state;

  double serving_rsrp = -std::numeric_limits<double>::infinity();
  for (const auto& e : report.entries) {
    if (e.nb_index == state.serving_nb) serving_rsrp = e.rsrp_dbm;
  }
  if (state.serving_nb >= 0 && !(best.rsrp_dbm > serving_rsrp + hysteresis_db)) return state;

  ServingState next = state;
  next.serving_nb = best.nb_index;
  next.serving_wb = gob.parent_of(best.nb_index);
  return next;
}

SimulationOutput run_simulation(const scene::Site& site, const link::RadioContext& ctx,
                                std::vector<scene::UeTrack> tracks, const SimulationConfig& config,
                                std::uint64_t seed) {
  config.validate(ctx.gob);
  ctx.link.validate();

  struct Tagged {
    long long tick;
    MeasurementReport report;
  };
  std::vector<Tagged> stream;
  const double period = config.report_period_s;
  const double wb_to_nb_db =
      10.0 * std::log10(static_cast<double>(ctx.array.positions()) /
                        ctx.array.active(paam::BeamKind::Wide).positions());
  const auto n_ticks = static_cast<long long>(std::ceil(config.duration_s / period - 1e-9));

  for (const scene::UeTrack& track : tracks) {
    std::mt19937_64 rng = ue_rng(seed, track.ue_id);
    std::uniform_real_distribution<double> jitter(0.0, config.report_jitter_s);
    auto first = static_cast<long long>(std::ceil(track.spawn_time_s / period - 1e-9));
    first = std::max(first, 0LL);

    ServingState state{track.ue_id, -1, -1, 0.0};
    for (long long k = first; k < n_ticks; ++k) {
      double t = static_cast<double>(k) * period;
      if (config.report_jitter_s > 0.0) t += jitter(rng);
      const auto pos = scene::position_at(site, track, t);
      if (!pos) {
        if (t > track.spawn_time_s) break;
        continue;
      }

      const BeamId best_wb = acquire_wb(ctx, *pos);
      if (state.serving_wb < 0) {
        state.serving_wb = best_wb;
      } else if (best_wb != state.serving_wb) {
        // Wide beams come from a smaller sub-array; lift their RSRP to the
        // level an aligned narrow beam would reach before comparing.
        const double wb_level = link::mean_rsrp_dbm(ctx, ctx.gob.beam(best_wb), *pos) + wb_to_nb_db;
        const double nb_rsrp = link::mean_rsrp_dbm(ctx, ctx.gob.beam(state.serving_nb), *pos);
        if (nb_rsrp < wb_level - config.reacquisition_margin_db) {
          state.serving_wb = best_wb;
          state.serving_nb = -1;
        }
      }

      MeasurementReport report = p2_sweep(ctx, state, *pos, t, config, rng);
      state = maybe_switch(ctx.gob, state, report, config.switch_hysteresis_db);
      state.last_report_time_s = t;
      report.serving_nb = state.serving_nb;
      stream.push_back({k, std::move(report)});
    }
  }

  std::stable_sort(stream.begin(), stream.end(), [](const Tagged& a, const Tagged& b) {
    if (a.tick != b.tick) return a.tick < b.tick;
    return a.report.ue_id < b.report.ue_id;
  });
  SimulationOutput out;
  out.reports.reserve(stream.size());
  for (auto& s : stream) out.reports.push_back(std::move(s.report));
  out.manifest = std::move(tracks);
  return out;
}

}  // namespace beamprint::beam_mgmt
