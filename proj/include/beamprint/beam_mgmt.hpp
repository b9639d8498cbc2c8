#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "beamprint/link.hpp"
#include "beamprint/paam.hpp"
#include "beamprint/scene.hpp"

namespace beamprint::beam_mgmt {

using paam::BeamId;

enum class SweepScope { ServingWbOnly, ServingPlusNeighbors };

/// How reports are filled when the sweep scope has fewer than R beams.
/// AdjacentWb borrows the strongest beams of edge-adjacent WBs (then any
/// remaining WB); Sentinel appends nb_index = -1 at the noise floor.
enum class PaddingRule { AdjacentWb, Sentinel };

struct ServingState {
  int ue_id = 0;
  BeamId serving_wb = -1;
  BeamId serving_nb = -1;  // -1 until the first P2 sweep
  double last_report_time_s = 0.0;
};

struct MeasurementReport {
  int ue_id = 0;  // label join only
  double t_s = 0.0;
  std::vector<link::BeamMeasurement> entries;  // descending rsrp
  BeamId serving_nb = -1;

  friend bool operator==(const MeasurementReport&, const MeasurementReport&) = default;
};

struct SimulationConfig {
  double report_period_s = 0.040;
  double duration_s = 20.0;
  std::vector<std::uint64_t> seeds = {1};
  double switch_hysteresis_db = 0.0;
  SweepScope sweep_scope = SweepScope::ServingWbOnly;
  PaddingRule padding = PaddingRule::AdjacentWb;
  int report_width = 12;
  double reacquisition_margin_db = 3.0;
  double report_jitter_s = 0.0;

  void validate(const paam::GridOfBeams& gob) const;
};

/// Best wide beam by shadowing-free RSRP; ties go to the lower id.
BeamId acquire_wb(const link::RadioContext& ctx, Vec3 ue_pos);

/// Measures every narrow beam in scope and returns the top `config.report_width`
/// entries, padded per `config.padding`. `serving_nb` is copied from `state`.
MeasurementReport p2_sweep(const link::RadioContext& ctx, const ServingState& state, Vec3 ue_pos,
                           double t, const SimulationConfig& config, std::mt19937_64& rng);

/// Switches to the best reported narrow beam when it beats the serving one by
/// more than `hysteresis_db`; the serving WB follows the new beam's parent.
ServingState maybe_switch(const paam::GridOfBeams& gob, const ServingState& state,
                          const MeasurementReport& report, double hysteresis_db);

struct SimulationOutput {
  std::vector<MeasurementReport> reports;  // ordered by (t, ue_id)
  std::vector<scene::UeTrack> manifest;
};

SimulationOutput run_simulation(const scene::Site& site, const link::RadioContext& ctx,
                                std::vector<scene::UeTrack> tracks, const SimulationConfig& config,
                                std::uint64_t seed);

/// Per-UE rng stream derived from the run seed.
std::mt19937_64 ue_rng(std::uint64_t seed, int ue_id);

}  // namespace beamprint::beam_mgmt
