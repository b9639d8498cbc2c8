#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "beamprint/geometry.hpp"

namespace beamprint::paam {

/// Single-element radiation pattern: parabolic cuts in azimuth and elevation
/// with separate attenuation caps.
struct ElementPattern {
  double max_gain_dbi = 8.0;
  double az_3db_deg = 65.0;
  double el_3db_deg = 65.0;
  double front_back_ratio_db = 30.0;
  double sla_v_db = 30.0;

  void validate() const;
};

enum class BeamKind { Wide, Narrow };

std::string to_string(BeamKind kind);

/// Planar array of dual-polarized positions. Spacings are in wavelengths.
struct ArrayConfig {
  int rows = 8;
  int cols = 12;
  double dh = 0.5;
  double dv = 0.7;
  double carrier_freq_hz = 28e9;
  double bandwidth_hz = 100e6;
  ElementPattern element;
  // Wide beams drive only a centred wb_rows x wb_cols sub-array so that each
  // one spans its GoB cell; narrow beams use the whole panel.
  int wb_rows = 3;
  int wb_cols = 4;

  void validate() const;
  int positions() const { return rows * cols; }
  /// The panel a beam of this kind is formed on.
  ArrayConfig active(BeamKind kind) const;
  int elements() const { return 2 * positions(); }
};

using BeamId = int;

/// Angular cell [az_lo, az_hi) x [el_lo, el_hi) in degrees.
struct Footprint {
  double az_lo = 0.0;
  double az_hi = 0.0;
  double el_lo = 0.0;
  double el_hi = 0.0;

  bool contains(Direction dir) const {
    return dir.az_deg >= az_lo && dir.az_deg <= az_hi && dir.el_deg >= el_lo && dir.el_deg <= el_hi;
  }
};

struct Beam {
  BeamId beam_id = 0;
  BeamKind kind = BeamKind::Wide;
  double az_steer_deg = 0.0;
  double el_steer_deg = 0.0;
  std::optional<BeamId> parent_wb;
  Footprint footprint;

  Direction steering() const { return {az_steer_deg, el_steer_deg}; }
};

struct FieldOfView {
  double az_span_deg = 120.0;  // centered on boresight
  double el_span_deg = 40.0;
  double el_top_deg = 0.0;     // upper edge; beams cover [el_top - span, el_top]
};

/// Wide beams form a wb_el_count x wb_az_count grid over the field of view.
/// `nb_per_wb` lists narrow-beam counts by wide-beam id (row-major, top row
/// first, west to east); each WB cell is tiled by up to `nb_rows_per_wb`
/// rows of narrow beams.
struct GobLayout {
  FieldOfView fov;
  int wb_az_count = 6;
  int wb_el_count = 2;
  int nb_rows_per_wb = 3;
  std::vector<int> nb_per_wb = {11, 11, 10, 10, 11, 11, 12, 12, 12, 12, 12, 12};
  int nb_total = 136;

  void validate() const;
};

class GridOfBeams {
 public:
  GridOfBeams(std::vector<Beam> wide, std::vector<Beam> narrow, int wb_az_count, int wb_el_count);

  const std::vector<Beam>& wide_beams() const { return wide_; }
  const std::vector<Beam>& narrow_beams() const { return narrow_; }
  const std::map<BeamId, BeamId>& nb_to_wb() const { return nb_to_wb_; }

  const Beam& beam(BeamId id) const;
  bool is_narrow(BeamId id) const;
  BeamId parent_of(BeamId nb) const { return nb_to_wb_.at(nb); }
  std::span<const BeamId> children(BeamId wb) const;

  /// WBs sharing an edge with `wb` in the WB grid, ascending id.
  std::vector<BeamId> adjacent_wbs(BeamId wb) const;
  /// Global narrow-beam elevation row (0 = top) of a narrow beam.
  int nb_row(BeamId nb) const { return nb_row_.at(nb); }

  int wb_az_count() const { return wb_az_count_; }
  int wb_el_count() const { return wb_el_count_; }

  /// `beam_id,kind,az_steer_deg,el_steer_deg,parent_wb` rows with header.
  std::string to_csv() const;

 private:
  std::vector<Beam> wide_;
  std::vector<Beam> narrow_;
  std::map<BeamId, BeamId> nb_to_wb_;
  std::map<BeamId, std::vector<BeamId>> children_;
  std::map<BeamId, int> nb_row_;
  std::map<BeamId, std::size_t> index_;
  int wb_az_count_;
  int wb_el_count_;
};

/// Element gain in dBi for a direction relative to element boresight.
double element_gain(const ElementPattern& pattern, double az_deg, double el_deg);

/// Normalized planar array factor power in dB for a beam steered at `steer`
/// observed from `dir`; equals 10*log10(rows*cols) at the steering direction.
double array_factor_db(const ArrayConfig& config, Direction steer, Direction dir);

/// Element gain plus array factor, in dBi.
double beam_gain(const ArrayConfig& config, const Beam& beam, double az_deg, double el_deg);

GridOfBeams synthesize_gob(const ArrayConfig& config, const GobLayout& layout);

}  // namespace beamprint::paam
