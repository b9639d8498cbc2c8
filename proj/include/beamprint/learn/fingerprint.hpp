#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "beamprint/beam_mgmt.hpp"
#include "beamprint/learn/matrix.hpp"
#include "beamprint/learn/scaling.hpp"
#include "beamprint/paam.hpp"

namespace beamprint::learn {

/// How a reported narrow beam enters the feature vector: its raw index, or
/// its steering azimuth in degrees.
enum class NbEncoding { Index, Azimuth };

std::string to_string(NbEncoding e);
std::string to_string(ScalingKind k);
NbEncoding nb_encoding_from_string(const std::string& s);
ScalingKind scaling_kind_from_string(const std::string& s);

struct FingerprintOptions {
  int window = 3;  // W consecutive reports per fingerprint
  int stride = 1;  // start offset between successive windows of one UE
  NbEncoding nb_encoding = NbEncoding::Index;
  ScalingKind scaling = ScalingKind::MinMax;

  void validate() const;
};

/// One row per window. Layout per report (oldest first): R RSRPs then R beam
/// features, so a row has 2*R*W columns. `ue_id` and `t_s` (time of the
/// newest report) are keys for joining labels and never part of `values`.
struct FingerprintSet {
  Matrix values;
  std::vector<int> ue_id;
  std::vector<double> t_s;
  std::vector<std::string> header;
  int skipped_ues = 0;  // UEs with fewer than W reports

  Eigen::Index rows() const { return values.rows(); }
};

std::vector<std::string> fingerprint_header(int report_width, int window);

/// Unscaled fingerprints. Reports are put in canonical (ue_id, t) order first.
/// `gob` is required for NbEncoding::Azimuth.
FingerprintSet stack_fingerprints(std::span<const beam_mgmt::MeasurementReport> reports,
                                  const FingerprintOptions& options,
                                  const paam::GridOfBeams* gob = nullptr);

struct ScaledFingerprints {
  FingerprintSet set;
  ScalingModel scaler;
};

/// Stacks fingerprints and scales them: fits a new scaler when `scaler` is
/// empty, otherwise applies the given one unchanged.
ScaledFingerprints build_fingerprints(std::span<const beam_mgmt::MeasurementReport> reports,
                                      const FingerprintOptions& options,
                                      const std::optional<ScalingModel>& scaler,
                                      const paam::GridOfBeams* gob = nullptr);

/// Features-only CSV with the header row; keys are not written.
void write_fingerprint_csv(std::ostream& out, const FingerprintSet& set);
FingerprintSet read_fingerprint_csv(std::istream& in);

}  // namespace beamprint::learn
