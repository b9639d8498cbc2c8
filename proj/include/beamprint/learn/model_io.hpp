#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "beamprint/learn/fingerprint.hpp"
#include "beamprint/learn/pca.hpp"
#include "beamprint/learn/scaling.hpp"
#include "beamprint/learn/trees.hpp"

namespace beamprint::learn {

inline constexpr const char* kModelFormat = "beamprint-model";
inline constexpr int kModelVersion = 1;

/// Everything needed to score a report stream: fingerprint layout, the
/// training scaler, an optional PCA stage and the ensemble itself.
struct ModelBundle {
  std::string recipe;
  std::vector<std::string> class_names;
  int report_width = 12;
  FingerprintOptions fingerprint;
  ScalingModel scaler;
  std::optional<PcaModel> pca;
  TreeEnsemble ensemble;
  std::string settings_json = "{}";  // free-form training settings, kept for replay

  int input_dim() const { return 2 * report_width * fingerprint.window; }
  Labels predict(const Matrix& fingerprints) const;
};

/// CBOR container; doubles are stored bit-exactly. Throws ModelError on any
/// unreadable or inconsistent content.
std::vector<std::uint8_t> encode_model(const ModelBundle& bundle);
ModelBundle decode_model(const std::vector<std::uint8_t>& bytes);

void save_model(const std::filesystem::path& path, const ModelBundle& bundle);
ModelBundle load_model(const std::filesystem::path& path);

}  // namespace beamprint::learn
