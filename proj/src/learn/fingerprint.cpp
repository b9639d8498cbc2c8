#include "beamprint/learn/fingerprint.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "beamprint/errors.hpp"

namespace beamprint::learn {

std::string to_string(NbEncoding e) { return e == NbEncoding::Index ? "index" : "azimuth"; }

std::string to_string(ScalingKind k) { return k == ScalingKind::MinMax ? "minmax" : "zscore"; }

NbEncoding nb_encoding_from_string(const std::string& s) {
  if (s == "index") return NbEncoding::Index;
  if (s == "azimuth") return NbEncoding::Azimuth;
  throw std::invalid_argument("unknown beam encoding '" + s + "' (index|azimuth)");
}

ScalingKind scaling_kind_from_string(const std::string& s) {
  if (s == "minmax") return ScalingKind::MinMax;
  if (s == "zscore") return ScalingKind::ZScore;
  throw std::invalid_argument("unknown scaling '" + s + "' (minmax|zscore)");
}

void FingerprintOptions::validate() const {
  if (window < 1) throw std::invalid_argument("fingerprint window must be at least 1");
  if (stride < 1) throw std::invalid_argument("fingerprint stride must be at least 1");
}

std::vector<std::string> fingerprint_header(int report_width, int window) {
  std::vector<std::string> h;
  h.reserve(static_cast<std::size_t>(2 * report_width * window));
  for (int w = 0; w < window; ++w) {
    const std::string tag = "_w" + std::to_string(w) + "_";
    for (int i = 0; i < report_width; ++i) h.push_back("rsrp" + tag + std::to_string(i));
    for (int i = 0; i < report_width; ++i) h.push_back("nb" + tag + std::to_string(i));
  }
  return h;
}

FingerprintSet stack_fingerprints(std::span<const beam_mgmt::MeasurementReport> reports,
                                  const FingerprintOptions& options,
                                  const paam::GridOfBeams* gob) {
  options.validate();
  if (options.nb_encoding == NbEncoding::Azimuth && gob == nullptr) {
    throw std::invalid_argument("azimuth beam encoding needs the grid of beams");
  }
  const int width = reports.empty() ? 12 : static_cast<int>(reports.front().entries.size());
  const int window = options.window;

  std::vector<std::size_t> order(reports.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (reports[a].ue_id != reports[b].ue_id) return reports[a].ue_id < reports[b].ue_id;
    return reports[a].t_s < reports[b].t_s;
  });

  // Count rows first so the matrix is allocated once.
  struct Run {
    std::size_t begin;
    std::size_t end;
  };
  std::vector<Run> runs;
  int skipped = 0;
  std::size_t n_rows = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && reports[order[j]].ue_id == reports[order[i]].ue_id) ++j;
    const std::size_t n = j - i;
    if (n < static_cast<std::size_t>(window)) {
      ++skipped;
    } else {
      runs.push_back({i, j});
      n_rows += (n - static_cast<std::size_t>(window)) / static_cast<std::size_t>(options.stride) + 1;
    }
    i = j;
  }

  auto beam_feature = [&](paam::BeamId id) -> double {
    if (options.nb_encoding == NbEncoding::Index) return static_cast<double>(id);
    return id < 0 ? 0.0 : gob->beam(id).az_steer_deg;
  };

  FingerprintSet set;
  set.values.resize(static_cast<Eigen::Index>(n_rows), 2 * width * window);
  set.ue_id.reserve(n_rows);
  set.t_s.reserve(n_rows);
  set.header = fingerprint_header(width, window);
  set.skipped_ues = skipped;

  Eigen::Index row = 0;
  for (const Run& run : runs) {
    for (std::size_t start = run.begin; start + static_cast<std::size_t>(window) <= run.end;
         start += static_cast<std::size_t>(options.stride)) {
      for (int w = 0; w < window; ++w) {
        const auto& rep = reports[order[start + static_cast<std::size_t>(w)]];
        if (static_cast<int>(rep.entries.size()) != width) {
          throw DataError("reports have inconsistent widths");
        }
        const int base = 2 * width * w;
        for (int i = 0; i < width; ++i) {
          set.values(row, base + i) = rep.entries[static_cast<std::size_t>(i)].rsrp_dbm;
          set.values(row, base + width + i) =
              beam_feature(rep.entries[static_cast<std::size_t>(i)].nb_index);
        }
      }
      const auto& newest = reports[order[start + static_cast<std::size_t>(window) - 1]];
      set.ue_id.push_back(newest.ue_id);
      set.t_s.push_back(newest.t_s);
      ++row;
    }
  }
  return set;
}

ScaledFingerprints build_fingerprints(std::span<const beam_mgmt::MeasurementReport> reports,
                                      const FingerprintOptions& options,
                                      const std::optional<ScalingModel>& scaler,
                                      const paam::GridOfBeams* gob) {
  ScaledFingerprints out;
  out.set = stack_fingerprints(reports, options, gob);
  if (scaler) {
    out.scaler = *scaler;
  } else {
    if (out.set.rows() == 0) throw DataError("no fingerprints to fit the scaler on");
    out.scaler = ScalingModel::fit(out.set.values, options.scaling);
  }
  out.set.values = out.scaler.apply(out.set.values);
  return out;
}

void write_fingerprint_csv(std::ostream& out, const FingerprintSet& set) {
  for (std::size_t j = 0; j < set.header.size(); ++j) {
    if (j) out << ',';
    out << set.header[j];
  }
  out << '\n';
  char buf[32];
  for (Eigen::Index i = 0; i < set.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < set.values.cols(); ++j) {
      if (j) out << ',';
      const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), set.values(i, j));
      out.write(buf, ptr - buf);
    }
    out << '\n';
  }
}

FingerprintSet read_fingerprint_csv(std::istream& in) {
  FingerprintSet set;
  std::string line;
  if (!std::getline(in, line)) throw DataError("fingerprint file is empty");
  for (std::size_t start = 0;;) {
    const std::size_t pos = line.find(',', start);
    set.header.push_back(line.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  std::vector<double> flat;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::size_t cols = 0;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (p <= end) {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(p, end, v);
      if (ec != std::errc()) throw DataError("bad fingerprint value on row " + std::to_string(rows + 1));
      flat.push_back(v);
      ++cols;
      p = ptr + 1;
    }
    if (cols != set.header.size()) throw DataError("fingerprint row width does not match header");
    ++rows;
  }
  set.values = Eigen::Map<Matrix>(flat.data(), static_cast<Eigen::Index>(rows),
                                  static_cast<Eigen::Index>(set.header.size()));
  return set;
}

}  // namespace beamprint::learn
