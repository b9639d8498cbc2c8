#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "beamprint/beam_mgmt.hpp"

namespace beamprint::io {

/// `t_s,ue_id,serving_nb,nb_1..nb_R,rsrp_1..rsrp_R`
std::string reports_csv_header(int width);

void write_reports_csv(std::ostream& out, std::span<const beam_mgmt::MeasurementReport> reports);
void write_reports_jsonl(std::ostream& out, std::span<const beam_mgmt::MeasurementReport> reports);

/// Parses a report CSV; the report width is taken from the header. Throws
/// DataError with the offending line number.
std::vector<beam_mgmt::MeasurementReport> read_reports_csv(std::istream& in);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

/// Fixed-point decimal rendering used by every CSV writer.
std::string format_fixed(double value, int decimals);

}  // namespace beamprint::io
