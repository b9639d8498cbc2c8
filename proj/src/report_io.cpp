#include "beamprint/report_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "beamprint/errors.hpp"

namespace beamprint::io {

namespace {

int report_width_of(std::span<const beam_mgmt::MeasurementReport> reports) {
  return reports.empty() ? 12 : static_cast<int>(reports.front().entries.size());
}

template <typename T>
T parse_field(std::string_view field, int line_no) {
  T value{};
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw DataError("reports line " + std::to_string(line_no) + ": cannot parse '" +
                    std::string(field) + "'");
  }
  return value;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace

std::string format_fixed(double value, int decimals) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::fixed,
                                       decimals);
  if (ec != std::errc()) return "nan";
  std::string s(buf, ptr);
  if (s.starts_with("-") && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

std::string reports_csv_header(int width) {
  std::string h = "t_s,ue_id,serving_nb";
  for (int i = 1; i <= width; ++i) h += ",nb_" + std::to_string(i);
  for (int i = 1; i <= width; ++i) h += ",rsrp_" + std::to_string(i);
  return h;
}

void write_reports_csv(std::ostream& out, std::span<const beam_mgmt::MeasurementReport> reports) {
  out << reports_csv_header(report_width_of(reports)) << '\n';
  std::string line;
  for (const auto& r : reports) {
    line.clear();
    line += format_fixed(r.t_s, 6);
    line += ',';
    line += std::to_string(r.ue_id);
    line += ',';
    line += std::to_string(r.serving_nb);
    for (const auto& e : r.entries) {
      line += ',';
      line += std::to_string(e.nb_index);
    }
    for (const auto& e : r.entries) {
      line += ',';
      line += format_fixed(e.rsrp_dbm, 4);
    }
    line += '\n';
    out << line;
  }
}

void write_reports_jsonl(std::ostream& out,
                         std::span<const beam_mgmt::MeasurementReport> reports) {
  for (const auto& r : reports) {
    nlohmann::ordered_json j;
    j["t_s"] = r.t_s;
    j["ue_id"] = r.ue_id;
    j["serving_nb"] = r.serving_nb;
    auto nbs = nlohmann::ordered_json::array();
    auto rsrps = nlohmann::ordered_json::array();
    for (const auto& e : r.entries) {
      nbs.push_back(e.nb_index);
      rsrps.push_back(e.rsrp_dbm);
    }
    j["nb"] = nbs;
    j["rsrp"] = rsrps;
    out << j.dump() << '\n';
  }
}

std::vector<beam_mgmt::MeasurementReport> read_reports_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("reports file is empty");
  const auto header = split_commas(line);
  if (header.size() < 5 || (header.size() - 3) % 2 != 0 || header[0] != "t_s" ||
      header[1] != "ue_id" || header[2] != "serving_nb") {
    throw DataError("reports header is not 't_s,ue_id,serving_nb,nb_*,rsrp_*'");
  }
  const std::size_t width = (header.size() - 3) / 2;
  if (line != reports_csv_header(static_cast<int>(width))) {
    throw DataError("reports header columns are out of order");
  }

  std::vector<beam_mgmt::MeasurementReport> reports;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_commas(line);
    if (fields.size() != header.size()) {
      throw DataError("reports line " + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " fields, got " +
                      std::to_string(fields.size()));
    }
    beam_mgmt::MeasurementReport r;
    r.t_s = parse_field<double>(fields[0], line_no);
    r.ue_id = parse_field<int>(fields[1], line_no);
    r.serving_nb = parse_field<int>(fields[2], line_no);
    r.entries.resize(width);
    for (std::size_t i = 0; i < width; ++i) {
      r.entries[i].nb_index = parse_field<int>(fields[3 + i], line_no);
      r.entries[i].rsrp_dbm = parse_field<double>(fields[3 + width + i], line_no);
    }
    reports.push_back(std::move(r));
  }
  return reports;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << content;
}

}  // namespace beamprint::io
