#include "beamprint/app/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <set>
#include <stdexcept>

#include "beamprint/errors.hpp"
#include "beamprint/report_io.hpp"

extern char** environ;

namespace beamprint::app {

using nlohmann::json;

namespace {

std::string to_string(beam_mgmt::SweepScope s) {
  return s == beam_mgmt::SweepScope::ServingWbOnly ? "serving_wb" : "serving_plus_neighbors";
}

std::string to_string(beam_mgmt::PaddingRule p) {
  return p == beam_mgmt::PaddingRule::AdjacentWb ? "adjacent_wb" : "sentinel";
}

// Tracks which keys of one JSON object were consumed so leftovers can be
// reported as typos.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_.empty() ? "configuration" : path_, "expected an object");
  }
  Section(const Section&) = delete;
  ~Section() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.contains(key)) fail(join(key), "unknown key");
    }
  }

  const json* find(const std::string& key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  Section sub(const std::string& key) {
    const json* v = find(key);
    return Section(v ? *v : empty(), join(key));
  }

  void read(const std::string& key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) fail(join(key), "expected a number");
      out = v->get<double>();
    }
  }
  void read(const std::string& key, int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) fail(join(key), "expected an integer");
      out = v->get<int>();
    }
  }
  void read(const std::string& key, std::uint64_t& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_unsigned()) fail(join(key), "expected a non-negative integer");
      out = v->get<std::uint64_t>();
    }
  }
  void read(const std::string& key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) fail(join(key), "expected a string");
      out = v->get<std::string>();
    }
  }
  template <typename T>
  void read(const std::string& key, std::vector<T>& out) {
    if (const json* v = find(key)) {
      if (!v->is_array()) fail(join(key), "expected an array");
      std::vector<T> tmp;
      for (const json& e : *v) {
        if (!e.is_number_integer() || (std::is_unsigned_v<T> && !e.is_number_unsigned())) {
          fail(join(key), "expected an array of integers");
        }
        tmp.push_back(e.get<T>());
      }
      out = std::move(tmp);
    }
  }
  template <typename E, typename Parse>
  void read_enum(const std::string& key, E& out, Parse parse) {
    std::string s;
    read(key, s);
    if (s.empty()) return;
    try {
      out = parse(s);
    } catch (const std::invalid_argument& e) {
      fail(join(key), e.what());
    }
  }

  std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  const json& raw() const { return j_; }

  [[noreturn]] static void fail(const std::string& path, const std::string& what) {
    throw ConfigError(path + ": " + what);
  }

 private:
  static const json& empty() {
    static const json e = json::object();
    return e;
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

beam_mgmt::SweepScope sweep_scope_from_string(const std::string& s) {
  if (s == "serving_wb") return beam_mgmt::SweepScope::ServingWbOnly;
  if (s == "serving_plus_neighbors") return beam_mgmt::SweepScope::ServingPlusNeighbors;
  throw std::invalid_argument("expected serving_wb or serving_plus_neighbors");
}

beam_mgmt::PaddingRule padding_from_string(const std::string& s) {
  if (s == "adjacent_wb") return beam_mgmt::PaddingRule::AdjacentWb;
  if (s == "sentinel") return beam_mgmt::PaddingRule::Sentinel;
  throw std::invalid_argument("expected adjacent_wb or sentinel");
}

void read_profile(Section& s, scene::ClassProfile& p) {
  s.read_enum("lane", p.lane, scene::lane_from_string);
  s.read("speed_min_mps", p.speed_min_mps);
  s.read("speed_max_mps", p.speed_max_mps);
  s.read("lateral_offset_m", p.lateral_offset_m);
  s.read("lateral_jitter_m", p.lateral_jitter_m);
  s.read("min_headway_s", p.min_headway_s);
  s.read("group_min", p.group_min);
  s.read("group_max", p.group_max);
}

json profile_json(const scene::ClassProfile& p) {
  return {{"lane", scene::to_string(p.lane)},
          {"speed_min_mps", p.speed_min_mps},
          {"speed_max_mps", p.speed_max_mps},
          {"lateral_offset_m", p.lateral_offset_m},
          {"lateral_jitter_m", p.lateral_jitter_m},
          {"min_headway_s", p.min_headway_s},
          {"group_min", p.group_min},
          {"group_max", p.group_max}};
}

// Byte offset -> 1-based line and column.
std::pair<int, int> line_col(const std::string& text, std::size_t offset) {
  int line = 1;
  int col = 1;
  for (std::size_t i = 0; i < std::min(offset, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

AppConfig::AppConfig() {
  population.counts = {{scene::MainClass::Pedestrian, 424},
                       {scene::MainClass::Bicycle, 165},
                       {scene::MainClass::Car, 320},
                       {scene::MainClass::Bus, 180},
                       {scene::MainClass::Motorcycle, 130}};
  population.spawn_window_s = 10.0;
  population.intermediate_start_prob = 0.5;
  learn.fingerprint.stride = 5;
}

double AppConfig::crossing_fraction() const {
  const auto it = population.counts.find(scene::MainClass::Pedestrian);
  const int peds = it == population.counts.end() ? 0 : it->second;
  return peds > 0 ? static_cast<double>(crossing_pedestrians) / peds : 0.0;
}

void AppConfig::validate() const {
  const auto it = population.counts.find(scene::MainClass::Pedestrian);
  const int peds = it == population.counts.end() ? 0 : it->second;
  auto guard = [](const std::string& section, auto&& check) {
    try {
      check();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(section + ": " + e.what());
    }
  };
  guard("site", [&] { site.validate(); });
  guard("population", [&] { population.validate(); });
  if (crossing_pedestrians < 0 || crossing_pedestrians > peds) {
    throw ConfigError("population.crossing_pedestrians: must lie in [0, pedestrian count]");
  }
  guard("array", [&] { array.validate(); });
  guard("gob", [&] { gob.validate(); });
  guard("link", [&] { link.validate(); });
  guard("simulation", [&] {
    if (simulation.seeds.empty()) throw std::invalid_argument("seeds must not be empty");
    simulation.validate(paam::synthesize_gob(array, gob));
  });
  guard("learn.fingerprint", [&] { learn.fingerprint.validate(); });
  if (!(learn.test_fraction > 0.0 && learn.test_fraction < 1.0)) {
    throw ConfigError("learn.test_fraction: must lie in (0, 1)");
  }
  if (learn.pca_components < 1) throw ConfigError("learn.pca_components: must be at least 1");
  if (learn.kmeans_restarts < 1) throw ConfigError("learn.kmeans_restarts: must be at least 1");
  if (learn.kmeans_max_iter < 1) throw ConfigError("learn.kmeans_max_iter: must be at least 1");
}

AppConfig config_from_json(const json& j) {
  AppConfig c;
  Section root(j, "");
  {
    Section s = root.sub("site");
    auto& v = c.site;
    s.read("sector_radius_m", v.sector_radius_m);
    s.read("bs_height_m", v.bs_height_m);
    s.read("ue_height_m", v.ue_height_m);
    s.read("protection_radius_m", v.protection_radius_m);
    s.read("fov_az_deg", v.fov_az_deg);
    s.read("fov_el_deg", v.fov_el_deg);
    s.read("pavement_offset_m", v.pavement_offset_m);
    s.read("street_offset_m", v.street_offset_m);
    s.read("pavement_half_width_m", v.pavement_half_width_m);
    s.read("street_half_width_m", v.street_half_width_m);
    s.read("lane_end_margin_m", v.lane_end_margin_m);
  }
  {
    Section s = root.sub("population");
    auto& v = c.population;
    if (s.find("counts")) {
      Section counts = s.sub("counts");
      std::map<scene::MainClass, int> parsed;
      for (const auto& [key, value] : counts.raw().items()) {
        scene::MainClass cls;
        try {
          cls = scene::main_class_from_string(key);
        } catch (const std::invalid_argument&) {
          Section::fail(counts.join(key), "unknown class");
        }
        int n = 0;
        counts.read(key, n);
        parsed[cls] = n;
      }
      v.counts = std::move(parsed);
    }
    s.read("crossing_pedestrians", c.crossing_pedestrians);
    s.read("spawn_window_s", v.spawn_window_s);
    s.read("intermediate_start_prob", v.intermediate_start_prob);
    s.read("intermediate_start_max_fraction", v.intermediate_start_max_fraction);
    s.read("group_spacing_m", v.group_spacing_m);
    s.read("crossing_overshoot_m", v.crossing_overshoot_m);
    s.read("crossing_trigger_max_m", v.crossing_trigger_max_m);
    s.read("crossing_in_progress_prob", v.crossing_in_progress_prob);
    if (s.find("profiles")) {
      Section profiles = s.sub("profiles");
      for (const auto& [key, value] : profiles.raw().items()) {
        scene::MainClass cls;
        try {
          cls = scene::main_class_from_string(key);
        } catch (const std::invalid_argument&) {
          Section::fail(profiles.join(key), "unknown class");
        }
        Section p = profiles.sub(key);
        read_profile(p, v.profiles[cls]);
      }
    }
  }
  {
    Section s = root.sub("array");
    auto& v = c.array;
    s.read("rows", v.rows);
    s.read("cols", v.cols);
    s.read("dh", v.dh);
    s.read("dv", v.dv);
    s.read("carrier_freq_hz", v.carrier_freq_hz);
    s.read("bandwidth_hz", v.bandwidth_hz);
    s.read("wb_rows", v.wb_rows);
    s.read("wb_cols", v.wb_cols);
    Section e = s.sub("element");
    e.read("max_gain_dbi", v.element.max_gain_dbi);
    e.read("az_3db_deg", v.element.az_3db_deg);
    e.read("el_3db_deg", v.element.el_3db_deg);
    e.read("front_back_ratio_db", v.element.front_back_ratio_db);
    e.read("sla_v_db", v.element.sla_v_db);
  }
  {
    Section s = root.sub("gob");
    auto& v = c.gob;
    Section fov = s.sub("fov");
    fov.read("az_span_deg", v.fov.az_span_deg);
    fov.read("el_span_deg", v.fov.el_span_deg);
    fov.read("el_top_deg", v.fov.el_top_deg);
    s.read("wb_az_count", v.wb_az_count);
    s.read("wb_el_count", v.wb_el_count);
    s.read("nb_rows_per_wb", v.nb_rows_per_wb);
    s.read("nb_per_wb", v.nb_per_wb);
    s.read("nb_total", v.nb_total);
  }
  {
    Section s = root.sub("link");
    auto& v = c.link;
    s.read("tx_power_dbm_per_beam", v.tx_power_dbm_per_beam);
    s.read("noise_figure_db", v.noise_figure_db);
    s.read("shadow_sigma_db", v.shadow_sigma_db);
    s.read("ue_gain_dbi", v.ue_gain_dbi);
    s.read("xpol_gain_db", v.xpol_gain_db);
  }
  {
    Section s = root.sub("simulation");
    auto& v = c.simulation;
    s.read("report_period_s", v.report_period_s);
    s.read("duration_s", v.duration_s);
    s.read("seeds", v.seeds);
    s.read("switch_hysteresis_db", v.switch_hysteresis_db);
    s.read_enum("sweep_scope", v.sweep_scope, sweep_scope_from_string);
    s.read_enum("padding", v.padding, padding_from_string);
    s.read("report_width", v.report_width);
    s.read("reacquisition_margin_db", v.reacquisition_margin_db);
    s.read("report_jitter_s", v.report_jitter_s);
  }
  {
    Section s = root.sub("learn");
    auto& v = c.learn;
    Section f = s.sub("fingerprint");
    f.read("window", v.fingerprint.window);
    f.read("stride", v.fingerprint.stride);
    f.read_enum("nb_encoding", v.fingerprint.nb_encoding, learn::nb_encoding_from_string);
    f.read_enum("scaling", v.fingerprint.scaling, learn::scaling_kind_from_string);
    s.read("test_fraction", v.test_fraction);
    s.read("seed", v.seed);
    s.read("pca_components", v.pca_components);
    s.read("kmeans_restarts", v.kmeans_restarts);
    s.read("kmeans_max_iter", v.kmeans_max_iter);
  }
  c.validate();
  return c;
}

json config_to_json(const AppConfig& c) {
  json counts = json::object();
  for (const auto& [cls, n] : c.population.counts) counts[scene::to_string(cls)] = n;
  json profiles = json::object();
  for (const auto& [cls, p] : c.population.profiles) profiles[scene::to_string(cls)] = profile_json(p);
  const auto& el = c.array.element;
  return {
      {"site",
       {{"sector_radius_m", c.site.sector_radius_m},
        {"bs_height_m", c.site.bs_height_m},
        {"ue_height_m", c.site.ue_height_m},
        {"protection_radius_m", c.site.protection_radius_m},
        {"fov_az_deg", c.site.fov_az_deg},
        {"fov_el_deg", c.site.fov_el_deg},
        {"pavement_offset_m", c.site.pavement_offset_m},
        {"street_offset_m", c.site.street_offset_m},
        {"pavement_half_width_m", c.site.pavement_half_width_m},
        {"street_half_width_m", c.site.street_half_width_m},
        {"lane_end_margin_m", c.site.lane_end_margin_m}}},
      {"population",
       {{"counts", counts},
        {"crossing_pedestrians", c.crossing_pedestrians},
        {"spawn_window_s", c.population.spawn_window_s},
        {"intermediate_start_prob", c.population.intermediate_start_prob},
        {"intermediate_start_max_fraction", c.population.intermediate_start_max_fraction},
        {"group_spacing_m", c.population.group_spacing_m},
        {"crossing_overshoot_m", c.population.crossing_overshoot_m},
        {"crossing_trigger_max_m", c.population.crossing_trigger_max_m},
        {"crossing_in_progress_prob", c.population.crossing_in_progress_prob},
        {"profiles", profiles}}},
      {"array",
       {{"rows", c.array.rows},
        {"cols", c.array.cols},
        {"dh", c.array.dh},
        {"dv", c.array.dv},
        {"carrier_freq_hz", c.array.carrier_freq_hz},
        {"bandwidth_hz", c.array.bandwidth_hz},
        {"wb_rows", c.array.wb_rows},
        {"wb_cols", c.array.wb_cols},
        {"element",
         {{"max_gain_dbi", el.max_gain_dbi},
          {"az_3db_deg", el.az_3db_deg},
          {"el_3db_deg", el.el_3db_deg},
          {"front_back_ratio_db", el.front_back_ratio_db},
          {"sla_v_db", el.sla_v_db}}}}},
      {"gob",
       {{"fov",
         {{"az_span_deg", c.gob.fov.az_span_deg},
          {"el_span_deg", c.gob.fov.el_span_deg},
          {"el_top_deg", c.gob.fov.el_top_deg}}},
        {"wb_az_count", c.gob.wb_az_count},
        {"wb_el_count", c.gob.wb_el_count},
        {"nb_rows_per_wb", c.gob.nb_rows_per_wb},
        {"nb_per_wb", c.gob.nb_per_wb},
        {"nb_total", c.gob.nb_total}}},
      {"link",
       {{"tx_power_dbm_per_beam", c.link.tx_power_dbm_per_beam},
        {"noise_figure_db", c.link.noise_figure_db},
        {"shadow_sigma_db", c.link.shadow_sigma_db},
        {"ue_gain_dbi", c.link.ue_gain_dbi},
        {"xpol_gain_db", c.link.xpol_gain_db}}},
      {"simulation",
       {{"report_period_s", c.simulation.report_period_s},
        {"duration_s", c.simulation.duration_s},
        {"seeds", c.simulation.seeds},
        {"switch_hysteresis_db", c.simulation.switch_hysteresis_db},
        {"sweep_scope", to_string(c.simulation.sweep_scope)},
        {"padding", to_string(c.simulation.padding)},
        {"report_width", c.simulation.report_width},
        {"reacquisition_margin_db", c.simulation.reacquisition_margin_db},
        {"report_jitter_s", c.simulation.report_jitter_s}}},
      {"learn",
       {{"fingerprint",
         {{"window", c.learn.fingerprint.window},
          {"stride", c.learn.fingerprint.stride},
          {"nb_encoding", learn::to_string(c.learn.fingerprint.nb_encoding)},
          {"scaling", learn::to_string(c.learn.fingerprint.scaling)}}},
        {"test_fraction", c.learn.test_fraction},
        {"seed", c.learn.seed},
        {"pca_components", c.learn.pca_components},
        {"kmeans_restarts", c.learn.kmeans_restarts},
        {"kmeans_max_iter", c.learn.kmeans_max_iter}}},
  };
}

json parse_config_text(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_col(text, e.byte > 0 ? e.byte - 1 : 0);
    std::string what = e.what();
    // Drop nlohmann's "[json.exception.parse_error.101] " prefix.
    if (const auto p = what.find("] "); p != std::string::npos) what = what.substr(p + 2);
    throw ConfigError(origin + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + what);
  }
}

void apply_env_overrides(json& j, const std::map<std::string, std::string>& env,
                         const std::string& prefix) {
  for (const auto& [name, raw] : env) {
    if (name.size() <= prefix.size() || name.compare(0, prefix.size(), prefix) != 0) continue;
    std::string key = name.substr(prefix.size());
    std::transform(key.begin(), key.end(), key.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    json* node = &j;
    std::size_t start = 0;
    while (true) {
      const std::size_t sep = key.find("__", start);
      const std::string part = key.substr(start, sep == std::string::npos ? sep : sep - start);
      if (part.empty()) throw ConfigError("environment " + name + ": empty key segment");
      if (!node->is_object()) throw ConfigError("environment " + name + ": parent is not an object");
      if (sep == std::string::npos) {
        json value = json::parse(raw, nullptr, false);
        (*node)[part] = value.is_discarded() ? json(raw) : value;
        break;
      }
      node = &(*node)[part];
      if (node->is_null()) *node = json::object();
      start = sep + 2;
    }
  }
}

std::map<std::string, std::string> current_environment() {
  std::map<std::string, std::string> env;
  for (char** e = environ; e && *e; ++e) {
    const std::string entry = *e;
    const auto eq = entry.find('=');
    if (eq != std::string::npos) env[entry.substr(0, eq)] = entry.substr(eq + 1);
  }
  return env;
}

AppConfig load_config(const std::filesystem::path& path,
                      const std::map<std::string, std::string>& env) {
  json j = json::object();
  if (!path.empty()) {
    std::string text;
    try {
      text = io::read_text_file(path);
    } catch (const std::exception& e) {
      throw ConfigError("cannot read config " + path.string() + ": " + e.what());
    }
    j = parse_config_text(text, path.string());
  }
  apply_env_overrides(j, env);
  return config_from_json(j);
}

std::string config_hash(const json& resolved) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : resolved.dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace beamprint::app
