#include "beamprint/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace beamprint::scene {

namespace {

constexpr double kSqrt3 = 1.7320508075688772;

// Half width of the hexagon (corner at origin, center at (0, R)) at height y.
double hexagon_half_width(double radius, double y) {
  if (y <= 0.0 || y >= 2.0 * radius) return 0.0;
  if (y <= 0.5 * radius) return kSqrt3 * y;
  if (y <= 1.5 * radius) return 0.5 * kSqrt3 * radius;
  return kSqrt3 * (2.0 * radius - y);
}

LaneModel straight_lane(LaneId id, double y, double half_length, double z) {
  LaneModel lane;
  lane.lane_id = id;
  lane.polyline = {{-half_length, y, z}, {half_length, y, z}};
  lane.direction = {1.0, 0.0, 0.0};
  return lane;
}

}  // namespace

void SiteConfig::validate() const {
  if (!(sector_radius_m > 0.0) || !(bs_height_m > 0.0) || !(ue_height_m > 0.0) ||
      !(protection_radius_m > 0.0)) {
    throw std::invalid_argument("site lengths must be positive");
  }
  if (protection_radius_m >= sector_radius_m) {
    throw std::invalid_argument("protection radius must be smaller than the sector radius");
  }
  if (pavement_half_width_m < 0.0 || street_half_width_m < 0.0 || lane_end_margin_m < 0.0) {
    throw std::invalid_argument("lane widths and margins must be non-negative");
  }
  if (pavement_offset_m - pavement_half_width_m <= protection_radius_m) {
    throw std::invalid_argument("pavement lane violates the protection radius");
  }
  if (pavement_offset_m + pavement_half_width_m >= street_offset_m - street_half_width_m) {
    throw std::invalid_argument("pavement must lie between the BS and the street");
  }
  if (street_offset_m + street_half_width_m >= 2.0 * sector_radius_m) {
    throw std::invalid_argument("street lies outside the sector");
  }
}

double LaneModel::length() const {
  double total = 0.0;
  for (std::size_t i = 1; i < polyline.size(); ++i) {
    total += norm(polyline[i] - polyline[i - 1]);
  }
  return total;
}

Vec3 LaneModel::point_at(double s, double lateral_m) const {
  Vec3 p = polyline.back();
  double remaining = std::max(s, 0.0);
  for (std::size_t i = 1; i < polyline.size(); ++i) {
    const Vec3 seg = polyline[i] - polyline[i - 1];
    const double len = norm(seg);
    if (remaining <= len) {
      p = polyline[i - 1] + (remaining / len) * seg;
      break;
    }
    remaining -= len;
  }
  const Vec3 left{-direction.y, direction.x, 0.0};
  return p + lateral_m * left;
}

bool Site::inside_sector(Vec3 p) const {
  for (std::size_t i = 0; i < hexagon.size(); ++i) {
    const Vec3 a = hexagon[i];
    const Vec3 b = hexagon[(i + 1) % hexagon.size()];
    const double cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
    if (cross < -1e-9) return false;
  }
  return true;
}

double Site::ground_distance_to_bs(Vec3 p) const {
  return std::hypot(p.x - bs_position.x, p.y - bs_position.y);
}

Site build_site(const SiteConfig& config) {
  config.validate();
  Site site;
  site.config = config;
  site.bs_position = {0.0, 0.0, config.bs_height_m};
  const double r = config.sector_radius_m;
  for (int i = 0; i < 6; ++i) {
    const double ang = deg_to_rad(-90.0 + 60.0 * i);
    site.hexagon[static_cast<std::size_t>(i)] = {r * std::cos(ang), r + r * std::sin(ang), 0.0};
  }
  site.hexagon[0] = {0.0, 0.0, 0.0};

  auto make_lane = [&](LaneId id, double offset, double half_width) {
    const double half_length =
        hexagon_half_width(r, offset - half_width) - config.lane_end_margin_m;
    if (!(half_length > 0.0)) {
      throw std::invalid_argument("lane does not fit inside the sector");
    }
    return straight_lane(id, offset, half_length, config.ue_height_m);
  };
  site.pavement = make_lane(LaneId::Pavement, config.pavement_offset_m,
                            config.pavement_half_width_m);
  site.street = make_lane(LaneId::Street, config.street_offset_m, config.street_half_width_m);
  return site;
}

std::string to_string(MainClass c) {
  switch (c) {
    case MainClass::Pedestrian: return "pedestrian";
    case MainClass::Bicycle: return "bicycle";
    case MainClass::Car: return "car";
    case MainClass::Bus: return "bus";
    case MainClass::Motorcycle: return "motorcycle";
  }
  return "unknown";
}

std::string to_string(SubBehavior s) {
  return s == SubBehavior::CrossesStreet ? "crosses_street" : "none";
}

std::string to_string(LaneId l) { return l == LaneId::Pavement ? "pavement" : "street"; }

MainClass main_class_from_string(const std::string& s) {
  for (MainClass c : kAllClasses) {
    if (to_string(c) == s) return c;
  }
  throw std::invalid_argument("unknown UE class '" + s + "'");
}

SubBehavior sub_behavior_from_string(const std::string& s) {
  if (s == "none") return SubBehavior::None;
  if (s == "crosses_street") return SubBehavior::CrossesStreet;
  throw std::invalid_argument("unknown sub behavior '" + s + "'");
}

LaneId lane_from_string(const std::string& s) {
  if (s == "pavement") return LaneId::Pavement;
  if (s == "street") return LaneId::Street;
  throw std::invalid_argument("unknown lane '" + s + "'");
}

bool is_slow(MainClass c) { return c == MainClass::Pedestrian || c == MainClass::Bicycle; }

std::map<MainClass, ClassProfile> PopulationConfig::default_profiles() {
  return {
      {MainClass::Pedestrian, {LaneId::Pavement, 1.0, 1.8, -0.8, 0.5, 0.2, 1, 1}},
      {MainClass::Bicycle, {LaneId::Pavement, 3.5, 6.5, 1.2, 0.4, 0.5, 1, 1}},
      {MainClass::Car, {LaneId::Street, 10.0, 14.0, -0.5, 1.0, 0.8, 1, 2}},
      {MainClass::Bus, {LaneId::Street, 8.0, 11.0, -2.5, 0.5, 2.0, 1, 8}},
      {MainClass::Motorcycle, {LaneId::Street, 12.0, 17.0, 1.5, 1.0, 0.5, 1, 1}},
  };
}

void PopulationConfig::validate() const {
  for (const auto& [cls, n] : counts) {
    if (n < 0) throw std::invalid_argument("class counts must be non-negative");
    if (!profiles.contains(cls)) {
      throw std::invalid_argument("no mobility profile for class " + to_string(cls));
    }
  }
  if (crossing_fraction < 0.0 || crossing_fraction > 1.0) {
    throw std::invalid_argument("crossing fraction must lie in [0, 1]");
  }
  if (spawn_window_s < 0.0 || intermediate_start_prob < 0.0 || intermediate_start_prob > 1.0 ||
      intermediate_start_max_fraction < 0.0 || intermediate_start_max_fraction >= 1.0 ||
      crossing_trigger_max_m < 0.0 || crossing_in_progress_prob < 0.0 ||
      crossing_in_progress_prob > 1.0) {
    throw std::invalid_argument("invalid spawn randomization settings");
  }
  for (const auto& [cls, p] : profiles) {
    if (!(p.speed_min_mps > 0.0) || p.speed_max_mps < p.speed_min_mps) {
      throw std::invalid_argument("invalid speed band for " + to_string(cls));
    }
    if (p.group_min < 1 || p.group_max < p.group_min || p.lateral_jitter_m < 0.0 ||
        p.min_headway_s < 0.0) {
      throw std::invalid_argument("invalid mobility profile for " + to_string(cls));
    }
  }
}

double UeTrack::route_length(const Site& site) const {
  const double along = cross_trigger_m ? *cross_trigger_m : site.lane(lane).length();
  return along - start_offset_m + crossing_length_m;
}

std::vector<UeTrack> spawn_population(const Site& site, const PopulationConfig& config,
                                      std::uint64_t seed) {
  config.validate();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  std::vector<UeTrack> tracks;
  int next_group = 0;
  for (MainClass cls : kAllClasses) {
    const auto count_it = config.counts.find(cls);
    const int count = count_it == config.counts.end() ? 0 : count_it->second;
    if (count == 0) continue;
    const ClassProfile& prof = config.profiles.at(cls);
    const LaneModel& lane = site.lane(prof.lane);
    const double lane_len = lane.length();
    const double half_width = prof.lane == LaneId::Pavement ? site.config.pavement_half_width_m
                                                            : site.config.street_half_width_m;

    // Groups are drawn until the class total is reached; the last one may be cut short.
    std::vector<int> group_sizes;
    for (int remaining = count; remaining > 0;) {
      std::uniform_int_distribution<int> gsize(prof.group_min, prof.group_max);
      const int g = std::min(gsize(rng), remaining);
      group_sizes.push_back(g);
      remaining -= g;
    }

    // Sorted uniform draws on a window shortened by the total headway, then
    // re-expanded: every gap is >= headway and every spawn stays inside the
    // window. The headway shrinks when the class cannot fit otherwise.
    const std::size_t n_groups = group_sizes.size();
    const double headway =
        n_groups > 1 ? std::min(prof.min_headway_s,
                                config.spawn_window_s / static_cast<double>(n_groups - 1))
                     : 0.0;
    const double free_window = std::max(0.0, config.spawn_window_s - headway * static_cast<double>(n_groups - 1));
    std::vector<double> spawn(n_groups);
    for (double& s : spawn) s = uniform(0.0, free_window);
    std::sort(spawn.begin(), spawn.end());
    for (std::size_t i = 0; i < n_groups; ++i) spawn[i] += headway * static_cast<double>(i);

    for (std::size_t g = 0; g < group_sizes.size(); ++g) {
      const int size = group_sizes[g];
      const double speed = uniform(prof.speed_min_mps, prof.speed_max_mps);
      double lateral = prof.lateral_offset_m + uniform(-prof.lateral_jitter_m, prof.lateral_jitter_m);
      lateral = std::clamp(lateral, -half_width, half_width);
      double start = 0.0;
      if (unit(rng) < config.intermediate_start_prob) {
        start = uniform(0.0, config.intermediate_start_max_fraction * lane_len);
      }
      start = std::min(start, std::max(0.0, lane_len - config.group_spacing_m * size - 1.0));
      const std::optional<int> group_id =
          size > 1 ? std::optional<int>(next_group++) : std::nullopt;
      for (int m = 0; m < size; ++m) {
        UeTrack t;
        t.ue_id = static_cast<int>(tracks.size());
        t.cls = {cls, SubBehavior::None};
        t.lane = prof.lane;
        t.speed_mps = speed;
        t.start_offset_m = start + config.group_spacing_m * m;
        t.spawn_time_s = spawn[g];
        t.group_id = group_id;
        t.lateral_offset_m = lateral;
        tracks.push_back(t);
      }
    }
  }

  std::vector<std::size_t> peds;
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    if (tracks[i].cls.main == MainClass::Pedestrian) peds.push_back(i);
  }
  const auto n_cross =
      static_cast<std::size_t>(std::llround(config.crossing_fraction * static_cast<double>(peds.size())));
  std::shuffle(peds.begin(), peds.end(), rng);
  std::sort(peds.begin(), peds.begin() + static_cast<std::ptrdiff_t>(n_cross));
  const double target_y = site.config.street_offset_m + site.config.street_half_width_m +
                          config.crossing_overshoot_m;
  for (std::size_t k = 0; k < n_cross; ++k) {
    UeTrack& t = tracks[peds[k]];
    const LaneModel& lane = site.lane(t.lane);
    t.cls.sub = SubBehavior::CrossesStreet;
    const double last = config.crossing_trigger_max_m > 0.0
                            ? std::min(lane.length(), t.start_offset_m + config.crossing_trigger_max_m)
                            : lane.length();
    t.cross_trigger_m = uniform(t.start_offset_m, last);
    t.crossing_length_m = target_y - lane.point_at(0.0, t.lateral_offset_m).y;
    if (unit(rng) < config.crossing_in_progress_prob) {
      t.cross_trigger_m = t.start_offset_m;
      t.start_offset_m += uniform(0.0, t.crossing_length_m);
    }
  }
  return tracks;
}

std::vector<UeTrack> spawn_population(const Site& site, const std::map<MainClass, int>& counts,
                                      double crossing_fraction, std::uint64_t seed) {
  PopulationConfig config;
  config.counts = counts;
  config.crossing_fraction = crossing_fraction;
  return spawn_population(site, config, seed);
}

std::optional<Vec3> position_at(const Site& site, const UeTrack& track, double t) {
  if (t < track.spawn_time_s) return std::nullopt;
  const double travelled = track.speed_mps * (t - track.spawn_time_s);
  if (travelled > track.route_length(site) + 1e-9) return std::nullopt;
  const LaneModel& lane = site.lane(track.lane);
  const double s = track.start_offset_m + travelled;
  if (!track.cross_trigger_m || s <= *track.cross_trigger_m) {
    return lane.point_at(s, track.lateral_offset_m);
  }
  const double north = std::min(s - *track.cross_trigger_m, track.crossing_length_m);
  return lane.point_at(*track.cross_trigger_m, track.lateral_offset_m + north);
}

std::string manifest_jsonl(const std::vector<UeTrack>& tracks) {
  std::string out;
  for (const UeTrack& t : tracks) {
    nlohmann::ordered_json j;
    j["ue_id"] = t.ue_id;
    j["class"] = to_string(t.cls.main);
    j["sub_behavior"] = to_string(t.cls.sub);
    j["lane"] = to_string(t.lane);
    j["speed_mps"] = t.speed_mps;
    j["spawn_time_s"] = t.spawn_time_s;
    j["group_id"] = t.group_id ? nlohmann::ordered_json(*t.group_id) : nlohmann::ordered_json();
    j["start_offset_m"] = t.start_offset_m;
    j["lateral_offset_m"] = t.lateral_offset_m;
    j["cross_trigger_m"] =
        t.cross_trigger_m ? nlohmann::ordered_json(*t.cross_trigger_m) : nlohmann::ordered_json();
    j["crossing_length_m"] = t.crossing_length_m;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<UeTrack> parse_manifest_jsonl(const std::string& text) {
  std::vector<UeTrack> tracks;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      UeTrack t;
      t.ue_id = j.at("ue_id").get<int>();
      t.cls = {main_class_from_string(j.at("class").get<std::string>()),
               sub_behavior_from_string(j.at("sub_behavior").get<std::string>())};
      t.lane = lane_from_string(j.at("lane").get<std::string>());
      t.speed_mps = j.at("speed_mps").get<double>();
      t.spawn_time_s = j.at("spawn_time_s").get<double>();
      if (!j.at("group_id").is_null()) t.group_id = j.at("group_id").get<int>();
      t.start_offset_m = j.value("start_offset_m", 0.0);
      t.lateral_offset_m = j.value("lateral_offset_m", 0.0);
      if (j.contains("cross_trigger_m") && !j.at("cross_trigger_m").is_null()) {
        t.cross_trigger_m = j.at("cross_trigger_m").get<double>();
      }
      t.crossing_length_m = j.value("crossing_length_m", 0.0);
      tracks.push_back(t);
    } catch (const std::exception& e) {
      throw std::runtime_error("manifest line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return tracks;
}

}  // namespace beamprint::scene
