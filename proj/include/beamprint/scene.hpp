#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "beamprint/geometry.hpp"

namespace beamprint::scene {

struct SiteConfig {
  double sector_radius_m = 200.0;
  double bs_height_m = 30.0;
  double ue_height_m = 1.5;
  double protection_radius_m = 5.0;
  double fov_az_deg = 120.0;
  double fov_el_deg = 40.0;
  // Perpendicular distance of each lane's center line from the BS.
  double pavement_offset_m = 40.0;
  double street_offset_m = 80.0;
  double pavement_half_width_m = 2.0;
  double street_half_width_m = 4.5;
  // Lane ends are pulled this far inside the sector edges.
  double lane_end_margin_m = 1.0;

  void validate() const;
};

enum class LaneId { Pavement, Street };

struct LaneModel {
  LaneId lane_id = LaneId::Pavement;
  std::vector<Vec3> polyline;
  Vec3 direction;  // unit, west to east

  double length() const;
  /// Point at arc length `s`, shifted `lateral_m` to the left of travel (north).
  Vec3 point_at(double s, double lateral_m) const;
};

/// Single hexagonal sector with the BS at its southern corner, boresight
/// north. Ground coordinates: x east, y north, z up; the BS mast foot is the
/// origin.
struct Site {
  SiteConfig config;
  Vec3 bs_position;
  std::array<Vec3, 6> hexagon;  // ground-plane corners, counter-clockwise
  LaneModel pavement;
  LaneModel street;

  const LaneModel& lane(LaneId id) const { return id == LaneId::Pavement ? pavement : street; }
  bool inside_sector(Vec3 p) const;
  double ground_distance_to_bs(Vec3 p) const;
};

Site build_site(const SiteConfig& config);

enum class MainClass { Pedestrian, Bicycle, Car, Bus, Motorcycle };
inline constexpr std::array<MainClass, 5> kAllClasses = {
    MainClass::Pedestrian, MainClass::Bicycle, MainClass::Car, MainClass::Bus,
    MainClass::Motorcycle};

enum class SubBehavior { None, CrossesStreet };

struct UeClass {
  MainClass main = MainClass::Pedestrian;
  SubBehavior sub = SubBehavior::None;

  friend bool operator==(const UeClass&, const UeClass&) = default;
};

std::string to_string(MainClass c);
std::string to_string(SubBehavior s);
std::string to_string(LaneId l);
MainClass main_class_from_string(const std::string& s);
SubBehavior sub_behavior_from_string(const std::string& s);
LaneId lane_from_string(const std::string& s);
bool is_slow(MainClass c);

/// Mobility profile of one class. Lateral offsets are measured from the lane
/// center line, positive toward north.
struct ClassProfile {
  LaneId lane = LaneId::Pavement;
  double speed_min_mps = 1.0;
  double speed_max_mps = 1.8;
  double lateral_offset_m = 0.0;
  double lateral_jitter_m = 0.0;  // per-UE uniform +-jitter
  double min_headway_s = 0.0;
  int group_min = 1;
  int group_max = 1;
};

struct PopulationConfig {
  std::map<MainClass, int> counts;
  double crossing_fraction = 0.0;
  std::map<MainClass, ClassProfile> profiles = default_profiles();
  double spawn_window_s = 0.0;
  double intermediate_start_prob = 0.0;
  double intermediate_start_max_fraction = 0.8;
  double group_spacing_m = 1.0;
  // Crossing pedestrians walk north until this far past the street's far edge.
  double crossing_overshoot_m = 5.0;
  // Longest walk along the pavement before a crossing starts; 0 = anywhere
  // up to the lane end.
  double crossing_trigger_max_m = 25.0;
  // Share of crossing pedestrians already on the crossing leg when the run
  // starts, placed uniformly along it.
  double crossing_in_progress_prob = 0.5;

  static std::map<MainClass, ClassProfile> default_profiles();
  void validate() const;
};

struct UeTrack {
  int ue_id = 0;
  UeClass cls;
  LaneId lane = LaneId::Pavement;
  double speed_mps = 0.0;
  double start_offset_m = 0.0;
  double spawn_time_s = 0.0;
  std::optional<int> group_id;
  std::optional<double> cross_trigger_m;
  double lateral_offset_m = 0.0;
  double crossing_length_m = 0.0;

  /// Total path length from spawn to route completion.
  double route_length(const Site& site) const;
  /// Time at which the route is completed.
  double end_time(const Site& site) const { return spawn_time_s + route_length(site) / speed_mps; }
};

/// Draws the labeled population. Output is ordered by ue_id; ids are assigned
/// class by class in MainClass order.
std::vector<UeTrack> spawn_population(const Site& site, const PopulationConfig& config,
                                      std::uint64_t seed);

std::vector<UeTrack> spawn_population(const Site& site, const std::map<MainClass, int>& counts,
                                      double crossing_fraction, std::uint64_t seed);

std::optional<Vec3> position_at(const Site& site, const UeTrack& track, double t);

/// One JSON object per line: ue_id, class, sub_behavior, lane, speed_mps,
/// spawn_time_s, group_id plus trajectory detail.
std::string manifest_jsonl(const std::vector<UeTrack>& tracks);
std::vector<UeTrack> parse_manifest_jsonl(const std::string& text);

}  // namespace beamprint::scene
