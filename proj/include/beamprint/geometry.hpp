#pragma once

#include <cmath>
#include <numbers>

namespace beamprint {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
  friend bool operator==(const Vec3&, const Vec3&) = default;
};

inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(Vec3 a) { return std::sqrt(dot(a, a)); }
inline double horizontal_norm(Vec3 a) { return std::hypot(a.x, a.y); }

constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

/// Direction seen from the base station. Azimuth is measured from the array
/// boresight (+y, north) and grows toward east (+x); elevation is positive
/// above the horizon.
struct Direction {
  double az_deg = 0.0;
  double el_deg = 0.0;
};

Direction direction_from(Vec3 origin, Vec3 target);

/// Unit vector pointing along `dir` in site coordinates.
Vec3 unit_vector(Direction dir);

}  // namespace beamprint
