#include "beamprint/geometry.hpp"

namespace beamprint {

Direction direction_from(Vec3 origin, Vec3 target) {
  const Vec3 d = target - origin;
  return {rad_to_deg(std::atan2(d.x, d.y)), rad_to_deg(std::atan2(d.z, horizontal_norm(d)))};
}

Vec3 unit_vector(Direction dir) {
  const double az = deg_to_rad(dir.az_deg);
  const double el = deg_to_rad(dir.el_deg);
  return {std::cos(el) * std::sin(az), std::cos(el) * std::cos(az), std::sin(el)};
}

}  // namespace beamprint
