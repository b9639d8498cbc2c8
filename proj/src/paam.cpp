#include "beamprint/paam.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace beamprint::paam {

void ElementPattern::validate() const {
  if (!(az_3db_deg > 0.0) || !(el_3db_deg > 0.0)) {
    throw std::invalid_argument("element pattern beamwidths must be positive");
  }
  if (!(front_back_ratio_db > 0.0) || !(sla_v_db > 0.0)) {
    throw std::invalid_argument("element pattern attenuation caps must be positive");
  }
}

void ArrayConfig::validate() const {
  if (rows < 1 || cols < 1) {
    throw std::invalid_argument("array needs at least one row and one column");
  }
  if (!(dh > 0.0) || !(dv > 0.0)) {
    throw std::invalid_argument("element spacings must be positive");
  }
  if (!(carrier_freq_hz > 0.0)) {
    throw std::invalid_argument("carrier frequency must be positive");
  }
  if (wb_rows < 1 || wb_cols < 1) {
    throw std::invalid_argument("wide-beam sub-array needs at least one row and one column");
  }
  element.validate();
}

ArrayConfig ArrayConfig::active(BeamKind kind) const {
  if (kind == BeamKind::Narrow) return *this;
  ArrayConfig sub = *this;
  sub.rows = std::min(rows, wb_rows);
  sub.cols = std::min(cols, wb_cols);
  return sub;
}

std::string to_string(BeamKind kind) { return kind == BeamKind::Wide ? "wide" : "narrow"; }

void GobLayout::validate() const {
  if (wb_az_count < 1 || wb_el_count < 1 || nb_rows_per_wb < 1) {
    throw std::invalid_argument("GoB layout counts must be positive");
  }
  if (nb_per_wb.size() != static_cast<std::size_t>(wb_az_count * wb_el_count)) {
    throw std::invalid_argument("nb_per_wb must list one count per wide beam");
  }
  if (std::any_of(nb_per_wb.begin(), nb_per_wb.end(), [](int n) { return n < 1; })) {
    throw std::invalid_argument("every wide beam needs at least one narrow beam");
  }
  const int total = std::accumulate(nb_per_wb.begin(), nb_per_wb.end(), 0);
  if (total != nb_total) {
    std::ostringstream os;
    os << "narrow beam counts sum to " << total << ", configured total is " << nb_total;
    throw std::invalid_argument(os.str());
  }
  const double el_bottom = fov.el_top_deg - fov.el_span_deg;
  if (!(fov.az_span_deg > 0.0) || fov.az_span_deg > 360.0 || !(fov.el_span_deg > 0.0) ||
      fov.el_top_deg > 90.0 || el_bottom < -90.0) {
    throw std::invalid_argument("field of view places beams outside the visible hemisphere");
  }
}

GridOfBeams::GridOfBeams(std::vector<Beam> wide, std::vector<Beam> narrow, int wb_az_count,
                         int wb_el_count)
    : wide_(std::move(wide)),
      narrow_(std::move(narrow)),
      wb_az_count_(wb_az_count),
      wb_el_count_(wb_el_count) {
  for (std::size_t i = 0; i < wide_.size(); ++i) {
    if (!index_.emplace(wide_[i].beam_id, i).second) {
      throw std::invalid_argument("duplicate beam id");
    }
    children_[wide_[i].beam_id];
  }
  for (std::size_t i = 0; i < narrow_.size(); ++i) {
    const Beam& nb = narrow_[i];
    if (!nb.parent_wb || !children_.contains(*nb.parent_wb)) {
      throw std::invalid_argument("narrow beam without a valid parent wide beam");
    }
    if (!index_.emplace(nb.beam_id, wide_.size() + i).second) {
      throw std::invalid_argument("duplicate beam id");
    }
    nb_to_wb_[nb.beam_id] = *nb.parent_wb;
    children_[*nb.parent_wb].push_back(nb.beam_id);
  }
  for (const auto& [wb, kids] : children_) {
    if (kids.empty()) {
      throw std::invalid_argument("wide beam without narrow beams");
    }
  }
  // Global NB rows: a WB row contributes nb_rows_per_wb rows, identified by
  // distinct steering elevations, top first.
  for (int wb_row = 0; wb_row < wb_el_count_; ++wb_row) {
    std::vector<double> elevations;
    for (const Beam& nb : narrow_) {
      if (*nb.parent_wb / wb_az_count_ == wb_row) {
        elevations.push_back(nb.el_steer_deg);
      }
    }
    std::sort(elevations.begin(), elevations.end(), std::greater<>());
    elevations.erase(std::unique(elevations.begin(), elevations.end(),
                                 [](double a, double b) { return std::abs(a - b) < 1e-9; }),
                     elevations.end());
    int base = 0;
    for (const auto& [id, row] : nb_row_) {
      base = std::max(base, row + 1);
    }
    for (const Beam& nb : narrow_) {
      if (*nb.parent_wb / wb_az_count_ != wb_row) continue;
      const auto it = std::find_if(elevations.begin(), elevations.end(), [&](double e) {
        return std::abs(e - nb.el_steer_deg) < 1e-9;
      });
      nb_row_[nb.beam_id] = base + static_cast<int>(it - elevations.begin());
    }
  }
}

const Beam& GridOfBeams::beam(BeamId id) const {
  const std::size_t i = index_.at(id);
  return i < wide_.size() ? wide_[i] : narrow_[i - wide_.size()];
}

bool GridOfBeams::is_narrow(BeamId id) const { return nb_to_wb_.contains(id); }

std::span<const BeamId> GridOfBeams::children(BeamId wb) const { return children_.at(wb); }

std::vector<BeamId> GridOfBeams::adjacent_wbs(BeamId wb) const {
  const int row = wb / wb_az_count_;
  const int col = wb % wb_az_count_;
  std::vector<BeamId> out;
  if (row > 0) out.push_back(wb - wb_az_count_);
  if (col > 0) out.push_back(wb - 1);
  if (col + 1 < wb_az_count_) out.push_back(wb + 1);
  if (row + 1 < wb_el_count_) out.push_back(wb + wb_az_count_);
  return out;
}

std::string GridOfBeams::to_csv() const {
  std::ostringstream os;
  os.precision(10);
  os << "beam_id,kind,az_steer_deg,el_steer_deg,parent_wb\n";
  auto emit = [&](const Beam& b) {
    os << b.beam_id << ',' << to_string(b.kind) << ',' << b.az_steer_deg << ',' << b.el_steer_deg
       << ',';
    if (b.parent_wb) os << *b.parent_wb;
    os << '\n';
  };
  for (const Beam& b : wide_) emit(b);
  for (const Beam& b : narrow_) emit(b);
  return os.str();
}

double element_gain(const ElementPattern& p, double az_deg, double el_deg) {
  const double a_h = std::min(12.0 * std::pow(az_deg / p.az_3db_deg, 2), p.front_back_ratio_db);
  const double a_v = std::min(12.0 * std::pow(el_deg / p.el_3db_deg, 2), p.sla_v_db);
  return p.max_gain_dbi - std::min(a_h + a_v, p.front_back_ratio_db);
}

namespace {

// |sum_{n<N} exp(j n psi)|^2 = sin^2(N psi / 2) / sin^2(psi / 2)
double linear_af_power(int n, double psi) {
  const double den = std::sin(0.5 * psi);
  if (std::abs(den) < 1e-12) {
    return static_cast<double>(n) * n;
  }
  const double num = std::sin(0.5 * n * psi);
  return (num * num) / (den * den);
}

}  // namespace

double array_factor_db(const ArrayConfig& config, Direction steer, Direction dir) {
  const double el = deg_to_rad(dir.el_deg);
  const double az = deg_to_rad(dir.az_deg);
  const double el0 = deg_to_rad(steer.el_deg);
  const double az0 = deg_to_rad(steer.az_deg);
  // Columns run horizontally (spacing dh), rows vertically (spacing dv).
  const double v = std::cos(el) * std::sin(az) - std::cos(el0) * std::sin(az0);
  const double w = std::sin(el) - std::sin(el0);
  const double two_pi = 2.0 * std::numbers::pi;
  const double power = linear_af_power(config.cols, two_pi * config.dh * v) *
                       linear_af_power(config.rows, two_pi * config.dv * w) /
                       static_cast<double>(config.positions());
  return 10.0 * std::log10(std::max(power, 1e-20));
}

double beam_gain(const ArrayConfig& config, const Beam& beam, double az_deg, double el_deg) {
  return element_gain(config.element, az_deg, el_deg) +
         array_factor_db(config.active(beam.kind), beam.steering(), {az_deg, el_deg});
}

GridOfBeams synthesize_gob(const ArrayConfig& config, const GobLayout& layout) {
  config.validate();
  layout.validate();

  const double az_min = -0.5 * layout.fov.az_span_deg;
  const double el_max = layout.fov.el_top_deg;
  const double wb_width = layout.fov.az_span_deg / layout.wb_az_count;
  const double wb_height = layout.fov.el_span_deg / layout.wb_el_count;

  std::vector<Beam> wide;
  struct PendingNb {
    int global_row;
    Beam beam;
  };
  std::vector<PendingNb> pending;

  for (int row = 0; row < layout.wb_el_count; ++row) {
    for (int col = 0; col < layout.wb_az_count; ++col) {
      const BeamId wb_id = row * layout.wb_az_count + col;
      Footprint cell{az_min + col * wb_width, az_min + (col + 1) * wb_width,
                     el_max - (row + 1) * wb_height, el_max - row * wb_height};
      wide.push_back({wb_id, BeamKind::Wide, 0.5 * (cell.az_lo + cell.az_hi),
                      0.5 * (cell.el_lo + cell.el_hi), std::nullopt, cell});

      const int n = layout.nb_per_wb[static_cast<std::size_t>(wb_id)];
      const int sub_rows = std::min(layout.nb_rows_per_wb, n);
      const double sub_height = wb_height / sub_rows;
      for (int r = 0; r < sub_rows; ++r) {
        const int in_row = n / sub_rows + (r < n % sub_rows ? 1 : 0);
        const double sub_width = wb_width / in_row;
        for (int c = 0; c < in_row; ++c) {
          Footprint sub{cell.az_lo + c * sub_width, cell.az_lo + (c + 1) * sub_width,
                        cell.el_hi - (r + 1) * sub_height, cell.el_hi - r * sub_height};
          pending.push_back({row * layout.nb_rows_per_wb + r,
                             {0, BeamKind::Narrow, 0.5 * (sub.az_lo + sub.az_hi),
                              0.5 * (sub.el_lo + sub.el_hi), wb_id, sub}});
        }
      }
    }
  }

  std::stable_sort(pending.begin(), pending.end(), [](const PendingNb& a, const PendingNb& b) {
    if (a.global_row != b.global_row) return a.global_row < b.global_row;
    return a.beam.az_steer_deg < b.beam.az_steer_deg;
  });
  std::vector<Beam> narrow;
  narrow.reserve(pending.size());
  BeamId next = static_cast<BeamId>(wide.size());
  for (auto& p : pending) {
    p.beam.beam_id = next++;
    narrow.push_back(p.beam);
  }
  return GridOfBeams(std::move(wide), std::move(narrow), layout.wb_az_count, layout.wb_el_count);
}

}  // namespace beamprint::paam
