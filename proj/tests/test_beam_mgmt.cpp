#include <doctest.h>

#include <cmath>
#include <map>
#include <random>
#include <set>

#include "beamprint/app/config.hpp"
#include "beamprint/beam_mgmt.hpp"
#include "beamprint/scene.hpp"

using namespace beamprint;
using namespace beamprint::beam_mgmt;

namespace {

link::RadioContext context() {
  return {{}, paam::synthesize_gob({}, {}), {}, {0, 0, 30}};
}

Vec3 on_ray(const link::RadioContext& ctx, Direction d, double range) {
  return ctx.bs_position + range * unit_vector(d);
}

scene::UeTrack street_track(double lateral, double speed = 10.0) {
  scene::UeTrack t;
  t.cls = {scene::MainClass::Car, scene::SubBehavior::None};
  t.lane = scene::LaneId::Street;
  t.speed_mps = speed;
  t.lateral_offset_m = lateral;
  return t;
}

}  // namespace

TEST_SUITE("beam_mgmt") {

TEST_CASE("a UE on a wide beam's steering ray acquires that beam") {
  const auto ctx = context();
  for (const paam::Beam& wb : ctx.gob.wide_beams()) {
    CHECK(acquire_wb(ctx, on_ray(ctx, wb.steering(), 90.0)) == wb.beam_id);
  }
}

TEST_CASE("equal wide beam gains go to the lower id") {
  const auto ctx = context();
  // WBs 2 and 3 are steered at -10 and +10 degrees azimuth in the same row.
  REQUIRE(ctx.gob.beam(2).az_steer_deg == doctest::Approx(-10.0));
  REQUIRE(ctx.gob.beam(3).az_steer_deg == doctest::Approx(10.0));
  const Vec3 ue = on_ray(ctx, {0.0, ctx.gob.beam(2).el_steer_deg}, 60.0);
  CHECK(link::mean_rsrp_dbm(ctx, ctx.gob.beam(2), ue) == link::mean_rsrp_dbm(ctx, ctx.gob.beam(3), ue));
  CHECK(acquire_wb(ctx, ue) == 2);
}

TEST_CASE("sweeping along the street visits wide beams in azimuth order") {
  const auto ctx = context();
  const scene::Site site = scene::build_site({});
  int prev_col = -1;
  BeamId prev = -1;
  int changes = 0;
  for (double s = 0.0; s <= site.street.length(); s += 1.0) {
    const BeamId wb = acquire_wb(ctx, site.street.point_at(s, 0.0));
    const int col = wb % ctx.gob.wb_az_count();
    CHECK(col >= prev_col);
    if (wb != prev) ++changes;
    prev = wb;
    prev_col = col;
  }
  CHECK(changes >= 6);
}

TEST_CASE("sweep of a 12-beam wide beam reports 12 unique beams in descending order") {
  const auto ctx = context();
  SimulationConfig cfg;
  std::mt19937_64 rng(1);
  ServingState st;
  st.serving_wb = 8;
  REQUIRE(ctx.gob.children(8).size() == 12);
  const auto r = p2_sweep(ctx, st, on_ray(ctx, ctx.gob.beam(8).steering(), 70.0), 0.0, cfg, rng);
  REQUIRE(r.entries.size() == 12);
  std::set<BeamId> ids;
  for (std::size_t i = 0; i < r.entries.size(); ++i) {
    ids.insert(r.entries[i].nb_index);
    CHECK(ctx.gob.parent_of(r.entries[i].nb_index) == 8);
    if (i > 0) CHECK(r.entries[i].rsrp_dbm <= r.entries[i - 1].rsrp_dbm);
  }
  CHECK(ids.size() == 12);
}

TEST_CASE("a 10-beam wide beam is padded to 12") {
  const auto ctx = context();
  std::mt19937_64 rng(1);
  ServingState st;
  st.serving_wb = 2;
  REQUIRE(ctx.gob.children(2).size() == 10);
  const Vec3 ue = on_ray(ctx, ctx.gob.beam(2).steering(), 70.0);

  SimulationConfig adjacent;
  const auto r = p2_sweep(ctx, st, ue, 0.0, adjacent, rng);
  REQUIRE(r.entries.size() == 12);
  const auto adj = ctx.gob.adjacent_wbs(2);
  int own = 0;
  std::set<BeamId> ids;
  for (const auto& e : r.entries) {
    ids.insert(e.nb_index);
    const BeamId parent = ctx.gob.parent_of(e.nb_index);
    if (parent == 2) {
      ++own;
    } else {
      CHECK(std::find(adj.begin(), adj.end(), parent) != adj.end());
    }
  }
  CHECK(own == 10);
  CHECK(ids.size() == 12);

  SimulationConfig sentinel;
  sentinel.padding = PaddingRule::Sentinel;
  const auto s = p2_sweep(ctx, st, ue, 0.0, sentinel, rng);
  REQUIRE(s.entries.size() == 12);
  CHECK(s.entries[10].nb_index == -1);
  CHECK(s.entries[11].nb_index == -1);
  CHECK(s.entries[11].rsrp_dbm == doctest::Approx(ctx.link.noise_floor_dbm(100e6)));
}

TEST_CASE("a UE aligned with a narrow beam reports it first") {
  const auto ctx = context();
  SimulationConfig cfg;
  std::mt19937_64 rng(1);
  for (const paam::Beam& nb : ctx.gob.narrow_beams()) {
    ServingState st;
    st.serving_wb = *nb.parent_wb;
    const auto r = p2_sweep(ctx, st, on_ray(ctx, nb.steering(), 80.0), 0.0, cfg, rng);
    CHECK(r.entries.front().nb_index == nb.beam_id);
  }
}

TEST_CASE("switch rule") {
  const auto gob = paam::synthesize_gob({}, {});
  ServingState st;
  st.serving_wb = 6;
  st.serving_nb = gob.children(6)[0];
  MeasurementReport r;
  r.entries = {{st.serving_nb, -60.0}, {gob.children(6)[1], -61.0}};
  CHECK(maybe_switch(gob, st, r, 0.0).serving_nb == st.serving_nb);

  const BeamId other = gob.children(7)[2];
  r.entries = {{other, -57.0}, {st.serving_nb, -60.0}};
  const ServingState moved = maybe_switch(gob, st, r, 0.0);
  CHECK(moved.serving_nb == other);
  CHECK(moved.serving_wb == 7);

  r.entries = {{other, -59.5}, {st.serving_nb, -60.0}};
  CHECK(maybe_switch(gob, st, r, 1.0).serving_nb == st.serving_nb);
}

TEST_CASE("one UE for one second yields 25 reports on a 40 ms grid") {
  const auto ctx = context();
  const scene::Site site = scene::build_site({});
  SimulationConfig cfg;
  cfg.duration_s = 1.0;
  const auto out = run_simulation(site, ctx, {street_track(0.0)}, cfg, 1);
  REQUIRE(out.reports.size() == 25);
  for (std::size_t i = 0; i < out.reports.size(); ++i) {
    CHECK(out.reports[i].t_s == doctest::Approx(0.04 * static_cast<double>(i)));
  }
}

TEST_CASE("reports keep their invariants and the serving beam tracks the best one") {
  const auto ctx = context();
  const scene::Site site = scene::build_site({});
  SimulationConfig cfg;
  cfg.duration_s = 30.0;
  std::vector<scene::UeTrack> tracks;
  for (int i = 0; i < 4; ++i) {
    scene::UeTrack t = street_track(-1.5 + i, 9.0 + i);
    t.ue_id = i;
    t.spawn_time_s = 0.3 * i;
    tracks.push_back(t);
  }
  const auto out = run_simulation(site, ctx, tracks, cfg, 3);
  REQUIRE(!out.reports.empty());
  std::map<int, double> last_t;
  for (const auto& r : out.reports) {
    REQUIRE(r.entries.size() == 12);
    std::set<BeamId> ids;
    for (std::size_t i = 0; i < r.entries.size(); ++i) {
      ids.insert(r.entries[i].nb_index);
      CHECK(std::isfinite(r.entries[i].rsrp_dbm));
      if (i > 0) CHECK(r.entries[i].rsrp_dbm <= r.entries[i - 1].rsrp_dbm);
    }
    CHECK(ids.size() == 12);
    REQUIRE(r.serving_nb >= 0);
    double serving_rsrp = -1e9;
    for (const auto& e : r.entries) {
      if (e.nb_index == r.serving_nb) serving_rsrp = e.rsrp_dbm;
    }
    CHECK(serving_rsrp == r.entries.front().rsrp_dbm);
    if (last_t.contains(r.ue_id)) CHECK(r.t_s - last_t[r.ue_id] == doctest::Approx(0.04));
    last_t[r.ue_id] = r.t_s;
  }
}

TEST_CASE("serving narrow beam moves monotonically within each elevation row") {
  const auto ctx = context();
  const scene::Site site = scene::build_site({});
  SimulationConfig cfg;
  cfg.duration_s = site.street.length() / 10.0 + 1.0;
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> lateral(-4.5, 4.5);
  for (int trial = 0; trial < 10; ++trial) {
    const auto out = run_simulation(site, ctx, {street_track(lateral(rng))}, cfg, 1);
    std::map<int, BeamId> last_in_row;
    for (const auto& r : out.reports) {
      const int row = ctx.gob.nb_row(r.serving_nb);
      if (last_in_row.contains(row)) CHECK(r.serving_nb >= last_in_row[row]);
      last_in_row[row] = r.serving_nb;
    }
  }
}

TEST_CASE("report counts follow time in the sector") {
  const auto ctx = context();
  const scene::Site site = scene::build_site({});
  const app::AppConfig app;
  scene::PopulationConfig pop = app.population;
  pop.crossing_fraction = app.crossing_fraction();
  const auto tracks = scene::spawn_population(site, pop, 1);
  SimulationConfig cfg;
  const auto out = run_simulation(site, ctx, tracks, cfg, 1);

  // Oracle: report ticks k * period that fall inside each track's active span.
  std::map<int, long> expected;
  for (const auto& t : tracks) {
    const double end = std::min(t.end_time(site), cfg.duration_s);
    long n = 0;
    for (long k = 0; k * cfg.report_period_s < cfg.duration_s - 1e-9; ++k) {
      const double tt = k * cfg.report_period_s;
      if (tt >= t.spawn_time_s - 1e-9 && tt <= end + 1e-9) ++n;
    }
    expected[t.ue_id] = n;
  }
  std::map<int, long> got;
  for (const auto& r : out.reports) ++got[r.ue_id];
  std::map<scene::MainClass, double> per_ue;
  std::map<scene::MainClass, int> ues;
  for (const auto& t : tracks) {
    CHECK(std::labs(got[t.ue_id] - expected[t.ue_id]) <= 1);
    per_ue[t.cls.main] += static_cast<double>(got[t.ue_id]);
    ++ues[t.cls.main];
  }
  for (auto& [c, v] : per_ue) v /= ues[c];
  CHECK(per_ue[scene::MainClass::Pedestrian] > per_ue[scene::MainClass::Car]);
  CHECK(per_ue[scene::MainClass::Pedestrian] > per_ue[scene::MainClass::Motorcycle]);
  CHECK(per_ue[scene::MainClass::Bicycle] > per_ue[scene::MainClass::Motorcycle]);
}

TEST_CASE("identical seeds and configs give identical streams") {
  const auto ctx = context();
  const scene::Site site = scene::build_site({});
  scene::PopulationConfig pop;
  pop.counts = {{scene::MainClass::Car, 10}, {scene::MainClass::Pedestrian, 10}};
  pop.crossing_fraction = 0.5;
  SimulationConfig cfg;
  cfg.duration_s = 5.0;
  const auto tracks = scene::spawn_population(site, pop, 2);
  auto ctx_noisy = ctx;
  ctx_noisy.link.shadow_sigma_db = 3.0;
  CHECK(run_simulation(site, ctx_noisy, tracks, cfg, 9).reports ==
        run_simulation(site, ctx_noisy, tracks, cfg, 9).reports);
  CHECK_FALSE(run_simulation(site, ctx_noisy, tracks, cfg, 9).reports ==
              run_simulation(site, ctx_noisy, tracks, cfg, 10).reports);
}

TEST_CASE("invalid simulation settings are rejected") {
  const auto gob = paam::synthesize_gob({}, {});
  SimulationConfig c;
  c.report_period_s = 0.0;
  CHECK_THROWS(c.validate(gob));
  c = {};
  c.report_width = 200;
  CHECK_THROWS(c.validate(gob));
  c = {};
  c.report_jitter_s = 0.05;
  CHECK_THROWS(c.validate(gob));
}

}
