#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "beamprint/link.hpp"

using namespace beamprint;
using namespace beamprint::link;

namespace {

RadioContext default_context() {
  RadioContext ctx{{}, paam::synthesize_gob({}, {}), {}, {0, 0, 30}};
  return ctx;
}

}  // namespace

TEST_SUITE("link") {

TEST_CASE("free-space loss by hand") {
  // lambda = c / f; FSPL = 20 log10(4 pi d / lambda)
  const double lambda = 299792458.0 / 28e9;
  CHECK(lambda == doctest::Approx(0.010707).epsilon(1e-4));
  const double by_hand = 20.0 * std::log10(4.0 * std::numbers::pi / lambda);
  CHECK(by_hand == doctest::Approx(61.39).epsilon(0.01 / 61.39));
  CHECK(std::abs(fspl_db(1.0, 28e9) - 61.39) <= 0.01);
  CHECK(std::abs(fspl_db(100.0, 28e9) - 101.39) <= 0.01);
  CHECK(fspl_db(100.0, 28e9) - fspl_db(1.0, 28e9) == doctest::Approx(40.0));
  for (double f : {3.5e9, 28e9, 60e9}) {
    CHECK(fspl_db(84.0, f) - fspl_db(42.0, f) == doctest::Approx(6.0206).epsilon(1e-5));
  }
  CHECK_THROWS(fspl_db(0.0, 28e9));
  CHECK_THROWS(fspl_db(1.0, -1.0));
}

TEST_CASE("aligned beam at 100 m") {
  RadioContext ctx = default_context();
  paam::Beam beam;
  beam.kind = paam::BeamKind::Narrow;
  const Vec3 ue = ctx.bs_position + 100.0 * unit_vector({0.0, 0.0});
  const double p = mean_rsrp_dbm(ctx, beam, ue);
  CHECK(std::abs(p - (-43.57)) <= 0.05);
  CHECK(p == doctest::Approx(30.0 + 8.0 + 10.0 * std::log10(96.0) - fspl_db(100.0, 28e9)));

  paam::Beam off = beam;
  off.az_steer_deg = 40.0;
  off.el_steer_deg = -25.0;
  CHECK(mean_rsrp_dbm(ctx, off, ue) < p);
}

TEST_CASE("rsrp decreases along a fixed ray") {
  RadioContext ctx = default_context();
  for (const paam::Beam& b : ctx.gob.narrow_beams()) {
    const Vec3 dir = unit_vector(b.steering());
    double prev = 1e9;
    for (double d = 10.0; d <= 300.0; d += 10.0) {
      const double p = mean_rsrp_dbm(ctx, b, ctx.bs_position + d * dir);
      CHECK(p < prev);
      prev = p;
    }
  }
}

TEST_CASE("without shadowing the measurement is a pure function") {
  RadioContext ctx = default_context();
  std::mt19937_64 a(1), b(2);
  const paam::Beam& beam = ctx.gob.beam(40);
  const Vec3 ue{12.0, 80.0, 1.5};
  const BeamMeasurement m1 = rsrp(ctx, beam, ue, a);
  const BeamMeasurement m2 = rsrp(ctx, beam, ue, b);
  CHECK(m1 == m2);
  CHECK(m1.nb_index == 40);
  CHECK(m1.rsrp_dbm == mean_rsrp_dbm(ctx, beam, ue));
}

TEST_CASE("shadowing adds zero-mean noise of the configured spread") {
  RadioContext ctx = default_context();
  ctx.link.shadow_sigma_db = 4.0;
  std::mt19937_64 rng(5);
  const paam::Beam& beam = ctx.gob.beam(40);
  const Vec3 ue{12.0, 80.0, 1.5};
  const double mean = mean_rsrp_dbm(ctx, beam, ue);
  double sum = 0.0, sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double d = rsrp(ctx, beam, ue, rng).rsrp_dbm - mean;
    sum += d;
    sq += d * d;
  }
  CHECK(std::abs(sum / n) < 0.1);
  CHECK(std::sqrt(sq / n) == doctest::Approx(4.0).epsilon(0.03));
  LinkBudgetConfig bad;
  bad.shadow_sigma_db = -1.0;
  CHECK_THROWS(bad.validate());
}

TEST_CASE("noise floor over 100 MHz") {
  LinkBudgetConfig c;
  CHECK(c.noise_floor_dbm(100e6) == doctest::Approx(-174.0 + 80.0 + 9.0));
}

}
