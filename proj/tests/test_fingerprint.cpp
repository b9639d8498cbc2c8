#include <doctest.h>

#include <algorithm>
#include <cctype>
#include <random>
#include <sstream>

#include "beamprint/learn/fingerprint.hpp"

using namespace beamprint;
using namespace beamprint::learn;
using beam_mgmt::MeasurementReport;

namespace {

std::vector<MeasurementReport> stream(int ues, int per_ue, int width, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> p(-110, -40);
  std::vector<MeasurementReport> out;
  for (int k = 0; k < per_ue; ++k) {
    for (int u = 0; u < ues; ++u) {
      MeasurementReport r;
      r.ue_id = u;
      r.t_s = 0.04 * k;
      for (int i = 0; i < width; ++i) r.entries.push_back({12 + (i + k + u) % 136, p(rng)});
      out.push_back(r);
    }
  }
  return out;
}

}  // namespace

TEST_SUITE("fingerprint") {

TEST_CASE("dimension is 2 * R * W") {
  const auto reports = stream(2, 10, 12, 1);
  FingerprintOptions one;
  one.window = 1;
  CHECK(stack_fingerprints(reports, one).values.cols() == 24);
  FingerprintOptions three;
  CHECK(stack_fingerprints(reports, three).values.cols() == 72);
  CHECK(fingerprint_header(12, 3).size() == 72);
}

TEST_CASE("layout: per report R RSRPs then R beam indices, oldest first") {
  const auto reports = stream(2, 6, 4, 2);
  FingerprintOptions o;
  o.window = 3;
  const FingerprintSet set = stack_fingerprints(reports, o);
  // Rows are grouped by UE in time order; UE 1's reports sit at odd positions.
  REQUIRE(set.rows() == 8);
  const Eigen::Index row = 5;  // UE 1, window starting at its report 1
  CHECK(set.ue_id[5] == 1);
  CHECK(set.t_s[5] == doctest::Approx(0.04 * 3));
  for (int w = 0; w < 3; ++w) {
    const MeasurementReport& r = reports[static_cast<std::size_t>(2 * (1 + w) + 1)];
    for (int i = 0; i < 4; ++i) {
      CHECK(set.values(row, 8 * w + i) == r.entries[static_cast<std::size_t>(i)].rsrp_dbm);
      CHECK(set.values(row, 8 * w + 4 + i) == r.entries[static_cast<std::size_t>(i)].nb_index);
    }
  }
}

TEST_CASE("windows never cross UEs and stride thins them") {
  const auto reports = stream(3, 10, 12, 3);
  FingerprintOptions o;
  CHECK(stack_fingerprints(reports, o).rows() == 3 * 8);
  o.stride = 4;
  CHECK(stack_fingerprints(reports, o).rows() == 3 * 2);
  o.stride = 1;
  o.window = 11;
  const auto set = stack_fingerprints(reports, o);
  CHECK(set.rows() == 0);
  CHECK(set.skipped_ues == 3);
}

TEST_CASE("ingestion order does not change the rows") {
  auto reports = stream(4, 9, 12, 4);
  FingerprintOptions o;
  const auto a = stack_fingerprints(reports, o);
  std::mt19937_64 rng(1);
  std::shuffle(reports.begin(), reports.end(), rng);
  const auto b = stack_fingerprints(reports, o);
  CHECK(a.values == b.values);
  CHECK(a.ue_id == b.ue_id);
}

TEST_CASE("identical reports give identical scaled rows") {
  auto reports = stream(2, 8, 12, 5);
  for (auto& r : reports) r.entries = reports.front().entries;
  const auto out = build_fingerprints(reports, {}, std::nullopt);
  for (Eigen::Index i = 1; i < out.set.rows(); ++i) CHECK(out.set.values.row(i) == out.set.values.row(0));
}

TEST_CASE("azimuth encoding uses steering angles") {
  const auto gob = paam::synthesize_gob({}, {});
  const auto reports = stream(1, 3, 12, 6);
  FingerprintOptions o;
  o.window = 1;
  o.nb_encoding = NbEncoding::Azimuth;
  const auto set = stack_fingerprints(reports, o, &gob);
  CHECK(set.values(0, 12) == gob.beam(reports[0].entries[0].nb_index).az_steer_deg);
  CHECK_THROWS(stack_fingerprints(reports, o));
}

TEST_CASE("feature header carries no identity columns") {
  const auto header = fingerprint_header(12, 3);
  for (const std::string& h : header) {
    std::string lower = h;
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    CHECK((lower.starts_with("rsrp_") || lower.starts_with("nb_")));
    for (const char* banned : {"ue", "id", "time", "t_s", "pos", "lat", "lon", "label", "class"}) {
      CHECK(lower.find(banned) == std::string::npos);
    }
  }
  // The matrix itself holds exactly the header columns: keys live beside it.
  const auto set = stack_fingerprints(stream(2, 5, 12, 7), {});
  CHECK(static_cast<std::size_t>(set.values.cols()) == set.header.size());
}

TEST_CASE("fingerprint CSV round trip is exact") {
  const auto set = stack_fingerprints(stream(2, 6, 12, 8), {});
  std::stringstream ss;
  write_fingerprint_csv(ss, set);
  const auto back = read_fingerprint_csv(ss);
  CHECK(back.header == set.header);
  CHECK(back.values == set.values);
}

TEST_CASE("option names round trip and bad options are rejected") {
  CHECK(nb_encoding_from_string(to_string(NbEncoding::Azimuth)) == NbEncoding::Azimuth);
  CHECK(scaling_kind_from_string(to_string(ScalingKind::ZScore)) == ScalingKind::ZScore);
  CHECK_THROWS(nb_encoding_from_string("angle"));
  FingerprintOptions o;
  o.window = 0;
  CHECK_THROWS(o.validate());
}

}
