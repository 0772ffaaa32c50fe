#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "orbitduel/constellation.hpp"

using namespace orbitduel;

namespace {

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("propagate_walker: zenith pass of a polar orbit") {
  // Single polar-plane satellite crossing the equator at lon 0 at t = 0;
  // a site at (0, 0) sees it at zenith on frame 0.
  WalkerConfig cfg;
  cfg.altitude_m = 550e3;
  cfg.inclination_deg = 90.0;
  cfg.planes = 1;
  cfg.sats_per_plane = 1;
  cfg.phasing = 0;
  GroundSite site{0.0, 0.0, 0.0};
  auto tracks = propagate_walker(cfg, site, 3, 1.0);
  REQUIRE(tracks.size() == 1);
  const auto& la = tracks[0].frames[0];
  CHECK(la.elevation_deg > 89.5);
  CHECK(std::abs(la.range_m - 550e3) < 1e3);
}

TEST_CASE("propagate_walker: nadir range equals altitude") {
  WalkerConfig cfg;
  cfg.altitude_m = 550e3;
  cfg.inclination_deg = 0.0;  // equatorial orbit above an equatorial site
  cfg.planes = 1;
  cfg.sats_per_plane = 1;
  cfg.phasing = 0;
  GroundSite site{0.0, 0.0, 0.0};
  auto tracks = propagate_walker(cfg, site, 1, 1.0);
  CHECK(tracks[0].frames[0].range_m == Catch::Approx(550e3).margin(1.0));
  CHECK(tracks[0].frames[0].elevation_deg == Catch::Approx(90.0).margin(0.01));
}

TEST_CASE("propagate_walker: orbital period from repeat zenith geometry") {
  // Site at the north pole watches a polar orbit: elevation maxima repeat
  // once per revolution. Kepler: T = 2*pi*sqrt(a^3/mu) ~ 5731 s at 550 km
  // for the 6371 km spherical Earth used here.
  WalkerConfig cfg;
  cfg.altitude_m = 550e3;
  cfg.inclination_deg = 90.0;
  cfg.planes = 1;
  cfg.sats_per_plane = 1;
  cfg.phasing = 0;
  GroundSite site{90.0, 0.0, 0.0};
  const double dt = 1.0;
  const int frames = 8000;
  auto tracks = propagate_walker(cfg, site, frames, dt);
  const auto& fr = tracks[0].frames;

  // locate the two elevation maxima (satellite starts over the equator)
  std::vector<int> peaks;
  for (int f = 1; f + 1 < frames; ++f)
    if (fr[f].elevation_deg > fr[f - 1].elevation_deg &&
        fr[f].elevation_deg >= fr[f + 1].elevation_deg && fr[f].elevation_deg > 80.0)
      peaks.push_back(f);
  REQUIRE(peaks.size() >= 2);
  const double period = (peaks[1] - peaks[0]) * dt;
  const double a = kEarthRadiusM + cfg.altitude_m;
  const double kepler = 2.0 * M_PI * std::sqrt(a * a * a / kMuEarth);
  CHECK(kepler == Catch::Approx(5730.13).margin(0.5));
  CHECK(period == Catch::Approx(kepler).margin(2.0));
}

TEST_CASE("propagate_walker: visible ranges stay on the LEO scale") {
  WalkerConfig cfg;  // default Starlink-like shell
  cfg.planes = 12;
  cfg.sats_per_plane = 8;
  GroundSite site{40.0822, -105.1092, 1560.0};
  auto tracks = propagate_walker(cfg, site, 10, 15.0);
  for (const auto& tr : tracks) {
    for (const auto& la : tr.frames) {
      CHECK(la.azimuth_deg >= 0.0);
      CHECK(la.azimuth_deg < 360.0);
      if (la.elevation_deg > 0.0) {
        CHECK(la.range_m > 100e3);
        CHECK(la.range_m < 5000e3);
      }
      // site cannot be closer than the nadir distance (site altitude slack)
      CHECK(la.range_m >= cfg.altitude_m - 2e3);
    }
  }
}

TEST_CASE("propagate_walker: deterministic across calls") {
  WalkerConfig cfg;
  cfg.planes = 4;
  cfg.sats_per_plane = 3;
  GroundSite site{40.0, -105.0, 1000.0};
  auto a = propagate_walker(cfg, site, 5, 15.0);
  auto b = propagate_walker(cfg, site, 5, 15.0);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].id == b[i].id);
    for (size_t f = 0; f < a[i].frames.size(); ++f) {
      CHECK(a[i].frames[f].azimuth_deg == b[i].frames[f].azimuth_deg);
      CHECK(a[i].frames[f].elevation_deg == b[i].frames[f].elevation_deg);
      CHECK(a[i].frames[f].range_m == b[i].frames[f].range_m);
    }
  }
}

TEST_CASE("propagate_walker rejects invalid configs") {
  GroundSite site{0, 0, 0};
  WalkerConfig bad;
  bad.altitude_m = 100e3;
  CHECK_THROWS_AS(propagate_walker(bad, site, 1, 1.0), ConfigError);
  WalkerConfig cfg;
  CHECK_THROWS_AS(propagate_walker(cfg, site, 0, 1.0), ConfigError);
  CHECK_THROWS_AS(propagate_walker(cfg, site, 1, 0.0), ConfigError);
  CHECK_THROWS_AS(propagate_walker(cfg, GroundSite{91, 0, 0}, 1, 1.0), ConfigError);
}

TEST_CASE("ingest_tracks: single satellite single frame") {
  const std::string path = temp_path("od_tracks_one.csv");
  {
    std::ofstream out(path);
    out << "sat_id,frame,az_deg,el_deg,range_m\n";
    out << "alpha,0,0,90,550000\n";
  }
  auto tracks = ingest_tracks(path);
  REQUIRE(tracks.size() == 1);
  CHECK(tracks[0].id == "alpha");
  REQUIRE(tracks[0].frames.size() == 1);
  CHECK(tracks[0].frames[0].elevation_deg == 90.0);
  CHECK(tracks[0].frames[0].range_m == 550000.0);
  std::remove(path.c_str());
}

TEST_CASE("ingest_tracks: header-only file gives empty list") {
  const std::string path = temp_path("od_tracks_empty.csv");
  {
    std::ofstream out(path);
    out << "sat_id,frame,az_deg,el_deg,range_m\n";
  }
  CHECK(ingest_tracks(path).empty());
  std::remove(path.c_str());
}

TEST_CASE("ingest_tracks: error paths carry line numbers") {
  const std::string path = temp_path("od_tracks_bad.csv");
  {
    std::ofstream out(path);
    out << "sat_id,frame,az_deg,el_deg,range_m\n";
    out << "a,0,10,45,7e5\n";
    out << "a,1,xx,45,7e5\n";
  }
  CHECK_THROWS_WITH(ingest_tracks(path), Catch::Matchers::ContainsSubstring("line 3"));

  {
    std::ofstream out(path);
    out << "sat_id,frame,az_deg,el_deg,range_m\n";
    out << "a,0,10,45,7e5\n";
    out << "a,2,10,45,7e5\n";  // skipped frame 1
  }
  CHECK_THROWS_AS(ingest_tracks(path), ParseError);

  {
    std::ofstream out(path);
    out << "wrong,header\n";
  }
  CHECK_THROWS_AS(ingest_tracks(path), ParseError);
  CHECK_THROWS_AS(ingest_tracks(temp_path("od_does_not_exist.csv")), IoError);
  std::remove(path.c_str());
}

TEST_CASE("track CSV round trip is exact on formatted fields") {
  WalkerConfig cfg;
  cfg.planes = 3;
  cfg.sats_per_plane = 2;
  GroundSite site{40.0822, -105.1092, 1560.0};
  auto tracks = propagate_walker(cfg, site, 4, 15.0);

  const std::string p1 = temp_path("od_rt1.csv");
  const std::string p2 = temp_path("od_rt2.csv");
  write_tracks_csv(tracks, p1);
  auto again = ingest_tracks(p1, 15.0);
  REQUIRE(again.size() == tracks.size());
  write_tracks_csv(again, p2);

  std::ifstream f1(p1), f2(p2);
  std::stringstream s1, s2;
  s1 << f1.rdbuf();
  s2 << f2.rdbuf();
  CHECK(s1.str() == s2.str());
  CHECK(!s1.str().empty());
  std::remove(p1.c_str());
  std::remove(p2.c_str());
}

TEST_CASE("select_nearest: min-range and visibility filtering") {
  auto mk = [](std::string id, double el, double range) {
    SatelliteTrack t;
    t.id = std::move(id);
    t.frames = {LookAngles{10.0, el, range}};
    return t;
  };
  std::vector<SatelliteTrack> tracks = {mk("a", 50, 600e3), mk("b", 60, 550e3),
                                        mk("c", 45, 800e3)};

  auto top1 = select_nearest(tracks, 0, 1, 40.0);
  REQUIRE(top1.size() == 1);
  CHECK(top1[0].id == "b");

  CHECK(select_nearest(tracks, 0, 3, 70.0).empty());

  auto all = select_nearest(tracks, 0, 5, 40.0);
  REQUIRE(all.size() == 3);
  CHECK(all[0].id == "b");
  CHECK(all[1].id == "a");
  CHECK(all[2].id == "c");

  // tie on range breaks by id ascending
  std::vector<SatelliteTrack> tie = {mk("z", 50, 600e3), mk("y", 50, 600e3)};
  auto sel = select_nearest(tie, 0, 2, 40.0);
  CHECK(sel[0].id == "y");
  CHECK(sel[1].id == "z");

  CHECK_THROWS_AS(select_nearest(tracks, 1, 1, 40.0), RangeError);
  CHECK_THROWS_AS(select_nearest(tracks, 0, 0, 40.0), DomainError);
}

TEST_CASE("select_nearest matches exhaustive sort oracle on a Walker frame") {
  WalkerConfig cfg;
  cfg.planes = 24;
  cfg.sats_per_plane = 12;
  GroundSite site{40.0822, -105.1092, 1560.0};
  auto tracks = propagate_walker(cfg, site, 1, 15.0);

  const double min_el = 25.0;
  auto sel = select_nearest(tracks, 0, 5, min_el);

  // oracle: filter + full sort, independent re-derivation
  std::vector<std::pair<double, std::string>> vis;
  for (const auto& tr : tracks)
    if (tr.frames[0].elevation_deg >= min_el)
      vis.push_back({tr.frames[0].range_m, tr.id});
  std::sort(vis.begin(), vis.end());
  const size_t expect = std::min<size_t>(5, vis.size());
  REQUIRE(sel.size() == expect);
  for (size_t i = 0; i < expect; ++i) {
    CHECK(sel[i].id == vis[i].second);
    CHECK(sel[i].look.range_m == vis[i].first);
  }
  // sorted non-decreasing by range, all above the elevation mask
  for (size_t i = 0; i + 1 < sel.size(); ++i)
    CHECK(sel[i].look.range_m <= sel[i + 1].look.range_m);
  for (const auto& s : sel) CHECK(s.look.elevation_deg >= min_el);
}
