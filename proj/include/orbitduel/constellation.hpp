#pragma once

// Time-indexed satellite look angles for a fixed ground site. Two sources:
// a synthetic circular-orbit Walker constellation on a spherical Earth, or
// a Track CSV file. Pure geometry; link-budget effects live in channel.hpp.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "orbitduel/errors.hpp"

namespace orbitduel {

inline constexpr double kEarthRadiusM = 6371.0e3;        // spherical Earth
inline constexpr double kMuEarth = 3.986004418e14;       // m^3/s^2
inline constexpr double kEarthRotRadS = 7.2921159e-5;    // rad/s
inline constexpr double kDegToRad = M_PI / 180.0;
inline constexpr double kRadToDeg = 180.0 / M_PI;

struct GroundSite {
  double latitude_deg = 0.0;
  double longitude_deg = 0.0;
  double altitude_m = 0.0;
};

inline void validate(const GroundSite& s) {
  if (!(s.latitude_deg >= -90.0 && s.latitude_deg <= 90.0))
    throw ConfigError("site latitude outside [-90, 90]");
  if (!(s.longitude_deg >= -180.0 && s.longitude_deg <= 180.0))
    throw ConfigError("site longitude outside [-180, 180]");
  if (!(s.altitude_m >= -500.0))
    throw ConfigError("site altitude below -500 m");
}

struct LookAngles {
  double azimuth_deg = 0.0;    // [0, 360), from north, east positive
  double elevation_deg = 0.0;  // [-90, 90]
  double range_m = 0.0;        // > 0
};

struct SatelliteTrack {
  std::string id;
  std::vector<LookAngles> frames;  // index = frame number, contiguous from 0
  double frame_interval_s = 1.0;
};

struct WalkerConfig {
  double altitude_m = 550.0e3;
  double inclination_deg = 53.0;
  int planes = 72;
  int sats_per_plane = 22;
  int phasing = 17;            // inter-plane phase factor F
  double epoch_offset_s = 0.0;
};

inline void validate(const WalkerConfig& c) {
  if (!(c.altitude_m >= 200.0e3 && c.altitude_m <= 2000.0e3))
    throw ConfigError("walker altitude outside [200 km, 2000 km]");
  if (!(c.inclination_deg >= 0.0 && c.inclination_deg <= 180.0))
    throw ConfigError("walker inclination outside [0, 180]");
  if (c.planes < 1 || c.sats_per_plane < 1)
    throw ConfigError("walker plane/satellite counts must be >= 1");
}

namespace detail {

inline double wrap_az_deg(double az) {
  double a = std::fmod(az, 360.0);
  if (a < 0.0) a += 360.0;
  if (a >= 360.0) a = 0.0;  // fmod can return 360 - eps rounding to 360
  return a;
}

// ECEF position of the site (spherical Earth).
inline Eigen::Vector3d site_ecef(const GroundSite& s) {
  const double lat = s.latitude_deg * kDegToRad;
  const double lon = s.longitude_deg * kDegToRad;
  const double r = kEarthRadiusM + s.altitude_m;
  return {r * std::cos(lat) * std::cos(lon), r * std::cos(lat) * std::sin(lon),
          r * std::sin(lat)};
}

// ECI position of Walker satellite (plane p, slot s) at time t.
inline Eigen::Vector3d walker_eci(const WalkerConfig& c, int plane, int slot, double t) {
  const double a = kEarthRadiusM + c.altitude_m;
  const double n = std::sqrt(kMuEarth / (a * a * a));
  const double incl = c.inclination_deg * kDegToRad;
  const double raan = 2.0 * M_PI * plane / c.planes;
  const int total = c.planes * c.sats_per_plane;
  const double u0 = 2.0 * M_PI * (static_cast<double>(slot) / c.sats_per_plane +
                                  static_cast<double>(c.phasing) * plane / total);
  const double u = u0 + n * (t + c.epoch_offset_s);
  // orbital plane -> inclined -> rotated to RAAN
  const Eigen::Vector3d in_plane(a * std::cos(u), a * std::sin(u), 0.0);
  const Eigen::Vector3d inclined(
      in_plane.x(), in_plane.y() * std::cos(incl), in_plane.y() * std::sin(incl));
  return {inclined.x() * std::cos(raan) - inclined.y() * std::sin(raan),
          inclined.x() * std::sin(raan) + inclined.y() * std::cos(raan), inclined.z()};
}

inline LookAngles look_from_ecef(const Eigen::Vector3d& site, const GroundSite& s,
                                 const Eigen::Vector3d& sat) {
  const double lat = s.latitude_deg * kDegToRad;
  const double lon = s.longitude_deg * kDegToRad;
  const Eigen::Vector3d east(-std::sin(lon), std::cos(lon), 0.0);
  const Eigen::Vector3d north(-std::sin(lat) * std::cos(lon),
                              -std::sin(lat) * std::sin(lon), std::cos(lat));
  const Eigen::Vector3d up(std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon),
                           std::sin(lat));
  const Eigen::Vector3d d = sat - site;
  const double e = d.dot(east), nn = d.dot(north), u = d.dot(up);
  LookAngles la;
  la.range_m = d.norm();
  la.elevation_deg = std::asin(std::clamp(u / la.range_m, -1.0, 1.0)) * kRadToDeg;
  la.azimuth_deg = wrap_az_deg(std::atan2(e, nn) * kRadToDeg);
  return la;
}

}  // namespace detail

// Circular Keplerian orbits over a rotating spherical Earth. Every satellite
// is emitted for every frame regardless of visibility.
inline std::vector<SatelliteTrack> propagate_walker(const WalkerConfig& cfg,
                                                    const GroundSite& site, int frames,
                                                    double dt_s) {
  validate(cfg);
  validate(site);
  if (frames < 1) throw ConfigError("propagate_walker: frames must be >= 1");
  if (!(dt_s > 0.0)) throw ConfigError("propagate_walker: frame interval must be > 0");

  const Eigen::Vector3d site0 = detail::site_ecef(site);
  const int total = cfg.planes * cfg.sats_per_plane;
  std::vector<SatelliteTrack> tracks(total);
  int width = 1;
  for (int v = total - 1; v >= 10; v /= 10) ++width;

  for (int p = 0; p < cfg.planes; ++p) {
    for (int s = 0; s < cfg.sats_per_plane; ++s) {
      const int idx = p * cfg.sats_per_plane + s;
      std::ostringstream name;
      name << "sat";
      name.fill('0');
      name.width(width);
      name << idx;
      tracks[idx].id = name.str();
      tracks[idx].frame_interval_s = dt_s;
      tracks[idx].frames.resize(frames);
    }
  }

  for (int f = 0; f < frames; ++f) {
    const double t = f * dt_s;
    const double theta = kEarthRotRadS * t;
    const double c = std::cos(theta), sn = std::sin(theta);
    for (int p = 0; p < cfg.planes; ++p) {
      for (int s = 0; s < cfg.sats_per_plane; ++s) {
        const Eigen::Vector3d eci = detail::walker_eci(cfg, p, s, t);
        // ECEF = Rz(-theta) * ECI
        const Eigen::Vector3d ecef(c * eci.x() + sn * eci.y(),
                                   -sn * eci.x() + c * eci.y(), eci.z());
        tracks[p * cfg.sats_per_plane + s].frames[f] =
            detail::look_from_ecef(site0, site, ecef);
      }
    }
  }
  return tracks;
}

inline constexpr const char* kTrackCsvHeader = "sat_id,frame,az_deg,el_deg,range_m";

namespace detail {

// %.17g so that a write -> parse -> write cycle reproduces the file exactly.
inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& s, int line_no, const char* what) {
  try {
    size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ParseError("track CSV line " + std::to_string(line_no) + ": bad " + what +
                     " value '" + s + "'");
  }
}

}  // namespace detail

inline void write_tracks_csv(const std::vector<SatelliteTrack>& tracks,
                             const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open track file for writing: " + path);
  out << kTrackCsvHeader << "\n";
  for (const auto& tr : tracks) {
    for (size_t f = 0; f < tr.frames.size(); ++f) {
      const auto& la = tr.frames[f];
      out << tr.id << ',' << f << ',' << detail::fmt_double(la.azimuth_deg) << ','
          << detail::fmt_double(la.elevation_deg) << ','
          << detail::fmt_double(la.range_m) << "\n";
    }
  }
  if (!out) throw IoError("write failure on track file: " + path);
}

// Parse a Track CSV. Rows must be grouped per satellite with frame numbers
// contiguous from 0. The file carries no frame interval; the caller supplies it.
inline std::vector<SatelliteTrack> ingest_tracks(const std::string& path,
                                                 double frame_interval_s = 1.0) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open track file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw ParseError("track CSV: empty file (missing header)");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTrackCsvHeader)
    throw ParseError("track CSV: bad header '" + line + "'");

  std::vector<SatelliteTrack> tracks;
  std::vector<std::string> order;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::array<std::string, 5> field;
    size_t start = 0;
    for (int i = 0; i < 5; ++i) {
      const size_t comma = line.find(',', start);
      if (i < 4) {
        if (comma == std::string::npos)
          throw ParseError("track CSV line " + std::to_string(line_no) +
                           ": expected 5 fields");
        field[i] = line.substr(start, comma - start);
        start = comma + 1;
      } else {
        if (comma != std::string::npos)
          throw ParseError("track CSV line " + std::to_string(line_no) +
                           ": expected 5 fields");
        field[i] = line.substr(start);
      }
    }
    LookAngles la;
    const long frame = static_cast<long>(detail::parse_double(field[1], line_no, "frame"));
    la.azimuth_deg = detail::parse_double(field[2], line_no, "azimuth");
    la.elevation_deg = detail::parse_double(field[3], line_no, "elevation");
    la.range_m = detail::parse_double(field[4], line_no, "range");
    if (!(la.azimuth_deg >= 0.0 && la.azimuth_deg < 360.0))
      throw ParseError("track CSV line " + std::to_string(line_no) +
                       ": azimuth outside [0, 360)");
    if (!(la.elevation_deg >= -90.0 && la.elevation_deg <= 90.0))
      throw ParseError("track CSV line " + std::to_string(line_no) +
                       ": elevation outside [-90, 90]");
    if (!(la.range_m > 0.0) || !std::isfinite(la.range_m))
      throw ParseError("track CSV line " + std::to_string(line_no) +
                       ": range must be positive and finite");

    SatelliteTrack* tr = nullptr;
    for (auto& t : tracks)
      if (t.id == field[0]) {
        tr = &t;
        break;
      }
    if (tr == nullptr) {
      tracks.push_back(SatelliteTrack{field[0], {}, frame_interval_s});
      tr = &tracks.back();
      order.push_back(field[0]);
    }
    if (frame != static_cast<long>(tr->frames.size()))
      throw ParseError("track CSV line " + std::to_string(line_no) + ": satellite '" +
                       field[0] + "' frames not contiguous from 0 (got " +
                       std::to_string(frame) + ", expected " +
                       std::to_string(tr->frames.size()) + ")");
    tr->frames.push_back(la);
  }
  return tracks;
}

struct SelectedSatellite {
  std::string id;
  LookAngles look;
};

// Satellites visible above min_elevation at the given frame, sorted by range
// ascending (ties by id), truncated to k. Returns fewer than k when
// visibility is insufficient.
inline std::vector<SelectedSatellite> select_nearest(
    const std::vector<SatelliteTrack>& tracks, int frame, int k,
    double min_elevation_deg) {
  if (k < 1) throw DomainError("select_nearest: k must be >= 1");
  for (const auto& tr : tracks)
    if (frame < 0 || static_cast<size_t>(frame) >= tr.frames.size())
      throw RangeError("select_nearest: frame " + std::to_string(frame) +
                       " out of bounds for satellite '" + tr.id + "'");

  std::vector<SelectedSatellite> vis;
  for (const auto& tr : tracks) {
    const auto& la = tr.frames[frame];
    if (la.elevation_deg >= min_elevation_deg) vis.push_back({tr.id, la});
  }
  std::sort(vis.begin(), vis.end(), [](const auto& a, const auto& b) {
    if (a.look.range_m != b.look.range_m) return a.look.range_m < b.look.range_m;
    return a.id < b.id;
  });
  if (vis.size() > static_cast<size_t>(k)) vis.resize(k);
  return vis;
}

}  // namespace orbitduel
