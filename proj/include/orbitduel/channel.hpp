#pragma once

// Analytic line-of-sight channel construction: planar-array steering
// vectors, parabolic dish gain pattern, free-space path loss with a flat
// atmospheric term, and the per-satellite rank-1 channel blocks stacked into
// the distributed receive channel.
//
// Conventions (all geometry in the ground site's ENU frame, site at origin):
//  - path phase      e^{-j 2 pi d / lambda}
//  - element phase   e^{+j 2 pi / lambda * r_e . k} with k the unit vector
//                    from the array toward its peer
//  - TX/jammer planar arrays: boresight up (zenith), x axis east
//  - satellite arrays: boresight toward the Earth's center, x axis chosen
//    deterministically from the boresight (see satellite_frame)

#include <cmath>
#include <complex>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "orbitduel/constellation.hpp"
#include "orbitduel/errors.hpp"
#include "orbitduel/hermitian.hpp"

namespace orbitduel {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }
inline double dbm_to_watts(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }

struct LinkBudget {
  double carrier_hz = 10.0e9;
  double bandwidth_hz = 100.0e6;
  double noise_psd_dbm_hz = -205.0;  // thermal at ~200 K
  double atmospheric_loss_db = 5.0;
  double tx0_power_dbm = 50.0;
  double tx1_power_dbm = 70.0;
  double kappa_w = 0.0;  // derived noise power in watts; set by finalize()

  void finalize() {
    if (!(carrier_hz > 0.0)) throw ConfigError("link budget: carrier frequency must be > 0");
    if (!(bandwidth_hz > 0.0)) throw ConfigError("link budget: bandwidth must be > 0");
    if (!(atmospheric_loss_db >= 0.0))
      throw ConfigError("link budget: atmospheric loss must be >= 0");
    kappa_w = dbm_to_watts(noise_psd_dbm_hz + 10.0 * std::log10(bandwidth_hz));
  }
  double wavelength_m() const { return kSpeedOfLight / carrier_hz; }
  double tx0_power_w() const { return dbm_to_watts(tx0_power_dbm); }
  double tx1_power_w() const { return dbm_to_watts(tx1_power_dbm); }

  static LinkBudget table_defaults() {
    LinkBudget b;
    b.finalize();
    return b;
  }
};

// Orthonormal right-handed array frame; z is the boresight.
struct Frame3 {
  Eigen::Vector3d x{1, 0, 0};
  Eigen::Vector3d y{0, 1, 0};
  Eigen::Vector3d z{0, 0, 1};
};

// Ground arrays point straight up with the x axis due east.
inline Frame3 zenith_frame() {
  return Frame3{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
}

// Satellite array frame at a given ENU position: boresight toward the
// Earth's center; x axis = boresight x north (east-ish), with a fallback
// when the boresight degenerates against north.
inline Frame3 satellite_frame(const Eigen::Vector3d& sat_pos_enu, double site_altitude_m) {
  const Eigen::Vector3d earth_center(0.0, 0.0, -(kEarthRadiusM + site_altitude_m));
  Frame3 f;
  f.z = (earth_center - sat_pos_enu).normalized();
  Eigen::Vector3d x = f.z.cross(Eigen::Vector3d(0, 1, 0));
  if (x.norm() < 1e-9) x = f.z.cross(Eigen::Vector3d(1, 0, 0));
  f.x = x.normalized();
  f.y = f.z.cross(f.x);
  return f;
}

struct PlanarArray {
  int rows = 6;
  int cols = 6;
  double spacing_wl = 0.5;      // element pitch in carrier wavelengths
  Frame3 frame{};               // orientation; frame.z is the boresight
  double element_gain_dbi = 0.0;

  int count() const { return rows * cols; }
};

inline void validate(const PlanarArray& a) {
  if (a.rows < 1 || a.cols < 1) throw ConfigError("planar array: element counts must be >= 1");
  if (!(a.spacing_wl > 0.0)) throw ConfigError("planar array: spacing must be > 0");
}

struct DishAntenna {
  double diameter_m = 0.6;
  double peak_gain_dbi = 40.0;
  Eigen::Vector3d boresight{0, 0, 1};
};

inline void validate(const DishAntenna& d) {
  if (!(d.diameter_m > 0.0)) throw ConfigError("dish: diameter must be > 0");
  if (!(d.peak_gain_dbi > 0.0)) throw ConfigError("dish: peak gain must be > 0");
}

// Steering vector toward `direction` (unit vector from the array toward its
// peer). Entry e = sqrt(g_elem) * exp(+j 2 pi / lambda * r_e . direction),
// elements in row-major order on a rows x cols grid centered on the
// phase reference.
inline CVec steering_vector(const PlanarArray& array, const Eigen::Vector3d& direction,
                            double wavelength_m) {
  validate(array);
  if (std::abs(direction.norm() - 1.0) > 1e-9)
    throw DomainError("steering_vector: direction must be a unit vector");
  if (!(wavelength_m > 0.0)) throw DomainError("steering_vector: wavelength must be > 0");

  const double pitch = array.spacing_wl * wavelength_m;
  const double amp = std::sqrt(db_to_linear(array.element_gain_dbi));
  const double kx = direction.dot(array.frame.x);
  const double ky = direction.dot(array.frame.y);
  const double two_pi_over_lambda = 2.0 * M_PI / wavelength_m;

  CVec a(array.count());
  const double row0 = 0.5 * (array.rows - 1);
  const double col0 = 0.5 * (array.cols - 1);
  for (int p = 0; p < array.rows; ++p) {
    for (int q = 0; q < array.cols; ++q) {
      const double proj = pitch * ((q - col0) * kx + (p - row0) * ky);
      const double phase = two_pi_over_lambda * proj;
      a(p * array.cols + q) = amp * cxd(std::cos(phase), std::sin(phase));
    }
  }
  return a;
}

// Parabolic dish pattern: quadratic main-lobe roll-off
// G(theta) = G_peak - 12 (theta / HPBW)^2 dB with HPBW = 70 lambda / D deg,
// floored at the -10 dBi sidelobe level.
inline double dish_gain_dbi(const DishAntenna& dish, double off_boresight_deg,
                            double wavelength_m) {
  validate(dish);
  if (!(off_boresight_deg >= 0.0 && off_boresight_deg <= 180.0))
    throw DomainError("dish_gain: off-boresight angle outside [0, 180]");
  if (!(wavelength_m > 0.0)) throw DomainError("dish_gain: wavelength must be > 0");
  const double hpbw_deg = 70.0 * wavelength_m / dish.diameter_m;
  const double g = dish.peak_gain_dbi - 12.0 * std::pow(off_boresight_deg / hpbw_deg, 2.0);
  return std::max(g, -10.0);
}

struct PathGain {
  double amplitude = 0.0;  // linear field amplitude
  double phase_rad = 0.0;  // in [0, 2 pi)
};

// FSPL plus the flat atmospheric term of the budget; carrier-phase from the
// absolute path length.
inline PathGain path_amplitude(const LinkBudget& budget, double range_m) {
  if (!(range_m > 0.0)) throw DomainError("path_amplitude: range must be > 0");
  const double lambda = budget.wavelength_m();
  const double fspl_db = 20.0 * std::log10(4.0 * M_PI * range_m / lambda);
  PathGain pg;
  pg.amplitude = std::pow(10.0, -(fspl_db + budget.atmospheric_loss_db) / 20.0);
  double ph = std::fmod(-2.0 * M_PI * range_m / lambda, 2.0 * M_PI);
  if (ph < 0.0) ph += 2.0 * M_PI;
  pg.phase_rad = ph;
  return pg;
}

using TxAntenna = std::variant<PlanarArray, DishAntenna>;

struct ChannelBlock {
  std::string sat_id;
  CMat matrix;  // K_m x N_i
};

struct StackedChannel {
  CMat matrix;                        // (sum K_m) x N_i
  std::vector<std::string> sat_ids;   // block order
  std::vector<Eigen::Index> offsets;  // size M+1; block m rows = [offsets[m], offsets[m+1])

  Eigen::Index rows() const { return matrix.rows(); }
  Eigen::Index cols() const { return matrix.cols(); }
  Eigen::Index blocks() const { return static_cast<Eigen::Index>(sat_ids.size()); }
};

// Unit direction site->satellite in ENU from look angles.
inline Eigen::Vector3d look_direction_enu(const LookAngles& look) {
  const double az = look.azimuth_deg * kDegToRad;
  const double el = look.elevation_deg * kDegToRad;
  return {std::cos(el) * std::sin(az), std::cos(el) * std::cos(az), std::sin(el)};
}

// Look angles of the same satellite as seen from a point offset from the
// site on the local ENU tangent plane.
inline LookAngles translate_look(const LookAngles& from_site,
                                 const Eigen::Vector3d& observer_offset_enu) {
  const Eigen::Vector3d sat = from_site.range_m * look_direction_enu(from_site);
  const Eigen::Vector3d rel = sat - observer_offset_enu;
  LookAngles out;
  out.range_m = rel.norm();
  if (!(out.range_m > 0.0)) throw GeometryError("translate_look: zero range");
  out.elevation_deg = std::asin(std::clamp(rel.z() / out.range_m, -1.0, 1.0)) * kRadToDeg;
  out.azimuth_deg = detail::wrap_az_deg(std::atan2(rel.x(), rel.y()) * kRadToDeg);
  return out;
}

// Rank-1 LOS channel block between a ground transmitter and one satellite:
// H = amplitude e^{j phi} a_sat a_tx^H (URA transmitter) or the single
// column amplitude e^{j phi} sqrt(G_dish) a_sat (dish transmitter). The
// transmitter sits at the ENU origin; `look` is the satellite as seen from
// it.
inline ChannelBlock build_channel(const TxAntenna& tx, const PlanarArray& sat_array,
                                  const LookAngles& look, const LinkBudget& budget,
                                  double site_altitude_m = 0.0,
                                  const std::string& sat_id = "") {
  if (!(look.elevation_deg > 0.0))
    throw GeometryError("build_channel: satellite at or below the horizon");
  if (!(budget.kappa_w > 0.0))
    throw ConfigError("build_channel: link budget not finalized");

  const double lambda = budget.wavelength_m();
  const Eigen::Vector3d dir_up = look_direction_enu(look);
  const Eigen::Vector3d sat_pos = look.range_m * dir_up;

  PlanarArray sat = sat_array;
  sat.frame = satellite_frame(sat_pos, site_altitude_m);
  const CVec a_sat = steering_vector(sat, -dir_up, lambda);

  const PathGain pg = path_amplitude(budget, look.range_m);
  const cxd gain = pg.amplitude * cxd(std::cos(pg.phase_rad), std::sin(pg.phase_rad));

  ChannelBlock block;
  block.sat_id = sat_id;
  if (std::holds_alternative<PlanarArray>(tx)) {
    const CVec a_tx = steering_vector(std::get<PlanarArray>(tx), dir_up, lambda);
    block.matrix = gain * (a_sat * a_tx.adjoint());
  } else {
    const DishAntenna& dish = std::get<DishAntenna>(tx);
    const double cosang = std::clamp(dish.boresight.normalized().dot(dir_up), -1.0, 1.0);
    const double off_deg = std::acos(cosang) * kRadToDeg;
    const double g = std::sqrt(db_to_linear(dish_gain_dbi(dish, off_deg, lambda)));
    block.matrix = (gain * g) * a_sat;
  }
  return block;
}

// Wrap a plain matrix as a single-block stacked channel.
inline StackedChannel as_stacked(CMat m, std::string sat_id = "") {
  StackedChannel s;
  s.offsets = {0, m.rows()};
  s.sat_ids = {std::move(sat_id)};
  s.matrix = std::move(m);
  return s;
}

// Vertical concatenation of per-satellite blocks; the same satellite order
// must be used for the desired and jamming stacks.
inline StackedChannel stack(const std::vector<ChannelBlock>& blocks) {
  if (blocks.empty()) throw ShapeError("stack: no channel blocks");
  const Eigen::Index cols = blocks.front().matrix.cols();
  Eigen::Index rows = 0;
  for (const auto& b : blocks) {
    if (b.matrix.cols() != cols)
      throw ShapeError("stack: blocks disagree on transmit antenna count");
    rows += b.matrix.rows();
  }
  StackedChannel s;
  s.matrix.resize(rows, cols);
  s.offsets.reserve(blocks.size() + 1);
  s.offsets.push_back(0);
  Eigen::Index at = 0;
  for (const auto& b : blocks) {
    s.matrix.middleRows(at, b.matrix.rows()) = b.matrix;
    at += b.matrix.rows();
    s.offsets.push_back(at);
    s.sat_ids.push_back(b.sat_id);
  }
  return s;
}

}  // namespace orbitduel
