#pragma once

// Reference studies around the full covariance game:
//  - single-satellite nulling: one nadir LEO receiver against dish jammers
//    on a ring around the user, with the interference-penalized (MVDR)
//    beamformer w ~ P^-1 h0; capacity-vs-ring-radius sweeps and ground gain
//    maps;
//  - the dish-type fixed jammer scenario: a single-antenna high-gain dish
//    pointed at the nearest satellite, which reduces the game to one
//    water-filling best response with the jam power pinned at its trace
//    bound.

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "orbitduel/channel.hpp"
#include "orbitduel/constellation.hpp"
#include "orbitduel/errors.hpp"
#include "orbitduel/game.hpp"

namespace orbitduel {

// Capacity of the optimal linear receive beamformer against colored
// rank-one interferers: log2(1 + E0 h0^H P^-1 h0) with
// P = sum_j E_j h_j h_j^H + kappa I. Equals the Eq.-8 rate for a rank-1
// desired channel. Solved through the Woodbury identity so large apertures
// stay cheap.
inline double mvdr_capacity(const CVec& h0, const std::vector<CVec>& jam_channels,
                            const std::vector<double>& jam_powers_w, double e0_w,
                            double kappa_w) {
  if (h0.size() == 0) throw ShapeError("mvdr_capacity: empty desired channel");
  if (jam_channels.size() != jam_powers_w.size())
    throw ShapeError("mvdr_capacity: jammer channel/power count mismatch");
  if (!(kappa_w > 0.0)) throw DomainError("mvdr_capacity: kappa must be > 0");
  const Eigen::Index k = h0.size();
  const Eigen::Index m = static_cast<Eigen::Index>(jam_channels.size());

  double quad;  // h0^H P^-1 h0
  if (m == 0) {
    quad = h0.squaredNorm() / kappa_w;
  } else {
    CMat j(k, m);
    for (Eigen::Index i = 0; i < m; ++i) {
      if (jam_channels[i].size() != k)
        throw ShapeError("mvdr_capacity: jammer channel length mismatch");
      j.col(i) = std::sqrt(jam_powers_w[i]) * jam_channels[i];
    }
    const CMat g = j.adjoint() * j;
    const CVec c = j.adjoint() * h0;
    const CMat core = kappa_w * CMat::Identity(m, m) + g;
    const CVec sol = core.llt().solve(c);
    quad = (h0.squaredNorm() - std::real(c.dot(sol))) / kappa_w;
  }
  return std::log2(1.0 + std::max(e0_w * quad, 0.0));
}

// Unit-norm MVDR weights w ~ P^-1 h0 through the same Woodbury path.
inline CVec mvdr_weights(const CVec& h0, const std::vector<CVec>& jam_channels,
                         const std::vector<double>& jam_powers_w, double kappa_w) {
  const Eigen::Index k = h0.size();
  const Eigen::Index m = static_cast<Eigen::Index>(jam_channels.size());
  CVec w;
  if (m == 0) {
    w = h0;
  } else {
    CMat j(k, m);
    for (Eigen::Index i = 0; i < m; ++i)
      j.col(i) = std::sqrt(jam_powers_w[i]) * jam_channels[i];
    const CMat core = kappa_w * CMat::Identity(m, m) + (j.adjoint() * j);
    w = h0 - j * core.llt().solve(CVec(j.adjoint() * h0));
  }
  const double n = w.norm();
  if (!(n > 0.0)) throw SingularityError("mvdr_weights: null beamformer");
  return w / n;
}

// Single nadir LEO with dish jammers equally spaced on a ring around the
// user. The user radiates from a single isotropic element; the satellite
// aperture is sized so the nulling knee falls inside the studied ring radii
// (a 6x6 panel would push it beyond 100 km).
struct RingJammerScene {
  double satellite_altitude_m = 550.0e3;
  PlanarArray satellite{24, 24, 0.5, Frame3{}, 0.0};
  int jammer_count = 4;
  double ring_radius_m = 10.0e3;
  DishAntenna dish{};  // boresighted at the satellite
  LinkBudget budget = LinkBudget::table_defaults();
};

namespace detail {

// Channel column from a ground point to the nadir satellite array.
inline CVec ring_channel(const RingJammerScene& scene, const PlanarArray& sat_oriented,
                         const Eigen::Vector3d& sat_pos, const Eigen::Vector3d& ground,
                         double extra_gain_amp) {
  const Eigen::Vector3d rel = ground - sat_pos;
  const double range = rel.norm();
  const CVec a = steering_vector(sat_oriented, rel / range, scene.budget.wavelength_m());
  const PathGain pg = path_amplitude(scene.budget, range);
  const cxd c = pg.amplitude * extra_gain_amp *
                cxd(std::cos(pg.phase_rad), std::sin(pg.phase_rad));
  return c * a;
}

struct RingGeometry {
  CVec h0;
  std::vector<CVec> jam;
  std::vector<double> jam_powers;
  PlanarArray sat_oriented;
  Eigen::Vector3d sat_pos;
};

inline RingGeometry ring_geometry(const RingJammerScene& scene, double radius_m) {
  RingGeometry g;
  g.sat_pos = Eigen::Vector3d(0.0, 0.0, scene.satellite_altitude_m);
  g.sat_oriented = scene.satellite;
  g.sat_oriented.frame = satellite_frame(g.sat_pos, 0.0);

  g.h0 = ring_channel(scene, g.sat_oriented, g.sat_pos, Eigen::Vector3d::Zero(), 1.0);
  const double dish_amp =
      std::sqrt(db_to_linear(scene.dish.peak_gain_dbi));  // boresighted at the satellite
  const double each_power = scene.budget.tx1_power_w() / scene.jammer_count;
  for (int i = 0; i < scene.jammer_count; ++i) {
    const double ang = 2.0 * M_PI * i / scene.jammer_count;
    const Eigen::Vector3d pos(radius_m * std::cos(ang), radius_m * std::sin(ang), 0.0);
    g.jam.push_back(ring_channel(scene, g.sat_oriented, g.sat_pos, pos, dish_amp));
    g.jam_powers.push_back(each_power);
  }
  return g;
}

}  // namespace detail

// Capacity at each ring radius, jammers boresighted at the satellite.
inline std::vector<std::pair<double, double>> capacity_vs_radius(
    const RingJammerScene& scene, const std::vector<double>& radii_m) {
  for (size_t i = 0; i < radii_m.size(); ++i) {
    if (!(radii_m[i] > 0.0)) throw DomainError("capacity_vs_radius: radii must be > 0");
    if (i > 0 && radii_m[i] <= radii_m[i - 1])
      throw DomainError("capacity_vs_radius: radii must be ascending");
  }
  std::vector<std::pair<double, double>> out;
  out.reserve(radii_m.size());
  for (double r : radii_m) {
    const auto g = detail::ring_geometry(scene, r);
    out.emplace_back(r, mvdr_capacity(g.h0, g.jam, g.jam_powers,
                                      scene.budget.tx0_power_w(), scene.budget.kappa_w));
  }
  return out;
}

struct GainMap {
  double extent_m = 0.0;
  double resolution_m = 0.0;
  std::vector<double> xs_m, ys_m;
  Eigen::MatrixXd gain_db;  // relative to the map maximum; [iy, ix]
};

// Receive-beampattern of the penalized beamformer on the ground:
// |w^H a_sat(direction to cell)|^2 in dB relative to the map maximum.
inline GainMap ground_gain_map(const RingJammerScene& scene, double extent_m,
                               double resolution_m) {
  if (!(extent_m > 0.0) || !(resolution_m > 0.0))
    throw DomainError("ground_gain_map: extent and resolution must be > 0");
  const auto g = detail::ring_geometry(scene, scene.ring_radius_m);
  const CVec w = mvdr_weights(g.h0, g.jam, g.jam_powers, scene.budget.kappa_w);

  GainMap map;
  map.extent_m = extent_m;
  map.resolution_m = resolution_m;
  const int half = static_cast<int>(std::floor(extent_m / resolution_m));
  for (int i = -half; i <= half; ++i) map.xs_m.push_back(i * resolution_m);
  map.ys_m = map.xs_m;
  map.gain_db.resize(map.ys_m.size(), map.xs_m.size());

  const double lambda = scene.budget.wavelength_m();
  for (size_t iy = 0; iy < map.ys_m.size(); ++iy) {
    for (size_t ix = 0; ix < map.xs_m.size(); ++ix) {
      const Eigen::Vector3d cell(map.xs_m[ix], map.ys_m[iy], 0.0);
      const Eigen::Vector3d rel = cell - g.sat_pos;
      const CVec a = steering_vector(g.sat_oriented, rel.normalized(), lambda);
      const double p = std::norm(w.dot(a));
      map.gain_db(iy, ix) = 10.0 * std::log10(std::max(p, 1e-300));
    }
  }
  map.gain_db.array() -= map.gain_db.maxCoeff();
  return map;
}

// Fixed dish jammer (N1 = 1) pointed at the nearest selected satellite. The
// rate is non-increasing in the scalar jam power, so the minimizer sits at
// the trace bound Q1 = E1 and the game reduces to one water-filling best
// response for the transmitter.
struct DishScenarioConfig {
  PlanarArray tx{};         // ground transmitter; oriented zenith internally
  PlanarArray satellite{};  // per-satellite receive panel
  DishAntenna dish{};
  Eigen::Vector3d jammer_offset_enu{0.0, 1000.0, 0.0};  // 1 km north
  double min_elevation_deg = 40.0;
  SolverConfig solver{};
};

inline GameSolution dish_jammer_scenario(const std::vector<SatelliteTrack>& tracks,
                                         int frame, int k, const GroundSite& site,
                                         const LinkBudget& budget,
                                         const DishScenarioConfig& cfg = {}) {
  auto selected = select_nearest(tracks, frame, k, cfg.min_elevation_deg);
  if (selected.empty())
    throw GeometryError("dish_jammer_scenario: no visible satellites at frame " +
                        std::to_string(frame));

  PlanarArray tx = cfg.tx;
  tx.frame = zenith_frame();

  // The dish tracks the nearest satellite as seen from its own position.
  const LookAngles nearest_from_jammer =
      translate_look(selected.front().look, cfg.jammer_offset_enu);
  DishAntenna dish = cfg.dish;
  dish.boresight = look_direction_enu(nearest_from_jammer);

  std::vector<ChannelBlock> blocks0, blocks1;
  for (const auto& sel : selected) {
    blocks0.push_back(build_channel(tx, cfg.satellite, sel.look, budget,
                                    site.altitude_m, sel.id));
    const LookAngles from_jammer = translate_look(sel.look, cfg.jammer_offset_enu);
    blocks1.push_back(build_channel(dish, cfg.satellite, from_jammer, budget,
                                    site.altitude_m, sel.id));
  }
  const StackedChannel h0 = stack(blocks0);
  const StackedChannel h1 = stack(blocks1);

  const double e0 = budget.tx0_power_w();
  const double e1 = budget.tx1_power_w();

  CovarianceMatrix q1{CMat::Constant(1, 1, cxd(e1, 0.0)), e1};
  const CMat p = interference_cov(h1, q1, budget.kappa_w);
  WaterfillResult wf = waterfill_best_response(h0, p, e0, cfg.solver);

  GameSolution sol;
  sol.q0 = std::move(wf.q0);
  sol.q1 = std::move(q1);
  sol.rate_bits = wf.dead_channel ? 0.0 : rate(h0, sol.q0, p);
  sol.iterations = 1;
  sol.converged = true;
  return sol;
}

}  // namespace orbitduel
