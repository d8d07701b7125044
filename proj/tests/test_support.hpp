#pragma once

// Shared test utilities: independent oracles and small random-instance
// builders. Everything here stays off the library's implementation paths it
// is used to check.

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include "bipgo/graph.hpp"
#include "bipgo/simulation.hpp"

namespace testsup {

using bipgo::Index;
using bipgo::Mat3;
using bipgo::MatX;
using bipgo::NodeId;
using bipgo::Pose;
using bipgo::Rotation;
using bipgo::Vec3;
using bipgo::VecX;

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

// Haar rotation through quaternions, independent of the library's sampler.
inline Rotation haar_rotation(std::mt19937_64& g) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(g), n(g), n(g), n(g));
  while (q.norm() < 1e-9) q = Eigen::Quaterniond(n(g), n(g), n(g), n(g));
  q.normalize();
  return q.toRotationMatrix();
}

inline Vec3 random_vec(std::mt19937_64& g, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return Vec3(u(g), u(g), u(g));
}

inline Pose random_pose(std::mt19937_64& g, double scale = 2.0) {
  return {haar_rotation(g), random_vec(g, scale)};
}

// Quaternion-based rotation distance, the oracle for geodesic_angle_deg.
inline double quat_angle_deg(const Rotation& a, const Rotation& b) {
  Eigen::Quaterniond qa(a), qb(b);
  return qa.angularDistance(qb) * 180.0 / M_PI;
}

// Polar factor of m (valid projection oracle whenever det(m) > 0).
inline Mat3 polar_rotation(const Mat3& m) {
  Eigen::SelfAdjointEigenSolver<Mat3> eig(m.transpose() * m);
  const Mat3 inv_sqrt = eig.eigenvectors() *
                        eig.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                        eig.eigenvectors().transpose();
  return m * inv_sqrt;
}

// Simpson quadrature of f over [a, b].
template <typename F>
double quadrature(F&& f, double a, double b, int panels = 20000) {
  const double h = (b - a) / (2 * panels);
  double sum = f(a) + f(b);
  for (int i = 1; i < 2 * panels; ++i) {
    sum += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  }
  return sum * h / 3.0;
}

// Random rigid-rig model with `count` markers; reference first, identity.
inline bipgo::ObjectModel random_object(std::mt19937_64& g, int count) {
  bipgo::ObjectModel model;
  for (int m = 1; m <= count; ++m) {
    model.markers.push_back(m);
    model.rel[m] = m == 1 ? bipgo::identity_pose() : random_pose(g, 0.3);
  }
  return model;
}

struct TestScene {
  bipgo::MeasurementGraph graph;
  std::vector<Pose> cam_poses;
  std::vector<Pose> object_poses;  // reference marker pose per time
};

struct TestSceneConfig {
  int cameras = 4;
  int times = 6;
  int markers = 2;
  double edge_prob = 0.7;    // per (camera, time) pair
  double kappa = 0.0;        // 0 -> noiseless edges with weight `weight`
  double tau = 0.0;          // 0 -> noiseless
  double weight = 1.0;       // kappa used as edge weight when noiseless
  double tau_weight = 100.0; // tau used as edge weight when noiseless
};

// Random connected bipartite instance with exact or Langevin/Gaussian noisy
// edges. Retries until the rotation-edge graph is connected and every node is
// covered.
inline TestScene make_scene(std::mt19937_64& g, const TestSceneConfig& cfg) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> marker_pick(1, cfg.markers);
  for (int attempt = 0; attempt < 200; ++attempt) {
    TestScene scene;
    bipgo::ObjectModel object = random_object(g, cfg.markers);
    std::vector<Pose> cams, objs;
    for (int c = 0; c < cfg.cameras; ++c) cams.push_back(random_pose(g, 3.0));
    for (int t = 0; t < cfg.times; ++t) objs.push_back(random_pose(g, 3.0));
    std::vector<bipgo::EdgeMeasurement> edges;
    for (int c = 0; c < cfg.cameras; ++c) {
      for (int t = 0; t < cfg.times; ++t) {
        if (unit(g) > cfg.edge_prob) continue;
        const int nmark = marker_pick(g);
        for (int k = 0; k < nmark; ++k) {
          const NodeId m = marker_pick(g);
          bool dup = false;
          for (const auto& e : edges) {
            if (e.cam == c && e.marker == m && e.time == t) dup = true;
          }
          if (dup) continue;
          const Pose marker_pose = bipgo::compose(object.rel.at(m), objs[t]);
          const Pose true_rel = bipgo::relative(cams[c], marker_pose);
          bipgo::EdgeMeasurement e;
          e.cam = c;
          e.marker = m;
          e.time = t;
          if (cfg.kappa > 0.0) {
            bipgo::Rng noise_rng(g());
            e.r_meas = bipgo::sample_langevin(true_rel.r, cfg.kappa, noise_rng);
            e.t_meas = bipgo::sample_gaussian_translation(true_rel.t, cfg.tau, noise_rng);
            e.noise = {cfg.kappa, cfg.tau};
          } else {
            e.r_meas = true_rel.r;
            e.t_meas = true_rel.t;
            e.noise = {cfg.weight, cfg.tau_weight};
          }
          edges.push_back(std::move(e));
        }
      }
    }
    if (edges.empty()) continue;
    bipgo::MeasurementGraph graph = bipgo::make_graph(edges, object);
    if (graph.num_cameras() != cfg.cameras || graph.num_times() != cfg.times) continue;
    if (!bipgo::is_connected(graph)) continue;
    scene.graph = std::move(graph);
    scene.cam_poses = std::move(cams);
    scene.object_poses = std::move(objs);
    return scene;
  }
  throw std::runtime_error("make_scene: failed to build a connected instance");
}

}  // namespace testsup
