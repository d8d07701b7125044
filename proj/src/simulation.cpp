#include "bipgo/simulation.hpp"

#include <cmath>

#include <Eigen/Geometry>

#include "bipgo/errors.hpp"
#include "bipgo/io.hpp"

namespace bipgo {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng sub_rng(std::uint64_t seed, std::uint64_t stream) {
  return Rng(splitmix64(seed ^ splitmix64(stream + 1)));
}

double attenuation(const NoiseModel& noise, double distance) {
  if (noise.atten_d0 <= 0.0) return 1.0;
  return 1.0 / (1.0 + std::pow(distance / noise.atten_d0, noise.atten_p));
}

Vec3 camera_center(const Pose& p) { return -(p.r.transpose() * p.t); }

// World-frame center and outward normal of a marker given its world pose.
Vec3 marker_center(const Pose& p) { return -(p.r.transpose() * p.t); }
Vec3 marker_normal(const Pose& p) { return p.r.row(2).transpose(); }

struct EdgeDraw {
  bool visible = false;
  EdgeMeasurement edge;
};

EdgeDraw draw_edge(const Pose& cam_pose, const Pose& marker_pose, NodeId cam_id,
                   NodeId marker_id, NodeId time_id, const VisibilityModel& vis,
                   const NoiseModel& noise, Rng& rng) {
  EdgeDraw out;
  const Vec3 cc = camera_center(cam_pose);
  const Vec3 mc = marker_center(marker_pose);
  const Vec3 to_cam = cc - mc;
  const double dist = to_cam.norm();
  if (dist > vis.max_range || dist <= 1e-9) return out;
  const double cos_view = marker_normal(marker_pose).dot(to_cam / dist);
  if (cos_view < std::cos(vis.max_view_angle_deg * M_PI / 180.0)) return out;
  if (vis.dropout_prob > 0.0) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (unit(rng) < vis.dropout_prob) return out;
  }
  const double kappa = noise.kappa_base * attenuation(noise, dist);
  const double tau = noise.tau_base * attenuation(noise, dist);
  const Pose true_rel = relative(cam_pose, marker_pose);
  out.visible = true;
  out.edge.cam = cam_id;
  out.edge.marker = marker_id;
  out.edge.time = time_id;
  out.edge.r_meas = sample_langevin(true_rel.r, kappa, rng);
  out.edge.t_meas = sample_gaussian_translation(true_rel.t, tau, rng);
  out.edge.noise = {kappa, tau};
  return out;
}

}  // namespace

ObjectModel builtin_cube() {
  struct Face {
    Vec3 normal, tangent_u, tangent_v;
  };
  const double h = kCubeSide / 2.0;
  const double q = kCubeSide / 4.0;
  const Face faces[6] = {
      {{0, 0, 1}, {1, 0, 0}, {0, 1, 0}},   {{0, 0, -1}, {1, 0, 0}, {0, -1, 0}},
      {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}},   {{-1, 0, 0}, {0, -1, 0}, {0, 0, 1}},
      {{0, 1, 0}, {0, 0, 1}, {1, 0, 0}},   {{0, -1, 0}, {0, 0, -1}, {1, 0, 0}},
  };
  std::vector<Pose> cube_to_marker;
  for (const Face& f : faces) {
    for (const auto& [du, dv] : {std::pair{-q, -q}, {q, -q}, {-q, q}, {q, q}}) {
      const Vec3 center = h * f.normal + du * f.tangent_u + dv * f.tangent_v;
      Mat3 r;
      r.row(0) = f.tangent_u.transpose();
      r.row(1) = f.tangent_v.transpose();
      r.row(2) = f.normal.transpose();
      cube_to_marker.push_back({r, -(r * center)});
    }
  }
  ObjectModel model;
  const Pose ref_inv = inverse(cube_to_marker[0]);
  for (size_t i = 0; i < cube_to_marker.size(); ++i) {
    const NodeId id = static_cast<NodeId>(i + 1);
    model.markers.push_back(id);
    model.rel[id] = i == 0 ? identity_pose() : compose(cube_to_marker[i], ref_inv);
  }
  return model;
}

Scene generate_scene(const SceneConfig& cfg) {
  if (cfg.num_cameras < 2) throw BadConfig("scene needs at least two cameras");
  if (cfg.num_times < 1) throw BadConfig("scene needs at least one time step");
  if (cfg.visibility.dropout_prob < 0.0 || cfg.visibility.dropout_prob >= 1.0) {
    throw BadConfig("dropout_prob must be in [0, 1)");
  }
  const ObjectModel object =
      cfg.object_source == "cube" ? builtin_cube() : read_object(cfg.object_source);

  Scene scene;

  // Ceiling grid, optical axes pointing down with a jittered tilt.
  Rng cam_rng = sub_rng(cfg.seed, 0xC0FFEE);
  const int gx = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(cfg.num_cameras))));
  const int gy = (cfg.num_cameras + gx - 1) / gx;
  const Mat3 down = (Mat3() << 1, 0, 0, 0, -1, 0, 0, 0, -1).finished();
  for (int c = 0; c < cfg.num_cameras; ++c) {
    const int ix = c % gx;
    const int iy = c / gx;
    const Vec3 center((ix + 0.5) * cfg.room.x() / gx, (iy + 0.5) * cfg.room.y() / gy,
                      cfg.room.z() - 0.05);
    std::uniform_real_distribution<double> angle(0.0, cfg.camera_jitter_deg * M_PI / 180.0);
    const Rotation jitter =
        Eigen::AngleAxisd(angle(cam_rng), sample_unit_vector(cam_rng)).toRotationMatrix();
    const Rotation r = jitter * down;
    scene.truth.cam_poses.push_back({r, -(r * center)});
  }

  const double margin = 1.0;
  std::vector<EdgeMeasurement> edges;
  for (int t = 0; t < cfg.num_times; ++t) {
    Rng rng = sub_rng(cfg.seed, static_cast<std::uint64_t>(t) + 1);
    Pose object_pose;
    object_pose.r = sample_uniform_rotation(rng);
    Vec3 pos;
    for (int axis = 0; axis < 3; ++axis) {
      const double lo = std::min(margin, cfg.room(axis) / 2.0);
      std::uniform_real_distribution<double> coord(lo, cfg.room(axis) - lo);
      pos(axis) = coord(rng);
    }
    object_pose.t = -(object_pose.r * pos);
    scene.truth.object_poses.push_back(object_pose);

    for (int c = 0; c < cfg.num_cameras; ++c) {
      for (NodeId m : object.markers) {
        const Pose marker_pose = compose(object.rel.at(m), object_pose);
        EdgeDraw draw = draw_edge(scene.truth.cam_poses[static_cast<size_t>(c)],
                                  marker_pose, c, m, t, cfg.visibility, cfg.noise, rng);
        if (draw.visible) edges.push_back(std::move(draw.edge));
      }
    }
  }
  if (edges.empty()) throw EmptyGraph("visibility model produced no edges");
  scene.graph = make_graph(std::move(edges), object);

  // Ground truth stays aligned with the graph's node ordering even when some
  // cameras or time steps never observed anything.
  GroundTruth aligned;
  for (NodeId c : scene.graph.cameras) {
    aligned.cam_poses.push_back(scene.truth.cam_poses[static_cast<size_t>(c)]);
  }
  for (NodeId t : scene.graph.times) {
    aligned.object_poses.push_back(scene.truth.object_poses[static_cast<size_t>(t)]);
  }
  scene.truth = std::move(aligned);
  return scene;
}

SceneConfig preset(const std::string& name) {
  SceneConfig cfg;
  cfg.name = name;
  auto small_room = [&](int times) {
    cfg.num_cameras = 25;
    cfg.num_times = times;
    cfg.room = Vec3(9.0, 8.0, 3.0);
    cfg.visibility = {2.8, 50.0, 0.1};
    cfg.noise = {2000.0, 1e4, 3.0, 2.0};
  };
  auto large_shop = [&](int times) {
    cfg.num_cameras = 342;
    cfg.num_times = times;
    cfg.room = Vec3(26.0, 13.8, 4.0);
    cfg.visibility = {3.6, 50.0, 0.1};
    cfg.noise = {2000.0, 1e4, 3.5, 2.0};
  };
  if (name == "SmallRoom50") {
    small_room(50);
  } else if (name == "SmallRoom500") {
    small_room(500);
  } else if (name == "SmallRoom5K") {
    small_room(5000);
  } else if (name == "LargeShop500") {
    large_shop(500);
  } else if (name == "LargeShop5K") {
    large_shop(5000);
  } else if (name == "LargeShop10K") {
    large_shop(10000);
  } else {
    throw BadConfig("unknown preset '" + name + "'");
  }
  return cfg;
}

std::vector<std::string> preset_names() {
  return {"SmallRoom50", "SmallRoom500", "SmallRoom5K",
          "LargeShop500", "LargeShop5K", "LargeShop10K"};
}

CalibrationViews generate_calibration_views(const ObjectModel& object, int num_views,
                                            const NoiseModel& noise, std::uint64_t seed) {
  if (num_views < 1) throw BadConfig("calibration needs at least one view");

  // Rig center and radius in the reference marker frame.
  Vec3 rig_center = Vec3::Zero();
  for (NodeId m : object.markers) {
    rig_center += marker_center(object.rel.at(m));
  }
  rig_center /= static_cast<double>(object.markers.size());
  double radius = 0.0;
  for (NodeId m : object.markers) {
    radius = std::max(radius, (marker_center(object.rel.at(m)) - rig_center).norm());
  }

  const VisibilityModel vis{1e9, 70.0, 0.0};
  CalibrationViews out;
  for (int v = 0; v < num_views; ++v) {
    Rng rng = sub_rng(seed, static_cast<std::uint64_t>(v) + 1);
    const Vec3 dir = sample_unit_vector(rng);
    std::uniform_real_distribution<double> extra(0.8, 2.2);
    const Vec3 center = rig_center + (radius + extra(rng)) * dir;

    // Optical axis toward the rig center, the remaining axes arbitrary.
    const Vec3 z = (rig_center - center).normalized();
    Vec3 ref = std::abs(z.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
    const Vec3 x = ref.cross(z).normalized();
    const Vec3 y = z.cross(x);
    Mat3 r;
    r.row(0) = x.transpose();
    r.row(1) = y.transpose();
    r.row(2) = z.transpose();
    const Pose cam_pose{r, -(r * center)};
    out.camera_poses.push_back(cam_pose);

    for (NodeId m : object.markers) {
      EdgeDraw draw =
          draw_edge(cam_pose, object.rel.at(m), 0, m, v, vis, noise, rng);
      if (draw.visible) out.edges.push_back(std::move(draw.edge));
    }
  }
  return out;
}

}  // namespace bipgo
