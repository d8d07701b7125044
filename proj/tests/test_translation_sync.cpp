#include "doctest.h"

#include <Eigen/Dense>

#include "bipgo/errors.hpp"
#include "bipgo/evaluation.hpp"
#include "bipgo/rotation_sync.hpp"
#include "bipgo/translation_sync.hpp"
#include "test_support.hpp"

using namespace bipgo;
using testsup::TestScene;

TEST_SUITE_BEGIN("translation_sync");

namespace {

// Dense J and rhs, built independently row by row.
struct DenseSystem {
  MatX j;
  VecX rhs;
};

DenseSystem dense_system(const TranslationSystem& sys) {
  const Index n = sys.num_cameras - 1 + sys.num_times;
  DenseSystem d;
  d.j = MatX::Zero(3 * static_cast<Index>(sys.rows.size()), 3 * n);
  d.rhs = VecX::Zero(3 * static_cast<Index>(sys.rows.size()));
  for (size_t e = 0; e < sys.rows.size(); ++e) {
    const auto& row = sys.rows[e];
    const Index r = 3 * static_cast<Index>(e);
    if (row.cam != sys.anchor) {
      const Index c = row.cam < sys.anchor ? row.cam : row.cam - 1;
      d.j.block<3, 3>(r, 3 * c) = row.tau * Mat3::Identity();
    }
    const Index t = sys.num_cameras - 1 + row.time;
    d.j.block<3, 3>(r, 3 * t) = -row.tau * row.object_block;
    d.rhs.segment<3>(r) = row.rhs;
  }
  return d;
}

VecX pack_solution(const TranslationSystem& sys, const TranslationSolution& sol) {
  const Index n = sys.num_cameras - 1 + sys.num_times;
  VecX x(3 * n);
  for (Index c = 0; c < sys.num_cameras; ++c) {
    if (c == sys.anchor) continue;
    x.segment<3>(3 * (c < sys.anchor ? c : c - 1)) = sol.cam[static_cast<size_t>(c)];
  }
  for (Index t = 0; t < sys.num_times; ++t) {
    x.segment<3>(3 * (sys.num_cameras - 1 + t)) = sol.obj[static_cast<size_t>(t)];
  }
  return x;
}

std::vector<Rotation> cam_rotations(const TestScene& s) {
  std::vector<Rotation> r;
  for (const auto& p : s.cam_poses) r.push_back(p.r);
  return r;
}
std::vector<Rotation> obj_rotations(const TestScene& s) {
  std::vector<Rotation> r;
  for (const auto& p : s.object_poses) r.push_back(p.r);
  return r;
}

}  // namespace

TEST_CASE("single edge with identity rotations") {
  auto rng = testsup::rng(61);
  ObjectModel o;
  o.markers = {1};
  o.rel[1] = identity_pose();
  EdgeMeasurement e;
  e.cam = 0;
  e.marker = 1;
  e.time = 0;
  e.r_meas = Mat3::Identity();
  e.t_meas = testsup::random_vec(rng);
  e.noise = {1.0, 2.5};
  // A second camera so the anchored system is nontrivial.
  EdgeMeasurement e2 = e;
  e2.cam = 1;
  e2.t_meas = testsup::random_vec(rng);
  const MeasurementGraph g = make_graph({e, e2}, o);
  const std::vector<Rotation> ident(2, Mat3::Identity());
  const TranslationSystem sys =
      build_translation_system(g, ident, {Mat3::Identity()}, 0);
  CHECK(sys.rows.size() == 2);
  for (const auto& row : sys.rows) {
    CHECK((row.object_block - Mat3::Identity()).norm() < 1e-14);
    CHECK((row.rhs - row.tau * (row.cam == 0 ? e.t_meas : e2.t_meas)).norm() < 1e-14);
  }
  const TranslationSolution sol = solve_translations(sys);
  CHECK(sol.cam[0].norm() == 0.0);  // anchor
  CHECK((sol.obj[0] + e.t_meas).norm() < 1e-10);
  CHECK((sol.cam[1] - (e2.t_meas - e.t_meas)).norm() < 1e-10);
}

TEST_CASE("noiseless graph reproduces ground truth relative to the anchor") {
  auto rng = testsup::rng(62);
  const TestScene scene = testsup::make_scene(rng, {6, 9, 2, 0.8});
  const TranslationSystem sys = build_translation_system(
      scene.graph, cam_rotations(scene), obj_rotations(scene), 0);
  const TranslationSolution sol = solve_translations(sys);
  // The gauge maps truth so camera 0 sits at zero: t -> t - R R0^T t0 with
  // R = pose rotation. Compare in the quotient instead.
  std::vector<Pose> est, gt;
  for (size_t c = 0; c < scene.cam_poses.size(); ++c) {
    est.push_back({scene.cam_poses[c].r, sol.cam[c]});
    gt.push_back(scene.cam_poses[c]);
  }
  const OrbitDistance d = orbit_distance(est, gt);
  CHECK(d.max_dt_m < 1e-10);
}

TEST_CASE("row structure: two blocks per edge minus anchored entries") {
  auto rng = testsup::rng(63);
  const TestScene scene = testsup::make_scene(rng, {4, 6, 2, 0.7});
  const TranslationSystem sys = build_translation_system(
      scene.graph, cam_rotations(scene), obj_rotations(scene), 1);
  const DenseSystem d = dense_system(sys);
  Index nonzero_blocks = 0;
  for (size_t e = 0; e < sys.rows.size(); ++e) {
    for (Index col = 0; col < d.j.cols() / 3; ++col) {
      if (d.j.block<3, 3>(3 * static_cast<Index>(e), 3 * col).norm() > 0.0) {
        ++nonzero_blocks;
      }
    }
  }
  Index anchored_rows = 0;
  for (const auto& row : sys.rows) {
    if (row.cam == sys.anchor) ++anchored_rows;
  }
  CHECK(nonzero_blocks == 2 * static_cast<Index>(sys.rows.size()) - anchored_rows);
}

TEST_CASE("matches a dense normal-equations oracle on a noisy system") {
  auto rng = testsup::rng(64);
  const TestScene scene = testsup::make_scene(rng, {5, 8, 2, 0.8, 100.0, 50.0});
  const RotSolution rot = solve_rotations(scene.graph);
  const TranslationSystem sys =
      build_translation_system(scene.graph, rot.r_c, rot.r_t, 0);
  const TranslationSolution sol = solve_translations(sys, 1e-12);
  const DenseSystem d = dense_system(sys);
  const VecX x_oracle =
      (d.j.transpose() * d.j).ldlt().solve(d.j.transpose() * d.rhs);
  CHECK((pack_solution(sys, sol) - x_oracle).norm() < 1e-8);
  // Gradient optimality contract.
  const VecX grad = d.j.transpose() * (d.rhs - d.j * pack_solution(sys, sol));
  CHECK(grad.norm() <= 1e-12 * (d.j.transpose() * d.rhs).norm() * 10.0);
}

TEST_CASE("anchor invariance up to gauge") {
  auto rng = testsup::rng(65);
  const TestScene scene = testsup::make_scene(rng, {5, 7, 2, 0.8, 300.0, 1e3});
  const RotSolution rot = solve_rotations(scene.graph);
  std::vector<Pose> gt;
  for (const auto& p : scene.cam_poses) gt.push_back(p);
  double errs[2];
  int k = 0;
  for (NodeId anchor : {NodeId{0}, NodeId{3}}) {
    const TranslationSystem sys =
        build_translation_system(scene.graph, rot.r_c, rot.r_t, anchor);
    const TranslationSolution sol = solve_translations(sys, 1e-12);
    std::vector<Pose> est;
    for (size_t c = 0; c < gt.size(); ++c) est.push_back({rot.r_c[c], sol.cam[c]});
    errs[k++] = orbit_distance(est, gt).max_dt_m;
  }
  CHECK(std::abs(errs[0] - errs[1]) < 1e-9);
}

TEST_CASE("scaling all tau by a constant leaves the solution unchanged") {
  auto rng = testsup::rng(66);
  const TestScene scene = testsup::make_scene(rng, {4, 6, 2, 0.8, 100.0, 100.0});
  const RotSolution rot = solve_rotations(scene.graph);
  const TranslationSystem base =
      build_translation_system(scene.graph, rot.r_c, rot.r_t, 0);
  MeasurementGraph scaled = scene.graph;
  for (auto& e : scaled.edges) e.noise.tau *= 7.5;
  const TranslationSystem scaled_sys =
      build_translation_system(scaled, rot.r_c, rot.r_t, 0);
  const VecX a = pack_solution(base, solve_translations(base, 1e-12));
  const VecX b = pack_solution(scaled_sys, solve_translations(scaled_sys, 1e-12));
  CHECK((a - b).norm() < 1e-9 * (1.0 + a.norm()));
}

TEST_CASE("error paths") {
  auto rng = testsup::rng(67);
  const TestScene scene = testsup::make_scene(rng, {3, 4, 2, 0.9});
  CHECK_THROWS_AS((void)build_translation_system(scene.graph, cam_rotations(scene),
                                                 obj_rotations(scene), 42),
                  UnknownAnchor);
  const TranslationSystem sys = build_translation_system(
      scene.graph, cam_rotations(scene), obj_rotations(scene), 0);
  // Iteration cap of 1 on a non-trivial system cannot reach 1e-10.
  CHECK_THROWS_AS((void)solve_translations(sys, 1e-10, 1), NoConvergence);
}

TEST_SUITE_END();
