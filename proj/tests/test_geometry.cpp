#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "bipgo/errors.hpp"
#include "bipgo/geometry.hpp"
#include "test_support.hpp"

using namespace bipgo;
using testsup::haar_rotation;
using testsup::quat_angle_deg;

TEST_SUITE_BEGIN("geometry");

TEST_CASE("project_to_so3 trivial cases") {
  CHECK((project_to_so3(Mat3::Identity()) - Mat3::Identity()).norm() < 1e-14);
  const Mat3 diag = Vec3(2.0, 3.0, 4.0).asDiagonal();
  CHECK((project_to_so3(diag) - Mat3::Identity()).norm() < 1e-14);
}

TEST_CASE("project_to_so3 matches the polar factor and dominates random rotations") {
  auto rng = testsup::rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Mat3 m;
  do {
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) m(i, j) = u(rng);
  } while (m.determinant() <= 0.05);

  const Rotation r = project_to_so3(m);
  CHECK(is_rotation(r, 1e-12));
  CHECK((r - testsup::polar_rotation(m)).norm() < 1e-10);

  const double best = (r.transpose() * m).trace();
  for (int k = 0; k < 100000; ++k) {
    const Rotation q = haar_rotation(rng);
    CHECK((q.transpose() * m).trace() <= best + 1e-12);
  }
}

TEST_CASE("project_to_so3 degenerate input") {
  const Mat3 rank1 = Vec3(1, 2, 3) * Vec3(0.5, -1, 2).transpose();
  CHECK_THROWS_AS((void)project_to_so3(rank1, /*strict=*/true), DegenerateProjection);
  // Default accepts the deterministic SVD choice.
  CHECK(is_rotation(project_to_so3(rank1), 1e-9));
}

TEST_CASE("project_to_so3 idempotent and scale invariant") {
  auto rng = testsup::rng(12);
  for (int k = 0; k < 200; ++k) {
    const Rotation r = haar_rotation(rng);
    CHECK((project_to_so3(r) - r).norm() < 1e-9);
    std::uniform_real_distribution<double> s(0.1, 50.0);
    const Mat3 m = 0.3 * r + 0.05 * Mat3::Random();
    CHECK((project_to_so3(s(rng) * m) - project_to_so3(m)).norm() < 1e-10);
  }
}

TEST_CASE("geodesic angle basics") {
  auto rng = testsup::rng(21);
  const Rotation r = haar_rotation(rng);
  CHECK(geodesic_angle_deg(r, r) == doctest::Approx(0.0).epsilon(1e-12));
  const Rotation z90 = Eigen::AngleAxisd(M_PI / 2, Vec3::UnitZ()).toRotationMatrix();
  CHECK(geodesic_angle_deg(Mat3::Identity(), z90) == doctest::Approx(90.0).epsilon(1e-12));
}

TEST_CASE("geodesic angle agrees with the quaternion oracle") {
  auto rng = testsup::rng(22);
  for (int k = 0; k < 500; ++k) {
    const Rotation a = haar_rotation(rng);
    const Rotation b = haar_rotation(rng);
    CHECK(std::abs(geodesic_angle_deg(a, b) - quat_angle_deg(a, b)) < 1e-9);
  }
}

TEST_CASE("geodesic angle symmetric and bi-invariant") {
  auto rng = testsup::rng(23);
  for (int k = 0; k < 200; ++k) {
    const Rotation a = haar_rotation(rng);
    const Rotation b = haar_rotation(rng);
    const Rotation q = haar_rotation(rng);
    CHECK(std::abs(geodesic_angle_deg(a, b) - geodesic_angle_deg(b, a)) < 1e-9);
    CHECK(std::abs(geodesic_angle_deg(q * a, q * b) - geodesic_angle_deg(a, b)) < 1e-9);
  }
}

TEST_CASE("pose composition identities") {
  auto rng = testsup::rng(31);
  for (int k = 0; k < 100; ++k) {
    const Pose pi = testsup::random_pose(rng);
    const Pose pj = testsup::random_pose(rng);
    const Pose pk = testsup::random_pose(rng);

    const Pose rel_ii = relative(pi, pi);
    CHECK((rel_ii.r - Mat3::Identity()).norm() < 1e-12);
    CHECK(rel_ii.t.norm() < 1e-12);

    const Pose round = compose(relative(pi, pj), pj);
    CHECK((round.r - pi.r).norm() < 1e-12);
    CHECK((round.t - pi.t).norm() < 1e-12);

    const Pose chained = compose(relative(pi, pj), relative(pj, pk));
    const Pose direct = relative(pi, pk);
    CHECK((chained.r - direct.r).norm() < 1e-12);
    CHECK((chained.t - direct.t).norm() < 1e-11);
  }
  const Pose inv_id = inverse(identity_pose());
  CHECK((inv_id.r - Mat3::Identity()).norm() == 0.0);
  CHECK(inv_id.t.norm() == 0.0);
}

TEST_CASE("langevin sampler: concentration cutoff") {
  auto seed_rng = testsup::rng(5);
  const Rotation mean = haar_rotation(seed_rng);
  Rng g(7);
  CHECK((sample_langevin(mean, kNoiselessKappa, g) - mean).norm() == 0.0);
  CHECK((sample_langevin(mean, 1e9, g) - mean).norm() == 0.0);
}

TEST_CASE("langevin sampler: mean trace against quadrature") {
  const int n = 100000;
  for (double kappa : {0.0, 5.0}) {
    Rng g(101 + static_cast<int>(kappa));
    double mean_trace = 0.0;
    for (int i = 0; i < n; ++i) {
      mean_trace += sample_langevin(Mat3::Identity(), kappa, g).trace();
    }
    mean_trace /= n;
    const auto f = [&](double t) { return langevin_angle_density(t, kappa); };
    const double z = testsup::quadrature(f, 0.0, M_PI);
    const double expected = testsup::quadrature(
        [&](double t) { return (1.0 + 2.0 * std::cos(t)) * f(t); }, 0.0, M_PI) / z;
    if (kappa == 0.0) CHECK(std::abs(expected) < 1e-10);  // Haar limit
    CHECK(std::abs(mean_trace - expected) < 0.02);
  }
}

TEST_CASE("langevin sampler: Kolmogorov-Smirnov against the quadrature cdf") {
  const int n = 20000;
  const int grid = 4000;
  for (double kappa : {0.5, 5.0, 50.0}) {
    Rng g(211 + static_cast<int>(kappa));
    std::vector<double> angles(n);
    for (int i = 0; i < n; ++i) angles[i] = sample_langevin_angle(kappa, g);
    std::sort(angles.begin(), angles.end());
    std::vector<double> cdf(grid + 1, 0.0);
    const double h = M_PI / grid;
    for (int i = 1; i <= grid; ++i) {
      const double a = (i - 1) * h;
      cdf[i] = cdf[i - 1] + (langevin_angle_density(a, kappa) +
                             4.0 * langevin_angle_density(a + h / 2, kappa) +
                             langevin_angle_density(a + h, kappa)) * h / 6.0;
    }
    for (auto& v : cdf) v /= cdf[grid];
    double ks = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = angles[i];
      const int cell = std::min(grid - 1, static_cast<int>(x / h));
      const double frac = (x - cell * h) / h;
      const double fx = cdf[cell] + frac * (cdf[cell + 1] - cdf[cell]);
      ks = std::max(ks, std::abs(fx - (i + 1.0) / n));
      ks = std::max(ks, std::abs(fx - static_cast<double>(i) / n));
    }
    const double critical = 1.628 / std::sqrt(static_cast<double>(n));  // alpha = 1%
    CHECK(ks < critical);
  }
}

TEST_CASE("gaussian translation sampler") {
  const Vec3 mean(0.5, -1.0, 2.0);
  Rng g(303);
  CHECK((sample_gaussian_translation(mean, kNoiselessTau, g) - mean).norm() == 0.0);

  const int n = 100000;
  for (double tau : {1.0, 100.0}) {
    Vec3 sum = Vec3::Zero(), sq = Vec3::Zero();
    for (int i = 0; i < n; ++i) {
      const Vec3 v = sample_gaussian_translation(mean, tau, g) - mean;
      sum += v;
      sq += v.cwiseProduct(v);
    }
    const Vec3 var = sq / n - (sum / n).cwiseProduct(sum / n);
    for (int a = 0; a < 3; ++a) {
      CHECK(var(a) == doctest::Approx(1.0 / tau).epsilon(0.03));
    }
  }
  CHECK_THROWS_AS((void)sample_gaussian_translation(mean, 0.0, g), InvalidInput);
}

TEST_SUITE_END();
