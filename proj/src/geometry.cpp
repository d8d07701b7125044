#include "bipgo/geometry.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Geometry>
#include <Eigen/SVD>

#include "bipgo/errors.hpp"

namespace bipgo {

Pose compose(const Pose& a, const Pose& b) {
  return {a.r * b.r, a.r * b.t + a.t};
}

Pose inverse(const Pose& p) {
  Rotation rt = p.r.transpose();
  return {rt, -(rt * p.t)};
}

Pose relative(const Pose& p_i, const Pose& p_j) {
  return compose(p_i, inverse(p_j));
}

bool is_rotation(const Mat3& m, double tol) {
  if (!m.allFinite()) return false;
  const double ortho = (m.transpose() * m - Mat3::Identity()).norm();
  return ortho <= tol && std::abs(m.determinant() - 1.0) <= tol;
}

Rotation project_to_so3(const Mat3& m, bool strict, double sigma_eps) {
  if (!m.allFinite()) throw InvalidInput("project_to_so3: non-finite input");
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3& s = svd.singularValues();
  if (strict && s(1) <= sigma_eps * s(0)) {
    throw DegenerateProjection("project_to_so3: sigma_2 within tie tolerance");
  }
  const double det = (svd.matrixU() * svd.matrixV().transpose()).determinant();
  Vec3 flip(1.0, 1.0, det > 0.0 ? 1.0 : -1.0);
  return svd.matrixU() * flip.asDiagonal() * svd.matrixV().transpose();
}

double geodesic_angle_rad(const Rotation& a, const Rotation& b) {
  const double c = std::clamp(((a.transpose() * b).trace() - 1.0) / 2.0, -1.0, 1.0);
  if (c <= 0.7) return std::acos(c);
  // Near zero the cosine saturates and acos cannot resolve angles below
  // sqrt(eps); the chordal identity ||a - b||_F = 2 sqrt(2) sin(theta/2)
  // evaluates the same angle with full relative accuracy.
  const double s = (a - b).norm() / (2.0 * std::sqrt(2.0));
  return 2.0 * std::asin(std::clamp(s, 0.0, 1.0));
}

double geodesic_angle_deg(const Rotation& a, const Rotation& b) {
  return geodesic_angle_rad(a, b) * 180.0 / M_PI;
}

double langevin_angle_density(double theta, double kappa) {
  const double c = std::cos(theta);
  return std::exp(2.0 * kappa * (c - 1.0)) * (1.0 - c);
}

double sample_langevin_angle(double kappa, Rng& rng) {
  if (kappa < 0.0) throw InvalidInput("sample_langevin: kappa < 0");
  // log of the scaled density maximum; the mode sits at cos t = 1 - 1/(2k)
  // for k >= 1/4 and at t = pi below that.
  double log_fmax;
  if (kappa >= 0.25) {
    log_fmax = -1.0 - std::log(2.0 * kappa);
  } else {
    log_fmax = std::log(2.0) - 4.0 * kappa;
  }
  std::uniform_real_distribution<double> angle(0.0, M_PI);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  while (true) {
    const double theta = angle(rng);
    const double c = std::cos(theta);
    const double log_f = 2.0 * kappa * (c - 1.0) + std::log1p(-c);
    const double u = unit(rng);
    if (std::log(std::max(u, 1e-300)) + log_fmax <= log_f) return theta;
  }
}

Vec3 sample_unit_vector(Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  while (true) {
    Vec3 v(gauss(rng), gauss(rng), gauss(rng));
    const double n = v.norm();
    if (n > 1e-12) return v / n;
  }
}

Rotation sample_langevin(const Rotation& mean, double kappa, Rng& rng) {
  if (kappa >= kNoiselessKappa) return mean;
  const double theta = sample_langevin_angle(kappa, rng);
  const Vec3 axis = sample_unit_vector(rng);
  const Rotation e = Eigen::AngleAxisd(theta, axis).toRotationMatrix();
  return e * mean;
}

Vec3 sample_gaussian_translation(const Vec3& mean, double tau, Rng& rng) {
  if (!(tau > 0.0)) throw InvalidInput("sample_gaussian_translation: tau <= 0");
  if (tau >= kNoiselessTau) return mean;
  const double sigma = 1.0 / std::sqrt(tau);
  std::normal_distribution<double> gauss(0.0, sigma);
  return mean + Vec3(gauss(rng), gauss(rng), gauss(rng));
}

Rotation sample_uniform_rotation(Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  while (true) {
    Eigen::Quaterniond q(gauss(rng), gauss(rng), gauss(rng), gauss(rng));
    const double n = q.norm();
    if (n > 1e-12) {
      q.coeffs() /= n;
      return q.toRotationMatrix();
    }
  }
}

}  // namespace bipgo
