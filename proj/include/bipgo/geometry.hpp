#pragma once

#include <random>

#include <Eigen/Core>

#include "bipgo/types.hpp"

namespace bipgo {

// Rotations are plain 3x3 matrices; validity (orthonormal, det +1) is a
// contract checked by is_rotation, not by construction.
using Rotation = Mat3;

struct Pose {
  Rotation r = Rotation::Identity();
  Vec3 t = Vec3::Zero();
};

inline Pose identity_pose() { return {}; }

// Homogeneous-transform composition: X -> a.r * (b.r * X + b.t) + a.t.
Pose compose(const Pose& a, const Pose& b);
Pose inverse(const Pose& p);

// Relative pose with the fixed convention relative(P_i, P_j) = P_i * P_j^{-1}.
Pose relative(const Pose& p_i, const Pose& p_j);

bool is_rotation(const Mat3& m, double tol = 1e-9);

// Nearest rotation in the trace sense: argmax_{R in SO(3)} Tr(R^T m), computed
// as U diag(1, 1, det(U V^T)) V^T from the SVD of m. When sigma_2 <= sigma_eps
// * sigma_1 the maximizer is not unique; the default keeps the deterministic
// SVD-based choice, strict mode throws DegenerateProjection instead.
Rotation project_to_so3(const Mat3& m, bool strict = false,
                        double sigma_eps = 1e-12);

double geodesic_angle_rad(const Rotation& a, const Rotation& b);

/// Rotation distance in degrees, in [0, 180].
double geodesic_angle_deg(const Rotation& a, const Rotation& b);

struct NoiseParams {
  double kappa = 0.0;  // Langevin concentration; 0 encodes a missing rotation edge
  double tau = 0.0;    // Gaussian precision, 1/m^2
};

// Concentrations/precisions at or above these cutoffs are treated as exact.
inline constexpr double kNoiselessKappa = 1e8;
inline constexpr double kNoiselessTau = 1e12;

using Rng = std::mt19937_64;

// Draws E with density proportional to exp(kappa * Tr(E)) and returns E * mean.
// Sampling is exact: uniform random axis plus rejection sampling of the angle
// from its marginal density. kappa >= kNoiselessKappa returns mean unchanged.
Rotation sample_langevin(const Rotation& mean, double kappa, Rng& rng);

// Angle marginal used by the sampler, scaled by exp(-2 kappa):
// exp(2 kappa (cos t - 1)) * (1 - cos t) on [0, pi].
double langevin_angle_density(double theta, double kappa);
double sample_langevin_angle(double kappa, Rng& rng);

// mean + e with e ~ N(0, I/tau). tau >= kNoiselessTau returns mean unchanged.
Vec3 sample_gaussian_translation(const Vec3& mean, double tau, Rng& rng);

Rotation sample_uniform_rotation(Rng& rng);
Vec3 sample_unit_vector(Rng& rng);

}  // namespace bipgo
