#pragma once

#include <vector>

#include "bipgo/graph.hpp"

namespace bipgo {

// Weighted incidence system for the translation least squares. Each edge row
// carries exactly two blocks: tau * I at its camera column and
// -tau * R_c R_m^T R_rel at its object column; the right-hand side holds the
// tau-scaled adjusted measurement. One camera is anchored at zero to remove
// the translation gauge.
struct TranslationSystem {
  struct Row {
    Index cam;
    Index time;
    double tau;
    Mat3 object_block;  // R_c R_m^T R_rel (unscaled)
    Vec3 rhs;           // tau * (t_meas + R_c R_m^T t_rel)
  };
  std::vector<Row> rows;
  Index num_cameras = 0;
  Index num_times = 0;
  Index anchor = 0;  // camera index whose translation is pinned to zero
};

TranslationSystem build_translation_system(const MeasurementGraph& g,
                                           const std::vector<Rotation>& r_c,
                                           const std::vector<Rotation>& r_t,
                                           NodeId anchor_cam);

struct TranslationSolution {
  std::vector<Vec3> cam;  // anchor reinserted as zero
  std::vector<Vec3> obj;
  int iterations = 0;
  double residual = 0.0;  // ||J^T (rhs - J x)|| / ||J^T rhs||
};

// Solves the normal equations by conjugate gradients with block-Jacobi
// preconditioning, from a zero start. Throws NoConvergence past the iteration
// cap (default 10 * unknowns + 100).
TranslationSolution solve_translations(const TranslationSystem& sys, double tol = 1e-10,
                                       int max_iterations = 0);

}  // namespace bipgo
