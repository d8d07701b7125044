#include "bipgo/rotation_sync.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>

#include <Eigen/SVD>

#include "bipgo/errors.hpp"
#include "bipgo/parallel.hpp"
#include "bipgo/translation_sync.hpp"
#include "internal.hpp"

namespace bipgo {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double trace_of(const std::vector<Mat3>& blocks) {
  double s = 0.0;
  for (const Mat3& b : blocks) s += b.trace();
  return s;
}

// L = BlockDiag(diag) - w.
BlockMatrix33 diag_minus(const std::vector<Mat3>& diag, const BlockMatrix33& w) {
  const Index n = w.block_rows();
  BlockMatrix33::Builder b(n, n);
  for (Index i = 0; i < n; ++i) b.add(i, i, diag[static_cast<size_t>(i)]);
  for (Index i = 0; i < n; ++i) {
    for (const auto& e : w.row(i)) b.add(i, e.col, -e.m);
  }
  return b.build();
}

// Per block s_i, U S U^T from the SVD; symmetric PSD by construction.
std::vector<Mat3> dual_blocks_from_stacked(const std::vector<Mat3>& s) {
  std::vector<Mat3> out(s.size());
  parallel_for(static_cast<Index>(s.size()), [&](Index begin, Index end) {
    for (Index i = begin; i < end; ++i) {
      Eigen::JacobiSVD<Mat3> svd(s[static_cast<size_t>(i)], Eigen::ComputeFullU);
      const Mat3 b = svd.matrixU() * svd.singularValues().asDiagonal() *
                     svd.matrixU().transpose();
      out[static_cast<size_t>(i)] = 0.5 * (b + b.transpose());
    }
  });
  return out;
}

std::vector<Mat3> dual_t_from_cols(const BlockMatrix33& cols_tc,
                                   const std::vector<Rotation>& r_c) {
  return dual_blocks_from_stacked(cols_tc.apply_blocks(r_c));
}

std::vector<Rotation> recover_objects(const BlockMatrix33& cols_tc,
                                      const std::vector<Rotation>& r_c) {
  std::vector<Mat3> g = cols_tc.apply_blocks(r_c);
  std::vector<Rotation> r_t(g.size());
  parallel_for(static_cast<Index>(g.size()), [&](Index begin, Index end) {
    for (Index i = begin; i < end; ++i) {
      r_t[static_cast<size_t>(i)] = project_to_so3(g[static_cast<size_t>(i)]);
    }
  });
  return r_t;
}

double cost_of(const BlockMatrix33& op, const std::vector<Rotation>& r) {
  const std::vector<Mat3> s = op.apply_blocks(r);
  double c = 0.0;
  for (size_t i = 0; i < r.size(); ++i) {
    c -= s[i].cwiseProduct(r[i]).sum();
  }
  return c;
}

struct SubsolveResult {
  double lambda3 = std::numeric_limits<double>::infinity();
  double first_lambda3 = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool immediate = false;  // first eigensolve already satisfied |lambda3| <= delta
};

// One camera-side (or reversed-side) primal-dual sub-synchronization on a
// fixed power-graph operator: eigensolve L = Lambda - W, project the smallest
// eigenspace to the rotations, refresh Lambda from the SVDs of W R, repeat.
SubsolveResult primal_dual_subsolve(const BlockMatrix33& w, std::vector<Mat3>& dual,
                                    std::vector<Rotation>& r, MatX& warm,
                                    const SolverConfig& cfg) {
  SubsolveResult out;
  double best = std::numeric_limits<double>::infinity();
  int stalled = 0;
  for (int inner = 1; inner <= cfg.max_inner; ++inner) {
    const BlockMatrix33 l = diag_minus(dual, w);
    EigenOptions eo;
    eo.tol = cfg.eig_tol;
    eo.initial_guess = warm;
    const EigenPairs eig = smallest_eigpairs(l, eo);
    warm = eig.vectors;
    r = primal_from_eigvectors(eig.vectors, w);
    dual = dual_blocks_from_stacked(w.apply_blocks(r));
    out.lambda3 = eig.values(2);
    if (inner == 1) out.first_lambda3 = out.lambda3;
    out.iterations = inner;
    if (std::abs(out.lambda3) <= cfg.delta) {
      out.immediate = (inner == 1);
      break;
    }
    // Bail out once |lambda_3| stops shrinking, e.g. when delta sits below
    // the floating-point floor of the operator scale.
    if (std::abs(out.lambda3) >= 0.99 * best) {
      if (++stalled >= 3) break;
    } else {
      stalled = 0;
    }
    best = std::min(best, std::abs(out.lambda3));
  }
  return out;
}

struct OuterResult {
  int outer = 0;
  bool converged = false;
  double lambda3 = std::numeric_limits<double>::infinity();
  std::vector<double> trace_hist;
  double loop_seconds = 0.0;
};

// Outer sweeps: camera-side sub-solve against the current object duals, then
// the object-side dual refresh. Converged when a sweep's first eigensolve is
// already below delta, i.e. the previous sweep's duals satisfy the KKT system.
// power (in/out) must enter consistent with dual_t and leaves consistent.
OuterResult run_outer_loop(const BlockMatrix33& cols_tc, std::vector<Mat3>& dual_c,
                           std::vector<Mat3>& dual_t, std::vector<Rotation>& r_c,
                           MatX& warm, BlockMatrix33& power, const SolverConfig& cfg) {
  const auto start = Clock::now();
  OuterResult res;
  double best = std::numeric_limits<double>::infinity();
  int stalled = 0;
  for (int outer = 1; outer <= cfg.max_outer; ++outer) {
    const SubsolveResult sub = primal_dual_subsolve(power, dual_c, r_c, warm, cfg);
    dual_t = dual_t_from_cols(cols_tc, r_c);
    res.trace_hist.push_back(-(trace_of(dual_c) + trace_of(dual_t)));
    res.lambda3 = sub.first_lambda3;
    res.outer = outer;
    power = detail::power_operator_from_cols(cols_tc, detail::invert_spd_blocks(dual_t));
    if (sub.immediate) {
      res.converged = true;
      break;
    }
    // The sweep's first eigensolve is the joint convergence check (it sees the
    // previous sweep's object-side update). Stop early only when that value
    // stops improving, i.e. delta sits below the attainable floor.
    if (std::abs(sub.first_lambda3) >= 0.9 * best) {
      if (++stalled >= 5) break;
    } else {
      stalled = 0;
    }
    best = std::min(best, std::abs(sub.first_lambda3));
  }
  res.loop_seconds = seconds_since(start);
  return res;
}

BlockMatrix33 certificate_matrix(const BlockMatrix33& cols_tc,
                                 const std::vector<Mat3>& dual_c,
                                 const std::vector<Mat3>& dual_t) {
  const Index c = cols_tc.block_cols();
  const Index t = cols_tc.block_rows();
  BlockMatrix33::Builder b(c + t, c + t);
  for (Index i = 0; i < c; ++i) b.add(i, i, dual_c[static_cast<size_t>(i)]);
  for (Index i = 0; i < t; ++i) b.add(c + i, c + i, dual_t[static_cast<size_t>(i)]);
  for (Index s = 0; s < t; ++s) {
    for (const auto& e : cols_tc.row(s)) {
      b.add(e.col, c + s, -e.m.transpose());
      b.add(c + s, e.col, -e.m);
    }
  }
  return b.build();
}

Certificate certify(const BlockMatrix33& cols_tc, const std::vector<Mat3>& dual_c,
                    const std::vector<Mat3>& dual_t, const std::vector<Rotation>& r_c,
                    const std::vector<Rotation>& r_t, const SolverConfig& cfg) {
  const Index c = cols_tc.block_cols();
  const Index t = cols_tc.block_rows();
  const BlockMatrix33 m = certificate_matrix(cols_tc, dual_c, dual_t);
  EigenOptions eo;
  eo.tol = cfg.eig_tol;
  // The stacked solution spans the expected kernel; use it as the warm start.
  MatX guess(3 * (c + t), 3);
  for (Index i = 0; i < c; ++i) guess.middleRows(3 * i, 3) = r_c[static_cast<size_t>(i)];
  for (Index i = 0; i < t; ++i) {
    guess.middleRows(3 * (c + i), 3) = r_t[static_cast<size_t>(i)];
  }
  eo.initial_guess = guess / std::sqrt(static_cast<double>(c + t));
  Certificate cert;
  const EigenPairs eig = smallest_eigpairs(m, eo);
  cert.min_eig = eig.values(0);
  const double scale = (trace_of(dual_c) + trace_of(dual_t)) /
                       (3.0 * static_cast<double>(c + t));
  cert.certified = cert.min_eig >= -cfg.certificate_tol * std::max(scale, 1e-300);
  return cert;
}

double kkt_relative_residual(const BlockMatrix33& cols_tc, const std::vector<Mat3>& dual_c,
                             const std::vector<Mat3>& dual_t,
                             const std::vector<Rotation>& r_c,
                             const std::vector<Rotation>& r_t) {
  const Index c = cols_tc.block_cols();
  const Index t = cols_tc.block_rows();
  // Camera rows: Lambda_C R_C - Rtilde R_T; object rows: Lambda_T R_T - Rtilde^T R_C.
  std::vector<Mat3> cam_meas(static_cast<size_t>(c), Mat3::Zero());
  for (Index s = 0; s < t; ++s) {
    for (const auto& e : cols_tc.row(s)) {
      cam_meas[static_cast<size_t>(e.col)].noalias() +=
          e.m.transpose() * r_t[static_cast<size_t>(s)];
    }
  }
  const std::vector<Mat3> obj_meas = cols_tc.apply_blocks(r_c);
  double sq = 0.0;
  for (Index i = 0; i < c; ++i) {
    sq += (dual_c[static_cast<size_t>(i)] * r_c[static_cast<size_t>(i)] -
           cam_meas[static_cast<size_t>(i)])
              .squaredNorm();
  }
  for (Index i = 0; i < t; ++i) {
    sq += (dual_t[static_cast<size_t>(i)] * r_t[static_cast<size_t>(i)] -
           obj_meas[static_cast<size_t>(i)])
              .squaredNorm();
  }
  const double meas_norm = std::sqrt(2.0) * cols_tc.frobenius_norm();
  return std::sqrt(sq) / std::max(meas_norm, 1e-300);
}

}  // namespace

double DualBlocks::trace() const { return trace_of(blocks); }

std::pair<DualBlocks, DualBlocks> spectral_init_duals(const SparseMatrixD& adjacency,
                                                      const VecX& deg_c,
                                                      const VecX& deg_t) {
  if (!(deg_c.minCoeff() > 0.0) || !(deg_t.minCoeff() > 0.0)) {
    throw InvalidInput("spectral_init_duals: degrees must be positive");
  }
  DualBlocks lam_c, lam_t;
  lam_t.blocks.reserve(static_cast<size_t>(deg_t.size()));
  for (Index i = 0; i < deg_t.size(); ++i) {
    lam_t.blocks.push_back(deg_t(i) * Mat3::Identity());
  }
  // Degree of the camera power graph: A Deg_T^{-1} A^T 1.
  const VecX ones = VecX::Ones(adjacency.rows());
  const VecX col_sums = adjacency.transpose() * ones;
  const VecX power_deg = adjacency * col_sums.cwiseQuotient(deg_t);
  lam_c.blocks.reserve(static_cast<size_t>(deg_c.size()));
  for (Index i = 0; i < deg_c.size(); ++i) {
    lam_c.blocks.push_back(power_deg(i) * Mat3::Identity());
  }
  return {std::move(lam_c), std::move(lam_t)};
}

std::vector<Rotation> primal_from_eigvectors(const MatX& v, const BlockMatrix33& cost_op) {
  if (v.cols() != 3 || v.rows() % 3 != 0) {
    throw InvalidInput("primal_from_eigvectors: basis must be 3C x 3");
  }
  const Index c = v.rows() / 3;
  std::vector<Rotation> direct(static_cast<size_t>(c));
  std::vector<Rotation> mirrored(static_cast<size_t>(c));
  const Vec3 flip(1.0, 1.0, -1.0);
  parallel_for(c, [&](Index begin, Index end) {
    for (Index i = begin; i < end; ++i) {
      const Mat3 block = v.middleRows(3 * i, 3);
      direct[static_cast<size_t>(i)] = project_to_so3(block);
      mirrored[static_cast<size_t>(i)] = project_to_so3(block * flip.asDiagonal());
    }
  });
  // A global reflection of the eigenbasis flips every block determinant; keep
  // whichever orientation scores better on the quadratic objective.
  return cost_of(cost_op, direct) <= cost_of(cost_op, mirrored) ? direct : mirrored;
}

DualBlocks dual_update_c(const BlockMatrix33& power_op, const std::vector<Rotation>& r_c) {
  if (static_cast<Index>(r_c.size()) != power_op.block_cols()) {
    throw InvalidInput("dual_update_c: shape mismatch");
  }
  return {dual_blocks_from_stacked(power_op.apply_blocks(r_c))};
}

DualBlocks dual_update_t(const BlockMatrix33& rot_ct, const std::vector<Rotation>& r_c) {
  if (static_cast<Index>(r_c.size()) != rot_ct.block_rows()) {
    throw InvalidInput("dual_update_t: shape mismatch");
  }
  return {dual_t_from_cols(rot_ct.transposed(), r_c)};
}

double rotation_cost(const BlockMatrix33& rot_ct, const std::vector<Rotation>& r_c,
                     const std::vector<Rotation>& r_t) {
  double cost = 0.0;
  for (Index i = 0; i < rot_ct.block_rows(); ++i) {
    for (const auto& e : rot_ct.row(i)) {
      cost -= (e.m * r_t[static_cast<size_t>(e.col)])
                  .cwiseProduct(r_c[static_cast<size_t>(i)])
                  .sum();
    }
  }
  return cost;
}

BlockMatrix33 assemble_bipartite(const BlockMatrix33& rot_ct) {
  const Index c = rot_ct.block_rows();
  const Index t = rot_ct.block_cols();
  BlockMatrix33::Builder b(c + t, c + t);
  for (Index i = 0; i < c; ++i) {
    for (const auto& e : rot_ct.row(i)) {
      b.add(i, c + e.col, e.m);
      b.add(c + e.col, i, e.m.transpose());
    }
  }
  return b.build();
}

DualBlocks concat(const DualBlocks& a, const DualBlocks& b) {
  DualBlocks out = a;
  out.blocks.insert(out.blocks.end(), b.blocks.begin(), b.blocks.end());
  return out;
}

Certificate check_certificate(const BlockMatrix33& rot_full, const DualBlocks& lambda_full,
                              double tol, const EigenOptions& eig) {
  const Index n = rot_full.block_rows();
  if (lambda_full.size() != n) throw InvalidInput("check_certificate: shape mismatch");
  BlockMatrix33::Builder b(n, n);
  for (Index i = 0; i < n; ++i) b.add(i, i, lambda_full.blocks[static_cast<size_t>(i)]);
  for (Index i = 0; i < n; ++i) {
    for (const auto& e : rot_full.row(i)) b.add(i, e.col, -e.m);
  }
  const EigenPairs pairs = smallest_eigpairs(b.build(), eig);
  Certificate cert;
  cert.min_eig = pairs.values(0);
  const double scale = lambda_full.trace() / (3.0 * static_cast<double>(n));
  cert.certified = cert.min_eig >= -tol * std::max(scale, 1e-300);
  return cert;
}

RotSolution solve_rotations(const MeasurementGraph& g, const SolverConfig& cfg) {
  const MergedBlocks merged = merge_object_blocks(g);
  const Degrees deg = degree_matrix(merged.adjacency);
  auto [lam_c, lam_t] = spectral_init_duals(merged.adjacency, deg.cam, deg.time);
  const BlockMatrix33 cols_tc = merged.rot.transposed();

  std::vector<Mat3> dual_c = std::move(lam_c.blocks);
  std::vector<Mat3> dual_t = std::move(lam_t.blocks);
  std::vector<Rotation> r_c(static_cast<size_t>(g.num_cameras()), Rotation::Identity());
  MatX warm;
  BlockMatrix33 power =
      detail::power_operator_from_cols(cols_tc, detail::invert_spd_blocks(dual_t));
  const OuterResult res =
      run_outer_loop(cols_tc, dual_c, dual_t, r_c, warm, power, cfg);

  RotSolution sol;
  sol.r_c = std::move(r_c);
  sol.r_t = recover_objects(cols_tc, sol.r_c);
  sol.lambda_c.blocks = std::move(dual_c);
  sol.lambda_t.blocks = std::move(dual_t);
  sol.dual_trace_history = res.trace_hist;
  sol.iterations = res.outer;
  sol.converged = res.converged;
  sol.last_lambda3 = res.lambda3;
  sol.seconds_per_iteration = res.outer > 0 ? res.loop_seconds / res.outer : 0.0;
  sol.kkt_residual = kkt_relative_residual(cols_tc, sol.lambda_c.blocks,
                                           sol.lambda_t.blocks, sol.r_c, sol.r_t);
  try {
    sol.certificate =
        certify(cols_tc, sol.lambda_c.blocks, sol.lambda_t.blocks, sol.r_c, sol.r_t, cfg);
  } catch (const NoConvergence&) {
    sol.certificate = {std::numeric_limits<double>::quiet_NaN(), false};
  }
  if (!sol.converged) sol.certificate.certified = false;
  return sol;
}

RotSolution exact_bcd_solve(const MeasurementGraph& g, const SolverConfig& cfg) {
  if (g.num_cameras() + g.num_times() > 200) {
    throw SizeGuard("exact_bcd_solve: C + T above the 200-node guard");
  }
  const auto start = Clock::now();
  const MergedBlocks merged = merge_object_blocks(g);
  const Degrees deg = degree_matrix(merged.adjacency);
  auto [lam_c, lam_t] = spectral_init_duals(merged.adjacency, deg.cam, deg.time);
  const BlockMatrix33& rot_ct = merged.rot;
  const BlockMatrix33 cols_tc = rot_ct.transposed();

  std::vector<Mat3> dual_c = std::move(lam_c.blocks);
  std::vector<Mat3> dual_t = std::move(lam_t.blocks);
  std::vector<Rotation> r_c(static_cast<size_t>(g.num_cameras()), Rotation::Identity());
  std::vector<Rotation> r_t(static_cast<size_t>(g.num_times()), Rotation::Identity());
  MatX warm_c, warm_t;

  RotSolution sol;
  for (int k = 1; k <= cfg.max_outer; ++k) {
    const BlockMatrix33 w_c =
        detail::power_operator_from_cols(cols_tc, detail::invert_spd_blocks(dual_t));
    const SubsolveResult sub_c = primal_dual_subsolve(w_c, dual_c, r_c, warm_c, cfg);
    const BlockMatrix33 w_t =
        detail::power_operator_from_cols(rot_ct, detail::invert_spd_blocks(dual_c));
    const SubsolveResult sub_t = primal_dual_subsolve(w_t, dual_t, r_t, warm_t, cfg);
    sol.dual_trace_history.push_back(-(trace_of(dual_c) + trace_of(dual_t)));
    sol.iterations = k;
    sol.last_lambda3 = std::max(std::abs(sub_c.lambda3), std::abs(sub_t.lambda3));
    if (sub_c.immediate && sub_t.immediate) {
      sol.converged = true;
      break;
    }
  }
  const double loop_seconds = seconds_since(start);
  sol.r_c = std::move(r_c);
  // Each sub-synchronization fixes its own global gauge, so the object-side
  // primal is re-extracted from the camera side through the KKT projection.
  sol.r_t = recover_objects(cols_tc, sol.r_c);
  sol.lambda_c.blocks = std::move(dual_c);
  sol.lambda_t.blocks = std::move(dual_t);
  sol.seconds_per_iteration =
      sol.iterations > 0 ? loop_seconds / sol.iterations : 0.0;
  sol.kkt_residual = kkt_relative_residual(cols_tc, sol.lambda_c.blocks,
                                           sol.lambda_t.blocks, sol.r_c, sol.r_t);
  try {
    sol.certificate =
        certify(cols_tc, sol.lambda_c.blocks, sol.lambda_t.blocks, sol.r_c, sol.r_t, cfg);
  } catch (const NoConvergence&) {
    sol.certificate = {std::numeric_limits<double>::quiet_NaN(), false};
  }
  if (!sol.converged) sol.certificate.certified = false;
  return sol;
}

GpmResult gpm_solve(const MeasurementGraph& g, const std::vector<Rotation>& init_r_c,
                    int iterations) {
  const MergedBlocks merged = merge_object_blocks(g);
  const BlockMatrix33& rot_ct = merged.rot;
  const BlockMatrix33 cols_tc = rot_ct.transposed();
  if (static_cast<Index>(init_r_c.size()) != g.num_cameras()) {
    throw InvalidInput("gpm_solve: wrong number of initial rotations");
  }
  GpmResult res;
  res.r_c = init_r_c;
  res.r_t.assign(static_cast<size_t>(g.num_times()), Rotation::Identity());
  for (int sweep = 0; sweep < iterations; ++sweep) {
    const std::vector<Mat3> g_t = cols_tc.apply_blocks(res.r_c);
    for (size_t t = 0; t < res.r_t.size(); ++t) res.r_t[t] = project_to_so3(g_t[t]);
    const std::vector<Mat3> h_c = rot_ct.apply_blocks(res.r_t);
    for (size_t c = 0; c < res.r_c.size(); ++c) res.r_c[c] = project_to_so3(h_c[c]);
    const double cost = rotation_cost(rot_ct, res.r_c, res.r_t);
    if (!res.cost_history.empty() &&
        std::abs(res.cost_history.back() - cost) <=
            1e-14 * (1.0 + std::abs(cost))) {
      res.cost_history.push_back(cost);
      break;
    }
    res.cost_history.push_back(cost);
  }
  return res;
}

StreamingSolver::StreamingSolver(const MeasurementGraph& initial, const SolverConfig& cfg)
    : cfg_(cfg), graph_(initial) {
  const MergedBlocks merged = merge_object_blocks(graph_);
  const Degrees deg = degree_matrix(merged.adjacency);
  deg_c_ = deg.cam;
  deg_t_ = deg.time;
  adj_cols_.assign(static_cast<size_t>(graph_.num_times()), {});
  for (int k = 0; k < merged.adjacency.outerSize(); ++k) {
    for (SparseMatrixD::InnerIterator it(merged.adjacency, k); it; ++it) {
      adj_cols_[static_cast<size_t>(it.col())].emplace_back(it.row(), it.value());
    }
  }
  auto [lam_c, lam_t] = spectral_init_duals(merged.adjacency, deg.cam, deg.time);
  dual_c_ = std::move(lam_c.blocks);
  dual_t_ = std::move(lam_t.blocks);
  cols_tc_ = merged.rot.transposed();
  r_c_.assign(static_cast<size_t>(graph_.num_cameras()), Rotation::Identity());
  power_cached_ =
      detail::power_operator_from_cols(cols_tc_, detail::invert_spd_blocks(dual_t_));
  const OuterResult res =
      run_outer_loop(cols_tc_, dual_c_, dual_t_, r_c_, warm_basis_, power_cached_, cfg_);
  finalize_solution(res.outer, res.converged, res.lambda3, res.trace_hist,
                    res.loop_seconds);
}

void StreamingSolver::append(const std::vector<EdgeMeasurement>& edges_at_new_time) {
  if (edges_at_new_time.empty()) return;
  const NodeId new_time = edges_at_new_time.front().time;
  if (!graph_.times.empty() && new_time <= graph_.times.back()) {
    throw InvalidInput("streaming append: time id must exceed all existing ones");
  }
  GraphIndex idx(graph_);
  std::vector<BlockMatrix33::Entry> column;
  std::vector<std::pair<Index, double>> weights;
  for (const auto& e : edges_at_new_time) {
    if (e.time != new_time) {
      throw InvalidInput("streaming append: edges must share one time id");
    }
    const Index c = idx.camera(e.cam);  // UnknownCamera when absent
    if (!(e.noise.kappa > 0.0)) continue;
    const Pose* rel = graph_.object.find(e.marker);
    if (!rel) throw UnknownMarker(e.marker);
    column.push_back({c, (e.noise.kappa * (e.r_meas * rel->r)).transpose().eval()});
    weights.emplace_back(c, e.noise.kappa);
  }
  if (column.empty()) return;  // nothing a rotation solve can use

  auto by_col = [](const auto& a, const auto& b) { return a.col < b.col; };
  std::sort(column.begin(), column.end(), by_col);
  std::vector<BlockMatrix33::Entry> compact;
  for (const auto& e : column) {
    if (!compact.empty() && compact.back().col == e.col) {
      compact.back().m += e.m;
    } else {
      compact.push_back(e);
    }
  }
  std::sort(weights.begin(), weights.end());
  std::vector<std::pair<Index, double>> wcompact;
  double new_degree = 0.0;
  for (const auto& [c, w] : weights) {
    new_degree += w;
    if (!wcompact.empty() && wcompact.back().first == c) {
      wcompact.back().second += w;
    } else {
      wcompact.emplace_back(c, w);
    }
  }

  // Warm-start duals: the fresh object block at its degree, camera blocks
  // incremented by the new column weights.
  dual_t_.push_back(new_degree * Mat3::Identity());
  deg_t_.conservativeResize(deg_t_.size() + 1);
  deg_t_(deg_t_.size() - 1) = new_degree;
  for (const auto& [c, w] : wcompact) {
    deg_c_(c) += w;
    dual_c_[static_cast<size_t>(c)] += w * Mat3::Identity();
  }

  // Rank update of the cached power-graph operator with the new column.
  const double inv_deg = 1.0 / new_degree;
  for (size_t a = 0; a < compact.size(); ++a) {
    const Mat3 left = compact[a].m.transpose();
    power_cached_.add(compact[a].col, compact[a].col, inv_deg * (left * compact[a].m));
    for (size_t b = a + 1; b < compact.size(); ++b) {
      const Mat3 block = inv_deg * (left * compact[b].m);
      power_cached_.add(compact[a].col, compact[b].col, block);
      power_cached_.add(compact[b].col, compact[a].col, block.transpose());
    }
  }

  cols_tc_.append_row(std::move(compact));
  adj_cols_.push_back(std::move(wcompact));
  graph_.times.push_back(new_time);
  graph_.edges.insert(graph_.edges.end(), edges_at_new_time.begin(),
                      edges_at_new_time.end());

  const OuterResult res =
      run_outer_loop(cols_tc_, dual_c_, dual_t_, r_c_, warm_basis_, power_cached_, cfg_);
  finalize_solution(res.outer, res.converged, res.lambda3, res.trace_hist,
                    res.loop_seconds);
}

void StreamingSolver::finalize_solution(int outer_iters, bool converged, double lambda3,
                                        std::vector<double> trace_hist,
                                        double loop_seconds) {
  solution_.r_c = r_c_;
  solution_.r_t = recover_objects(cols_tc_, r_c_);
  solution_.lambda_c.blocks = dual_c_;
  solution_.lambda_t.blocks = dual_t_;
  solution_.dual_trace_history = std::move(trace_hist);
  solution_.iterations = outer_iters;
  solution_.converged = converged;
  solution_.last_lambda3 = lambda3;
  solution_.seconds_per_iteration = outer_iters > 0 ? loop_seconds / outer_iters : 0.0;
  solution_.kkt_residual =
      kkt_relative_residual(cols_tc_, dual_c_, dual_t_, solution_.r_c, solution_.r_t);
  try {
    solution_.certificate =
        certify(cols_tc_, dual_c_, dual_t_, solution_.r_c, solution_.r_t, cfg_);
  } catch (const NoConvergence&) {
    solution_.certificate = {std::numeric_limits<double>::quiet_NaN(), false};
  }
  if (!converged) solution_.certificate.certified = false;
}

CalibrationResult calibrate_object(const std::vector<EdgeMeasurement>& views,
                                   const SolverConfig& cfg) {
  if (views.empty()) throw EmptyGraph("calibrate_object: no views");
  std::set<NodeId> cams;
  for (const auto& v : views) cams.insert(v.cam);
  if (cams.size() != 1) {
    throw InvalidInput("calibrate_object: views must come from a single camera");
  }

  std::set<NodeId> marker_set, time_set;
  for (const auto& v : views) {
    marker_set.insert(v.marker);
    time_set.insert(v.time);
  }
  const NodeId reference = *marker_set.begin();

  // Reachability of every marker from the reference through shared views.
  {
    std::unordered_map<NodeId, std::vector<NodeId>> by_time;
    std::unordered_map<NodeId, std::vector<NodeId>> by_marker;
    for (const auto& v : views) {
      if (!(v.noise.kappa > 0.0)) continue;
      by_time[v.time].push_back(v.marker);
      by_marker[v.marker].push_back(v.time);
    }
    std::set<NodeId> seen{reference};
    std::vector<NodeId> stack{reference};
    while (!stack.empty()) {
      const NodeId m = stack.back();
      stack.pop_back();
      for (NodeId t : by_marker[m]) {
        for (NodeId other : by_time[t]) {
          if (seen.insert(other).second) stack.push_back(other);
        }
      }
    }
    std::vector<NodeId> unreachable;
    for (NodeId m : marker_set) {
      if (!seen.count(m)) unreachable.push_back(m);
    }
    if (!unreachable.empty()) throw DisconnectedRig(std::move(unreachable));
  }

  // Reversed bipartite graph: the static markers take the camera side, the
  // moving camera becomes a one-node object observed at each view.
  ObjectModel camera_object;
  camera_object.markers = {0};
  camera_object.rel[0] = identity_pose();
  std::vector<EdgeMeasurement> reversed;
  reversed.reserve(views.size());
  for (const auto& v : views) {
    const Pose inv = inverse(Pose{v.r_meas, v.t_meas});
    reversed.push_back({v.marker, 0, v.time, inv.r, inv.t, v.noise});
  }
  const MeasurementGraph g = make_graph(std::move(reversed), camera_object);

  RotSolution rot = solve_rotations(g, cfg);
  const TranslationSystem sys =
      build_translation_system(g, rot.r_c, rot.r_t, reference);
  const TranslationSolution trans = solve_translations(sys);

  const GraphIndex idx(g);
  const Index ref_idx = idx.camera(reference);
  const Pose ref_pose{rot.r_c[static_cast<size_t>(ref_idx)],
                      trans.cam[static_cast<size_t>(ref_idx)]};
  ObjectModel model;
  model.markers.push_back(reference);
  for (NodeId m : marker_set) {
    if (m != reference) model.markers.push_back(m);
  }
  for (NodeId m : model.markers) {
    if (m == reference) {
      model.rel[m] = identity_pose();
      continue;
    }
    const Index i = idx.camera(m);
    const Pose pose{rot.r_c[static_cast<size_t>(i)], trans.cam[static_cast<size_t>(i)]};
    model.rel[m] = compose(pose, inverse(ref_pose));
  }
  return {std::move(model), std::move(rot)};
}

}  // namespace bipgo
