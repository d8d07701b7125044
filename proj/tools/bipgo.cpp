// Command-line front end: scene generation, solving, rig calibration,
// evaluation and benchmarking over the text formats defined in the library.

#include <chrono>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "bipgo/errors.hpp"
#include "bipgo/evaluation.hpp"
#include "bipgo/graph.hpp"
#include "bipgo/io.hpp"
#include "bipgo/rotation_sync.hpp"
#include "bipgo/simulation.hpp"
#include "bipgo/translation_sync.hpp"
#include "bipgo/version.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitUncertified = 2;
constexpr int kExitSolver = 3;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void write_manifest(const fs::path& path, const std::string& command, json config,
                    const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs, double seconds) {
  json m;
  m["command"] = command;
  m["version"] = bipgo::kVersion;
  m["config"] = std::move(config);
  m["inputs"] = inputs;
  m["outputs"] = outputs;
  m["wall_seconds"] = seconds;
  bipgo::write_text_file(path.string(), m.dump(2) + "\n");
}

json scene_config_json(const bipgo::SceneConfig& cfg) {
  json j;
  j["name"] = cfg.name;
  j["cameras"] = cfg.num_cameras;
  j["times"] = cfg.num_times;
  j["room"] = {cfg.room.x(), cfg.room.y(), cfg.room.z()};
  j["camera_jitter_deg"] = cfg.camera_jitter_deg;
  j["max_range"] = cfg.visibility.max_range;
  j["max_view_angle_deg"] = cfg.visibility.max_view_angle_deg;
  j["dropout_prob"] = cfg.visibility.dropout_prob;
  j["kappa_base"] = cfg.noise.kappa_base;
  j["tau_base"] = cfg.noise.tau_base;
  j["atten_d0"] = cfg.noise.atten_d0;
  j["atten_p"] = cfg.noise.atten_p;
  j["object"] = cfg.object_source;
  j["seed"] = cfg.seed;
  return j;
}

bipgo::PoseFile poses_from_scene(const bipgo::MeasurementGraph& g,
                                 const std::vector<bipgo::Pose>& cams,
                                 const std::vector<bipgo::Pose>& objs) {
  bipgo::PoseFile f;
  for (size_t i = 0; i < cams.size(); ++i) f.cameras.emplace_back(g.cameras[i], cams[i]);
  for (size_t i = 0; i < objs.size(); ++i) f.objects.emplace_back(g.times[i], objs[i]);
  return f;
}

struct SolveStats {
  int iterations = 0;
  double seconds_per_iteration = 0.0;
  bool certified = false;
  bool converged = false;
  double min_eig = 0.0;
  int cg_iterations = 0;
};

struct PipelineOutput {
  std::vector<bipgo::Pose> cam_poses;
  std::vector<bipgo::Pose> object_poses;
  SolveStats stats;
};

PipelineOutput assemble_poses(const bipgo::MeasurementGraph& g,
                              const bipgo::RotSolution& rot, bipgo::NodeId anchor) {
  const bipgo::TranslationSystem sys =
      bipgo::build_translation_system(g, rot.r_c, rot.r_t, anchor);
  const bipgo::TranslationSolution trans = bipgo::solve_translations(sys);
  PipelineOutput out;
  for (size_t i = 0; i < rot.r_c.size(); ++i) {
    out.cam_poses.push_back({rot.r_c[i], trans.cam[i]});
  }
  for (size_t i = 0; i < rot.r_t.size(); ++i) {
    out.object_poses.push_back({rot.r_t[i], trans.obj[i]});
  }
  out.stats.iterations = rot.iterations;
  out.stats.seconds_per_iteration = rot.seconds_per_iteration;
  out.stats.certified = rot.certificate.certified;
  out.stats.converged = rot.converged;
  out.stats.min_eig = rot.certificate.min_eig;
  out.stats.cg_iterations = trans.iterations;
  return out;
}

int run_generate(const std::string& preset_name, const std::string& config_path,
                 std::optional<std::uint64_t> seed, std::optional<int> times,
                 std::optional<double> kappa, std::optional<double> tau,
                 std::optional<double> atten_d0, const std::string& out_dir) {
  const auto start = Clock::now();
  bipgo::SceneConfig cfg;
  if (!config_path.empty()) {
    cfg = bipgo::read_scene_config(config_path);
  } else {
    cfg = bipgo::preset(preset_name);
  }
  if (seed) cfg.seed = *seed;
  if (times) cfg.num_times = *times;
  if (kappa) cfg.noise.kappa_base = *kappa;
  if (tau) cfg.noise.tau_base = *tau;
  if (atten_d0) cfg.noise.atten_d0 = *atten_d0;

  const bipgo::Scene scene = bipgo::generate_scene(cfg);
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  const std::string graph_path = (dir / "graph.txt").string();
  const std::string object_path = (dir / "object.txt").string();
  const std::string gt_path = (dir / "ground_truth.txt").string();
  bipgo::write_edges(graph_path, scene.graph.edges,
                     {"dataset " + cfg.name, "seed " + std::to_string(cfg.seed)});
  bipgo::write_object(object_path, scene.graph.object);
  bipgo::PoseFile gt =
      poses_from_scene(scene.graph, scene.truth.cam_poses, scene.truth.object_poses);
  gt.meta["dataset"] = cfg.name;
  gt.meta["edges"] = std::to_string(scene.graph.num_edges());
  bipgo::write_poses(gt_path, gt);
  write_manifest(dir / "manifest.json", "generate", scene_config_json(cfg), {},
                 {graph_path, object_path, gt_path}, seconds_since(start));
  std::cout << "generated " << cfg.name << ": C=" << scene.graph.num_cameras()
            << " T=" << scene.graph.num_times() << " E=" << scene.graph.num_edges()
            << " -> " << out_dir << "\n";
  return kExitOk;
}

int run_solve(const std::string& graph_path, const std::string& object_path,
              const std::string& solution_path, const bipgo::SolverConfig& scfg,
              std::optional<bipgo::NodeId> anchor_flag, bool stream) {
  const auto start = Clock::now();
  bipgo::ObjectModel object = bipgo::read_object(object_path);
  std::vector<bipgo::EdgeMeasurement> edges = bipgo::read_edges(graph_path);
  const bipgo::PruneResult pruned =
      bipgo::prune(bipgo::make_graph(std::move(edges), object));
  for (bipgo::NodeId id : pruned.dropped_cameras) {
    std::cerr << "note: camera " << id << " dropped (no rotation-weighted edges)\n";
  }
  for (bipgo::NodeId id : pruned.dropped_times) {
    std::cerr << "note: time step " << id << " dropped (no rotation-weighted edges)\n";
  }
  const bipgo::MeasurementGraph& g = pruned.graph;
  if (!bipgo::is_connected(g)) {
    throw bipgo::DisconnectedNode("measurement graph is not connected");
  }
  const bipgo::NodeId anchor = anchor_flag.value_or(g.cameras.front());

  bipgo::RotSolution rot;
  if (stream) {
    // Warm up on the smallest time prefix that covers every camera, then feed
    // the remaining steps one at a time.
    const bipgo::GraphIndex idx(g);
    std::vector<char> covered(static_cast<size_t>(g.num_cameras()), 0);
    Eigen::Index covered_count = 0;
    std::map<bipgo::NodeId, std::vector<bipgo::EdgeMeasurement>> by_time;
    for (const auto& e : g.edges) by_time[e.time].push_back(e);
    std::vector<bipgo::EdgeMeasurement> warmup;
    auto it = by_time.begin();
    for (; it != by_time.end(); ++it) {
      for (const auto& e : it->second) {
        auto& flag = covered[static_cast<size_t>(idx.camera(e.cam))];
        if (!flag && e.noise.kappa > 0.0) {
          flag = 1;
          ++covered_count;
        }
        warmup.push_back(e);
      }
      if (covered_count == g.num_cameras()) {
        ++it;
        break;
      }
    }
    bipgo::StreamingSolver solver(bipgo::make_graph(std::move(warmup), g.object), scfg);
    for (; it != by_time.end(); ++it) solver.append(it->second);
    rot = solver.solution();
  } else {
    rot = bipgo::solve_rotations(g, scfg);
  }

  const PipelineOutput out = assemble_poses(g, rot, anchor);
  bipgo::PoseFile poses = poses_from_scene(g, out.cam_poses, out.object_poses);
  poses.meta["edges"] = std::to_string(g.num_edges());
  poses.meta["iterations"] = std::to_string(out.stats.iterations);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", out.stats.seconds_per_iteration);
  poses.meta["sec_per_iter"] = buf;
  poses.meta["certified"] = out.stats.certified ? "1" : "0";
  poses.meta["converged"] = out.stats.converged ? "1" : "0";
  bipgo::write_poses(solution_path, poses);

  json cfg;
  cfg["delta"] = scfg.delta;
  cfg["max_outer"] = scfg.max_outer;
  cfg["max_inner"] = scfg.max_inner;
  cfg["anchor"] = anchor;
  cfg["stream"] = stream;
  write_manifest(solution_path + ".manifest.json", "solve", cfg,
                 {graph_path, object_path}, {solution_path}, seconds_since(start));

  std::cout << "solved: iterations=" << out.stats.iterations
            << " certified=" << (out.stats.certified ? "yes" : "no")
            << " min_eig=" << out.stats.min_eig << " cg_iters=" << out.stats.cg_iterations
            << "\n";
  if (!out.stats.converged) {
    std::cerr << "error: rotation solver did not converge\n";
    return kExitSolver;
  }
  return out.stats.certified ? kExitOk : kExitUncertified;
}

int run_calibrate(const std::string& views_path, const std::string& out_path,
                  const bipgo::SolverConfig& scfg) {
  const auto start = Clock::now();
  const std::vector<bipgo::EdgeMeasurement> views = bipgo::read_edges(views_path);
  const bipgo::CalibrationResult result = bipgo::calibrate_object(views, scfg);
  bipgo::write_object(out_path, result.model);
  json cfg;
  cfg["delta"] = scfg.delta;
  write_manifest(out_path + ".manifest.json", "calibrate-object", cfg, {views_path},
                 {out_path}, seconds_since(start));
  std::cout << "calibrated " << result.model.markers.size()
            << " markers: iterations=" << result.rotations.iterations << " certified="
            << (result.rotations.certificate.certified ? "yes" : "no") << "\n";
  if (!result.rotations.converged) {
    std::cerr << "error: rotation solver did not converge\n";
    return kExitSolver;
  }
  return result.rotations.certificate.certified ? kExitOk : kExitUncertified;
}

bipgo::ErrorReport evaluate_pose_files(const bipgo::PoseFile& sol,
                                       const bipgo::PoseFile& gt,
                                       const std::string& dataset) {
  std::map<bipgo::NodeId, bipgo::Pose> gt_cams(gt.cameras.begin(), gt.cameras.end());
  std::vector<bipgo::NodeId> ids;
  std::vector<bipgo::Pose> est, truth;
  for (const auto& [id, pose] : sol.cameras) {
    auto it = gt_cams.find(id);
    if (it == gt_cams.end()) {
      throw bipgo::InvalidInput("camera id " + std::to_string(id) +
                                " missing from ground truth");
    }
    ids.push_back(id);
    est.push_back(pose);
    truth.push_back(it->second);
  }
  auto meta_int = [&](const char* key) {
    auto it = sol.meta.find(key);
    return it == sol.meta.end() ? 0L : std::stol(it->second);
  };
  auto meta_double = [&](const char* key) {
    auto it = sol.meta.find(key);
    return it == sol.meta.end() ? 0.0 : std::stod(it->second);
  };
  return bipgo::render_report(dataset, ids, est, truth,
                              static_cast<bipgo::Index>(sol.objects.size()),
                              meta_int("edges"), static_cast<int>(meta_int("iterations")),
                              meta_double("sec_per_iter"), meta_int("certified") != 0);
}

int run_eval(const std::string& solution_path, const std::string& gt_path,
             const std::string& out_path, std::string dataset) {
  const bipgo::PoseFile sol = bipgo::read_poses(solution_path);
  const bipgo::PoseFile gt = bipgo::read_poses(gt_path);
  if (dataset.empty()) {
    auto it = gt.meta.find("dataset");
    dataset = it == gt.meta.end() ? "unnamed" : it->second;
  }
  const bipgo::ErrorReport report = evaluate_pose_files(sol, gt, dataset);
  const std::string csv =
      bipgo::report_csv_header() + "\n" + bipgo::report_csv_row(report) + "\n";
  if (!out_path.empty()) bipgo::write_text_file(out_path, csv);
  std::cout << bipgo::report_table(report);
  if (out_path.empty()) std::cout << csv;
  return kExitOk;
}

int run_bench(const std::vector<std::string>& presets, const std::vector<std::uint64_t>& seeds,
              const std::string& out_path, const bipgo::SolverConfig& scfg) {
  std::string csv = bipgo::report_csv_header() + "\n";
  for (const std::string& name : presets) {
    for (std::uint64_t seed : seeds) {
      bipgo::SceneConfig cfg = bipgo::preset(name);
      cfg.seed = seed;
      const bipgo::Scene scene = bipgo::generate_scene(cfg);
      const bipgo::PruneResult pruned = bipgo::prune(scene.graph);
      const bipgo::RotSolution rot = bipgo::solve_rotations(pruned.graph, scfg);
      const PipelineOutput out =
          assemble_poses(pruned.graph, rot, pruned.graph.cameras.front());
      // Ground truth rows for whatever survived pruning.
      const bipgo::GraphIndex idx(scene.graph);
      std::vector<bipgo::Pose> gt;
      for (bipgo::NodeId id : pruned.graph.cameras) {
        gt.push_back(scene.truth.cam_poses[static_cast<size_t>(idx.camera(id))]);
      }
      const bipgo::ErrorReport report = bipgo::render_report(
          name + "/seed" + std::to_string(seed), pruned.graph.cameras, out.cam_poses, gt,
          pruned.graph.num_times(), pruned.graph.num_edges(), out.stats.iterations,
          out.stats.seconds_per_iteration, out.stats.certified);
      csv += bipgo::report_csv_row(report) + "\n";
      std::cout << bipgo::report_table(report);
    }
  }
  if (!out_path.empty()) bipgo::write_text_file(out_path, csv);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bipartite camera-object pose graph toolkit"};
  app.set_version_flag("--version", bipgo::kVersion);
  app.require_subcommand(1);

  bipgo::SolverConfig scfg;
  auto add_solver_flags = [&scfg](CLI::App* cmd) {
    cmd->add_option("--delta", scfg.delta, "eigenvalue convergence threshold");
    cmd->add_option("--max-outer", scfg.max_outer, "outer sweep cap");
    cmd->add_option("--max-inner", scfg.max_inner, "inner sweep cap");
    cmd->add_option("--eig-tol", scfg.eig_tol, "eigensolver residual tolerance");
    cmd->add_option("--cert-tol", scfg.certificate_tol, "certificate slack tolerance");
  };

  // generate
  auto* gen = app.add_subcommand("generate", "generate a synthetic scene");
  std::string preset_name = "SmallRoom50", config_path, out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> times;
  std::optional<double> kappa, tau, atten_d0;
  gen->add_option("--preset", preset_name, "preset name");
  gen->add_option("--config", config_path, "key = value config file");
  gen->add_option("--seed", seed, "rng seed");
  gen->add_option("--times", times, "override number of time steps");
  gen->add_option("--kappa", kappa, "override kappa_base");
  gen->add_option("--tau", tau, "override tau_base");
  gen->add_option("--atten-d0", atten_d0, "override attenuation distance (<=0 disables)");
  gen->add_option("-o,--out", out_dir, "output directory")->required();

  // solve
  auto* solve = app.add_subcommand("solve", "solve rotations and translations");
  std::string graph_path, object_path, solution_path = "solution.txt";
  std::optional<bipgo::NodeId> anchor;
  bool stream = false;
  solve->add_option("--graph", graph_path, "edge file")->required();
  solve->add_option("--object", object_path, "object model file")->required();
  solve->add_option("-o,--solution", solution_path, "output pose file");
  solve->add_option("--anchor", anchor, "camera id pinned to zero translation");
  solve->add_flag("--stream", stream, "consume edges grouped by time step");
  add_solver_flags(solve);

  // calibrate-object
  auto* calib = app.add_subcommand("calibrate-object", "estimate a rig model from views");
  std::string views_path, model_out = "object_estimate.txt";
  calib->add_option("--views", views_path, "edge file from a single moving camera")
      ->required();
  calib->add_option("-o,--out", model_out, "output object model file");
  add_solver_flags(calib);

  // eval
  auto* eval = app.add_subcommand("eval", "compare a solution against ground truth");
  std::string sol_path, gt_path, report_path, dataset;
  eval->add_option("--solution", sol_path, "solved pose file")->required();
  eval->add_option("--gt", gt_path, "ground truth pose file")->required();
  eval->add_option("-o,--report", report_path, "CSV report path");
  eval->add_option("--dataset", dataset, "dataset label");

  // bench
  auto* bench = app.add_subcommand("bench", "generate+solve+eval preset/seed cells");
  std::vector<std::string> bench_presets{"SmallRoom50"};
  std::vector<std::uint64_t> bench_seeds{0};
  std::string bench_out;
  bench->add_option("--presets", bench_presets, "preset names")->delimiter(',');
  bench->add_option("--seeds", bench_seeds, "seeds")->delimiter(',');
  bench->add_option("-o,--out", bench_out, "aggregate CSV path");
  add_solver_flags(bench);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      return run_generate(preset_name, config_path, seed, times, kappa, tau, atten_d0,
                          out_dir);
    }
    if (solve->parsed()) {
      return run_solve(graph_path, object_path, solution_path, scfg, anchor, stream);
    }
    if (calib->parsed()) return run_calibrate(views_path, model_out, scfg);
    if (eval->parsed()) return run_eval(sol_path, gt_path, report_path, dataset);
    if (bench->parsed()) return run_bench(bench_presets, bench_seeds, bench_out, scfg);
  } catch (const bipgo::DisconnectedRig& e) {
    std::cerr << "error: " << e.what() << ":";
    for (bipgo::NodeId m : e.unreachable) std::cerr << ' ' << m;
    std::cerr << "\n";
    return kExitSolver;
  } catch (const bipgo::NoConvergence& e) {
    std::cerr << "error: " << e.what() << " (residual " << e.residual << ")\n";
    return kExitSolver;
  } catch (const bipgo::DisconnectedNode& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const bipgo::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const bipgo::BadConfig& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const bipgo::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitOk;
}
