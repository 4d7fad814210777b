#include "toss/toss.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

std::string frame_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%06zu", i);
  return buf;
}

std::uint32_t class_of(toss::PointLabel l) {
  switch (l) {
    case toss::PointLabel::Ground: return 40;
    case toss::PointLabel::Dynamic: return 254;
    default: return 50;
  }
}

int cmd_run(const std::string& config_path, const std::string& input,
            const std::string& output, const std::string& associator,
            bool no_refine) {
  toss::PipelineConfig cfg = config_path.empty()
                                 ? toss::PipelineConfig{}
                                 : toss::parse_config(config_path);
  if (!associator.empty()) cfg.tracker.hierarchical = associator == "hierarchical";
  if (no_refine) cfg.refine = false;

  const toss::SequenceSource source((fs::path(input)));
  toss::log::info("run: " + std::to_string(source.size()) + " frames from " +
                  input);
  const toss::PipelineResult result = toss::run_sequence(source, cfg);

  fs::create_directories(fs::path(output) / "labels");
  for (std::size_t f = 0; f < result.labels.size(); ++f) {
    std::vector<std::uint32_t> raw;
    raw.reserve(result.labels[f].size());
    for (toss::PointLabel l : result.labels[f]) raw.push_back(class_of(l));
    toss::write_labels(fs::path(output) / "labels" / (frame_name(f) + ".label"),
                       raw);
  }
  toss::write_map_ply(fs::path(output) / "map.ply", result.map);
  toss::write_track_archive_csv(fs::path(output) / "tracks.csv", result.archive);
  if (cfg.refine) {
    toss::write_refined_csv(fs::path(output) / "refined.csv", result.refined);
  }
  result.timing.write_csv(fs::path(output) / "timings.csv");

  std::ofstream report(fs::path(output) / "report.txt");
  report << "frames=" << result.frames << "\n"
         << "ground_points=" << result.ground_points << "\n"
         << "static_points=" << result.static_points << "\n"
         << "dynamic_points=" << result.dynamic_points << "\n"
         << "tracks=" << result.archive.size() << "\n"
         << "cost_evaluations=" << result.cost_evaluations << "\n"
         << "map_voxels=" << result.map.size() << "\n"
         << "associator=" << (cfg.tracker.hierarchical ? "hierarchical" : "exhaustive")
         << "\n"
         << "refinement=" << (cfg.refine ? "on" : "off") << "\n";

  toss::log::info("timing\n" + result.timing.summary());
  toss::log::info("outputs written to " + output);
  return 0;
}

int cmd_eval(const std::string& pred, const std::string& truth,
             double voxel_size) {
  const toss::SequenceSource source((fs::path(truth)));
  if (!source.has_labels()) {
    throw std::runtime_error("eval: truth directory has no labels/");
  }
  std::vector<fs::path> pred_files;
  for (const auto& entry : fs::directory_iterator(pred)) {
    if (entry.path().extension() == ".label") pred_files.push_back(entry.path());
  }
  std::sort(pred_files.begin(), pred_files.end());
  if (pred_files.size() != source.size()) {
    throw std::runtime_error("eval: " + std::to_string(pred_files.size()) +
                             " predicted label files but " +
                             std::to_string(source.size()) + " frames");
  }

  toss::VoxelMap built(voxel_size);
  toss::VoxelMap reference(voxel_size);
  for (std::size_t f = 0; f < source.size(); ++f) {
    const toss::Scan scan = source.scan(f);
    const toss::Pose& pose = source.pose(f);
    const toss::LabelFrame truth_labels = source.labels(f);
    const toss::LabelFrame pred_labels = toss::read_labels(pred_files[f]);
    if (truth_labels.raw.size() != scan.points.size() ||
        pred_labels.raw.size() != scan.points.size()) {
      throw std::runtime_error("eval: label/point count mismatch at frame " +
                               std::to_string(f));
    }
    for (std::size_t i = 0; i < scan.points.size(); ++i) {
      const toss::Point3 g = pose.apply(scan.points[i]);
      reference.insert_labeled(g, truth_labels.dynamic(i));
      if (!pred_labels.dynamic(i)) built.insert(g);
    }
  }

  const toss::EvalReport report = toss::evaluate(built, reference);
  if (!report.pr_defined) toss::log::warn("no static voxels; PR undefined");
  if (!report.rr_defined) toss::log::warn("no dynamic voxels; RR undefined");
  std::cout << report.table() << report.key_values();
  return 0;
}

toss::BBox random_box(toss::Rng& rng) {
  toss::BBox b;
  b.cx = rng.uniform(0.0, 20.0);
  b.cy = rng.uniform(0.0, 20.0);
  b.cz = rng.uniform(0.0, 2.0);
  b.theta = rng.uniform(-M_PI, M_PI);
  b.l = rng.uniform(0.5, 4.0);
  b.w = rng.uniform(0.5, 2.0);
  b.h = rng.uniform(0.5, 2.0);
  if (b.l < b.w) std::swap(b.l, b.w);
  return b;
}

int cmd_bench(int n_detections, int n_tracks, int k, int trials,
              std::uint64_t seed, const std::string& csv_path) {
  using clock = std::chrono::steady_clock;
  std::ostream* csv = &std::cout;
  std::ofstream csv_file;
  if (!csv_path.empty()) {
    csv_file.open(csv_path);
    if (!csv_file) throw std::runtime_error("bench-assoc: cannot open " + csv_path);
    csv = &csv_file;
  }
  *csv << "trial,method,seconds,cost_evaluations,matches\n";

  double total_ex = 0.0, total_hi = 0.0;
  std::size_t evals_ex = 0, evals_hi = 0;
  for (int trial = 0; trial < trials; ++trial) {
    toss::Rng rng = toss::Rng::split(seed, static_cast<std::uint64_t>(trial));
    std::vector<toss::BBox> detections(n_detections);
    for (auto& b : detections) b = random_box(rng);
    std::vector<toss::TrackRef> tracks(n_tracks);
    for (int j = 0; j < n_tracks; ++j) tracks[j] = {j + 1, random_box(rng)};

    auto t0 = clock::now();
    const toss::AssociationResult ex = toss::associate_exhaustive(
        detections, tracks, std::numeric_limits<double>::infinity());
    const double sec_ex = std::chrono::duration<double>(clock::now() - t0).count();

    t0 = clock::now();
    const toss::AssociationResult hi = toss::associate_hierarchical(
        detections, tracks, k, std::numeric_limits<double>::infinity());
    const double sec_hi = std::chrono::duration<double>(clock::now() - t0).count();

    total_ex += sec_ex;
    total_hi += sec_hi;
    evals_ex = ex.cost_evaluations;
    evals_hi = hi.cost_evaluations;
    *csv << trial << ",exhaustive," << sec_ex << ',' << ex.cost_evaluations << ','
         << ex.matches.size() << '\n';
    *csv << trial << ",hierarchical," << sec_hi << ',' << hi.cost_evaluations
         << ',' << hi.matches.size() << '\n';
  }

  std::ostringstream os;
  os.precision(6);
  os << std::fixed << "bench-assoc: N=" << n_detections << " M=" << n_tracks
     << " k=" << k << " trials=" << trials << "\n"
     << "  exhaustive  : mean " << total_ex / trials << " s/frame, "
     << evals_ex << " cost evaluations (N*M)\n"
     << "  hierarchical: mean " << total_hi / trials << " s/frame, "
     << evals_hi << " cost evaluations (N*min(M,k))\n"
     << "  speedup     : " << (total_hi > 0.0 ? total_ex / total_hi : 0.0) << "x";
  toss::log::info(os.str());
  return 0;
}

int cmd_generate(const std::string& scene, const std::string& output, int frames,
                 std::uint64_t seed) {
  const toss::SceneSpec spec = toss::scenes::by_name(scene, frames, seed);
  const toss::SyntheticSequence seq = toss::generate(spec);
  toss::write_sequence(seq, output);
  toss::log::info("generate: wrote " + std::to_string(seq.scans.size()) +
                  " frames of '" + scene + "' to " + output);
  return 0;
}

int cmd_inspect(const std::string& input) {
  const toss::SequenceSource source((fs::path(input)));
  std::size_t total = 0, min_pts = SIZE_MAX, max_pts = 0;
  std::int64_t dynamic = 0, labeled = 0;
  for (std::size_t f = 0; f < source.size(); ++f) {
    const toss::Scan scan = source.scan(f);
    total += scan.points.size();
    min_pts = std::min(min_pts, scan.points.size());
    max_pts = std::max(max_pts, scan.points.size());
    if (source.has_labels()) {
      const toss::LabelFrame lf = source.labels(f);
      labeled += static_cast<std::int64_t>(lf.raw.size());
      for (std::size_t i = 0; i < lf.raw.size(); ++i) {
        if (lf.dynamic(i)) ++dynamic;
      }
    }
  }
  const toss::Pose& first = source.pose(0);
  const toss::Pose& last = source.pose(source.size() - 1);
  const double travel = (last.translation - first.translation).norm();
  std::cout << "frames=" << source.size() << "\n"
            << "points_total=" << total << "\n"
            << "points_min=" << (source.size() ? min_pts : 0) << "\n"
            << "points_max=" << max_pts << "\n"
            << "travel_m=" << travel << "\n"
            << "has_labels=" << (source.has_labels() ? 1 : 0) << "\n";
  if (source.has_labels()) {
    std::cout << "labeled_points=" << labeled << "\n"
              << "dynamic_points=" << dynamic << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"TOSS: online LiDAR moving-object segmentation and static mapping"};
  app.require_subcommand(1);

  std::string config_path, input, output, associator, pred, truth, scene, csv;
  bool no_refine = false;
  double voxel_size = 0.2;
  int n_detections = 1000, n_tracks = 1000, k = 5, trials = 5, frames = 0;
  std::uint64_t seed = 0;
  bool seed_given = false;

  CLI::App* run = app.add_subcommand("run", "run the pipeline on a sequence");
  run->add_option("--config", config_path, "pipeline config file (JSON)");
  run->add_option("--input", input, "KITTI-layout sequence directory")->required();
  run->add_option("--output", output, "output directory")->required();
  run->add_option("--associator", associator, "hierarchical|exhaustive")
      ->check(CLI::IsMember({"hierarchical", "exhaustive"}));
  run->add_flag("--no-refine", no_refine, "skip the refinement vote");

  CLI::App* eval = app.add_subcommand("eval", "PR/RR/F1 of predicted labels");
  eval->add_option("--pred", pred, "directory of predicted .label files")
      ->required();
  eval->add_option("--truth", truth, "sequence directory with ground truth")
      ->required();
  eval->add_option("--voxel-size", voxel_size, "evaluation voxel size [m]");

  CLI::App* bench = app.add_subcommand("bench-assoc",
                                       "time exhaustive vs hierarchical association");
  bench->add_option("--n-detections", n_detections)->check(CLI::PositiveNumber);
  bench->add_option("--n-tracks", n_tracks)->check(CLI::PositiveNumber);
  bench->add_option("--k", k)->check(CLI::PositiveNumber);
  bench->add_option("--trials", trials)->check(CLI::PositiveNumber);
  auto* bench_seed = bench->add_option("--seed", seed);
  bench->add_option("--csv", csv, "write per-trial CSV here instead of stdout");

  CLI::App* generate = app.add_subcommand("generate", "write a synthetic scene");
  generate->add_option("--scene", scene,
                       "crossing_walkers|parked_car_jitter|tracking_gap|"
                       "steep_hill|long_corridor")
      ->required();
  generate->add_option("--output", output, "output directory")->required();
  generate->add_option("--frames", frames, "frame count (0 = scene default)");
  auto* gen_seed = generate->add_option("--seed", seed);

  CLI::App* inspect = app.add_subcommand("inspect", "summarize a sequence");
  inspect->add_option("--input", input, "sequence directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  seed_given = (bench_seed->count() > 0) || (gen_seed->count() > 0);
  if ((bench->parsed() || generate->parsed()) && !seed_given) {
    seed = std::random_device{}();
    std::cerr << "[toss] seed: " << seed << "\n";
  }

  try {
    if (run->parsed()) return cmd_run(config_path, input, output, associator, no_refine);
    if (eval->parsed()) return cmd_eval(pred, truth, voxel_size);
    if (bench->parsed())
      return cmd_bench(n_detections, n_tracks, k, trials, seed, csv);
    if (generate->parsed()) return cmd_generate(scene, output, frames, seed);
    if (inspect->parsed()) return cmd_inspect(input);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
