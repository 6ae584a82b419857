#include "shoal/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <future>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "shoal/config.hpp"
#include "shoal/io.hpp"
#include "shoal/metrics.hpp"
#include "shoal/plot.hpp"
#include "shoal/simulator.hpp"
#include "shoal/tracker.hpp"

namespace shoal::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string detections, masks, output, config, report;
  std::vector<std::string> gt, tracks;
  std::optional<std::uint64_t> seed;
  bool disable_interaction = false;
  bool disable_refind = false;
  bool crops = false;
};

AppConfig load(const Options& o) { return o.config.empty() ? AppConfig{} : load_config(o.config); }

int cmd_track(const Options& o, std::ostream& out, std::ostream& err) {
  AppConfig cfg = load(o);
  if (o.disable_interaction) cfg.tracker.enable_interaction = false;
  if (o.disable_refind) cfg.tracker.enable_refind = false;

  io::ReadResult diag;
  FrameDetections dets = io::read_detections(o.detections, &diag);
  for (const auto& w : diag.warnings) err << "warning: " << w << "\n";
  if (!o.masks.empty()) io::attach_masks(o.masks, dets);

  io::FileMaskSource masks(cfg.tracker.entity);
  TrackerState state;
  const TrajectorySet tracks =
      track_sequence(dets, o.masks.empty() ? nullptr : &masks, cfg.tracker, &state);
  for (const auto& w : state.warnings) err << "warning: frame " << w.frame << ": " << w.message << "\n";
  io::write_tracks(o.output, tracks);

  std::size_t interpolated = 0;
  for (const auto& [id, points] : tracks)
    for (const auto& p : points) interpolated += p.interpolated ? 1 : 0;
  out << "tracks: " << tracks.size() << "  boxes: " << point_count(tracks)
      << "  interpolated: " << interpolated << "\n";
  return 0;
}

int cmd_evaluate(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.gt.size() != o.tracks.size()) {
    err << "error: --gt and --tracks must be given the same number of times\n";
    return 1;
  }
  const AppConfig cfg = load(o);

  // Each sequence is independent; evaluate them concurrently.
  std::vector<std::future<SequenceMetrics>> jobs;
  std::vector<std::vector<std::string>> warnings(o.gt.size());
  for (std::size_t i = 0; i < o.gt.size(); ++i) {
    jobs.push_back(std::async(std::launch::async, [&, i] {
      io::ReadResult dg, dh;
      const auto gt = io::read_tracks(o.gt[i], &dg);
      const auto hyp = io::read_tracks(o.tracks[i], &dh);
      warnings[i] = dg.warnings;
      warnings[i].insert(warnings[i].end(), dh.warnings.begin(), dh.warnings.end());
      return evaluate_sequence(fs::path(o.tracks[i]).stem().string(), gt, hyp, cfg.iou_gate);
    }));
  }
  std::vector<SequenceMetrics> seqs;
  for (auto& j : jobs) seqs.push_back(j.get());
  for (const auto& ws : warnings)
    for (const auto& w : ws) err << "warning: " << w << "\n";

  const MetricsReport report = combine(std::move(seqs), cfg.iou_gate);
  out << format_text(report);
  if (!o.report.empty()) io::write_file(o.report, format_json(report));
  return 0;
}

int cmd_simulate(const Options& o, std::ostream& out, std::ostream&) {
  AppConfig cfg = load(o);
  if (o.seed) cfg.scenario.seed = *o.seed;
  const Scenario sc = generate(cfg.scenario);
  const fs::path dir(o.output);
  fs::create_directories(dir);

  io::write_tracks(dir / "gt.csv", sc.gt);
  io::write_detections(dir / "detections.csv", sc.detections);

  std::vector<io::ManifestRow> mask_rows, crop_rows;
  for (const auto& [frame, dets] : sc.detections) {
    for (std::size_t i = 0; i < dets.size(); ++i) {
      const std::string& key = *dets[i].mask_ref;
      io::write_pbm(dir / key, *sc.masks.resolve(dets[i]));
      mask_rows.push_back({frame, i, key});
      if (o.crops) {
        const std::string crop_key = "crops/" + fs::path(key).stem().string() + ".pgm";
        io::write_pgm(dir / crop_key, sc.crops.at(key));
        crop_rows.push_back({frame, i, crop_key});
      }
    }
  }
  io::write_manifest(dir / "masks.csv", mask_rows);
  if (o.crops) io::write_manifest(dir / "crops.csv", crop_rows);

  std::string dropped;
  for (const auto& d : sc.dropped) dropped += std::to_string(d.frame) + "," + std::to_string(d.id) + "\n";
  io::write_file(dir / "dropped.csv", dropped);

  out << "agents: " << cfg.scenario.n_agents << "  frames: " << cfg.scenario.n_frames
      << "  detections: " << (point_count(sc.gt) - sc.dropped.size())
      << "  dropped: " << sc.dropped.size() << "\n";
  return 0;
}

int cmd_analyze(const Options& o, std::ostream& out, std::ostream& err) {
  io::ReadResult diag;
  const auto tracks = io::read_tracks(o.gt.front(), &diag);
  for (const auto& w : diag.warnings) err << "warning: " << w << "\n";
  const AdjacentIouStats stats = adjacent_iou_stats(tracks);
  if (!stats.mean) {
    err << "error: no consecutive frame pairs; adjacent IoU is not applicable\n";
    return 1;
  }
  out << std::fixed << std::setprecision(6);
  out << "pairs: " << stats.pairs << "\n";
  out << "pooled mean IoU: " << *stats.mean << "\n";
  for (const auto& [id, m] : stats.per_track_mean) out << "  track " << id << ": " << m << "\n";
  if (!o.output.empty()) {
    std::ostringstream csv;
    csv << "bin_low,bin_high,count\n" << std::fixed << std::setprecision(2);
    for (std::size_t b = 0; b < AdjacentIouStats::kBins; ++b) {
      csv << static_cast<double>(b) / AdjacentIouStats::kBins << ","
          << static_cast<double>(b + 1) / AdjacentIouStats::kBins << "," << stats.histogram[b] << "\n";
    }
    io::write_file(o.output, csv.str());
  }
  return 0;
}

int cmd_plot(const Options& o, std::ostream& out, std::ostream& err) {
  io::ReadResult diag;
  const auto tracks = io::read_tracks(o.tracks.front(), &diag);
  for (const auto& w : diag.warnings) err << "warning: " << w << "\n";
  io::write_file(o.output, render_svg(tracks));
  out << "wrote " << tracks.size() << " trajectories to " << o.output << "\n";
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"IoU-based multi-object tracker, evaluator and scenario simulator", "shoal"};
  app.require_subcommand(1);
  Options o;

  auto* track = app.add_subcommand("track", "Link per-frame detections into trajectories");
  track->add_option("--detections", o.detections, "Detections CSV (MOT format)")->required();
  track->add_option("--masks", o.masks, "Mask manifest CSV (frame,det_index,path)");
  track->add_option("--config", o.config, "JSON config");
  track->add_option("--output", o.output, "Tracks CSV to write")->required();
  track->add_flag("--disable-interaction", o.disable_interaction, "Skip the entity-IoU stage");
  track->add_flag("--disable-refind", o.disable_refind, "Terminate tracks on their first miss");

  auto* evaluate = app.add_subcommand("evaluate", "Score tracks against ground truth");
  evaluate->add_option("--gt", o.gt, "Ground-truth CSV (repeatable)")->required();
  evaluate->add_option("--tracks", o.tracks, "Hypothesis CSV (repeatable, paired with --gt)")->required();
  evaluate->add_option("--config", o.config, "JSON config (metrics.iou_gate)");
  evaluate->add_option("--report", o.report, "JSON report to write");

  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic scenario");
  simulate->add_option("--config", o.config, "JSON config (scenario section)");
  simulate->add_option("--seed", o.seed, "Override scenario.seed");
  simulate->add_option("--output", o.output, "Output directory")->required();
  simulate->add_flag("--crops", o.crops, "Also write grayscale crops and crops.csv");

  auto* analyze = app.add_subcommand("analyze", "Adjacent-frame IoU statistics");
  analyze->add_option("--gt", o.gt, "Trajectory CSV")->required()->expected(1);
  analyze->add_option("--output", o.output, "Histogram CSV to write");

  auto* plot = app.add_subcommand("plot", "Render trajectories to SVG");
  plot->add_option("--tracks", o.tracks, "Trajectory CSV")->required()->expected(1);
  plot->add_option("--output", o.output, "SVG file to write")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\nRun with --help for more information.\n";
    return 1;
  }

  try {
    if (*track) return cmd_track(o, out, err);
    if (*evaluate) return cmd_evaluate(o, out, err);
    if (*simulate) return cmd_simulate(o, out, err);
    if (*analyze) return cmd_analyze(o, out, err);
    if (*plot) return cmd_plot(o, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  err << app.help();
  return 1;
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace shoal::cli
