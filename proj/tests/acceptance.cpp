// Acceptance checks. Prints one PASS/FAIL line per criterion with the
// measured values and exits non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "oracles.hpp"
#include "shoal/assignment.hpp"
#include "shoal/cli.hpp"
#include "shoal/config.hpp"
#include "shoal/io.hpp"
#include "shoal/masks.hpp"
#include "shoal/metrics.hpp"
#include "shoal/simulator.hpp"
#include "shoal/tracker.hpp"

namespace fs = std::filesystem;
using namespace shoal;

namespace {

const fs::path kConfigs = SHOAL_CONFIG_DIR;

int failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail) {
  std::printf("[%s] %d. %s: %s\n", ok ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int cli_run(std::vector<std::string> args, std::string* out = nullptr) {
  std::ostringstream o, e;
  const int rc = cli::run(args, o, e);
  if (out) *out = o.str();
  if (rc != 0) std::fprintf(stderr, "%s", e.str().c_str());
  return rc;
}

// Simulate, track and evaluate through the command-line surface.
struct Pipeline {
  fs::path dir;
  nlohmann::json metrics;
  bool ok = false;
};

Pipeline run_pipeline(const fs::path& dir, const fs::path& config) {
  Pipeline p{dir, {}, false};
  fs::remove_all(dir);
  const std::string d = dir.string();
  if (cli_run({"simulate", "--config", config.string(), "--output", d + "/sim"}) != 0) return p;
  if (cli_run({"track", "--detections", d + "/sim/detections.csv", "--masks", d + "/sim/masks.csv", "--config",
               config.string(), "--output", d + "/tracks.csv"}) != 0)
    return p;
  if (cli_run({"evaluate", "--gt", d + "/sim/gt.csv", "--tracks", d + "/tracks.csv", "--config", config.string(),
               "--report", d + "/report.json"}) != 0)
    return p;
  p.metrics = nlohmann::json::parse(io::read_file(dir / "report.json"));
  p.ok = true;
  return p;
}

void clean_scenario(const fs::path& work) {
  const auto t0 = std::chrono::steady_clock::now();
  const Pipeline p = run_pipeline(work / "clean", kConfigs / "clean.json");
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!p.ok) {
    report(1, "clean scenario", false, "pipeline failed");
    return;
  }
  const double mota = p.metrics["MOTA"].get<double>();
  const double idf1 = p.metrics["IDF1"].get<double>();
  const auto idsw = p.metrics["IDSW"].get<std::size_t>();
  report(1, "clean scenario", mota == 1.0 && idf1 == 1.0 && idsw == 0 && secs < 5.0,
         fmt("MOTA %.6f IDF1 %.6f IDSW %zu in %.2f s", mota, idf1, idsw, secs));
}

void assignment_optimality() {
  std::mt19937 rng(20240601);
  std::uniform_int_distribution<std::size_t> dim(1, 7);
  std::uniform_real_distribution<double> cost(0.0, 10.0);
  std::bernoulli_distribution forbid(0.25);
  int trials = 0, mismatches = 0;
  double worst = 0;
  for (; trials < 1200; ++trials) {
    CostMatrix m(dim(rng), dim(rng));
    for (std::size_t r = 0; r < m.rows(); ++r)
      for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) = forbid(rng) ? CostMatrix::kForbidden : cost(rng);
    const Matching got = solve(m);
    const auto want = oracle::brute_assign(m);
    const double diff = std::fabs(got.total_cost(m) - want.cost);
    worst = std::max(worst, diff);
    if (got.pairs.size() != want.cardinality || diff > 1e-9) ++mismatches;
  }
  report(2, "assignment vs brute force", mismatches == 0,
         fmt("%d matrices up to 7x7, %d mismatches, max |cost diff| %.2e", trials, mismatches, worst));
}

void metrics_examples() {
  auto grid = [](int objects, int frames) {
    TrajectorySet s;
    for (int id = 1; id <= objects; ++id)
      for (int f = 1; f <= frames; ++f) s[id].push_back({f, BBox(50.0 * id, 2.0 * f, 10, 10), 1, false});
    return s;
  };
  const auto gt10 = grid(10, 10);
  auto hyp10 = gt10;
  hyp10[3].erase(hyp10[3].begin() + 4);
  hyp10[99].push_back({6, BBox(900, 900, 10, 10), 1, false});
  const double mota_a = *clear_mot(gt10, hyp10).mota;

  auto pt = [](int f) { return TrackPoint{f, BBox(0, 0, 10, 10), 1, false}; };
  TrajectorySet gt4{{1, {pt(1), pt(2), pt(3), pt(4)}}};
  TrajectorySet split{{7, {pt(1), pt(2)}}, {8, {pt(3), pt(4)}}};
  const double mota_b = *clear_mot(gt4, split).mota;
  const double idf1_b = *id_metrics(gt4, split).idf1;

  TrajectorySet gt1{{1, {}}}, hyp1{{5, {}}};
  for (int f = 1; f <= 10; ++f) {
    gt1[1].push_back({f, BBox(0, 0, 10, 10), 1, false});
    hyp1[5].push_back({f, BBox(f == 10 ? 500 : 0, 0, 10, 10), 1, false});
  }
  const double idf1_a = *id_metrics(gt1, hyp1).idf1;

  std::mt19937 rng(99);
  std::uniform_int_distribution<int> pos(0, 3), ids(1, 8);
  std::bernoulli_distribution present(0.7);
  auto random_set = [&](int n) {
    TrajectorySet s;
    for (int id = 1; id <= n; ++id)
      for (int f = 1; f <= 15; ++f)
        if (present(rng)) s[id].push_back({f, BBox(8.0 * pos(rng), 0, 10, 10), 1, false});
    return s;
  };
  double worst = 0;
  int checked = 0;
  for (int i = 0; i < 500; ++i) {
    const auto r = id_metrics(random_set(ids(rng)), random_set(ids(rng)));
    if (!r.idp || !r.idr || *r.idp + *r.idr == 0) continue;
    worst = std::max(worst, std::fabs(*r.idf1 - 2 * *r.idp * *r.idr / (*r.idp + *r.idr)));
    ++checked;
  }
  const bool ok = std::fabs(mota_a - 0.98) < 1e-15 && mota_b == 0.75 && std::fabs(idf1_a - 0.9) < 1e-15 &&
                  idf1_b == 0.5 && worst <= 1e-12;
  report(3, "metric examples", ok,
         fmt("MOTA %.4f / %.4f, IDF1 %.4f / %.4f, harmonic identity max err %.1e over %d inputs", mota_a, mota_b,
             idf1_a, idf1_b, worst, checked));
}

// Checks every interpolated point against the straight line between the real
// points that bracket it. Returns the largest coordinate error.
double interpolation_error(const TrajectorySet& tracks, std::size_t& count) {
  double worst = 0;
  for (const auto& [id, pts] : tracks) {
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (!pts[i].interpolated) continue;
      std::size_t a = i, b = i;
      while (pts[a].interpolated) --a;
      while (pts[b].interpolated) ++b;
      const double t = static_cast<double>(pts[i].frame - pts[a].frame) / (pts[b].frame - pts[a].frame);
      const BBox &p = pts[a].box, &q = pts[b].box, &g = pts[i].box;
      worst = std::max({worst, std::fabs(g.x() - (p.x() + t * (q.x() - p.x()))),
                        std::fabs(g.y() - (p.y() + t * (q.y() - p.y()))),
                        std::fabs(g.w() - (p.w() + t * (q.w() - p.w()))),
                        std::fabs(g.h() - (p.h() + t * (q.h() - p.h())))});
      ++count;
    }
  }
  return worst;
}

void refind_ablation() {
  const AppConfig base = load_config(kConfigs / "dropout.json");
  int runs = 0, strict = 0, worse = 0;
  std::size_t interpolated = 0;
  double interp_err = 0;
  for (double p : {0.02, 0.05, 0.10}) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      ScenarioConfig sc = base.scenario;
      sc.dropout_p = p;
      sc.seed = seed;
      const Scenario s = generate(sc);
      TrackerConfig on = base.tracker, off = base.tracker;
      off.enable_refind = false;
      const auto with = track_sequence(s.detections, &s.masks, on);
      const auto without = track_sequence(s.detections, &s.masks, off);
      const double m1 = *clear_mot(s.gt, with).mota, m0 = *clear_mot(s.gt, without).mota;
      ++runs;
      if (m1 > m0) ++strict;
      if (m1 < m0) ++worse;
      interp_err = std::max(interp_err, interpolation_error(with, interpolated));
    }
  }
  const bool ok = worse == 0 && strict * 5 >= runs * 4 && interp_err <= 1e-9 && interpolated > 0;
  report(4, "refind ablation", ok,
         fmt("%d runs, %d strictly better, %d worse; %zu interpolated boxes, max line error %.1e", runs, strict, worse,
             interpolated, interp_err));
}

void interaction_ablation() {
  const AppConfig base = load_config(kConfigs / "crossing.json");
  std::size_t total_on = 0, total_off = 0, pairs = 0, entity_mismatch = 0;
  int strict = 0, worse = 0;
  std::string per_seed;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    ScenarioConfig sc = base.scenario;
    sc.seed = seed;
    const Scenario s = generate(sc);
    TrackerConfig on = base.tracker, off = base.tracker;
    off.enable_interaction = false;
    TrackerState state;
    const auto with = track_sequence(s.detections, &s.masks, on, &state);
    const auto without = track_sequence(s.detections, &s.masks, off);
    const std::size_t a = clear_mot(s.gt, with).idsw, b = clear_mot(s.gt, without).idsw;
    total_on += a;
    total_off += b;
    if (a < b) ++strict;
    if (a > b) ++worse;
    per_seed += fmt(" %zu/%zu", a, b);
    for (const auto& r : state.interaction_log) {
      ++pairs;
      if (!r.entity_iou || !r.track_entity || !r.detection_entity ||
          *r.entity_iou != oracle::entity_iou(*r.track_entity, *r.detection_entity))
        ++entity_mismatch;
    }
  }
  const bool ok = worse == 0 && strict >= 1 && pairs > 0 && entity_mismatch == 0;
  report(5, "interaction ablation", ok,
         fmt("IDSW on/off per seed:%s (total %zu/%zu, %d strict, %d worse); entity IoU checked on %zu pairs, %zu "
             "mismatches",
             per_seed.c_str(), total_on, total_off, strict, worse, pairs, entity_mismatch));
}

void adjacent_iou() {
  const AppConfig base = load_config(kConfigs / "adjacent_iou.json");
  const double mean = *adjacent_iou_stats(generate(base.scenario).gt).mean;
  std::vector<double> sweep;
  bool monotone = true;
  std::string values;
  for (double speed : {2.0, 3.5, 4.5, 5.5, 7.0}) {
    ScenarioConfig sc = base.scenario;
    sc.speed = speed;
    sweep.push_back(*adjacent_iou_stats(generate(sc).gt).mean);
    if (sweep.size() > 1 && sweep.back() > sweep[sweep.size() - 2]) monotone = false;
    values += fmt(" %.1f:%.3f", speed, sweep.back());
  }
  report(6, "adjacent IoU", mean >= 0.55 && mean <= 0.65 && monotone,
         fmt("configs/adjacent_iou.json mean %.4f; speed sweep%s", mean, values.c_str()));
}

void otsu_and_components() {
  std::mt19937 rng(31337);
  int otsu_bad = 0, lcc_bad = 0;
  std::uniform_int_distribution<int> side(1, 32), modes(1, 3), level(0, 255);
  std::uniform_real_distribution<double> spread(1.0, 40.0);
  for (int i = 0; i < 200; ++i) {
    const int w = side(rng), h = side(rng);
    std::vector<double> centers;
    for (int m = modes(rng); m > 0; --m) centers.push_back(level(rng));
    std::normal_distribution<double> noise(0.0, spread(rng));
    std::uniform_int_distribution<std::size_t> pick(0, centers.size() - 1);
    std::vector<std::uint8_t> px(static_cast<std::size_t>(w * h));
    for (auto& v : px) v = static_cast<std::uint8_t>(std::clamp(std::lround(centers[pick(rng)] + noise(rng)), 0L, 255L));
    if (otsu_level(GrayCrop(w, h, px, BBox(0, 0, w, h))) != oracle::otsu_exhaustive(px)) ++otsu_bad;
  }
  std::uniform_real_distribution<double> density(0.1, 0.7);
  for (int i = 0; i < 200; ++i) {
    const int w = side(rng), h = side(rng);
    std::bernoulli_distribution on(density(rng));
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(w * h));
    for (auto& b : bits) b = on(rng) ? 1 : 0;
    const auto got = largest_connected_component(BinaryMask(w, h, bits, BBox(0, 0, w, h)));
    if (got.bits != oracle::largest_component(bits, w, h)) ++lcc_bad;
  }
  report(7, "Otsu and largest component", otsu_bad == 0 && lcc_bad == 0,
         fmt("Otsu %d/200 mismatches, LCC %d/200 mismatches", otsu_bad, lcc_bad));
}

void determinism_and_format(const fs::path& work) {
  const Pipeline a = run_pipeline(work / "det_a", kConfigs / "dropout.json");
  const Pipeline b = run_pipeline(work / "det_b", kConfigs / "dropout.json");
  bool identical = a.ok && b.ok;
  std::size_t files = 0;
  if (identical) {
    for (const auto& entry : fs::recursive_directory_iterator(a.dir)) {
      if (!entry.is_regular_file()) continue;
      const fs::path rel = fs::relative(entry.path(), a.dir);
      if (io::read_file(entry.path()) != io::read_file(b.dir / rel)) identical = false;
      ++files;
    }
  }

  std::mt19937 rng(8);
  std::uniform_real_distribution<double> u(0.25, 900.0), conf(0.001, 1.0);
  TrajectorySet tracks;
  for (int id = 1; id <= 20; ++id)
    for (int f = 1; f <= 50; ++f) {
      const bool interp = f % 9 == 4;
      tracks[id].push_back({f, BBox(u(rng), u(rng), u(rng), u(rng)), interp ? 0.0 : conf(rng), interp});
    }
  const fs::path csv = work / "roundtrip.csv";
  io::write_tracks(csv, tracks);
  const auto back = io::read_tracks(csv);
  double worst = 0;
  bool same_shape = back.size() == tracks.size();
  for (const auto& [id, pts] : tracks) {
    if (!back.contains(id) || back.at(id).size() != pts.size()) {
      same_shape = false;
      continue;
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto &x = pts[i], &y = back.at(id)[i];
      if (x.frame != y.frame || x.interpolated != y.interpolated) same_shape = false;
      worst = std::max({worst, std::fabs(x.box.x() - y.box.x()), std::fabs(x.box.y() - y.box.y()),
                        std::fabs(x.box.w() - y.box.w()), std::fabs(x.box.h() - y.box.h()),
                        std::fabs(x.confidence - y.confidence)});
    }
  }

  const std::vector<std::pair<std::string, std::size_t>> malformed{
      {"1,-1,10,10,4,6,0.9,-1,-1,-1\n1,-1,10,10,4,6,0.9,-1,-1\n", 2},
      {"1,-1,10,10,4,6,0.9,-1,-1,-1\n\n1,-1,10,x,4,6,0.9,-1,-1,-1\n", 3},
      {"0,-1,10,10,4,6,0.9,-1,-1,-1\n", 1},
      {"1,-1,10,10,-4,6,0.9,-1,-1,-1\n", 1},
  };
  int diagnosed = 0;
  for (std::size_t i = 0; i < malformed.size(); ++i) {
    const fs::path bad = work / fmt("bad%zu.csv", i);
    io::write_file(bad, malformed[i].first);
    try {
      io::read_detections(bad);
    } catch (const io::ParseError& e) {
      const std::string prefix = bad.string() + ":" + std::to_string(malformed[i].second) + ":";
      if (std::string(e.what()).rfind(prefix, 0) == 0) ++diagnosed;
    }
  }
  const bool ok = identical && files > 0 && same_shape && worst <= 1e-6 &&
                  diagnosed == static_cast<int>(malformed.size());
  report(8, "determinism and format", ok,
         fmt("%zu output files %s; roundtrip max error %.1e; %d/%zu malformed files rejected with file:line", files,
             identical ? "byte-identical" : "DIFFER", worst, diagnosed, malformed.size()));
}

}  // namespace

int main() {
  const fs::path work = fs::temp_directory_path() / "shoal_acceptance";
  fs::remove_all(work);
  fs::create_directories(work);
  clean_scenario(work);
  assignment_optimality();
  metrics_examples();
  refind_ablation();
  interaction_ablation();
  adjacent_iou();
  otsu_and_components();
  determinism_and_format(work);
  fs::remove_all(work);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
