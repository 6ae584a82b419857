#include "shoal/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <set>
#include <stdexcept>

namespace shoal {

namespace {

constexpr std::uint8_t kBackground = 220;
constexpr std::uint8_t kBody = 40;

enum Stream : std::uint64_t { kMotion = 1, kDetection = 2, kCrossing = 3 };

std::mt19937_64 make_rng(std::uint64_t seed, Stream stream, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index)};
  return std::mt19937_64(seq);
}

struct Pose {
  double cx = 0, cy = 0, heading = 0;
};

double half_extent_x(const ScenarioConfig& c) {
  return c.oriented_bodies ? std::max(c.body_w, c.body_h) / 2 : c.body_w / 2;
}
double half_extent_y(const ScenarioConfig& c) {
  return c.oriented_bodies ? std::max(c.body_w, c.body_h) / 2 : c.body_h / 2;
}

class Walker {
 public:
  Walker(const ScenarioConfig& c)
      : speed_(c.speed), turn_(c.turn_sigma),
        min_x_(c.arena.x() + half_extent_x(c)), max_x_(c.arena.right() - half_extent_x(c)),
        min_y_(c.arena.y() + half_extent_y(c)), max_y_(c.arena.bottom() - half_extent_y(c)) {}

  Pose advance(Pose p, std::mt19937_64& rng) const {
    std::normal_distribution<double> turn(0.0, 1.0);
    p.heading += turn_ * turn(rng);
    p.cx += speed_ * std::cos(p.heading);
    p.cy += speed_ * std::sin(p.heading);
    reflect(p.cx, p.heading, min_x_, max_x_, true);
    reflect(p.cy, p.heading, min_y_, max_y_, false);
    return p;
  }

  double min_x() const { return min_x_; }
  double max_x() const { return max_x_; }
  double min_y() const { return min_y_; }
  double max_y() const { return max_y_; }

 private:
  static void reflect(double& v, double& heading, double lo, double hi, bool horizontal) {
    if (hi <= lo) {
      v = lo;
      return;
    }
    for (int i = 0; i < 64 && (v < lo || v > hi); ++i) {
      v = v < lo ? 2 * lo - v : 2 * hi - v;
      heading = horizontal ? std::numbers::pi - heading : -heading;
    }
    v = std::clamp(v, lo, hi);
  }

  double speed_, turn_;
  double min_x_, max_x_, min_y_, max_y_;
};

// Walks forward from `anchor_frame` and backward to frame 1. The backward
// half runs the same walk with the heading reversed.
std::vector<Pose> walk_from(const Walker& walker, Pose start, int anchor_frame, int n_frames,
                            std::mt19937_64& rng) {
  std::vector<Pose> poses(static_cast<std::size_t>(n_frames));
  poses[static_cast<std::size_t>(anchor_frame - 1)] = start;
  Pose p = start;
  for (int f = anchor_frame + 1; f <= n_frames; ++f) {
    p = walker.advance(p, rng);
    poses[static_cast<std::size_t>(f - 1)] = p;
  }
  p = start;
  p.heading += std::numbers::pi;
  for (int f = anchor_frame - 1; f >= 1; --f) {
    p = walker.advance(p, rng);
    Pose out = p;
    out.heading -= std::numbers::pi;
    poses[static_cast<std::size_t>(f - 1)] = out;
  }
  return poses;
}

std::string mask_key(int frame, std::size_t index) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "masks/f%06d_d%03zu.pbm", frame, index);
  return buf;
}

Body body_at(const Pose& p, const ScenarioConfig& c) {
  if (!c.oriented_bodies) return inscribed_body(BBox(p.cx - c.body_w / 2, p.cy - c.body_h / 2, c.body_w, c.body_h));
  return Body{{p.cx, p.cy}, c.body_w / 2, c.body_h / 2, p.heading};
}

}  // namespace

void ScenarioConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("ScenarioConfig: ") + what);
  };
  require(n_agents >= 0, "n_agents must be non-negative");
  require(n_frames >= 1, "n_frames must be positive");
  require(body_w > 0 && body_h > 0, "body dimensions must be positive");
  require(2 * half_extent_x(*this) <= arena.w() && 2 * half_extent_y(*this) <= arena.h(),
          "body does not fit inside the arena");
  require(speed >= 0, "speed must be non-negative");
  require(turn_sigma >= 0, "turn_sigma must be non-negative");
  require(dropout_p >= 0 && dropout_p < 1, "dropout_p must be in [0,1)");
  require(jitter_sigma >= 0, "jitter_sigma must be non-negative");
  require(!crossing_offset || *crossing_offset >= 0, "crossing_offset must be non-negative");
  require(std::isfinite(crossing_angle), "crossing_angle must be finite");
  std::set<int> used;
  for (const auto& e : crossing_script) {
    require(e.agent_a != e.agent_b, "crossing event names the same agent twice");
    require(e.agent_a >= 0 && e.agent_a < n_agents && e.agent_b >= 0 && e.agent_b < n_agents,
            "crossing event agent out of range");
    require(e.frame >= 1 && e.frame <= n_frames, "crossing event frame out of range");
    require(used.insert(e.agent_a).second && used.insert(e.agent_b).second,
            "an agent may take part in at most one crossing event");
  }
}

BBox Body::bounding_box() const {
  const double c = std::cos(heading), s = std::sin(heading);
  const double ex = std::sqrt(semi_major * semi_major * c * c + semi_minor * semi_minor * s * s);
  const double ey = std::sqrt(semi_major * semi_major * s * s + semi_minor * semi_minor * c * c);
  return BBox(center.x - ex, center.y - ey, 2 * ex, 2 * ey);
}

bool Body::covers(Point p) const {
  const double dx = p.x - center.x, dy = p.y - center.y;
  const double c = std::cos(heading), s = std::sin(heading);
  const double u = (dx * c + dy * s) / semi_major;
  const double v = (-dx * s + dy * c) / semi_minor;
  return u * u + v * v <= 1.0;
}

Body inscribed_body(const BBox& box) { return Body{center(box), box.w() / 2, box.h() / 2, 0.0}; }

GrayCrop render_crop(const BBox& anchor, const std::vector<Body>& bodies) {
  const int ox = static_cast<int>(std::floor(anchor.x()));
  const int oy = static_cast<int>(std::floor(anchor.y()));
  const int w = std::max(1, static_cast<int>(std::lround(anchor.w())));
  const int h = std::max(1, static_cast<int>(std::lround(anchor.h())));
  std::vector<std::uint8_t> px(static_cast<std::size_t>(w) * h, kBackground);
  for (const auto& b : bodies) {
    const BBox extent = b.bounding_box();
    const int r0 = std::max(0, static_cast<int>(std::floor(extent.y())) - oy);
    const int r1 = std::min(h, static_cast<int>(std::ceil(extent.bottom())) - oy + 1);
    const int c0 = std::max(0, static_cast<int>(std::floor(extent.x())) - ox);
    const int c1 = std::min(w, static_cast<int>(std::ceil(extent.right())) - ox + 1);
    for (int r = r0; r < r1; ++r)
      for (int col = c0; col < c1; ++col)
        if (b.covers({ox + col + 0.5, oy + r + 0.5})) px[static_cast<std::size_t>(r) * w + col] = kBody;
  }
  return GrayCrop(w, h, std::move(px), anchor);
}

Scenario generate(const ScenarioConfig& config) {
  config.validate();
  Scenario sc;
  const int n = config.n_agents;
  const int frames = config.n_frames;
  const Walker walker(config);

  std::vector<std::vector<Pose>> poses(static_cast<std::size_t>(n));
  std::vector<int> scripted(static_cast<std::size_t>(n), -1);
  for (std::size_t e = 0; e < config.crossing_script.size(); ++e) {
    scripted[static_cast<std::size_t>(config.crossing_script[e].agent_a)] = static_cast<int>(e);
    scripted[static_cast<std::size_t>(config.crossing_script[e].agent_b)] = static_cast<int>(e);
  }

  for (int a = 0; a < n; ++a) {
    if (scripted[static_cast<std::size_t>(a)] >= 0) continue;
    auto rng = make_rng(config.seed, kMotion, static_cast<std::uint64_t>(a));
    std::uniform_real_distribution<double> ux(walker.min_x(), std::max(walker.min_x(), walker.max_x()));
    std::uniform_real_distribution<double> uy(walker.min_y(), std::max(walker.min_y(), walker.max_y()));
    std::uniform_real_distribution<double> uh(0.0, 2 * std::numbers::pi);
    Pose start{ux(rng), uy(rng), uh(rng)};
    poses[static_cast<std::size_t>(a)] = walk_from(walker, start, 1, frames, rng);
  }

  const double offset = config.crossing_offset.value_or(config.body_h / 2);
  for (std::size_t e = 0; e < config.crossing_script.size(); ++e) {
    const auto& ev = config.crossing_script[e];
    auto rng = make_rng(config.seed, kCrossing, e);
    const double mx = std::min(config.body_w + offset, (walker.max_x() - walker.min_x()) / 2);
    const double my = std::min(config.body_h + offset, (walker.max_y() - walker.min_y()) / 2);
    std::uniform_real_distribution<double> ux(walker.min_x() + mx, walker.max_x() - mx);
    std::uniform_real_distribution<double> uy(walker.min_y() + my, walker.max_y() - my);
    std::uniform_real_distribution<double> uh(0.0, 2 * std::numbers::pi);
    const Pose a{ux(rng), uy(rng), uh(rng)};
    const Pose b{a.cx - offset * std::sin(a.heading), a.cy + offset * std::cos(a.heading),
                 a.heading + config.crossing_angle};
    auto rng_a = make_rng(config.seed, kMotion, static_cast<std::uint64_t>(ev.agent_a));
    auto rng_b = make_rng(config.seed, kMotion, static_cast<std::uint64_t>(ev.agent_b));
    poses[static_cast<std::size_t>(ev.agent_a)] = walk_from(walker, a, ev.frame, frames, rng_a);
    poses[static_cast<std::size_t>(ev.agent_b)] = walk_from(walker, b, ev.frame, frames, rng_b);
  }

  // bodies[f - 1][a]
  std::vector<std::vector<Body>> bodies(static_cast<std::size_t>(frames));
  for (int f = 1; f <= frames; ++f)
    for (int a = 0; a < n; ++a)
      bodies[static_cast<std::size_t>(f - 1)].push_back(
          body_at(poses[static_cast<std::size_t>(a)][static_cast<std::size_t>(f - 1)], config));
  for (int a = 0; a < n; ++a) {
    auto& points = sc.gt[a + 1];
    for (int f = 1; f <= frames; ++f)
      points.push_back({f, bodies[static_cast<std::size_t>(f - 1)][static_cast<std::size_t>(a)].bounding_box(), 1.0, false});
  }

  std::normal_distribution<double> jitter(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int f = 1; f <= frames; ++f) {
    auto rng = make_rng(config.seed, kDetection, static_cast<std::uint64_t>(f));
    const auto& frame_bodies = bodies[static_cast<std::size_t>(f - 1)];

    std::vector<Detection> dets;
    for (int a = 0; a < n; ++a) {
      const BBox& truth = sc.gt[a + 1][static_cast<std::size_t>(f - 1)].box;
      const double drop = unit(rng);
      double j[4];
      for (double& v : j) v = config.jitter_sigma * jitter(rng);
      if (drop < config.dropout_p) {
        sc.dropped.push_back({f, a + 1});
        continue;
      }
      Detection d;
      d.frame = f;
      d.box = BBox(truth.x() + j[0], truth.y() + j[1], std::max(1.0, truth.w() + j[2]),
                   std::max(1.0, truth.h() + j[3]));
      d.confidence = 1.0;
      dets.push_back(std::move(d));
    }
    std::shuffle(dets.begin(), dets.end(), rng);

    for (std::size_t i = 0; i < dets.size(); ++i) {
      const std::string key = mask_key(f, i);
      dets[i].mask_ref = key;
      std::vector<Body> visible;
      for (const auto& b : frame_bodies)
        if (intersection_area(b.bounding_box(), dets[i].box) > 0.0) visible.push_back(b);
      GrayCrop crop = render_crop(dets[i].box, visible);
      sc.masks.add(key, extract_entity(crop));
      sc.crops.emplace(key, std::move(crop));
    }
    sc.detections.emplace(f, std::move(dets));
  }
  return sc;
}

AdjacentIouStats adjacent_iou_stats(const TrajectorySet& trajectories) {
  AdjacentIouStats stats;
  double total = 0.0;
  for (const auto& [id, points] : trajectories) {
    double track_total = 0.0;
    std::size_t track_pairs = 0;
    for (std::size_t i = 1; i < points.size(); ++i) {
      if (points[i].frame != points[i - 1].frame + 1) continue;
      const double v = iou(points[i - 1].box, points[i].box);
      const auto bin = std::min(AdjacentIouStats::kBins - 1,
                                static_cast<std::size_t>(v * AdjacentIouStats::kBins));
      ++stats.histogram[bin];
      track_total += v;
      ++track_pairs;
    }
    if (track_pairs > 0) {
      stats.per_track_mean[id] = track_total / static_cast<double>(track_pairs);
      total += track_total;
      stats.pairs += track_pairs;
    }
  }
  if (stats.pairs > 0) stats.mean = total / static_cast<double>(stats.pairs);
  return stats;
}

}  // namespace shoal
