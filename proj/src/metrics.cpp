#include "shoal/metrics.hpp"

#include <algorithm>
#include <map>
#include "json.hpp"
#include <sstream>
#include <iomanip>

#include "shoal/assignment.hpp"

namespace shoal {

namespace {

std::optional<double> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

void finish_clear(ClearResult& r) {
  if (r.gt_total == 0) {
    r.mota.reset();
    return;
  }
  r.mota = 1.0 - static_cast<double>(r.fn + r.fp + r.idsw) / static_cast<double>(r.gt_total);
}

void finish_id(IdResult& r) {
  r.idp = ratio(r.idtp, r.idtp + r.idfp);
  r.idr = ratio(r.idtp, r.idtp + r.idfn);
  r.idf1 = ratio(2 * r.idtp, 2 * r.idtp + r.idfp + r.idfn);
}

}  // namespace

ClearResult clear_mot(const TrajectorySet& gt, const TrajectorySet& hyp, double iou_gate) {
  const auto gt_frames = index_by_frame(gt);
  const auto hyp_frames = index_by_frame(hyp);
  std::vector<int> frames;
  for (const auto& [f, _] : gt_frames) frames.push_back(f);
  for (const auto& [f, _] : hyp_frames) frames.push_back(f);
  std::sort(frames.begin(), frames.end());
  frames.erase(std::unique(frames.begin(), frames.end()), frames.end());

  static const std::vector<FrameObject> kNone;
  std::map<int, int> last_match;  // gt id -> hyp id
  ClearResult r;

  for (int f : frames) {
    auto git = gt_frames.find(f);
    auto hit = hyp_frames.find(f);
    const auto& gts = git == gt_frames.end() ? kNone : git->second;
    const auto& hyps = hit == hyp_frames.end() ? kNone : hit->second;
    r.gt_total += gts.size();

    std::vector<char> gt_done(gts.size(), 0), hyp_done(hyps.size(), 0);
    std::map<int, std::size_t> hyp_index;
    for (std::size_t j = 0; j < hyps.size(); ++j) hyp_index[hyps[j].id] = j;

    for (std::size_t i = 0; i < gts.size(); ++i) {
      auto prev = last_match.find(gts[i].id);
      if (prev == last_match.end()) continue;
      auto h = hyp_index.find(prev->second);
      if (h == hyp_index.end() || hyp_done[h->second]) continue;
      if (iou(gts[i].box, hyps[h->second].box) >= iou_gate) {
        gt_done[i] = hyp_done[h->second] = 1;
        ++r.matches;
      }
    }

    std::vector<std::size_t> gi, hj;
    for (std::size_t i = 0; i < gts.size(); ++i)
      if (!gt_done[i]) gi.push_back(i);
    for (std::size_t j = 0; j < hyps.size(); ++j)
      if (!hyp_done[j]) hj.push_back(j);
    CostMatrix costs(gi.size(), hj.size());
    for (std::size_t a = 0; a < gi.size(); ++a)
      for (std::size_t b = 0; b < hj.size(); ++b) {
        const double v = iou(gts[gi[a]].box, hyps[hj[b]].box);
        if (v >= iou_gate) costs(a, b) = 1.0 - v;
      }
    for (const auto& [a, b] : solve(costs).pairs) {
      const FrameObject& g = gts[gi[a]];
      const FrameObject& h = hyps[hj[b]];
      auto prev = last_match.find(g.id);
      if (prev != last_match.end() && prev->second != h.id) ++r.idsw;
      last_match[g.id] = h.id;
      gt_done[gi[a]] = hyp_done[hj[b]] = 1;
      ++r.matches;
    }

    r.fn += static_cast<std::size_t>(std::count(gt_done.begin(), gt_done.end(), 0));
    r.fp += static_cast<std::size_t>(std::count(hyp_done.begin(), hyp_done.end(), 0));
  }
  finish_clear(r);
  return r;
}

std::vector<std::size_t> trajectory_overlap_counts(const TrajectorySet& gt, const TrajectorySet& hyp,
                                                   double iou_gate) {
  std::map<int, std::size_t> gt_row, hyp_col;
  for (const auto& [id, _] : gt) gt_row.emplace(id, gt_row.size());
  for (const auto& [id, _] : hyp) hyp_col.emplace(id, hyp_col.size());

  std::vector<std::size_t> counts(gt.size() * hyp.size(), 0);
  const auto hyp_frames = index_by_frame(hyp);
  for (const auto& [f, gts] : index_by_frame(gt)) {
    auto hit = hyp_frames.find(f);
    if (hit == hyp_frames.end()) continue;
    for (const auto& g : gts)
      for (const auto& h : hit->second)
        if (iou(g.box, h.box) >= iou_gate) ++counts[gt_row[g.id] * hyp.size() + hyp_col[h.id]];
  }
  return counts;
}

IdResult id_metrics(const TrajectorySet& gt, const TrajectorySet& hyp, double iou_gate) {
  IdResult r;
  const std::size_t n_gt = point_count(gt);
  const std::size_t n_hyp = point_count(hyp);

  const auto counts = trajectory_overlap_counts(gt, hyp, iou_gate);
  const std::size_t max_w = counts.empty() ? 0 : *std::max_element(counts.begin(), counts.end());
  // Every pair stays feasible, so each full-cardinality assignment of minimum
  // sum(max_w - w) is a maximum-weight trajectory matching.
  CostMatrix costs(gt.size(), hyp.size());
  for (std::size_t a = 0; a < gt.size(); ++a)
    for (std::size_t b = 0; b < hyp.size(); ++b)
      costs(a, b) = static_cast<double>(max_w - counts[a * hyp.size() + b]);
  for (const auto& [a, b] : solve(costs).pairs) r.idtp += counts[a * hyp.size() + b];

  r.idfn = n_gt - r.idtp;
  r.idfp = n_hyp - r.idtp;
  finish_id(r);
  return r;
}

SequenceMetrics evaluate_sequence(std::string name, const TrajectorySet& gt,
                                  const TrajectorySet& hyp, double iou_gate) {
  return {std::move(name), clear_mot(gt, hyp, iou_gate), id_metrics(gt, hyp, iou_gate)};
}

MetricsReport combine(std::vector<SequenceMetrics> sequences, double iou_gate) {
  MetricsReport report;
  report.iou_gate = iou_gate;
  for (const auto& s : sequences) {
    report.clear.fn += s.clear.fn;
    report.clear.fp += s.clear.fp;
    report.clear.idsw += s.clear.idsw;
    report.clear.gt_total += s.clear.gt_total;
    report.clear.matches += s.clear.matches;
    report.id.idtp += s.id.idtp;
    report.id.idfp += s.id.idfp;
    report.id.idfn += s.id.idfn;
  }
  finish_clear(report.clear);
  finish_id(report.id);
  report.mota = report.clear.mota;
  report.idf1 = report.id.idf1;
  report.idp = report.id.idp;
  report.idr = report.id.idr;
  report.sequences = std::move(sequences);
  return report;
}

namespace {

std::string pct(const std::optional<double>& v) {
  if (!v) return "N/A";
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << (*v * 100.0) << "%";
  return os.str();
}

nlohmann::json opt(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

nlohmann::json to_json(const ClearResult& c, const IdResult& i) {
  return {{"MOTA", opt(c.mota)}, {"IDF1", opt(i.idf1)}, {"IDP", opt(i.idp)},
          {"IDR", opt(i.idr)},   {"FN", c.fn},          {"FP", c.fp},
          {"IDSW", c.idsw},      {"GT", c.gt_total},    {"matches", c.matches},
          {"IDTP", i.idtp},      {"IDFP", i.idfp},      {"IDFN", i.idfn}};
}

}  // namespace

std::string format_text(const MetricsReport& report) {
  std::ostringstream os;
  os << "IoU gate " << report.iou_gate << "\n";
  os << "MOTA (higher is better): " << pct(report.mota) << "\n";
  os << "IDF1 (higher is better): " << pct(report.idf1) << "\n";
  os << "IDP  (higher is better): " << pct(report.idp) << "\n";
  os << "IDR  (higher is better): " << pct(report.idr) << "\n";
  os << "IDSW (lower is better):  " << report.clear.idsw << "\n";
  os << "FN " << report.clear.fn << "  FP " << report.clear.fp << "  GT " << report.clear.gt_total
     << "\n";
  os << "IDTP " << report.id.idtp << "  IDFP " << report.id.idfp << "  IDFN " << report.id.idfn
     << "\n";
  if (report.sequences.size() > 1) {
    for (const auto& s : report.sequences) {
      os << "  " << s.name << ": MOTA " << pct(s.clear.mota) << "  IDF1 " << pct(s.id.idf1)
         << "  IDSW " << s.clear.idsw << "\n";
    }
  }
  return os.str();
}

std::string format_json(const MetricsReport& report) {
  nlohmann::json j = to_json(report.clear, report.id);
  j["iou_gate"] = report.iou_gate;
  j["direction"] = {{"MOTA", "higher"}, {"IDF1", "higher"}, {"IDP", "higher"},
                    {"IDR", "higher"},  {"IDSW", "lower"},  {"FN", "lower"},
                    {"FP", "lower"}};
  j["sequences"] = nlohmann::json::array();
  for (const auto& s : report.sequences) {
    nlohmann::json sj = to_json(s.clear, s.id);
    sj["name"] = s.name;
    j["sequences"].push_back(std::move(sj));
  }
  return j.dump(2) + "\n";
}

}  // namespace shoal
