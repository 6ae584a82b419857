#include "shoal/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace shoal {

namespace {

// Golden-angle hue walk keeps neighbouring ids visually distinct.
std::string color_for(int id) {
  const double hue = std::fmod(static_cast<double>(id) * 137.507764, 360.0);
  const double s = 0.75, v = 0.85;
  const double c = v * s;
  const double hp = hue / 60.0;
  const double x = c * (1 - std::fabs(std::fmod(hp, 2.0) - 1));
  double r = 0, g = 0, b = 0;
  if (hp < 1) r = c, g = x;
  else if (hp < 2) r = x, g = c;
  else if (hp < 3) g = c, b = x;
  else if (hp < 4) g = x, b = c;
  else if (hp < 5) r = x, b = c;
  else r = c, b = x;
  const double m = v - c;
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(std::lround((r + m) * 255)),
                static_cast<int>(std::lround((g + m) * 255)), static_cast<int>(std::lround((b + m) * 255)));
  return buf;
}

}  // namespace

std::string render_svg(const TrajectorySet& tracks, double width_px) {
  double min_x = std::numeric_limits<double>::max(), min_y = min_x;
  double max_x = std::numeric_limits<double>::lowest(), max_y = max_x;
  for (const auto& [id, points] : tracks)
    for (const auto& p : points) {
      const Point c = center(p.box);
      min_x = std::min(min_x, c.x), max_x = std::max(max_x, c.x);
      min_y = std::min(min_y, c.y), max_y = std::max(max_y, c.y);
    }
  if (min_x > max_x) min_x = min_y = 0, max_x = max_y = 1;
  const double pad = 10.0;
  const double span_x = std::max(max_x - min_x, 1.0);
  const double span_y = std::max(max_y - min_y, 1.0);
  const double scale = (width_px - 2 * pad) / span_x;
  const double height_px = span_y * scale + 2 * pad;

  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" "
                "viewBox=\"0 0 %.0f %.0f\">\n",
                width_px, height_px, width_px, height_px);
  out += buf;
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (const auto& [id, points] : tracks) {
    if (points.empty()) continue;
    out += "<polyline id=\"track-" + std::to_string(id) + "\" fill=\"none\" stroke=\"" +
           color_for(id) + "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < points.size(); ++i) {
      const Point c = center(points[i].box);
      std::snprintf(buf, sizeof buf, "%s%.2f,%.2f", i ? " " : "", pad + (c.x - min_x) * scale,
                    pad + (c.y - min_y) * scale);
      out += buf;
    }
    out += "\"/>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace shoal
