#include "geoterms/layout.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace geoterms {

namespace {

constexpr double kEps = 1e-9;

struct FreeRect {
  double x0, y0, x1, y1;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  std::string s = buf;
  while (s.back() == '0') s.pop_back();
  if (s.back() == '.') s.pop_back();
  if (s == "-0") s = "0";
  return s;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out.push_back(c);
    }
  }
  return out;
}

}  // namespace

bool Box::interiors_overlap(const Box& o) const {
  return left() < o.right() - kEps && o.left() < right() - kEps && top() < o.bottom() - kEps &&
         o.top() < bottom() - kEps;
}

bool Box::inside_circle(double radius) const {
  const double limit = radius * radius * (1 + 1e-12);
  for (double x : {left(), right()}) {
    for (double y : {top(), bottom()}) {
      if (x * x + y * y > limit) return false;
    }
  }
  return true;
}

double text_width(std::string_view phrase, double font_size) {
  return 0.6 * font_size * static_cast<double>(phrase.size());
}

double text_height(double font_size) { return 1.2 * font_size; }

const TagBox* CloudLayout::find(std::string_view phrase) const {
  for (const auto& t : placed) {
    if (t.phrase == phrase) return &t;
  }
  return nullptr;
}

std::vector<double> size_tags(std::span<const double> weights, double s_min, double s_max) {
  if (weights.empty()) throw std::invalid_argument("size_tags needs at least one weight");
  if (s_min > s_max) throw std::invalid_argument("s_min must not exceed s_max");
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) throw std::invalid_argument("tag weights must be positive");
  }
  auto [lo, hi] = std::minmax_element(weights.begin(), weights.end());
  std::vector<double> sizes;
  sizes.reserve(weights.size());
  for (double w : weights) {
    sizes.push_back(*hi == *lo ? (s_min + s_max) / 2 : s_min + (w - *lo) / (*hi - *lo) * (s_max - s_min));
  }
  return sizes;
}

CloudLayout layout_cloud(std::vector<Tag> tags, double radius, const CloudLayout* prev, const LayoutOptions& options) {
  if (!(radius > 0.0)) throw std::invalid_argument("radius must be positive");
  CloudLayout layout;
  layout.radius = radius;
  if (tags.empty()) return layout;

  std::stable_sort(tags.begin(), tags.end(), [](const Tag& a, const Tag& b) {
    if (a.weight != b.weight) return a.weight > b.weight;
    return a.phrase < b.phrase;
  });
  std::vector<double> weights;
  weights.reserve(tags.size());
  for (const auto& t : tags) weights.push_back(t.weight);
  const auto sizes = size_tags(weights, options.min_font, options.max_font);

  // Kept in creation order; ties between candidates go to the older rectangle.
  std::vector<FreeRect> free{{-radius, -radius, radius, radius}};

  for (std::size_t k = 0; k < tags.size(); ++k) {
    const Tag& tag = tags[k];
    const double w = text_width(tag.phrase, sizes[k]);
    const double h = text_height(sizes[k]);
    const TagBox* before = prev ? prev->find(tag.phrase) : nullptr;

    std::ptrdiff_t best = -1;
    double best_cost = 0.0;
    Box best_box;
    for (std::size_t i = 0; i < free.size(); ++i) {
      const FreeRect& f = free[i];
      if (f.width() + kEps < w || f.height() + kEps < h) continue;
      Box box{std::clamp(0.0, f.x0 + w / 2, std::max(f.x0 + w / 2, f.x1 - w / 2)),
              std::clamp(0.0, f.y0 + h / 2, std::max(f.y0 + h / 2, f.y1 - h / 2)), w, h};
      if (!box.inside_circle(radius)) continue;
      double cost = std::hypot(box.cx, box.cy);
      if (before) cost += std::hypot(box.cx - before->box.cx, box.cy - before->box.cy);
      if (best < 0 || cost < best_cost) {
        best = static_cast<std::ptrdiff_t>(i);
        best_cost = cost;
        best_box = box;
      }
    }
    if (best < 0) {
      layout.dropped.push_back(tag);
      continue;
    }

    const FreeRect f = free[static_cast<std::size_t>(best)];
    free.erase(free.begin() + best);
    const Box& b = best_box;
    const FreeRect pieces[] = {
        {f.x0, f.y0, f.x1, b.top()},         // above
        {f.x0, b.bottom(), f.x1, f.y1},      // below
        {f.x0, b.top(), b.left(), b.bottom()},   // left
        {b.right(), b.top(), f.x1, b.bottom()},  // right
    };
    for (const auto& piece : pieces) {
      if (piece.width() > kEps && piece.height() > kEps) free.push_back(piece);
    }
    layout.placed.push_back({tag.phrase, tag.weight, sizes[k], b});
  }
  return layout;
}

std::string_view to_string(Transition t) {
  switch (t) {
    case Transition::kEnter:
      return "enter";
    case Transition::kExit:
      return "exit";
    case Transition::kPromoted:
      return "promoted";
    case Transition::kDemoted:
      return "demoted";
    case Transition::kSteady:
      return "steady";
  }
  return "?";
}

CloudDiff diff_tags(std::span<const Tag> prev, std::span<const Tag> next) {
  std::map<std::string, std::pair<std::optional<double>, std::optional<double>>> merged;
  for (const auto& t : prev) merged[t.phrase].first = t.weight;
  for (const auto& t : next) merged[t.phrase].second = t.weight;
  CloudDiff diff;
  diff.reserve(merged.size());
  for (const auto& [phrase, weights] : merged) {
    const auto& [before, after] = weights;
    Transition kind = Transition::kSteady;
    if (!before) {
      kind = Transition::kEnter;
    } else if (!after) {
      kind = Transition::kExit;
    } else if (*after > *before) {
      kind = Transition::kPromoted;
    } else if (*after < *before) {
      kind = Transition::kDemoted;
    }
    diff.push_back({phrase, kind});
  }
  return diff;
}

CloudDiff diff_layouts(const CloudLayout& prev, const CloudLayout& next) {
  auto tags_of = [](const CloudLayout& l) {
    std::vector<Tag> tags;
    for (const auto& t : l.placed) tags.push_back({t.phrase, t.weight});
    tags.insert(tags.end(), l.dropped.begin(), l.dropped.end());
    return tags;
  };
  return diff_tags(tags_of(prev), tags_of(next));
}

double marker_radius(double value, double v_min, double v_max, double r_min, double r_max) {
  if (!(v_min > 0.0) || !(value >= v_min) || !(value <= v_max)) {
    throw std::invalid_argument("marker_radius needs 0 < v_min <= value <= v_max");
  }
  if (r_min > r_max) throw std::invalid_argument("r_min must not exceed r_max");
  if (v_min == v_max) return (r_min + r_max) / 2;
  return r_min + (r_max - r_min) * (std::log(value) - std::log(v_min)) / (std::log(v_max) - std::log(v_min));
}

double marker_zoom_scale(double zoom, double reference_zoom) { return std::exp2((zoom - reference_zoom) / 2); }

std::string render_svg(const CloudLayout& layout, const std::map<std::string, std::vector<double>>* sparks) {
  const double r = layout.radius;
  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + num(2 * r) + "\" height=\"" +
         num(2 * r) + "\" viewBox=\"" + num(-r) + " " + num(-r) + " " + num(2 * r) + " " + num(2 * r) + "\">\n";
  out += "<circle cx=\"0\" cy=\"0\" r=\"" + num(r) + "\" fill=\"none\" stroke=\"#999999\" stroke-width=\"1\"/>\n";
  for (const auto& t : layout.placed) {
    out += "<text x=\"" + num(t.box.cx) + "\" y=\"" + num(t.box.cy) + "\" font-size=\"" + num(t.font_size) +
           "\" font-family=\"monospace\" text-anchor=\"middle\" dominant-baseline=\"central\">" +
           xml_escape(t.phrase) + "</text>\n";
    if (!sparks) continue;
    auto it = sparks->find(t.phrase);
    if (it == sparks->end() || it->second.empty()) continue;
    const auto& series = it->second;
    std::string points;
    const std::size_t n = series.size();
    for (std::size_t i = 0; i < std::max<std::size_t>(n, 2); ++i) {
      double v = series[std::min(i, n - 1)];
      double x = t.box.left() + t.box.width * (n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1)
                                                      : static_cast<double>(i));
      double y = t.box.bottom() - std::clamp(v, 0.0, 1.0) * t.box.height;
      if (!points.empty()) points.push_back(' ');
      points += num(x) + "," + num(y);
    }
    out += "<polyline points=\"" + points + "\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"1\"/>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace geoterms
