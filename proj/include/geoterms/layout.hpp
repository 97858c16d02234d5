#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace geoterms {

struct Tag {
  std::string phrase;
  double weight = 0.0;
};

// Axis-aligned box, canvas coordinates with the origin at the circle center
// and y growing downwards (SVG convention).
struct Box {
  double cx = 0.0;
  double cy = 0.0;
  double width = 0.0;
  double height = 0.0;

  double left() const { return cx - width / 2; }
  double right() const { return cx + width / 2; }
  double top() const { return cy - height / 2; }
  double bottom() const { return cy + height / 2; }

  bool interiors_overlap(const Box& other) const;
  bool inside_circle(double radius) const;
};

// Character-cell text metrics: 0.6 x font size per character, 1.2 x font size
// tall.
double text_width(std::string_view phrase, double font_size);
double text_height(double font_size);

struct TagBox {
  std::string phrase;
  double weight = 0.0;
  double font_size = 0.0;
  Box box;
};

struct CloudLayout {
  double radius = 0.0;
  // In placement order, which is weight order.
  std::vector<TagBox> placed;
  std::vector<Tag> dropped;

  const TagBox* find(std::string_view phrase) const;
};

struct LayoutOptions {
  double min_font = 10.0;
  double max_font = 32.0;
};

// Linear map of weights onto [s_min, s_max]; equal weights all get the
// midpoint. Throws std::invalid_argument on empty input, s_min > s_max or a
// non-positive weight.
std::vector<double> size_tags(std::span<const double> weights, double s_min, double s_max);

// Greedy placement, heaviest first, into a guillotine free-space list seeded
// with the circle's bounding square. Each tag goes to the free-rectangle point
// closest to the center that minimizes distance to the center plus distance to
// the tag's position in `prev`. Tags that fit nowhere are dropped.
CloudLayout layout_cloud(std::vector<Tag> tags, double radius, const CloudLayout* prev = nullptr,
                         const LayoutOptions& options = {});

enum class Transition { kEnter, kExit, kPromoted, kDemoted, kSteady };

std::string_view to_string(Transition t);

struct TagTransition {
  std::string phrase;
  Transition kind = Transition::kSteady;

  friend bool operator==(const TagTransition&, const TagTransition&) = default;
};

// One entry per phrase of prev or next, sorted by phrase.
using CloudDiff = std::vector<TagTransition>;

CloudDiff diff_tags(std::span<const Tag> prev, std::span<const Tag> next);
// Compares placed and dropped tags of both layouts.
CloudDiff diff_layouts(const CloudLayout& prev, const CloudLayout& next);

// Log-scale marker radius; v_min == v_max gives the midpoint radius. Throws
// std::invalid_argument unless 0 < v_min <= value <= v_max and r_min <= r_max.
double marker_radius(double value, double v_min, double v_max, double r_min, double r_max);

// 2^((zoom - reference_zoom) / 2): markers grow at half the map's rate.
double marker_zoom_scale(double zoom, double reference_zoom = 0.0);

// Standalone SVG 1.1 document: the circle outline, one <text> per placed tag
// and, when given, a sparkline polyline across each tag's box.
std::string render_svg(const CloudLayout& layout,
                       const std::map<std::string, std::vector<double>>* sparks = nullptr);

}  // namespace geoterms
