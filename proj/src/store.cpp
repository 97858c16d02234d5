#include "geoterms/store.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

namespace geoterms {

namespace {

std::optional<double> parse_number(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::int64_t pow10(int n) {
  std::int64_t v = 1;
  while (n-- > 0) v *= 10;
  return v;
}

// Rounds integer units of 1e-4 to units of 10^-decimals, half away from zero.
std::int64_t reduce_precision(std::int64_t e4, int decimals) {
  const std::int64_t q = pow10(4 - decimals);
  if (q == 1) return e4;
  return e4 >= 0 ? (e4 + q / 2) / q : -((-e4 + q / 2) / q);
}

}  // namespace

std::optional<BBox> BBox::parse(std::string_view text) {
  std::vector<double> v;
  std::size_t start = 0;
  while (true) {
    auto pos = text.find(',', start);
    auto n = parse_number(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (!n) return std::nullopt;
    v.push_back(*n);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  if (v.size() != 4) return std::nullopt;
  BBox b{v[0], v[1], v[2], v[3]};
  auto lon_ok = [](double x) { return x >= -180.0 && x <= 180.0; };
  auto lat_ok = [](double x) { return x >= -90.0 && x <= 90.0; };
  if (!lon_ok(b.west) || !lon_ok(b.east) || !lat_ok(b.south) || !lat_ok(b.north) || b.south > b.north) {
    return std::nullopt;
  }
  return b;
}

bool BBox::contains(double lat, double lon) const {
  if (lat < south || lat > north) return false;
  if (crosses_antimeridian()) return lon >= west || lon <= east;
  return lon >= west && lon <= east;
}

int zoom_decimals(int zoom) {
  int p = (std::max(zoom, 0) + 3) / 4;  // ceil(zoom / 4)
  return std::clamp(p, 1, 4);
}

LatLon quantize(double lat, double lon, int zoom) {
  const int p = zoom_decimals(zoom);
  const double scale = static_cast<double>(pow10(p));
  return {static_cast<double>(round_scaled(lat, p)) / scale, static_cast<double>(round_scaled(lon, p)) / scale};
}

double SiteHit::lat() const { return static_cast<double>(lat_units) / static_cast<double>(pow10(decimals)); }
double SiteHit::lon() const { return static_cast<double>(lon_units) / static_cast<double>(pow10(decimals)); }

Store::Store(Dataset dataset) : dataset_(std::move(dataset)) {
  const auto& summaries = dataset_.summaries;
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    by_bin_[summaries[i].bin.start.time_since_epoch().count()].push_back(i);
    site_summaries_[summaries[i].site].push_back(i);
  }
  for (auto& [_, idx] : by_bin_) {
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return summaries[a].site < summaries[b].site; });
  }
  const auto& triples = dataset_.triples;
  for (std::size_t i = 0; i < triples.size();) {
    std::size_t j = i;
    while (j < triples.size() && triples[j].site == triples[i].site && triples[j].bin == triples[i].bin) ++j;
    triple_ranges_[{triples[i].site, triples[i].bin.start.time_since_epoch().count()}] = Range{i, j};
    i = j;
  }
}

std::optional<TimeBin> Store::find_bin(std::string_view label) const {
  try {
    TimeBin bin = TimeBin::parse(label, manifest().granularity);
    if (by_bin_.count(bin.start.time_since_epoch().count()) == 0) return std::nullopt;
    return bin;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

bool Store::has_site(const SiteKey& site) const { return site_summaries_.count(site) > 0; }

std::vector<SiteHit> Store::query_sites(const BBox& bbox, const TimeBin& bin, std::size_t limit, int zoom) const {
  std::vector<SiteHit> hits;
  auto it = by_bin_.find(bin.start.time_since_epoch().count());
  if (it == by_bin_.end() || limit == 0) return hits;
  const auto& idx = it->second;
  const auto& summaries = dataset_.summaries;

  auto first = std::partition_point(idx.begin(), idx.end(),
                                    [&](std::size_t i) { return summaries[i].site.lat() < bbox.south; });
  std::vector<std::size_t> inside;
  for (auto p = first; p != idx.end() && summaries[*p].site.lat() <= bbox.north; ++p) {
    const auto& s = summaries[*p];
    if (bbox.contains(s.site.lat(), s.site.lon())) inside.push_back(*p);
  }
  auto heavier = [&](std::size_t a, std::size_t b) {
    if (summaries[a].total_value != summaries[b].total_value) return summaries[a].total_value > summaries[b].total_value;
    return summaries[a].site < summaries[b].site;
  };
  if (inside.size() > limit) {
    std::partial_sort(inside.begin(), inside.begin() + static_cast<std::ptrdiff_t>(limit), inside.end(), heavier);
    inside.resize(limit);
  } else {
    std::sort(inside.begin(), inside.end(), heavier);
  }

  const int p = zoom_decimals(zoom);
  hits.reserve(inside.size());
  for (std::size_t i : inside) {
    const auto& s = summaries[i];
    hits.push_back({s.site, p, reduce_precision(s.site.lat_e4, p), reduce_precision(s.site.lon_e4, p), s.total_value,
                    s.doc_count});
  }
  return hits;
}

std::vector<TagWeight> Store::query_cloud(const SiteKey& site, const TimeBin& bin, std::size_t max_tags) const {
  std::vector<TagWeight> out;
  auto it = triple_ranges_.find({site, bin.start.time_since_epoch().count()});
  if (it == triple_ranges_.end()) return out;
  // Triples are stored heaviest first with lexicographic ties.
  for (std::size_t i = it->second.begin; i < it->second.end && out.size() < max_tags; ++i) {
    out.push_back({dataset_.triples[i].phrase, dataset_.triples[i].weight.to_double()});
  }
  return out;
}

std::vector<SparkPoint> Store::query_spark(const SiteKey& site, std::string_view phrase) const {
  std::vector<SparkPoint> series;
  double max_value = 0.0;
  for (const auto& bin : manifest().bins) {
    double v = 0.0;
    auto it = triple_ranges_.find({site, bin.start.time_since_epoch().count()});
    if (it != triple_ranges_.end()) {
      for (std::size_t i = it->second.begin; i < it->second.end; ++i) {
        if (dataset_.triples[i].phrase == phrase) {
          v = dataset_.triples[i].weight.to_double();
          break;
        }
      }
    }
    max_value = std::max(max_value, v);
    series.push_back({bin, v});
  }
  if (max_value > 0.0) {
    for (auto& point : series) point.value /= max_value;
  }
  return series;
}

}  // namespace geoterms
