#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "geoterms/dataset.hpp"
#include "geoterms/geocode.hpp"

namespace geoterms {

// Viewport rectangle in degrees. west > east means the box crosses the
// antimeridian. Bounds are inclusive.
struct BBox {
  double west = -180.0;
  double south = -90.0;
  double east = 180.0;
  double north = 90.0;

  // "west,south,east,north"; nullopt on malformed or out-of-range input.
  static std::optional<BBox> parse(std::string_view text);

  bool crosses_antimeridian() const { return west > east; }
  bool contains(double lat, double lon) const;
};

// Decimal places kept at a zoom level: clamp(ceil(zoom / 4), 1, 4).
int zoom_decimals(int zoom);

// Coordinates rounded half away from zero to zoom_decimals(zoom) places.
LatLon quantize(double lat, double lon, int zoom);

struct SiteHit {
  SiteKey site;
  int decimals = 4;
  // Truncated coordinates in units of 10^-decimals.
  std::int64_t lat_units = 0;
  std::int64_t lon_units = 0;
  Amount total_value;
  std::uint64_t doc_count = 0;

  double lat() const;
  double lon() const;
};

struct TagWeight {
  std::string phrase;
  double weight = 0.0;
};

struct SparkPoint {
  TimeBin bin;
  double value = 0.0;
};

// Read-only query view over a dataset with per-bin spatial indexes.
class Store {
 public:
  explicit Store(Dataset dataset);
  static Store open(const std::filesystem::path& dir) { return Store(read_dataset(dir)); }

  const Dataset& dataset() const { return dataset_; }
  const Manifest& manifest() const { return dataset_.manifest; }

  std::optional<TimeBin> find_bin(std::string_view label) const;
  bool has_site(const SiteKey& site) const;

  // Sites in bbox at bin, heaviest first (ties by site), at most `limit`.
  // Unknown bins give an empty list.
  std::vector<SiteHit> query_sites(const BBox& bbox, const TimeBin& bin, std::size_t limit,
                                   int zoom) const;

  // Heaviest phrases of a site at a bin, ties lexicographic.
  std::vector<TagWeight> query_cloud(const SiteKey& site, const TimeBin& bin,
                                     std::size_t max_tags) const;

  // Phrase weight over every populated bin, scaled so the maximum is 1.
  std::vector<SparkPoint> query_spark(const SiteKey& site, std::string_view phrase) const;

 private:
  struct Range {
    std::size_t begin = 0;
    std::size_t end = 0;
  };

  Dataset dataset_;
  // bin start -> summary indices sorted by site.
  std::map<std::int64_t, std::vector<std::size_t>> by_bin_;
  // (site, bin start) -> triples range.
  std::map<std::pair<SiteKey, std::int64_t>, Range> triple_ranges_;
  std::map<SiteKey, std::vector<std::size_t>> site_summaries_;
};

}  // namespace geoterms
