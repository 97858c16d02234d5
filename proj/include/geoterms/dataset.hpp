#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "geoterms/amount.hpp"
#include "geoterms/timebin.hpp"
#include "json.hpp"

namespace geoterms {

// A site: coordinates quantized to 1e-4 degrees, held as integers.
struct SiteKey {
  std::int32_t lat_e4 = 0;
  std::int32_t lon_e4 = 0;

  // Rounds half away from zero at 4 decimals.
  static SiteKey from_degrees(double lat, double lon);

  double lat() const { return lat_e4 / 1e4; }
  double lon() const { return lon_e4 / 1e4; }

  friend bool operator==(const SiteKey&, const SiteKey&) = default;
  friend auto operator<=>(const SiteKey&, const SiteKey&) = default;
};

// x * 10^decimals rounded half away from zero. Rounds the shortest decimal
// text that reads back as x, so 0.15 counts as an exact half.
std::int64_t round_scaled(double x, int decimals);

// Renders integer `units` of 10^-decimals as fixed-point text ("-122.3081").
std::string format_fixed(std::int64_t units, int decimals);

struct SiteTriple {
  SiteKey site;
  TimeBin bin;
  std::string phrase;
  Amount weight;

  friend bool operator==(const SiteTriple&, const SiteTriple&) = default;
};

struct SiteSummary {
  SiteKey site;
  TimeBin bin;
  Amount total_value;
  std::uint64_t doc_count = 0;

  friend bool operator==(const SiteSummary&, const SiteSummary&) = default;
};

enum class SkipReason {
  kMalformed,
  kFilteredLanguage,
  kFilteredTopic,
  kUnresolvedGeo,
  kEmptyExtraction,
};
inline constexpr std::size_t kSkipReasonCount = 5;

std::string_view to_string(SkipReason reason);

struct SkipReport {
  std::uint64_t accepted = 0;
  std::array<std::uint64_t, kSkipReasonCount> skipped{};

  void skip(SkipReason reason, std::uint64_t n = 1) {
    skipped[static_cast<std::size_t>(reason)] += n;
  }
  std::uint64_t skipped_total() const;
  SkipReport& operator+=(const SkipReport& other);

  nlohmann::ordered_json to_json() const;
  static SkipReport from_json(const nlohmann::json& j);

  friend bool operator==(const SkipReport&, const SkipReport&) = default;
};

struct Manifest {
  static constexpr int kFormatVersion = 1;

  int version = kFormatVersion;
  std::string fingerprint;
  Granularity granularity = Granularity::kYear;
  std::vector<TimeBin> bins;
  SkipReport report;
  std::size_t triple_count = 0;
  std::size_t summary_count = 0;
  std::size_t site_count = 0;
  // Canonical pipeline configuration (no file paths).
  nlohmann::ordered_json config;

  nlohmann::ordered_json to_json() const;
  static Manifest from_json(const nlohmann::json& j);
};

// Reduced output of the pipeline. Triples are sorted by
// (site, bin, weight descending, phrase) and summaries by (site, bin).
struct Dataset {
  Manifest manifest;
  std::vector<SiteTriple> triples;
  std::vector<SiteSummary> summaries;
};

// TSV tables as persisted. Deterministic for a given dataset.
std::string encode_triples(const Dataset& dataset);
std::string encode_summaries(const Dataset& dataset);
std::string encode_manifest(const Dataset& dataset);

// Writes manifest.json, triples.tsv and summaries.tsv into a sibling temp
// directory and renames it over `dir`.
void write_dataset(const Dataset& dataset, const std::filesystem::path& dir);
Dataset read_dataset(const std::filesystem::path& dir);

}  // namespace geoterms
