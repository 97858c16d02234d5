#pragma once

#include <atomic>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace geoterms {

struct LatLon {
  double lat = 0.0;
  double lon = 0.0;

  friend bool operator==(const LatLon&, const LatLon&) = default;
};

enum class GeoSource { kZip, kGazetteer, kExternal, kLiteral };

std::string_view to_string(GeoSource source);

struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;
  GeoSource source = GeoSource::kLiteral;
};

bool valid_lat_lon(double lat, double lon);

// Lowercases, trims, collapses runs of whitespace and drops punctuation other
// than commas. Cache and gazetteer keys use this form.
std::string normalize_place(std::string_view text);

// US zip code -> representative coordinate (ZCTA centroid). CSV `zip,lat,lon`
// with a header line.
class ZipTable {
 public:
  static ZipTable load(const std::filesystem::path& path);
  static ZipTable parse(std::istream& in, const std::string& source_name);

  std::optional<LatLon> find(std::string_view zip) const;
  std::size_t size() const { return rows_.size(); }
  const std::string& content_hash() const { return content_hash_; }

  // Sorted zip codes, for synthetic data generation.
  std::vector<std::string> codes() const;

 private:
  std::map<std::string, LatLon, std::less<>> rows_;
  std::string content_hash_;
};

// Place names. TSV `name<TAB>admin<TAB>country<TAB>lat<TAB>lon[<TAB>population]`.
class Gazetteer {
 public:
  struct Place {
    std::string name;
    std::string admin;
    std::string country;
    LatLon point;
    std::optional<std::uint64_t> population;
  };

  static Gazetteer load(const std::filesystem::path& path);
  static Gazetteer parse(std::istream& in, const std::string& source_name);

  // Matches "city", "city, region" or "city, region, country" (region may be
  // an admin code or a country code). Several matches resolve to the most
  // populous row, or the first row when population is unknown.
  std::optional<LatLon> find(std::string_view place) const;

  std::size_t size() const { return places_.size(); }
  const std::string& content_hash() const { return content_hash_; }
  std::uint64_t ambiguous_lookups() const { return ambiguous_->load(); }

 private:
  std::vector<Place> places_;
  std::unordered_map<std::string, std::vector<std::size_t>> by_name_;
  std::string content_hash_;
  std::unique_ptr<std::atomic<std::uint64_t>> ambiguous_ =
      std::make_unique<std::atomic<std::uint64_t>>(0);
};

// Backend for free-form addresses the tables cannot resolve.
class GeocoderClient {
 public:
  virtual ~GeocoderClient() = default;
  virtual std::optional<LatLon> geocode(const std::string& query) = 0;
};

// GET <endpoint>?q=<query>[&key=<key>] answering {"lat": .., "lon": ..}.
// Any non-200 status or a body without both fields counts as a miss.
class HttpGeocoderClient : public GeocoderClient {
 public:
  HttpGeocoderClient(std::string endpoint, std::string api_key);

  // Reads GEOTERMS_GEOCODER_URL and GEOTERMS_GEOCODER_KEY; nullptr when the URL
  // is unset.
  static std::unique_ptr<HttpGeocoderClient> from_environment();

  std::optional<LatLon> geocode(const std::string& query) override;

 private:
  std::string endpoint_;
  std::string api_key_;
};

// Offline provider answering from a fixed table. Counts calls.
class StubGeocoderClient : public GeocoderClient {
 public:
  explicit StubGeocoderClient(std::map<std::string, LatLon> answers) : answers_(std::move(answers)) {}

  std::optional<LatLon> geocode(const std::string& query) override;
  int calls() const { return calls_.load(); }

 private:
  std::map<std::string, LatLon> answers_;
  std::atomic<int> calls_{0};
};

// Wraps a client with a persistent append-only TSV cache
// `normalized_query<TAB>lat<TAB>lon`. Misses are remembered for the lifetime
// of the object but not persisted. Thread-safe.
class CachingGeocoder {
 public:
  CachingGeocoder(std::unique_ptr<GeocoderClient> client, std::filesystem::path cache_file);

  std::optional<LatLon> lookup(std::string_view place);
  std::size_t cached() const;

 private:
  std::unique_ptr<GeocoderClient> client_;
  std::filesystem::path cache_file_;
  mutable std::mutex mutex_;
  std::unordered_map<std::string, std::optional<LatLon>> cache_;
};

// Three-tier resolver: literal "lat,lon", zip code, gazetteer, then the
// external geocoder. First hit wins.
class GeoResolver {
 public:
  GeoResolver(const ZipTable* zips, const Gazetteer* gazetteer, CachingGeocoder* external = nullptr)
      : zips_(zips), gazetteer_(gazetteer), external_(external) {}

  // nullopt means unresolvable; callers skip and count the record.
  std::optional<GeoPoint> resolve(std::string_view geo_ref) const;

 private:
  const ZipTable* zips_;
  const Gazetteer* gazetteer_;
  CachingGeocoder* external_;
};

std::optional<LatLon> parse_literal_lat_lon(std::string_view text);
// First run of exactly five digits not adjacent to other digits.
std::optional<std::string> find_zip(std::string_view text);

}  // namespace geoterms
