#include "geoterms/geocode.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <sstream>

#include <spdlog/spdlog.h>

#include "geoterms/error.hpp"
#include "geoterms/hash.hpp"
#include "httplib.h"
#include "json.hpp"

namespace geoterms {

namespace {

std::string_view trim(std::string_view s) {
  auto space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && space(s.front())) s.remove_prefix(1);
  while (!s.empty() && space(s.back())) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty() || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

LatLon parse_point(std::string_view lat_text, std::string_view lon_text, const std::string& source,
                   std::size_t line) {
  auto lat = parse_double(lat_text);
  auto lon = parse_double(lon_text);
  if (!lat || !lon || !valid_lat_lon(*lat, *lon)) throw ParseError(source, line, "bad coordinates");
  return {*lat, *lon};
}

}  // namespace

std::string_view to_string(GeoSource source) {
  switch (source) {
    case GeoSource::kZip:
      return "zip";
    case GeoSource::kGazetteer:
      return "gazetteer";
    case GeoSource::kExternal:
      return "external";
    case GeoSource::kLiteral:
      return "literal";
  }
  return "?";
}

bool valid_lat_lon(double lat, double lon) {
  return std::isfinite(lat) && std::isfinite(lon) && lat >= -90.0 && lat <= 90.0 && lon >= -180.0 &&
         lon <= 180.0;
}

std::string normalize_place(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (char c : text) {
    auto u = static_cast<unsigned char>(c);
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      pending_space = !out.empty();
      continue;
    }
    if (u < 0x80 && !std::isalnum(u) && c != ',') continue;
    if (c == ',') {
      while (!out.empty() && out.back() == ' ') out.pop_back();
      out.push_back(',');
      pending_space = true;
      continue;
    }
    if (pending_space && !out.empty()) out.push_back(' ');
    pending_space = false;
    out.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : c);
  }
  while (!out.empty() && (out.back() == ' ' || out.back() == ',')) out.pop_back();
  return out;
}

std::optional<LatLon> parse_literal_lat_lon(std::string_view text) {
  auto parts = split(trim(text), ',');
  if (parts.size() != 2) return std::nullopt;
  auto lat = parse_double(parts[0]);
  auto lon = parse_double(parts[1]);
  if (!lat || !lon || !valid_lat_lon(*lat, *lon)) return std::nullopt;
  return LatLon{*lat, *lon};
}

std::optional<std::string> find_zip(std::string_view text) {
  auto digit = [](char c) { return c >= '0' && c <= '9'; };
  std::size_t i = 0;
  while (i < text.size()) {
    if (!digit(text[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && digit(text[j])) ++j;
    if (j - i == 5) return std::string(text.substr(i, 5));
    i = j;
  }
  return std::nullopt;
}

// ---- ZipTable ---------------------------------------------------------------

ZipTable ZipTable::load(const std::filesystem::path& path) {
  std::string bytes = read_file(path);
  std::istringstream in(bytes);
  ZipTable table = parse(in, path.string());
  table.content_hash_ = hash_bytes(bytes);
  return table;
}

ZipTable ZipTable::parse(std::istream& in, const std::string& source_name) {
  ZipTable table;
  Fnv1a h;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    h.update(line);
    h.update("\n");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      if (line != "zip,lat,lon") throw ParseError(source_name, 1, "expected header zip,lat,lon");
      continue;
    }
    if (line.empty()) continue;
    auto cols = split(line, ',');
    if (cols.size() != 3 || cols[0].size() != 5) throw ParseError(source_name, line_no, "expected zip,lat,lon");
    table.rows_[std::string(cols[0])] = parse_point(cols[1], cols[2], source_name, line_no);
  }
  table.content_hash_ = h.hex();
  return table;
}

std::optional<LatLon> ZipTable::find(std::string_view zip) const {
  auto it = rows_.find(zip);
  if (it == rows_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> ZipTable::codes() const {
  std::vector<std::string> out;
  out.reserve(rows_.size());
  for (const auto& [zip, _] : rows_) out.push_back(zip);
  return out;
}

// ---- Gazetteer --------------------------------------------------------------

Gazetteer Gazetteer::load(const std::filesystem::path& path) {
  std::string bytes = read_file(path);
  std::istringstream in(bytes);
  Gazetteer g = parse(in, path.string());
  g.content_hash_ = hash_bytes(bytes);
  return g;
}

Gazetteer Gazetteer::parse(std::istream& in, const std::string& source_name) {
  Gazetteer g;
  Fnv1a h;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    h.update(line);
    h.update("\n");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cols = split(line, '\t');
    if (cols.size() != 5 && cols.size() != 6) {
      throw ParseError(source_name, line_no, "expected name, admin, country, lat, lon[, population]");
    }
    Place place{std::string(cols[0]), std::string(cols[1]), std::string(cols[2]),
                parse_point(cols[3], cols[4], source_name, line_no), std::nullopt};
    if (cols.size() == 6 && !cols[5].empty()) {
      std::uint64_t pop = 0;
      auto [ptr, ec] = std::from_chars(cols[5].data(), cols[5].data() + cols[5].size(), pop);
      if (ec != std::errc() || ptr != cols[5].data() + cols[5].size()) {
        throw ParseError(source_name, line_no, "bad population");
      }
      place.population = pop;
    }
    g.by_name_[normalize_place(place.name)].push_back(g.places_.size());
    g.places_.push_back(std::move(place));
  }
  g.content_hash_ = h.hex();
  return g;
}

std::optional<LatLon> Gazetteer::find(std::string_view query) const {
  std::string normalized = normalize_place(query);
  auto parts = split(normalized, ',');
  for (auto& p : parts) p = trim(p);
  if (parts.empty() || parts[0].empty() || parts.size() > 3) return std::nullopt;

  auto it = by_name_.find(std::string(parts[0]));
  if (it == by_name_.end()) return std::nullopt;

  std::vector<const Place*> matches;
  for (std::size_t idx : it->second) {
    const Place& p = places_[idx];
    std::string admin = normalize_place(p.admin);
    std::string country = normalize_place(p.country);
    bool ok = true;
    if (parts.size() == 2) ok = parts[1] == admin || parts[1] == country;
    if (parts.size() == 3) ok = parts[1] == admin && parts[2] == country;
    if (ok) matches.push_back(&p);
  }
  if (matches.empty()) return std::nullopt;
  const Place* best = matches.front();
  if (matches.size() > 1) {
    ambiguous_->fetch_add(1);
    for (const Place* p : matches) {
      if (p->population.value_or(0) > best->population.value_or(0)) best = p;
    }
    spdlog::debug("ambiguous place '{}': {} gazetteer rows, using {}/{}/{}", query, matches.size(), best->name,
                  best->admin, best->country);
  }
  return best->point;
}

// ---- External geocoding -----------------------------------------------------

HttpGeocoderClient::HttpGeocoderClient(std::string endpoint, std::string api_key)
    : endpoint_(std::move(endpoint)), api_key_(std::move(api_key)) {}

std::unique_ptr<HttpGeocoderClient> HttpGeocoderClient::from_environment() {
  const char* url = std::getenv("GEOTERMS_GEOCODER_URL");
  if (url == nullptr || *url == '\0') return nullptr;
  const char* key = std::getenv("GEOTERMS_GEOCODER_KEY");
  return std::make_unique<HttpGeocoderClient>(url, key ? key : "");
}

std::optional<LatLon> HttpGeocoderClient::geocode(const std::string& query) {
  // endpoint = scheme://host[:port][/path]
  auto scheme_end = endpoint_.find("://");
  auto path_start = endpoint_.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  std::string origin = endpoint_.substr(0, path_start);
  std::string path = path_start == std::string::npos ? "/" : endpoint_.substr(path_start);

  httplib::Client client(origin);
  client.set_connection_timeout(5);
  client.set_read_timeout(10);
  httplib::Params params{{"q", query}};
  if (!api_key_.empty()) params.emplace("key", api_key_);
  auto res = client.Get(path, params, httplib::Headers{});
  if (!res) {
    spdlog::warn("geocoder request failed: {}", httplib::to_string(res.error()));
    return std::nullopt;
  }
  if (res->status != 200) return std::nullopt;
  auto body = nlohmann::json::parse(res->body, nullptr, false);
  if (body.is_discarded() || !body.is_object() || !body.contains("lat") || !body.contains("lon") ||
      !body["lat"].is_number() || !body["lon"].is_number()) {
    return std::nullopt;
  }
  LatLon p{body["lat"].get<double>(), body["lon"].get<double>()};
  if (!valid_lat_lon(p.lat, p.lon)) return std::nullopt;
  return p;
}

std::optional<LatLon> StubGeocoderClient::geocode(const std::string& query) {
  calls_.fetch_add(1);
  auto it = answers_.find(query);
  if (it == answers_.end()) return std::nullopt;
  return it->second;
}

CachingGeocoder::CachingGeocoder(std::unique_ptr<GeocoderClient> client, std::filesystem::path cache_file)
    : client_(std::move(client)), cache_file_(std::move(cache_file)) {
  if (cache_file_.empty() || !std::filesystem::exists(cache_file_)) return;
  std::ifstream in(cache_file_);
  if (!in) throw IoError("cannot open geocoder cache " + cache_file_.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto cols = split(line, '\t');
    if (cols.size() != 3) throw ParseError(cache_file_.string(), line_no, "expected query<TAB>lat<TAB>lon");
    cache_[std::string(cols[0])] = parse_point(cols[1], cols[2], cache_file_.string(), line_no);
  }
}

std::optional<LatLon> CachingGeocoder::lookup(std::string_view place) {
  std::string key = normalize_place(place);
  std::lock_guard lock(mutex_);
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  std::optional<LatLon> hit = client_ ? client_->geocode(key) : std::nullopt;
  cache_[key] = hit;
  if (hit && !cache_file_.empty()) {
    std::ofstream out(cache_file_, std::ios::app);
    if (!out) throw IoError("cannot append to geocoder cache " + cache_file_.string());
    char buf[64];
    std::snprintf(buf, sizeof buf, "\t%.7f\t%.7f\n", hit->lat, hit->lon);
    out << key << buf;
  }
  return hit;
}

std::size_t CachingGeocoder::cached() const {
  std::lock_guard lock(mutex_);
  return cache_.size();
}

// ---- Resolver ---------------------------------------------------------------

std::optional<GeoPoint> GeoResolver::resolve(std::string_view geo_ref) const {
  geo_ref = trim(geo_ref);
  if (geo_ref.empty()) return std::nullopt;
  if (auto p = parse_literal_lat_lon(geo_ref)) return GeoPoint{p->lat, p->lon, GeoSource::kLiteral};
  if (zips_) {
    if (auto zip = find_zip(geo_ref)) {
      if (auto p = zips_->find(*zip)) return GeoPoint{p->lat, p->lon, GeoSource::kZip};
    }
  }
  if (gazetteer_) {
    if (auto p = gazetteer_->find(geo_ref)) return GeoPoint{p->lat, p->lon, GeoSource::kGazetteer};
  }
  if (external_) {
    if (auto p = external_->lookup(geo_ref)) return GeoPoint{p->lat, p->lon, GeoSource::kExternal};
  }
  return std::nullopt;
}

}  // namespace geoterms
