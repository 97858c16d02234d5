#include "geoterms/server.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

#include <spdlog/spdlog.h>

#include "httplib.h"
#include "json.hpp"

namespace geoterms {

namespace {

std::string json_string(std::string_view s) { return nlohmann::json(std::string(s)).dump(); }

ApiResponse error(int status, std::string_view message) {
  return {status, "{\"error\":" + json_string(message) + "}"};
}

std::optional<double> number_param(const QueryParams& params, std::string_view name) {
  auto it = params.find(name);
  if (it == params.end()) return std::nullopt;
  std::string_view s = it->second;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw std::invalid_argument("parameter '" + std::string(name) + "' must be a number");
  }
  return v;
}

std::optional<long long> int_param(const QueryParams& params, std::string_view name) {
  auto it = params.find(name);
  if (it == params.end()) return std::nullopt;
  std::string_view s = it->second;
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::invalid_argument("parameter '" + std::string(name) + "' must be an integer");
  }
  return v;
}

template <typename T, typename F>
std::string json_array(const std::vector<T>& items, F render) {
  std::string out = "[";
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out.push_back(',');
    out += render(items[i]);
  }
  out.push_back(']');
  return out;
}

std::string decimal(double v, int places) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", places, v);
  std::string s = buf;
  if (s.find('.') != std::string::npos) {
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
  }
  if (s == "-0") s = "0";
  return s;
}

std::int64_t pow10(int n) {
  std::int64_t v = 1;
  while (n-- > 0) v *= 10;
  return v;
}

}  // namespace

std::string format_sig3(double value) {
  if (value == 0.0 || !std::isfinite(value)) return "0";
  const bool negative = value < 0;
  const double a = std::abs(value);
  int e = static_cast<int>(std::floor(std::log10(a)));
  long long m = std::llround(a / std::pow(10.0, e - 2));
  if (m >= 1000) {
    m /= 10;
    ++e;
  } else if (m < 100) {
    m *= 10;
    --e;
  }
  std::string digits = std::to_string(m);
  int k = e - 2;
  while (digits.size() > 1 && digits.back() == '0') {
    digits.pop_back();
    ++k;
  }
  const auto len = static_cast<int>(digits.size());
  std::string exp_form = digits + (k != 0 ? "e" + std::to_string(k) : "");
  std::string plain;
  if (k >= 0) {
    plain = digits + std::string(static_cast<std::size_t>(k), '0');
  } else if (len > -k) {
    plain = digits.substr(0, static_cast<std::size_t>(len + k)) + "." + digits.substr(static_cast<std::size_t>(len + k));
  } else {
    plain = "0." + std::string(static_cast<std::size_t>(-k - len), '0') + digits;
  }
  return (negative ? "-" : "") + (exp_form.size() < plain.size() ? exp_form : plain);
}

Api::Api(std::shared_ptr<const Store> store, ApiOptions options)
    : options_(std::move(options)), store_(std::move(store)) {}

void Api::swap(std::shared_ptr<const Store> store) {
  std::lock_guard lock(mutex_);
  store_ = std::move(store);
}

std::shared_ptr<const Store> Api::snapshot() const {
  std::lock_guard lock(mutex_);
  return store_;
}

ApiResponse Api::meta() const {
  auto store = snapshot();
  if (!store) return error(503, "no dataset loaded");
  auto j = store->manifest().to_json();
  j["presets"] = {"nsf", "twitter", "custom"};
  return {200, j.dump()};
}

ApiResponse Api::sites(const QueryParams& params) const {
  auto store = snapshot();
  if (!store) return error(503, "no dataset loaded");
  BBox bbox;
  if (auto it = params.find("bbox"); it != params.end()) {
    auto parsed = BBox::parse(it->second);
    if (!parsed) return error(400, "bbox must be west,south,east,north in degrees");
    bbox = *parsed;
  }
  long long zoom = 0;
  std::size_t limit = options_.default_limit;
  try {
    zoom = int_param(params, "zoom").value_or(0);
    if (auto l = int_param(params, "limit")) {
      if (*l < 1) return error(400, "limit must be >= 1");
      limit = std::min(static_cast<std::size_t>(*l), options_.max_limit);
    }
  } catch (const std::invalid_argument& e) {
    return error(400, e.what());
  }
  if (zoom < 0 || zoom > 21) return error(400, "zoom must be in 0..21");
  auto bin_it = params.find("bin");
  if (bin_it == params.end()) return error(400, "missing bin");
  auto bin = store->find_bin(bin_it->second);
  if (!bin) return error(404, "unknown bin " + bin_it->second);

  const auto hits = store->query_sites(bbox, *bin, limit, static_cast<int>(zoom));
  const int p = zoom_decimals(static_cast<int>(zoom));
  const auto scale = pow10(p);
  const auto lat0 = static_cast<std::int64_t>(std::floor(bbox.south * static_cast<double>(scale)));
  const auto lon0 = static_cast<std::int64_t>(std::floor(bbox.west * static_cast<double>(scale)));
  const std::int64_t full_turn = 360 * scale;

  std::string body = "{\"bin\":" + json_string(bin->label()) + ",\"zoom\":" + std::to_string(zoom) +
                     ",\"decimals\":" + std::to_string(p) + ",\"lat0\":" + std::to_string(lat0) +
                     ",\"lon0\":" + std::to_string(lon0);
  body += ",\"lats\":" + json_array(hits, [&](const SiteHit& h) { return std::to_string(h.lat_units - lat0); });
  body += ",\"lons\":" + json_array(hits, [&](const SiteHit& h) {
            std::int64_t off = h.lon_units - lon0;
            if (off < 0) off += full_turn;
            return std::to_string(off);
          });
  body += ",\"values\":" + json_array(hits, [](const SiteHit& h) { return format_sig3(h.total_value.to_double()); });
  body += ",\"counts\":" + json_array(hits, [](const SiteHit& h) { return std::to_string(h.doc_count); });
  body += "}";
  return {200, std::move(body)};
}

ApiResponse Api::cloud(const QueryParams& params) const {
  auto store = snapshot();
  if (!store) return error(503, "no dataset loaded");
  std::optional<double> lat, lon;
  long long max_tags = 0;
  bool with_layout = false;
  try {
    lat = number_param(params, "lat");
    lon = number_param(params, "lon");
    max_tags = int_param(params, "max_tags").value_or(static_cast<long long>(options_.default_max_tags));
    with_layout = int_param(params, "layout").value_or(0) != 0;
  } catch (const std::invalid_argument& e) {
    return error(400, e.what());
  }
  if (!lat || !lon) return error(400, "lat and lon are required");
  if (max_tags < 1) return error(400, "max_tags must be >= 1");
  auto bin_it = params.find("bin");
  if (bin_it == params.end()) return error(400, "missing bin");

  const SiteKey site = SiteKey::from_degrees(*lat, *lon);
  if (!store->has_site(site)) return error(404, "unknown site");
  auto bin = store->find_bin(bin_it->second);
  if (!bin) return error(404, "unknown bin " + bin_it->second);

  const auto limit = static_cast<std::size_t>(max_tags);
  const auto tags = store->query_cloud(site, *bin, limit);
  std::string body = "{\"bin\":" + json_string(bin->label());
  body += ",\"phrases\":" + json_array(tags, [](const TagWeight& t) { return json_string(t.phrase); });
  body += ",\"weights\":" + json_array(tags, [](const TagWeight& t) { return format_sig3(t.weight); });

  if (with_layout) {
    // Chain layouts through every earlier bin so positions carry over.
    CloudLayout previous{options_.cloud_radius, {}, {}};
    CloudLayout current = previous;
    std::optional<TimeBin> previous_bin;
    for (const auto& b : store->manifest().bins) {
      if (b > *bin) break;
      std::vector<Tag> cloud;
      for (const auto& t : store->query_cloud(site, b, limit)) cloud.push_back({t.phrase, t.weight});
      CloudLayout next = layout_cloud(std::move(cloud), options_.cloud_radius, &current, options_.layout);
      if (b == *bin) {
        previous = std::move(current);
        current = std::move(next);
        break;
      }
      previous_bin = b;
      current = std::move(next);
    }
    const auto& placed = current.placed;
    body += ",\"layout\":{\"radius\":" + decimal(current.radius, 1);
    body += ",\"phrases\":" + json_array(placed, [](const TagBox& t) { return json_string(t.phrase); });
    body += ",\"x\":" + json_array(placed, [](const TagBox& t) { return decimal(t.box.cx, 2); });
    body += ",\"y\":" + json_array(placed, [](const TagBox& t) { return decimal(t.box.cy, 2); });
    body += ",\"w\":" + json_array(placed, [](const TagBox& t) { return decimal(t.box.width, 2); });
    body += ",\"h\":" + json_array(placed, [](const TagBox& t) { return decimal(t.box.height, 2); });
    body += ",\"size\":" + json_array(placed, [](const TagBox& t) { return decimal(t.font_size, 2); });
    body += ",\"dropped\":" + json_array(current.dropped, [](const Tag& t) { return json_string(t.phrase); });
    body += "}";
    const auto diff = diff_layouts(previous, current);
    body += ",\"diff\":{\"prev_bin\":" + (previous_bin ? json_string(previous_bin->label()) : std::string("null"));
    body += ",\"phrases\":" + json_array(diff, [](const TagTransition& t) { return json_string(t.phrase); });
    body += ",\"kinds\":" + json_array(diff, [](const TagTransition& t) { return json_string(to_string(t.kind)); });
    body += "}";
  }
  body += "}";
  return {200, std::move(body)};
}

ApiResponse Api::spark(const QueryParams& params) const {
  auto store = snapshot();
  if (!store) return error(503, "no dataset loaded");
  std::optional<double> lat, lon;
  try {
    lat = number_param(params, "lat");
    lon = number_param(params, "lon");
  } catch (const std::invalid_argument& e) {
    return error(400, e.what());
  }
  auto phrase_it = params.find("phrase");
  if (!lat || !lon || phrase_it == params.end() || phrase_it->second.empty()) {
    return error(400, "lat, lon and phrase are required");
  }
  const SiteKey site = SiteKey::from_degrees(*lat, *lon);
  if (!store->has_site(site)) return error(404, "unknown site");
  const auto series = store->query_spark(site, phrase_it->second);
  std::string body = "{\"phrase\":" + json_string(phrase_it->second);
  body += ",\"bins\":" + json_array(series, [](const SparkPoint& p) { return json_string(p.bin.label()); });
  body += ",\"values\":" + json_array(series, [](const SparkPoint& p) { return format_sig3(p.value); });
  body += "}";
  return {200, std::move(body)};
}

// ---- HTTP -------------------------------------------------------------------

HttpServer::HttpServer(Api& api, ServerOptions options)
    : api_(api), options_(std::move(options)), server_(std::make_unique<httplib::Server>()) {
  server_->set_default_headers({{"Access-Control-Allow-Origin", options_.cors_origin},
                                {"Vary", "Origin, Accept-Encoding"}});
  auto route = [this](const char* path, auto handler) {
    server_->Get(path, [this, handler](const httplib::Request& req, httplib::Response& res) {
      QueryParams params;
      for (const auto& [k, v] : req.params) params.emplace(k, v);
      ApiResponse r = handler(api_, params);
      res.status = r.status;
      res.set_content(r.body, "application/json");
    });
  };
  route("/api/meta", [](const Api& api, const QueryParams&) { return api.meta(); });
  route("/api/sites", [](const Api& api, const QueryParams& p) { return api.sites(p); });
  route("/api/cloud", [](const Api& api, const QueryParams& p) { return api.cloud(p); });
  route("/api/spark", [](const Api& api, const QueryParams& p) { return api.spark(p); });
  server_->Options(R"(/api/.*)", [this](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind() {
  if (options_.port == 0) return server_->bind_to_any_port(options_.host);
  return server_->bind_to_port(options_.host, options_.port) ? options_.port : -1;
}

bool HttpServer::serve() { return server_->listen_after_bind(); }

void HttpServer::stop() {
  if (server_ && server_->is_running()) server_->stop();
}

}  // namespace geoterms
