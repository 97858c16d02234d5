#include "geoterms/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>
#include <string_view>
#include <fstream>
#include <sstream>

#include "geoterms/error.hpp"
#include "geoterms/hash.hpp"

namespace geoterms {

namespace fs = std::filesystem;

std::int64_t round_scaled(double x, int decimals) {
  if (!std::isfinite(x)) throw std::invalid_argument("cannot round a non-finite value");
  // Round the shortest decimal text that reads back as x, so inputs such as
  // 0.15 round as written.
  char buf[400];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, std::abs(x), std::chars_format::fixed);
  if (ec != std::errc()) throw std::invalid_argument("cannot format value");
  std::string_view text(buf, static_cast<std::size_t>(end - buf));
  auto dot = text.find('.');
  std::string_view whole = text.substr(0, dot);
  std::string_view frac = dot == std::string_view::npos ? std::string_view() : text.substr(dot + 1);

  std::int64_t units = 0;
  for (char c : whole) units = units * 10 + (c - '0');
  for (int i = 0; i < decimals; ++i) {
    int digit = static_cast<std::size_t>(i) < frac.size() ? frac[static_cast<std::size_t>(i)] - '0' : 0;
    units = units * 10 + digit;
  }
  if (static_cast<std::size_t>(decimals) < frac.size() && frac[static_cast<std::size_t>(decimals)] >= '5') ++units;
  return x < 0 ? -units : units;
}

std::string format_fixed(std::int64_t units, int decimals) {
  bool negative = units < 0;
  std::uint64_t u = negative ? static_cast<std::uint64_t>(-(units + 1)) + 1 : static_cast<std::uint64_t>(units);
  std::string digits = std::to_string(u);
  if (decimals > 0) {
    if (digits.size() <= static_cast<std::size_t>(decimals)) {
      digits.insert(0, static_cast<std::size_t>(decimals) + 1 - digits.size(), '0');
    }
    digits.insert(digits.size() - static_cast<std::size_t>(decimals), ".");
  }
  return (negative ? "-" : "") + digits;
}

SiteKey SiteKey::from_degrees(double lat, double lon) {
  return SiteKey{static_cast<std::int32_t>(round_scaled(lat, 4)), static_cast<std::int32_t>(round_scaled(lon, 4))};
}

std::string_view to_string(SkipReason reason) {
  switch (reason) {
    case SkipReason::kMalformed:
      return "malformed";
    case SkipReason::kFilteredLanguage:
      return "not_english";
    case SkipReason::kFilteredTopic:
      return "off_topic";
    case SkipReason::kUnresolvedGeo:
      return "unresolved_geo";
    case SkipReason::kEmptyExtraction:
      return "no_keyphrases";
  }
  return "?";
}

std::uint64_t SkipReport::skipped_total() const {
  std::uint64_t n = 0;
  for (auto v : skipped) n += v;
  return n;
}

SkipReport& SkipReport::operator+=(const SkipReport& other) {
  accepted += other.accepted;
  for (std::size_t i = 0; i < kSkipReasonCount; ++i) skipped[i] += other.skipped[i];
  return *this;
}

nlohmann::ordered_json SkipReport::to_json() const {
  nlohmann::ordered_json j;
  for (std::size_t i = 0; i < kSkipReasonCount; ++i) {
    j[std::string(to_string(static_cast<SkipReason>(i)))] = skipped[i];
  }
  return j;
}

SkipReport SkipReport::from_json(const nlohmann::json& j) {
  SkipReport r;
  for (std::size_t i = 0; i < kSkipReasonCount; ++i) {
    r.skipped[i] = j.value(std::string(to_string(static_cast<SkipReason>(i))), std::uint64_t{0});
  }
  return r;
}

nlohmann::ordered_json Manifest::to_json() const {
  nlohmann::ordered_json j;
  j["version"] = version;
  j["fingerprint"] = fingerprint;
  j["granularity"] = std::string(to_string(granularity));
  auto labels = nlohmann::ordered_json::array();
  for (const auto& b : bins) labels.push_back(b.label());
  j["bins"] = labels;
  j["record_count"] = report.accepted;
  j["skipped"] = report.to_json();
  j["site_count"] = site_count;
  j["summary_count"] = summary_count;
  j["triple_count"] = triple_count;
  j["config"] = config;
  return j;
}

Manifest Manifest::from_json(const nlohmann::json& j) {
  try {
    Manifest m;
    m.version = j.at("version").get<int>();
    if (m.version != kFormatVersion) {
      throw ParseError("unsupported dataset format version " + std::to_string(m.version));
    }
    m.fingerprint = j.at("fingerprint").get<std::string>();
    m.granularity = parse_granularity(j.at("granularity").get<std::string>());
    for (const auto& label : j.at("bins")) m.bins.push_back(TimeBin::parse(label.get<std::string>(), m.granularity));
    m.report = SkipReport::from_json(j.at("skipped"));
    m.report.accepted = j.at("record_count").get<std::uint64_t>();
    m.site_count = j.at("site_count").get<std::size_t>();
    m.summary_count = j.at("summary_count").get<std::size_t>();
    m.triple_count = j.at("triple_count").get<std::size_t>();
    m.config = j.at("config");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad manifest: ") + e.what());
  }
}

namespace {

void append_site(std::string& out, const SiteKey& s) {
  out += format_fixed(s.lat_e4, 4);
  out += '\t';
  out += format_fixed(s.lon_e4, 4);
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> cols;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find('\t', start);
    if (pos == std::string_view::npos) {
      cols.push_back(line.substr(start));
      return cols;
    }
    cols.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::int32_t parse_e4(std::string_view text, const std::string& source, std::size_t line) {
  auto a = Amount::parse(text);  // exact decimal parse; 4 decimals expected
  auto units = a.units();
  if (units % 100000 != 0) throw ParseError(source, line, "coordinate must have at most 4 decimals");
  return static_cast<std::int32_t>(units / 100000);
}

}  // namespace

std::string encode_triples(const Dataset& dataset) {
  std::string out;
  out.reserve(dataset.triples.size() * 48);
  for (const auto& t : dataset.triples) {
    append_site(out, t.site);
    out += '\t';
    out += t.bin.label();
    out += '\t';
    out += t.phrase;
    out += '\t';
    out += t.weight.to_string();
    out += '\n';
  }
  return out;
}

std::string encode_summaries(const Dataset& dataset) {
  std::string out;
  for (const auto& s : dataset.summaries) {
    append_site(out, s.site);
    out += '\t';
    out += s.bin.label();
    out += '\t';
    out += s.total_value.to_string();
    out += '\t';
    out += std::to_string(s.doc_count);
    out += '\n';
  }
  return out;
}

std::string encode_manifest(const Dataset& dataset) { return dataset.manifest.to_json().dump(2) + "\n"; }

void write_dataset(const Dataset& dataset, const fs::path& dir) {
  fs::path target = fs::absolute(dir).lexically_normal();
  if (target.filename().empty()) target = target.parent_path();
  fs::path tmp = target;
  tmp += ".tmp";
  fs::path old = target;
  old += ".old";
  std::error_code ec;
  fs::remove_all(tmp, ec);
  if (!fs::create_directories(tmp, ec) && ec) throw IoError("cannot create " + tmp.string() + ": " + ec.message());

  auto write = [&](const char* name, const std::string& bytes) {
    std::ofstream out(tmp / name, std::ios::binary);
    out << bytes;
    out.close();
    if (!out) throw IoError("cannot write " + (tmp / name).string());
  };
  write("manifest.json", encode_manifest(dataset));
  write("triples.tsv", encode_triples(dataset));
  write("summaries.tsv", encode_summaries(dataset));

  fs::remove_all(old, ec);
  if (fs::exists(target)) {
    fs::rename(target, old, ec);
    if (ec) throw IoError("cannot move aside " + target.string() + ": " + ec.message());
  }
  fs::rename(tmp, target, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
  fs::remove_all(old, ec);
}

Dataset read_dataset(const fs::path& dir) {
  Dataset d;
  auto manifest_text = read_file(dir / "manifest.json");
  auto manifest_json = nlohmann::json::parse(manifest_text, nullptr, false);
  if (manifest_json.is_discarded()) throw ParseError((dir / "manifest.json").string() + ": invalid JSON");
  d.manifest = Manifest::from_json(manifest_json);
  const Granularity g = d.manifest.granularity;

  {
    std::string source = (dir / "triples.tsv").string();
    std::istringstream in(read_file(dir / "triples.tsv"));
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
      ++n;
      auto cols = split_tabs(line);
      if (cols.size() != 5) throw ParseError(source, n, "expected 5 columns");
      try {
        d.triples.push_back({SiteKey{parse_e4(cols[0], source, n), parse_e4(cols[1], source, n)},
                             TimeBin::parse(cols[2], g), std::string(cols[3]), Amount::parse(cols[4])});
      } catch (const ParseError& e) {
        if (e.line() != 0) throw;
        throw ParseError(source, n, e.what());
      }
    }
  }
  {
    std::string source = (dir / "summaries.tsv").string();
    std::istringstream in(read_file(dir / "summaries.tsv"));
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
      ++n;
      auto cols = split_tabs(line);
      if (cols.size() != 5) throw ParseError(source, n, "expected 5 columns");
      try {
        d.summaries.push_back({SiteKey{parse_e4(cols[0], source, n), parse_e4(cols[1], source, n)},
                               TimeBin::parse(cols[2], g), Amount::parse(cols[3]),
                               std::stoull(std::string(cols[4]))});
      } catch (const ParseError& e) {
        if (e.line() != 0) throw;
        throw ParseError(source, n, e.what());
      } catch (const std::logic_error&) {
        throw ParseError(source, n, "bad document count");
      }
    }
  }
  if (d.triples.size() != d.manifest.triple_count || d.summaries.size() != d.manifest.summary_count) {
    throw ParseError(dir.string() + ": table sizes disagree with manifest");
  }
  return d;
}

}  // namespace geoterms
