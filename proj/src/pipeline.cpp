#include "geoterms/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "geoterms/error.hpp"
#include "geoterms/hash.hpp"

namespace geoterms {

// ---- Configuration ----------------------------------------------------------

std::string_view to_string(CorpusProfile profile) {
  return profile == CorpusProfile::kSpoken ? "spoken" : "written";
}

CorpusProfile parse_corpus_profile(std::string_view name) {
  if (name == "written") return CorpusProfile::kWritten;
  if (name == "spoken") return CorpusProfile::kSpoken;
  throw ConfigError("unknown corpus profile '" + std::string(name) + "'");
}

PipelineConfig PipelineConfig::from_preset(std::string_view name) {
  PipelineConfig c;
  c.preset = std::string(name);
  if (name == "nsf" || name == "custom") return c;
  if (name == "twitter") {
    c.params.max_ngram = 4;
    c.params.top_k = 3;
    c.granularity = Granularity::kMonth;
    c.corpus_profile = CorpusProfile::kSpoken;
    c.strip_urls = true;
    c.english_filter = true;
    return c;
  }
  throw ConfigError("unknown preset '" + std::string(name) + "' (expected nsf, twitter or custom)");
}

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (key != "preset" && key != "overrides") throw ConfigError("unknown config key '" + key + "'");
  }
  PipelineConfig c = from_preset(j.value("preset", std::string("nsf")));
  if (!j.contains("overrides")) return c;
  const auto& o = j.at("overrides");
  if (!o.is_object()) throw ConfigError("overrides must be an object");
  try {
    for (const auto& [key, value] : o.items()) {
      if (key == "max_ngram") c.params.max_ngram = value.get<int>();
      else if (key == "top_k") c.params.top_k = value.get<int>();
      else if (key == "gamma") c.params.gamma = value.get<double>();
      else if (key == "keyword_count") c.params.keyword_count = value.get<int>();
      else if (key == "stop_rank") c.params.stop_rank = value.get<int>();
      else if (key == "rarity") c.params.scorer = parse_rarity_scorer(value.get<std::string>());
      else if (key == "granularity") c.granularity = parse_granularity(value.get<std::string>());
      else if (key == "strip_urls") c.strip_urls = value.get<bool>();
      else if (key == "english_filter") c.english_filter = value.get<bool>();
      else if (key == "topic_terms") {
        c.topic_terms.clear();
        for (const auto& t : value) {
          std::string term = t.get<std::string>();
          std::transform(term.begin(), term.end(), term.begin(),
                         [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
          c.topic_terms.push_back(term);
        }
      } else if (key == "corpus_profile") c.corpus_profile = parse_corpus_profile(value.get<std::string>());
      else throw ConfigError("unknown override '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad override value: ") + e.what());
  }
  c.validate();
  return c;
}

nlohmann::ordered_json PipelineConfig::to_json() const {
  nlohmann::ordered_json o;
  o["max_ngram"] = params.max_ngram;
  o["top_k"] = params.top_k;
  o["gamma"] = params.gamma;
  o["keyword_count"] = params.keyword_count;
  o["stop_rank"] = params.stop_rank;
  o["rarity"] = std::string(to_string(params.scorer));
  o["granularity"] = std::string(to_string(granularity));
  o["strip_urls"] = strip_urls;
  o["english_filter"] = english_filter;
  o["topic_terms"] = topic_terms;
  o["corpus_profile"] = std::string(to_string(corpus_profile));
  nlohmann::ordered_json j;
  j["preset"] = preset;
  j["overrides"] = o;
  return j;
}

void PipelineConfig::validate() const { params.validate(); }

std::string fingerprint(const PipelineConfig& config, const Resources& resources) {
  Fnv1a h;
  h.update("geoterms-dataset/" + std::to_string(Manifest::kFormatVersion) + "\n");
  h.update(config.to_json().dump());
  h.update("\ncorpus:");
  h.update(resources.corpus ? resources.corpus->content_hash() : "");
  h.update("\ngeo:");
  h.update(resources.geo_tables_hash);
  return h.hex();
}

// ---- Input ------------------------------------------------------------------

namespace {

std::optional<Record> record_from_fields(const std::string& text, const std::string& geo, const std::string& t0,
                                         const std::string& t1, const std::string& value) {
  try {
    Record r;
    r.text = text;
    r.geo = geo;
    r.range.begin = parse_timestamp(t0);
    r.range.end = t1.empty() ? r.range.begin : parse_timestamp(t1);
    if (r.range.end < r.range.begin) return std::nullopt;
    if (!value.empty()) {
      std::size_t used = 0;
      r.value = std::stod(value, &used);
      if (used != value.size()) return std::nullopt;
    }
    if (!std::isfinite(r.value) || r.value < 0) return std::nullopt;
    return r;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::string json_scalar_text(const nlohmann::json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number_integer()) return std::to_string(j.get<long long>());
  if (j.is_number()) {
    std::ostringstream ss;
    ss.precision(17);
    ss << j.get<double>();
    return ss.str();
  }
  throw std::invalid_argument("expected string or number");
}

}  // namespace

RecordBatch parse_jsonl(std::istream& in) {
  RecordBatch batch;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    std::optional<Record> r;
    if (!j.is_discarded() && j.is_object() && j.contains("text") && j.contains("geo") && j.contains("t0")) {
      try {
        if (!j["text"].is_string()) throw std::invalid_argument("text");
        r = record_from_fields(j["text"].get<std::string>(), json_scalar_text(j["geo"]), json_scalar_text(j["t0"]),
                               j.contains("t1") && !j["t1"].is_null() ? json_scalar_text(j["t1"]) : "",
                               j.contains("value") && !j["value"].is_null() ? json_scalar_text(j["value"]) : "");
      } catch (const std::exception&) {
        r.reset();
      }
    }
    if (r) {
      batch.records.push_back(std::move(*r));
    } else {
      ++batch.malformed;
    }
  }
  return batch;
}

namespace {

// RFC 4180 rows: quoted fields may contain commas, doubled quotes and newlines.
bool next_csv_row(std::istream& in, std::vector<std::string>& row) {
  row.clear();
  std::string field;
  bool in_quotes = false;
  bool any = false;
  char c = 0;
  while (in.get(c)) {
    any = true;
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          field.push_back('"');
          in.get();
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      row.push_back(std::move(field));
      return true;
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  if (!any) return false;
  row.push_back(std::move(field));
  return true;
}

}  // namespace

RecordBatch parse_csv(std::istream& in) {
  RecordBatch batch;
  std::vector<std::string> header;
  if (!next_csv_row(in, header)) return batch;
  auto column = [&](std::string_view name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    return std::nullopt;
  };
  auto text = column("text"), geo = column("geo"), t0 = column("t0"), t1 = column("t1"), value = column("value");
  if (!text || !geo || !t0) throw ParseError("CSV header must name text, geo and t0 columns");

  std::vector<std::string> row;
  while (next_csv_row(in, row)) {
    if (row.size() == 1 && row[0].empty()) continue;
    auto get = [&](std::optional<std::size_t> idx) -> std::string {
      return idx && *idx < row.size() ? row[*idx] : std::string();
    };
    std::optional<Record> r;
    if (row.size() == header.size()) r = record_from_fields(get(text), get(geo), get(t0), get(t1), get(value));
    if (r) {
      batch.records.push_back(std::move(*r));
    } else {
      ++batch.malformed;
    }
  }
  return batch;
}

RecordBatch read_records(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open input " + path.string());
  RecordBatch batch = path.extension() == ".csv" ? parse_csv(in) : parse_jsonl(in);
  if (in.bad()) {
    throw IoError("read failed in " + path.string() + " after " + std::to_string(batch.records.size()) + " records");
  }
  return batch;
}

// ---- Map --------------------------------------------------------------------

MappedRecord map_record(const Record& record, const Resources& resources, const PipelineConfig& config) {
  MappedRecord out;
  const ReferenceCorpus& corpus = *resources.corpus;
  PreparedText prepared = prepare(record.text, config.strip_urls);
  if (config.english_filter && !is_english(prepared, record.text, corpus)) {
    out.skipped = SkipReason::kFilteredLanguage;
    return out;
  }
  if (!matches_topic(prepared, config.topic_terms)) {
    out.skipped = SkipReason::kFilteredTopic;
    return out;
  }
  auto point = resources.geo ? resources.geo->resolve(record.geo) : std::nullopt;
  if (!point) {
    out.skipped = SkipReason::kUnresolvedGeo;
    return out;
  }
  auto phrases = extract(prepared, corpus, config.params);
  if (phrases.empty()) {
    out.skipped = SkipReason::kEmptyExtraction;
    return out;
  }

  const SiteKey site = SiteKey::from_degrees(point->lat, point->lon);
  std::vector<std::string> displays;
  displays.reserve(phrases.size());
  for (const auto& p : phrases) displays.push_back(p.display());

  for (const auto& share : prorate(record.range, record.value, config.granularity)) {
    out.values.push_back({site, share.bin, Amount::from_double(share.share)});
    for (std::size_t i = 0; i < phrases.size(); ++i) {
      Amount w = Amount::from_double(phrases[i].weight * share.share);
      if (w.units() > 0) out.triples.push_back({site, share.bin, displays[i], w});
    }
  }
  return out;
}

// ---- Reduce -----------------------------------------------------------------

namespace {

std::size_t mix(std::size_t seed, std::size_t v) {
  return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

}  // namespace

std::size_t Partial::TripleKeyHash::operator()(const TripleKey& k) const {
  std::size_t h = std::hash<std::string>{}(k.phrase);
  h = mix(h, static_cast<std::size_t>(k.site.lat_e4));
  h = mix(h, static_cast<std::size_t>(k.site.lon_e4));
  return mix(h, static_cast<std::size_t>(k.bin_start));
}

std::size_t Partial::SummaryKeyHash::operator()(const SummaryKey& k) const {
  std::size_t h = static_cast<std::size_t>(k.site.lat_e4);
  h = mix(h, static_cast<std::size_t>(k.site.lon_e4));
  return mix(h, static_cast<std::size_t>(k.bin_start));
}

void Partial::add_triple(const SiteKey& site, const TimeBin& bin, const std::string& phrase, Amount weight) {
  triples_[TripleKey{site, bin.start.time_since_epoch().count(), phrase}] += weight;
}

void Partial::add_summary(const SiteKey& site, const TimeBin& bin, Amount value, std::uint64_t doc_count) {
  auto& acc = summaries_[SummaryKey{site, bin.start.time_since_epoch().count()}];
  acc.value += value;
  acc.doc_count += doc_count;
}

void Partial::add(const MappedRecord& mapped) {
  if (mapped.skipped) {
    report_.skip(*mapped.skipped);
    return;
  }
  ++report_.accepted;
  for (const auto& t : mapped.triples) add_triple(t.site, t.bin, t.phrase, t.weight);
  for (const auto& v : mapped.values) add_summary(v.site, v.bin, v.value, 1);
}

void Partial::merge(const Partial& other) {
  for (const auto& [key, weight] : other.triples_) triples_[key] += weight;
  for (const auto& [key, acc] : other.summaries_) {
    auto& mine = summaries_[key];
    mine.value += acc.value;
    mine.doc_count += acc.doc_count;
  }
  report_ += other.report_;
}

Dataset Partial::finalize(const std::string& fingerprint, Granularity granularity,
                          const nlohmann::ordered_json& config) const {
  Dataset d;
  auto to_bin = [&](std::int64_t start) { return TimeBin{granularity, Instant(std::chrono::seconds(start))}; };

  d.triples.reserve(triples_.size());
  for (const auto& [key, weight] : triples_) {
    if (weight.units() > 0) d.triples.push_back({key.site, to_bin(key.bin_start), key.phrase, weight});
  }
  std::sort(d.triples.begin(), d.triples.end(), [](const SiteTriple& a, const SiteTriple& b) {
    if (a.site != b.site) return a.site < b.site;
    if (a.bin != b.bin) return a.bin < b.bin;
    if (a.weight != b.weight) return a.weight > b.weight;
    return a.phrase < b.phrase;
  });

  d.summaries.reserve(summaries_.size());
  std::set<std::int64_t> bins;
  std::set<SiteKey> sites;
  for (const auto& [key, acc] : summaries_) {
    d.summaries.push_back({key.site, to_bin(key.bin_start), acc.value, acc.doc_count});
    bins.insert(key.bin_start);
    sites.insert(key.site);
  }
  std::sort(d.summaries.begin(), d.summaries.end(), [](const SiteSummary& a, const SiteSummary& b) {
    if (a.site != b.site) return a.site < b.site;
    return a.bin < b.bin;
  });

  Manifest& m = d.manifest;
  m.fingerprint = fingerprint;
  m.granularity = granularity;
  for (auto b : bins) m.bins.push_back(to_bin(b));
  m.report = report_;
  m.triple_count = d.triples.size();
  m.summary_count = d.summaries.size();
  m.site_count = sites.size();
  m.config = config;
  return d;
}

Partial Partial::from_dataset(const Dataset& dataset) {
  Partial p;
  for (const auto& t : dataset.triples) p.add_triple(t.site, t.bin, t.phrase, t.weight);
  for (const auto& s : dataset.summaries) p.add_summary(s.site, s.bin, s.total_value, s.doc_count);
  p.report_ = dataset.manifest.report;
  return p;
}

Partial reduce(std::span<const MappedRecord> mapped) {
  Partial p;
  for (const auto& m : mapped) p.add(m);
  return p;
}

Partial map_records(std::span<const Record> records, int workers, const Resources& resources,
                    const PipelineConfig& config) {
  if (workers < 1) throw ConfigError("workers must be >= 1");
  config.validate();
  const auto w = static_cast<std::size_t>(workers);
  std::vector<Partial> partials(w);
  std::vector<std::exception_ptr> errors(w);
  auto work = [&](std::size_t id) {
    try {
      for (std::size_t i = id; i < records.size(); i += w) {
        partials[id].add(map_record(records[i], resources, config));
      }
    } catch (...) {
      errors[id] = std::current_exception();
    }
  };
  if (w == 1) {
    work(0);
  } else {
    std::vector<std::jthread> threads;
    threads.reserve(w);
    for (std::size_t id = 0; id < w; ++id) threads.emplace_back(work, id);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  // Pairwise tree merge; the result does not depend on the grouping.
  for (std::size_t step = 1; step < w; step *= 2) {
    for (std::size_t i = 0; i + step < w; i += 2 * step) partials[i].merge(partials[i + step]);
  }
  return std::move(partials[0]);
}

Dataset run(const RecordBatch& input, int workers, const Resources& resources, const PipelineConfig& config) {
  Partial p = map_records(input.records, workers, resources, config);
  p.report().skip(SkipReason::kMalformed, input.malformed);
  return p.finalize(fingerprint(config, resources), config.granularity, config.to_json());
}

Dataset append(const Dataset& dataset, const RecordBatch& input, int workers, const Resources& resources,
               const PipelineConfig& config) {
  const std::string fp = fingerprint(config, resources);
  if (dataset.manifest.fingerprint != fp) {
    throw ConfigError("configuration fingerprint " + fp + " does not match dataset fingerprint " +
                      dataset.manifest.fingerprint +
                      "; appending requires the same preset, parameters, corpus and geo tables");
  }
  Partial p = Partial::from_dataset(dataset);
  Partial added = map_records(input.records, workers, resources, config);
  added.report().skip(SkipReason::kMalformed, input.malformed);
  p.merge(added);
  return p.finalize(fp, config.granularity, config.to_json());
}

// ---- Shard files ------------------------------------------------------------

void write_shard(const ShardFile& shard, std::ostream& out) {
  Dataset d = shard.partial.finalize(shard.fingerprint, shard.granularity, shard.config);
  out << "#geoterms-shard\t1\n";
  out << "#fingerprint\t" << shard.fingerprint << '\n';
  out << "#granularity\t" << to_string(shard.granularity) << '\n';
  out << "#config\t" << shard.config.dump() << '\n';
  out << "#accepted\t" << d.manifest.report.accepted << '\n';
  for (std::size_t i = 0; i < kSkipReasonCount; ++i) {
    out << "#skipped\t" << to_string(static_cast<SkipReason>(i)) << '\t' << d.manifest.report.skipped[i] << '\n';
  }
  std::istringstream triples(encode_triples(d));
  std::string line;
  while (std::getline(triples, line)) out << "T\t" << line << '\n';
  std::istringstream summaries(encode_summaries(d));
  while (std::getline(summaries, line)) out << "S\t" << line << '\n';
  if (!out) throw IoError("failed to write shard");
}

ShardFile read_shard(std::istream& in, const std::string& source_name) {
  ShardFile shard;
  std::string line;
  std::size_t n = 0;
  bool saw_magic = false;
  bool saw_granularity = false;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    std::vector<std::string> cols;
    {
      std::size_t start = 0;
      while (true) {
        auto pos = line.find('\t', start);
        cols.push_back(line.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
        if (pos == std::string::npos) break;
        start = pos + 1;
      }
    }
    try {
      const std::string& tag = cols[0];
      if (tag == "#geoterms-shard") {
        if (cols.size() != 2 || cols[1] != "1") throw ParseError(source_name, n, "unsupported shard version");
        saw_magic = true;
      } else if (!saw_magic) {
        throw ParseError(source_name, n, "not a shard file");
      } else if (tag == "#fingerprint" && cols.size() == 2) {
        shard.fingerprint = cols[1];
      } else if (tag == "#granularity" && cols.size() == 2) {
        shard.granularity = parse_granularity(cols[1]);
        saw_granularity = true;
      } else if (tag == "#config" && cols.size() == 2) {
        auto j = nlohmann::ordered_json::parse(cols[1], nullptr, false);
        if (j.is_discarded()) throw ParseError(source_name, n, "bad config JSON");
        shard.config = j;
      } else if (tag == "#accepted" && cols.size() == 2) {
        shard.partial.report().accepted = std::stoull(cols[1]);
      } else if (tag == "#skipped" && cols.size() == 3) {
        bool known = false;
        for (std::size_t i = 0; i < kSkipReasonCount; ++i) {
          if (to_string(static_cast<SkipReason>(i)) == cols[1]) {
            shard.partial.report().skipped[i] = std::stoull(cols[2]);
            known = true;
          }
        }
        if (!known) throw ParseError(source_name, n, "unknown skip reason " + cols[1]);
      } else if ((tag == "T" && cols.size() == 6) || (tag == "S" && cols.size() == 6)) {
        if (!saw_granularity) throw ParseError(source_name, n, "row before #granularity");
        auto e4 = [&](const std::string& s) {
          auto u = Amount::parse(s).units();
          if (u % 100000 != 0) throw ParseError(source_name, n, "coordinate must have at most 4 decimals");
          return static_cast<std::int32_t>(u / 100000);
        };
        SiteKey site{e4(cols[1]), e4(cols[2])};
        TimeBin bin = TimeBin::parse(cols[3], shard.granularity);
        if (tag == "T") {
          shard.partial.add_triple(site, bin, cols[4], Amount::parse(cols[5]));
        } else {
          shard.partial.add_summary(site, bin, Amount::parse(cols[4]), std::stoull(cols[5]));
        }
      } else {
        throw ParseError(source_name, n, "unrecognized shard line");
      }
    } catch (const ParseError& e) {
      if (e.line() != 0) throw;
      throw ParseError(source_name, n, e.what());
    } catch (const ConfigError& e) {
      throw ParseError(source_name, n, e.what());
    } catch (const std::logic_error&) {
      throw ParseError(source_name, n, "bad number");
    }
  }
  if (!saw_magic) throw ParseError(source_name, n, "not a shard file");
  return shard;
}

Dataset merge_shards(std::span<const ShardFile> shards) {
  if (shards.empty()) throw ConfigError("merge needs at least one shard");
  Partial p;
  for (const auto& s : shards) {
    if (s.fingerprint != shards.front().fingerprint) {
      throw ConfigError("shard fingerprints differ: " + shards.front().fingerprint + " vs " + s.fingerprint);
    }
    p.merge(s.partial);
  }
  return p.finalize(shards.front().fingerprint, shards.front().granularity, shards.front().config);
}

}  // namespace geoterms
