#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "geoterms/amount.hpp"
#include "geoterms/corpus.hpp"
#include "geoterms/dataset.hpp"
#include "geoterms/geocode.hpp"
#include "geoterms/keyphrase.hpp"
#include "geoterms/timebin.hpp"
#include "json.hpp"

namespace geoterms {

enum class CorpusProfile { kWritten, kSpoken };

std::string_view to_string(CorpusProfile profile);
CorpusProfile parse_corpus_profile(std::string_view name);

// Everything that influences pipeline output besides the input records and
// the reference tables.
struct PipelineConfig {
  std::string preset = "nsf";
  ExtractionParams params;
  Granularity granularity = Granularity::kYear;
  bool strip_urls = false;
  bool english_filter = false;
  std::vector<std::string> topic_terms;
  CorpusProfile corpus_profile = CorpusProfile::kWritten;

  // nsf: up to 4 phrases, yearly bins, written corpus, no filters.
  // twitter: up to 3 phrases, monthly bins, spoken corpus, URL stripping and
  // the English filter. custom: nsf defaults.
  static PipelineConfig from_preset(std::string_view name);
  // {"preset": name, "overrides": {...}}; unknown keys are rejected.
  static PipelineConfig from_json(const nlohmann::json& j);

  // Every field spelled out, keys in fixed order.
  nlohmann::ordered_json to_json() const;
  void validate() const;
};

struct Record {
  std::string text;
  std::string geo;
  TimeRange range;
  double value = 1.0;
};

struct RecordBatch {
  std::vector<Record> records;
  std::uint64_t malformed = 0;
};

// JSON lines or CSV (chosen by extension: .csv, otherwise JSON lines). Fields
// text, geo, t0, t1 (optional), value (optional, default 1). Unusable records
// are counted as malformed.
RecordBatch read_records(const std::filesystem::path& path);
RecordBatch parse_jsonl(std::istream& in);
RecordBatch parse_csv(std::istream& in);

// Shared, read-only inputs of the map phase.
struct Resources {
  const ReferenceCorpus* corpus = nullptr;
  const GeoResolver* geo = nullptr;
  // Content hash of the geo tables; part of the fingerprint.
  std::string geo_tables_hash;
};

std::string fingerprint(const PipelineConfig& config, const Resources& resources);

struct TripleContribution {
  SiteKey site;
  TimeBin bin;
  std::string phrase;
  Amount weight;
};

struct ValueShare {
  SiteKey site;
  TimeBin bin;
  Amount value;
};

struct MappedRecord {
  std::optional<SkipReason> skipped;
  std::vector<TripleContribution> triples;
  std::vector<ValueShare> values;
};

MappedRecord map_record(const Record& record, const Resources& resources, const PipelineConfig& config);

// Reducible aggregate. Addition is exact, so merging partials in any grouping
// or order yields identical state.
class Partial {
 public:
  void add(const MappedRecord& mapped);
  void add_triple(const SiteKey& site, const TimeBin& bin, const std::string& phrase, Amount weight);
  void add_summary(const SiteKey& site, const TimeBin& bin, Amount value, std::uint64_t doc_count);
  void merge(const Partial& other);

  SkipReport& report() { return report_; }
  const SkipReport& report() const { return report_; }

  // Drops zero-weight triples and sorts into canonical order.
  Dataset finalize(const std::string& fingerprint, Granularity granularity,
                   const nlohmann::ordered_json& config) const;
  static Partial from_dataset(const Dataset& dataset);

  std::size_t triple_entries() const { return triples_.size(); }

 private:
  struct TripleKey {
    SiteKey site;
    std::int64_t bin_start;
    std::string phrase;
    friend bool operator==(const TripleKey&, const TripleKey&) = default;
  };
  struct TripleKeyHash {
    std::size_t operator()(const TripleKey& k) const;
  };
  struct SummaryKey {
    SiteKey site;
    std::int64_t bin_start;
    friend bool operator==(const SummaryKey&, const SummaryKey&) = default;
  };
  struct SummaryKeyHash {
    std::size_t operator()(const SummaryKey& k) const;
  };
  struct SummaryAcc {
    Amount value;
    std::uint64_t doc_count = 0;
  };

  std::unordered_map<TripleKey, Amount, TripleKeyHash> triples_;
  std::unordered_map<SummaryKey, SummaryAcc, SummaryKeyHash> summaries_;
  SkipReport report_;
};

Partial reduce(std::span<const MappedRecord> mapped);

// Map phase over `workers` threads; record i goes to worker i % workers.
Partial map_records(std::span<const Record> records, int workers, const Resources& resources,
                    const PipelineConfig& config);

// Full run. Output is identical for every workers >= 1.
Dataset run(const RecordBatch& input, int workers, const Resources& resources,
            const PipelineConfig& config);

// Equals run() over the original input plus `input`. Throws ConfigError when
// the dataset was built with a different configuration fingerprint.
Dataset append(const Dataset& dataset, const RecordBatch& input, int workers,
               const Resources& resources, const PipelineConfig& config);

// Intermediate file of the distributed-by-files mode: header lines starting
// with '#', then sorted `T` (triple) and `S` (summary) rows.
struct ShardFile {
  std::string fingerprint;
  Granularity granularity = Granularity::kYear;
  nlohmann::ordered_json config;
  Partial partial;
};

void write_shard(const ShardFile& shard, std::ostream& out);
ShardFile read_shard(std::istream& in, const std::string& source_name);

// Reduces shard files into a dataset. Throws ConfigError on differing
// fingerprints.
Dataset merge_shards(std::span<const ShardFile> shards);

}  // namespace geoterms
