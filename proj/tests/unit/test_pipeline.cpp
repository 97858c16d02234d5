#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "doctest.h"
#include "geoterms/error.hpp"
#include "geoterms/pipeline.hpp"
#include "pipeline_fixture.hpp"
#include "support.hpp"

using namespace geoterms;
using testing::make_record;

namespace {
std::string bytes(const Dataset& d) { return encode_manifest(d) + encode_triples(d) + encode_summaries(d); }

RecordBatch batch(std::vector<Record> r) { return RecordBatch{std::move(r), 0}; }
}  // namespace

TEST_CASE("presets") {
  auto nsf = PipelineConfig::from_preset("nsf");
  CHECK(nsf.params.max_ngram == 4);
  CHECK(nsf.params.top_k == 4);
  CHECK(nsf.granularity == Granularity::kYear);
  CHECK(nsf.corpus_profile == CorpusProfile::kWritten);
  CHECK_FALSE(nsf.strip_urls);
  CHECK_FALSE(nsf.english_filter);
  CHECK(nsf.topic_terms.empty());

  auto tw = PipelineConfig::from_preset("twitter");
  CHECK(tw.params.max_ngram == 4);
  CHECK(tw.params.top_k == 3);
  CHECK(tw.granularity == Granularity::kMonth);
  CHECK(tw.corpus_profile == CorpusProfile::kSpoken);
  CHECK(tw.strip_urls);
  CHECK(tw.english_filter);
  CHECK_THROWS_AS(PipelineConfig::from_preset("hadoop"), ConfigError);
}

TEST_CASE("config json") {
  auto c = PipelineConfig::from_json(nlohmann::json::parse(
      R"({"preset":"twitter","overrides":{"topic_terms":["Android"],"max_ngram":2,"rarity":"log_rank"}})"));
  CHECK(c.topic_terms == std::vector<std::string>{"android"});
  CHECK(c.params.max_ngram == 2);
  CHECK(c.params.scorer == RarityScorer::kLogRank);
  CHECK(c.params.top_k == 3);
  CHECK(PipelineConfig::from_json(c.to_json()).to_json() == c.to_json());
  CHECK_THROWS_AS(PipelineConfig::from_json(nlohmann::json::parse(R"({"presett":"nsf"})")), ConfigError);
  CHECK_THROWS_AS(PipelineConfig::from_json(nlohmann::json::parse(R"({"overrides":{"n":3}})")), ConfigError);
  CHECK_THROWS_AS(PipelineConfig::from_json(nlohmann::json::parse(R"({"overrides":{"max_ngram":9}})")), ConfigError);
  CHECK_THROWS_AS(PipelineConfig::from_json(nlohmann::json::parse(R"({"overrides":{"top_k":"x"}})")), ConfigError);
}

TEST_CASE("fingerprint covers config and tables") {
  testing::MiniWorld w;
  auto c = testing::mini_config();
  auto f = fingerprint(c, w.resources);
  CHECK(f.size() == 16);
  CHECK(fingerprint(c, w.resources) == f);
  auto c2 = c;
  c2.params.gamma = 1.3;
  CHECK(fingerprint(c2, w.resources) != f);
  auto r2 = w.resources;
  auto other = ReferenceCorpus::from_entries({{"the", 1}});
  r2.corpus = &other;
  CHECK(fingerprint(c, r2) != f);
}

TEST_CASE("record readers") {
  std::istringstream jl(
      R"({"text":"plasma wave","geo":"Houston, TX","t0":"2008-01-01","t1":"2008-06-01","value":5})" "\n"
      R"({"text":"no time","geo":"Houston, TX"})" "\n"
      "not json\n"
      "\n"
      R"({"text":"ok","geo":"47907","t0":1204675200})" "\n"
      R"({"text":"neg","geo":"47907","t0":"2008-01-01","value":-1})" "\n"
      R"({"text":"rev","geo":"47907","t0":"2009-01-01","t1":"2008-01-01"})" "\n");
  auto b = parse_jsonl(jl);
  CHECK(b.records.size() == 2);
  CHECK(b.malformed == 4);
  CHECK(b.records[0].value == 5.0);
  CHECK(b.records[1].value == 1.0);
  CHECK(b.records[1].range.begin == b.records[1].range.end);

  std::istringstream csv(
      "geo,text,t0,value\n"
      "\"Seattle, WA\",\"glacier, \"\"retreat\"\"\",2008-05-01,3\n"
      "47907,missing columns\n");
  auto c = parse_csv(csv);
  REQUIRE(c.records.size() == 1);
  CHECK(c.records[0].geo == "Seattle, WA");
  CHECK(c.records[0].text == "glacier, \"retreat\"");
  CHECK(c.malformed == 1);
  CHECK_THROWS_AS(read_records("/nonexistent/input.jsonl"), IoError);
}

TEST_CASE("map_record examples") {
  testing::MiniWorld w;
  auto cfg = testing::mini_config();
  cfg.params.top_k = 1;
  auto m = map_record(make_record("plasma wave model", "Houston, TX", "2008-05-05", "", 10.0), w.resources, cfg);
  CHECK_FALSE(m.skipped);
  REQUIRE(m.triples.size() == 1);
  CHECK(m.triples[0].weight == Amount::from_double(10.0));
  CHECK(m.triples[0].site == SiteKey::from_degrees(29.76328, -95.36327));
  REQUIRE(m.values.size() == 1);
  CHECK(m.values[0].value == Amount::from_double(10.0));

  auto zero = map_record(make_record("plasma wave", "Houston, TX", "2008-05-05", "", 0.0), w.resources, cfg);
  CHECK_FALSE(zero.skipped);
  CHECK(zero.triples.empty());
  CHECK(zero.values.size() == 1);
  Partial p;
  p.add(zero);
  auto d = p.finalize("f", Granularity::kYear, {});
  REQUIRE(d.summaries.size() == 1);
  CHECK(d.summaries[0].doc_count == 1);
  CHECK(d.summaries[0].total_value.is_zero());
  CHECK(d.triples.empty());
}

TEST_CASE("skip reasons") {
  testing::MiniWorld w;
  auto tw = testing::mini_config("twitter");
  tw.topic_terms = {"phone"};
  auto reason = [&](const Record& r, const PipelineConfig& c) { return map_record(r, w.resources, c).skipped; };
  CHECK(reason(make_record("love my phone", "Seattle, WA", "2013-03-01"), tw) == std::nullopt);
  CHECK(reason(make_record("love my phöne", "Seattle, WA", "2013-03-01"), tw) == SkipReason::kFilteredLanguage);
  CHECK(reason(make_record("love my plasma", "Seattle, WA", "2013-03-01"), tw) == SkipReason::kFilteredTopic);
  CHECK(reason(make_record("love my phone", "Atlantis", "2013-03-01"), tw) == SkipReason::kUnresolvedGeo);
  auto nsf = testing::mini_config();
  CHECK(reason(make_record("the of and", "Seattle, WA", "2013-03-01"), nsf) == SkipReason::kEmptyExtraction);
  // URLs are stripped before the English check in twitter mode.
  CHECK(reason(make_record("new phone http://t.co/xyz", "Seattle, WA", "2013-03-01"), tw) == std::nullopt);

  auto d = run(RecordBatch{{make_record("love my phone", "Atlantis", "2013-03-01"),
                            make_record("phone", "Seattle, WA", "2013-03-01")},
                           2},
               1, w.resources, tw);
  CHECK(d.manifest.report.accepted == 1);
  CHECK(d.manifest.report.skipped[static_cast<std::size_t>(SkipReason::kMalformed)] == 2);
  CHECK(d.manifest.report.skipped[static_cast<std::size_t>(SkipReason::kUnresolvedGeo)] == 1);
}

TEST_CASE("reduce adds contributions") {
  SiteKey s{10, 20};
  TimeBin b = TimeBin::parse("2008", Granularity::kYear);
  Partial p;
  p.add_triple(s, b, "nanoparticle", Amount::from_double(2.0));
  p.add_triple(s, b, "nanoparticle", Amount::from_double(3.0));
  p.add_triple(SiteKey{11, 20}, b, "glacier", Amount::from_double(1.0));
  p.add_summary(s, b, Amount::from_double(5.0), 2);
  p.add_summary(SiteKey{11, 20}, b, Amount::from_double(1.0), 1);
  auto d = p.finalize("f", Granularity::kYear, {});
  REQUIRE(d.triples.size() == 2);
  CHECK(d.triples[0].phrase == "nanoparticle");
  CHECK(d.triples[0].weight == Amount::from_double(5.0));
  CHECK(d.triples[1].site == SiteKey{11, 20});
  CHECK(d.manifest.site_count == 2);
  CHECK(d.manifest.bins == std::vector<TimeBin>{b});
}

TEST_CASE("canonical order") {
  testing::MiniWorld w;
  auto cfg = testing::mini_config();
  auto d = run(batch(testing::random_records(300, 4)), 1, w.resources, cfg);
  for (std::size_t i = 1; i < d.triples.size(); ++i) {
    const auto& a = d.triples[i - 1];
    const auto& b = d.triples[i];
    auto ka = std::tie(a.site, a.bin);
    auto kb = std::tie(b.site, b.bin);
    CHECK(ka <= kb);
    if (ka == kb) CHECK((a.weight > b.weight || (a.weight == b.weight && a.phrase < b.phrase)));
  }
  CHECK(d.triples.size() > 100);
  CHECK(d.manifest.report.skipped_total() > 0);
  for (const auto& t : d.triples) CHECK(t.weight.units() > 0);
  // Every triple's (site, bin) has a summary.
  std::set<std::pair<SiteKey, TimeBin>> keys;
  for (const auto& s : d.summaries) keys.insert({s.site, s.bin});
  for (const auto& t : d.triples) CHECK(keys.count({t.site, t.bin}) == 1);
}

TEST_CASE("property: reduce is associative over random groupings") {
  testing::MiniWorld w;
  auto cfg = testing::mini_config();
  auto records = testing::random_records(200, 17);
  std::vector<MappedRecord> mapped;
  for (const auto& r : records) mapped.push_back(map_record(r, w.resources, cfg));
  auto whole = reduce(mapped).finalize("f", cfg.granularity, {});
  std::mt19937 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<MappedRecord> shuffled = mapped;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    std::size_t cut = rng() % shuffled.size();
    Partial a = reduce(std::span(shuffled).subspan(0, cut));
    Partial b = reduce(std::span(shuffled).subspan(cut));
    b.merge(a);
    CHECK(bytes(b.finalize("f", cfg.granularity, {})) == bytes(whole));
  }
}

TEST_CASE("run is independent of worker count") {
  testing::MiniWorld w;
  auto cfg = testing::mini_config();
  auto input = batch(testing::random_records(400, 8));
  auto one = bytes(run(input, 1, w.resources, cfg));
  for (int workers : {2, 3, 8}) CHECK(bytes(run(input, workers, w.resources, cfg)) == one);
  auto empty = run(RecordBatch{}, 4, w.resources, cfg);
  CHECK(empty.triples.empty());
  CHECK(empty.manifest.report.accepted == 0);
  CHECK(empty.manifest.fingerprint == fingerprint(cfg, w.resources));
}

TEST_CASE("append equals a full run") {
  testing::MiniWorld w;
  auto cfg = testing::mini_config();
  auto records = testing::random_records(300, 12);
  auto full = bytes(run(batch(records), 1, w.resources, cfg));
  std::mt19937 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Record> d1, d2;
    for (const auto& r : records) (rng() % 2 ? d1 : d2).push_back(r);
    auto base = run(batch(d1), 2, w.resources, cfg);
    CHECK(bytes(append(base, batch(d2), 3, w.resources, cfg)) == full);
  }
  auto ds = run(batch(records), 1, w.resources, cfg);
  CHECK(bytes(append(ds, RecordBatch{}, 1, w.resources, cfg)) == bytes(ds));
  auto changed = cfg;
  changed.params.top_k = 2;
  CHECK_THROWS_AS(append(ds, RecordBatch{}, 1, w.resources, changed), ConfigError);
}

TEST_CASE("conservation and per-record weight sums") {
  testing::MiniWorld w;
  auto cfg = testing::mini_config();
  cfg.granularity = Granularity::kMonth;
  auto records = testing::random_records(300, 99);
  auto d = run(batch(records), 4, w.resources, cfg);

  double expected = 0.0;
  for (const auto& r : records) {
    auto m = map_record(r, w.resources, cfg);
    if (m.skipped) continue;
    for (const auto& s : prorate(r.range, r.value, cfg.granularity)) expected += s.share;
    std::map<std::pair<SiteKey, TimeBin>, Amount> triple_sum;
    for (const auto& t : m.triples) triple_sum[{t.site, t.bin}] += t.weight;
    for (const auto& v : m.values) {
      auto it = triple_sum.find({v.site, v.bin});
      double got = it == triple_sum.end() ? 0.0 : it->second.to_double();
      // Each phrase share is rounded to 1e-9 on its own.
      CHECK(std::abs(got - v.value.to_double()) <= 4e-9 + 1e-12 * v.value.to_double());
    }
  }
  Amount total;
  for (const auto& s : d.summaries) total += s.total_value;
  CHECK(total.to_double() == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("shard files round trip and merge like run") {
  testing::MiniWorld w;
  auto cfg = testing::mini_config();
  auto records = testing::random_records(250, 5);
  auto direct = bytes(run(batch(records), 1, w.resources, cfg));

  std::vector<ShardFile> shards(3);
  for (std::size_t k = 0; k < 3; ++k) {
    std::vector<Record> part;
    for (std::size_t i = k; i < records.size(); i += 3) part.push_back(records[i]);
    ShardFile s;
    s.fingerprint = fingerprint(cfg, w.resources);
    s.granularity = cfg.granularity;
    s.config = cfg.to_json();
    s.partial = map_records(part, 2, w.resources, cfg);
    std::stringstream io;
    write_shard(s, io);
    std::string text = io.str();
    shards[k] = read_shard(io, "shard");
    std::stringstream again;
    write_shard(shards[k], again);
    CHECK(again.str() == text);
  }
  CHECK(bytes(merge_shards(shards)) == direct);
  std::vector<ShardFile> reversed(shards.rbegin(), shards.rend());
  CHECK(bytes(merge_shards(reversed)) == direct);

  shards[1].fingerprint = "0000000000000000";
  CHECK_THROWS_AS(merge_shards(shards), ConfigError);
  std::istringstream junk("#geoterms-shard\t1\nT\tx\n");
  CHECK_THROWS_AS(read_shard(junk, "junk"), ParseError);
}
