#pragma once

#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "geoterms/geocode.hpp"
#include "geoterms/pipeline.hpp"

namespace geoterms::testing {

// Small in-memory reference tables.
struct MiniWorld {
  ReferenceCorpus corpus = ReferenceCorpus::from_entries({{"the", 5000}, {"of", 4000}, {"and", 3500}, {"a", 3000},
                                                          {"in", 2500}, {"is", 2000}, {"my", 1500}, {"love", 900},
                                                          {"phone", 400}, {"data", 300}, {"new", 250}, {"model", 120},
                                                          {"wave", 60}, {"solar", 40}, {"plasma", 20}});
  ZipTable zips;
  Gazetteer gazetteer;
  GeoResolver resolver{nullptr, nullptr};
  Resources resources;

  MiniWorld() {
    std::istringstream z("zip,lat,lon\n47907,40.4249,-86.9162\n77005,29.7179,-95.4263\n");
    zips = ZipTable::parse(z, "zips");
    std::istringstream g(
        "Houston\tTX\tUS\t29.76328\t-95.36327\t2296224\n"
        "Seattle\tWA\tUS\t47.60621\t-122.33207\t737015\n"
        "Vancouver\tBC\tCA\t49.24966\t-123.11934\t600000\n");
    gazetteer = Gazetteer::parse(g, "gazetteer");
    resolver = GeoResolver(&zips, &gazetteer);
    resources.corpus = &corpus;
    resources.geo = &resolver;
    resources.geo_tables_hash = zips.content_hash() + ":" + gazetteer.content_hash();
  }
  MiniWorld(const MiniWorld&) = delete;
};

// Preset with a stop rank suited to the mini corpus ("the".."my").
inline PipelineConfig mini_config(std::string_view preset = "nsf") {
  PipelineConfig c = PipelineConfig::from_preset(preset);
  c.params.stop_rank = 7;
  return c;
}

inline Record make_record(std::string text, std::string geo, const std::string& t0, const std::string& t1 = "",
                          double value = 1.0) {
  Record r;
  r.text = std::move(text);
  r.geo = std::move(geo);
  r.range.begin = parse_timestamp(t0);
  r.range.end = t1.empty() ? r.range.begin : parse_timestamp(t1);
  r.value = value;
  return r;
}

// Random short records over the mini world's places, including some that skip.
inline std::vector<Record> random_records(std::size_t n, std::uint64_t seed) {
  static const std::vector<std::string> words{"plasma", "wave", "solar", "model", "data", "the", "of", "reu",
                                              "nanoparticle", "glacier", "magnetosphere", "ion", "new", "k-12"};
  static const std::vector<std::string> places{"Houston, TX", "Seattle, WA", "47907", "77005", "12.5,-33.25",
                                               "Vancouver, BC", "-0.00005,179.99995", "Nowhere, ZZ"};
  std::mt19937_64 rng(seed);
  std::vector<Record> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::string text;
    std::size_t len = rng() % 14;
    for (std::size_t k = 0; k < len; ++k) text += words[rng() % words.size()] + ((rng() % 5 == 0) ? ". " : " ");
    int y0 = 2005 + static_cast<int>(rng() % 6);
    std::string t0 = std::to_string(y0) + "-0" + std::to_string(1 + rng() % 9) + "-1" + std::to_string(rng() % 9);
    std::string t1 = rng() % 3 == 0 ? "" : std::to_string(y0 + static_cast<int>(rng() % 3)) + "-12-31T23:59:59Z";
    double value = (rng() % 10 == 0) ? 0.0 : static_cast<double>(rng() % 100000) / 7.0;
    out.push_back(make_record(text, places[rng() % places.size()], t0, t1, value));
  }
  return out;
}

}  // namespace geoterms::testing
