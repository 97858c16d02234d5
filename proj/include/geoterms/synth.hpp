#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "geoterms/corpus.hpp"
#include "geoterms/pipeline.hpp"

namespace geoterms {

struct SynthOptions {
  std::size_t documents = 1000;
  // Mean characters per document.
  std::size_t mean_chars = 1829;
  std::uint64_t seed = 1;
  int first_year = 2000;
  int last_year = 2012;
  // Geo references drawn from these (zip codes, place names or "lat,lon").
  std::vector<std::string> places;
};

// Deterministic synthetic documents: Zipf-distributed filler words from the
// corpus interleaved with a few multi-word technical phrases per document.
std::vector<Record> synthesize(const ReferenceCorpus& corpus, const SynthOptions& options);

}  // namespace geoterms
