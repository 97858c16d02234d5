#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "geoterms/corpus.hpp"
#include "geoterms/textprep.hpp"

namespace geoterms {

struct ExtractionParams {
  int max_ngram = 4;
  int top_k = 4;
  // Multiplier applied once per extra word, so long phrases can compete with
  // their more frequent fragments.
  double gamma = 1.2;
  // Number of single keywords that seed phrase formation.
  int keyword_count = 8;
  int stop_rank = 150;
  RarityScorer scorer = RarityScorer::kLogInverseFrequency;

  // Throws ConfigError when a field is out of range.
  void validate() const;

  friend bool operator==(const ExtractionParams&, const ExtractionParams&) = default;
};

struct Keyphrase {
  std::vector<std::string> words;
  double weight = 0.0;

  std::string display() const;

  friend bool operator==(const Keyphrase&, const Keyphrase&) = default;
};

using Phrase = std::vector<std::string>;

// tf x rarity per distinct token, tf normalized by document length. Stopwords
// map to 0.
std::map<std::string, double> word_weights(const PreparedText& prepared,
                                           const ReferenceCorpus& corpus,
                                           int stop_rank,
                                           RarityScorer scorer = RarityScorer::kLogInverseFrequency);

// Every within-sentence window of 1..n tokens that contains a keyword, trimmed
// of leading and trailing stopwords, with the number of times the trimmed
// phrase occurs in the document.
std::map<Phrase, int> candidate_phrases(const PreparedText& prepared,
                                        const std::set<std::string>& keywords,
                                        int n,
                                        const ReferenceCorpus& corpus,
                                        int stop_rank);

// Top keyphrases of one document, weights normalized to sum to 1. Depends only
// on the document, the corpus and params.
std::vector<Keyphrase> extract(const PreparedText& prepared,
                               const ReferenceCorpus& corpus,
                               const ExtractionParams& params);

}  // namespace geoterms
