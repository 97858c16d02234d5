#pragma once

// Brute-force reference for keyphrase extraction. Written from the scoring
// rules directly, sharing no code with the library beyond corpus lookups.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "geoterms/corpus.hpp"
#include "geoterms/keyphrase.hpp"

namespace geoterms::testing {

struct OraclePhrase {
  std::vector<std::string> words;
  double weight = 0.0;
};

inline bool oracle_stop(const ReferenceCorpus& c, const std::string& w, int stop_rank) {
  if (w.size() < 2) return true;
  if (std::all_of(w.begin(), w.end(), [](char ch) { return ch >= '0' && ch <= '9'; })) return true;
  auto r = c.rank(w);
  return r && static_cast<int>(*r) <= stop_rank;
}

inline double oracle_rarity(const ReferenceCorpus& c, const std::string& w) {
  return std::log((static_cast<double>(c.total_tokens()) + 1.0) / (static_cast<double>(c.frequency(w)) + 1.0));
}

inline std::map<std::string, double> oracle_word_weights(const std::vector<std::vector<std::string>>& doc,
                                                         const ReferenceCorpus& c, int stop_rank) {
  std::map<std::string, int> counts;
  int total = 0;
  for (const auto& s : doc) {
    for (const auto& w : s) {
      ++counts[w];
      ++total;
    }
  }
  std::map<std::string, double> out;
  for (const auto& [w, k] : counts) {
    out[w] = oracle_stop(c, w, stop_rank) ? 0.0 : (static_cast<double>(k) / total) * oracle_rarity(c, w);
  }
  return out;
}

inline std::vector<OraclePhrase> oracle_extract(const std::vector<std::vector<std::string>>& doc,
                                                const ReferenceCorpus& c, const ExtractionParams& p) {
  auto ww = oracle_word_weights(doc, c, p.stop_rank);

  std::vector<std::pair<std::string, double>> ranked(ww.begin(), ww.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::set<std::string> keywords;
  for (const auto& [w, v] : ranked) {
    if (static_cast<int>(keywords.size()) == p.keyword_count) break;
    if (v > 0) keywords.insert(w);
  }

  // Every window, trimmed of stopword ends, that still holds a keyword.
  std::set<std::vector<std::string>> candidates;
  for (const auto& s : doc) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      for (std::size_t len = 1; len <= static_cast<std::size_t>(p.max_ngram) && i + len <= s.size(); ++len) {
        std::size_t a = i, b = i + len;
        bool has_keyword = false;
        for (std::size_t k = a; k < b; ++k) has_keyword |= keywords.count(s[k]) > 0;
        if (!has_keyword) continue;
        while (a < b && oracle_stop(c, s[a], p.stop_rank)) ++a;
        while (b > a && oracle_stop(c, s[b - 1], p.stop_rank)) --b;
        if (a < b) candidates.insert(std::vector<std::string>(s.begin() + a, s.begin() + b));
      }
    }
  }

  auto occurrences = [&](const std::vector<std::string>& phrase) {
    int n = 0;
    for (const auto& s : doc) {
      for (std::size_t i = 0; i + phrase.size() <= s.size(); ++i) {
        if (std::equal(phrase.begin(), phrase.end(), s.begin() + i)) ++n;
      }
    }
    return n;
  };

  std::vector<OraclePhrase> scored;
  for (const auto& phrase : candidates) {
    double sum = 0.0;
    for (const auto& w : phrase) sum += ww[w];
    double score = occurrences(phrase) * sum * std::pow(p.gamma, static_cast<double>(phrase.size()) - 1.0);
    scored.push_back({phrase, score});
  }
  std::sort(scored.begin(), scored.end(), [](const OraclePhrase& a, const OraclePhrase& b) {
    if (a.weight != b.weight) return a.weight > b.weight;
    if (a.words.size() != b.words.size()) return a.words.size() > b.words.size();
    return a.words < b.words;
  });

  auto inside = [](const std::vector<std::string>& small, const std::vector<std::string>& big) {
    return std::search(big.begin(), big.end(), small.begin(), small.end()) != big.end();
  };
  std::vector<OraclePhrase> kept;
  for (const auto& cand : scored) {
    if (static_cast<int>(kept.size()) == p.top_k) break;
    bool covered = std::any_of(kept.begin(), kept.end(), [&](const OraclePhrase& k) { return inside(cand.words, k.words); });
    if (!covered) kept.push_back(cand);
  }
  double total = 0.0;
  for (const auto& k : kept) total += k.weight;
  for (auto& k : kept) k.weight /= total;
  return kept;
}

}  // namespace geoterms::testing
