#include "geoterms/keyphrase.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "geoterms/error.hpp"

namespace geoterms {

void ExtractionParams::validate() const {
  if (max_ngram < 1 || max_ngram > 4) throw ConfigError("max_ngram must be in 1..4");
  if (top_k < 1) throw ConfigError("top_k must be >= 1");
  if (!(gamma >= 1.0) || !std::isfinite(gamma)) throw ConfigError("gamma must be >= 1");
  if (keyword_count < 1) throw ConfigError("keyword_count must be >= 1");
  if (stop_rank < 0) throw ConfigError("stop_rank must be >= 0");
}

std::string Keyphrase::display() const {
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out.push_back(' ');
    out += w;
  }
  return out;
}

std::map<std::string, double> word_weights(const PreparedText& prepared, const ReferenceCorpus& corpus,
                                           int stop_rank, RarityScorer scorer) {
  std::map<std::string, int> counts;
  std::size_t total = 0;
  for (const auto& sentence : prepared.sentences) {
    for (const auto& token : sentence) {
      ++counts[token];
      ++total;
    }
  }
  std::map<std::string, double> weights;
  for (const auto& [word, count] : counts) {
    if (corpus.is_stopword(word, stop_rank)) {
      weights.emplace(word, 0.0);
      continue;
    }
    double tf = static_cast<double>(count) / static_cast<double>(total);
    weights.emplace(word, tf * corpus.rarity(word, scorer));
  }
  return weights;
}

namespace {

// Shared window scan: a window qualifies when it starts and ends with a
// non-stopword and holds at least one keyword. Such windows are exactly the
// trimmed candidates, and counting them counts phrase occurrences.
template <typename IsStop, typename IsKeyword, typename Visit>
void scan_windows(const PreparedText& prepared, int n, IsStop is_stop, IsKeyword is_keyword, Visit visit) {
  for (const auto& sentence : prepared.sentences) {
    const std::size_t len = sentence.size();
    std::vector<char> stop(len);
    std::vector<char> key(len);
    for (std::size_t i = 0; i < len; ++i) {
      stop[i] = is_stop(i, sentence[i]);
      key[i] = is_keyword(i, sentence[i]);
    }
    for (std::size_t i = 0; i < len; ++i) {
      if (stop[i]) continue;
      bool has_key = false;
      for (std::size_t L = 1; L <= static_cast<std::size_t>(n) && i + L <= len; ++L) {
        std::size_t last = i + L - 1;
        has_key = has_key || key[last];
        if (has_key && !stop[last]) visit(sentence, i, L);
      }
    }
  }
}

}  // namespace

std::map<Phrase, int> candidate_phrases(const PreparedText& prepared, const std::set<std::string>& keywords,
                                        int n, const ReferenceCorpus& corpus, int stop_rank) {
  std::map<Phrase, int> out;
  if (keywords.empty() || n < 1) return out;
  scan_windows(
      prepared, n, [&](std::size_t, const std::string& w) { return corpus.is_stopword(w, stop_rank); },
      [&](std::size_t, const std::string& w) { return keywords.count(w) > 0; },
      [&](const Sentence& s, std::size_t i, std::size_t L) {
        ++out[Phrase(s.begin() + static_cast<std::ptrdiff_t>(i), s.begin() + static_cast<std::ptrdiff_t>(i + L))];
      });
  return out;
}

namespace {

bool contains_contiguous(const Phrase& haystack, const Phrase& needle) {
  if (needle.size() > haystack.size()) return false;
  return std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end()) != haystack.end();
}

struct Scored {
  Phrase words;
  double score = 0.0;
};

}  // namespace

std::vector<Keyphrase> extract(const PreparedText& prepared, const ReferenceCorpus& corpus,
                               const ExtractionParams& params) {
  params.validate();
  if (prepared.total_tokens() == 0) return {};

  // (1) keywords: top-m positive-weight words, ties lexicographic.
  const auto weights = word_weights(prepared, corpus, params.stop_rank, params.scorer);
  std::vector<std::pair<std::string, double>> ranked;
  for (const auto& [word, weight] : weights) {
    if (weight > 0.0) ranked.emplace_back(word, weight);
  }
  if (ranked.empty()) return {};
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (ranked.size() > static_cast<std::size_t>(params.keyword_count)) ranked.resize(params.keyword_count);
  std::set<std::string> keywords;
  for (const auto& [word, _] : ranked) keywords.insert(word);

  // (2) candidates with occurrence counts.
  const auto candidates = candidate_phrases(prepared, keywords, params.max_ngram, corpus, params.stop_rank);

  // (3) score = count * sum of word weights * gamma^(len - 1).
  std::vector<Scored> scored;
  scored.reserve(candidates.size());
  for (const auto& [phrase, count] : candidates) {
    double sum = 0.0;
    for (const auto& w : phrase) sum += weights.at(w);
    double score = static_cast<double>(count) * sum * std::pow(params.gamma, static_cast<double>(phrase.size() - 1));
    scored.push_back({phrase, score});
  }

  // (4) heaviest first, then longer, then lexicographic.
  std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.words.size() != b.words.size()) return a.words.size() > b.words.size();
    return a.words < b.words;
  });

  // (5) keep top_k, skipping fragments of phrases already kept.
  std::vector<Keyphrase> kept;
  for (auto& candidate : scored) {
    if (kept.size() == static_cast<std::size_t>(params.top_k)) break;
    if (!(candidate.score > 0.0)) break;
    bool fragment = std::any_of(kept.begin(), kept.end(), [&](const Keyphrase& k) {
      return contains_contiguous(k.words, candidate.words);
    });
    if (fragment) continue;
    kept.push_back({std::move(candidate.words), candidate.score});
  }
  double total = 0.0;
  for (const auto& k : kept) total += k.weight;
  for (auto& k : kept) k.weight /= total;
  return kept;
}

}  // namespace geoterms
