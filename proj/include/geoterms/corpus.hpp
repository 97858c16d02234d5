#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace geoterms {

// How corpus frequency turns into a word's rarity score.
enum class RarityScorer {
  // ln((F + 1) / (f(w) + 1)), f = 0 for unknown words.
  kLogInverseFrequency,
  // ln(1 + rank(w)), unknown words take rank V + 1.
  kLogRank,
};

std::string_view to_string(RarityScorer scorer);
RarityScorer parse_rarity_scorer(std::string_view name);

// Immutable word -> frequency table from a general-language reference corpus.
//
// Ranks run 1..V by descending frequency; equal frequencies are ranked
// lexicographically by word. Safe to share across threads once built.
class ReferenceCorpus {
 public:
  struct Entry {
    std::uint64_t frequency = 0;
    std::uint32_t rank = 0;
  };

  // Reads `word<TAB>frequency` lines. Words are lowercased. Throws ParseError
  // on malformed lines, duplicate words or an empty file, IoError when the
  // file cannot be opened.
  static ReferenceCorpus load(const std::filesystem::path& path);
  static ReferenceCorpus parse(std::istream& in, const std::string& source_name);
  static ReferenceCorpus from_entries(std::vector<std::pair<std::string, std::uint64_t>> entries);

  // 0 for out-of-vocabulary words.
  std::uint64_t frequency(std::string_view word) const;
  std::optional<std::uint32_t> rank(std::string_view word) const;
  bool contains(std::string_view word) const { return find(word) != nullptr; }

  std::uint64_t total_tokens() const { return total_tokens_; }
  // Words ordered by rank (most frequent first).
  std::vector<std::string> words_by_rank() const;
  std::size_t vocab_size() const { return entries_.size(); }

  // Hash of the source bytes (or of the canonical entry list when built in
  // memory); part of the pipeline configuration fingerprint.
  const std::string& content_hash() const { return content_hash_; }

  double rarity(std::string_view word,
                RarityScorer scorer = RarityScorer::kLogInverseFrequency) const;

  // True for in-vocabulary words with rank <= stop_rank, tokens shorter than
  // two bytes and all-digit tokens.
  bool is_stopword(std::string_view word, int stop_rank) const;

 private:
  struct StringHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const { return std::hash<std::string_view>{}(s); }
  };

  const Entry* find(std::string_view word) const;
  void assign_ranks();

  std::unordered_map<std::string, Entry, StringHash, std::equal_to<>> entries_;
  std::uint64_t total_tokens_ = 0;
  std::string content_hash_;
};

}  // namespace geoterms
