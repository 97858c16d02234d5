#include "geoterms/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <sstream>

#include "geoterms/error.hpp"
#include "geoterms/hash.hpp"

namespace geoterms {

namespace {

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c);
  });
  return out;
}

}  // namespace

std::string_view to_string(RarityScorer scorer) {
  switch (scorer) {
    case RarityScorer::kLogInverseFrequency:
      return "log_inverse_frequency";
    case RarityScorer::kLogRank:
      return "log_rank";
  }
  return "?";
}

RarityScorer parse_rarity_scorer(std::string_view name) {
  if (name == "log_inverse_frequency") return RarityScorer::kLogInverseFrequency;
  if (name == "log_rank") return RarityScorer::kLogRank;
  throw ConfigError("unknown rarity scorer '" + std::string(name) + "'");
}

ReferenceCorpus ReferenceCorpus::load(const std::filesystem::path& path) {
  std::string bytes = read_file(path);
  std::istringstream in(bytes);
  ReferenceCorpus corpus = parse(in, path.string());
  corpus.content_hash_ = hash_bytes(bytes);
  return corpus;
}

ReferenceCorpus ReferenceCorpus::parse(std::istream& in, const std::string& source_name) {
  ReferenceCorpus corpus;
  Fnv1a h;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    h.update(line);
    h.update("\n");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw ParseError(source_name, line_no, "expected word<TAB>frequency");
    }
    std::string_view count_text = std::string_view(line).substr(tab + 1);
    std::uint64_t frequency = 0;
    auto [ptr, ec] = std::from_chars(count_text.data(), count_text.data() + count_text.size(), frequency);
    if (ec != std::errc() || ptr != count_text.data() + count_text.size() || frequency == 0) {
      throw ParseError(source_name, line_no, "frequency must be a positive integer");
    }
    std::string word = lowercase(std::string_view(line).substr(0, tab));
    if (!corpus.entries_.emplace(word, Entry{frequency, 0}).second) {
      throw ParseError(source_name, line_no, "duplicate word '" + word + "'");
    }
    corpus.total_tokens_ += frequency;
  }
  if (corpus.entries_.empty()) throw ParseError(source_name, line_no, "empty corpus");
  corpus.assign_ranks();
  corpus.content_hash_ = h.hex();
  return corpus;
}

ReferenceCorpus ReferenceCorpus::from_entries(
    std::vector<std::pair<std::string, std::uint64_t>> entries) {
  std::ostringstream text;
  for (const auto& [word, frequency] : entries) text << word << '\t' << frequency << '\n';
  std::istringstream in(text.str());
  return parse(in, "<memory>");
}

void ReferenceCorpus::assign_ranks() {
  std::vector<std::pair<const std::string*, Entry*>> order;
  order.reserve(entries_.size());
  for (auto& [word, entry] : entries_) order.emplace_back(&word, &entry);
  std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
    if (a.second->frequency != b.second->frequency) return a.second->frequency > b.second->frequency;
    return *a.first < *b.first;
  });
  for (std::size_t i = 0; i < order.size(); ++i) order[i].second->rank = static_cast<std::uint32_t>(i + 1);
}

std::vector<std::string> ReferenceCorpus::words_by_rank() const {
  std::vector<std::string> words(entries_.size());
  for (const auto& [word, entry] : entries_) words[entry.rank - 1] = word;
  return words;
}

const ReferenceCorpus::Entry* ReferenceCorpus::find(std::string_view word) const {
  auto it = entries_.find(word);
  return it == entries_.end() ? nullptr : &it->second;
}

std::uint64_t ReferenceCorpus::frequency(std::string_view word) const {
  const Entry* e = find(word);
  return e ? e->frequency : 0;
}

std::optional<std::uint32_t> ReferenceCorpus::rank(std::string_view word) const {
  const Entry* e = find(word);
  if (!e) return std::nullopt;
  return e->rank;
}

double ReferenceCorpus::rarity(std::string_view word, RarityScorer scorer) const {
  const Entry* e = find(word);
  switch (scorer) {
    case RarityScorer::kLogInverseFrequency: {
      double f = e ? static_cast<double>(e->frequency) : 0.0;
      return std::log((static_cast<double>(total_tokens_) + 1.0) / (f + 1.0));
    }
    case RarityScorer::kLogRank: {
      double r = e ? e->rank : static_cast<double>(entries_.size() + 1);
      return std::log(1.0 + r);
    }
  }
  return 0.0;
}

bool ReferenceCorpus::is_stopword(std::string_view word, int stop_rank) const {
  if (word.size() < 2) return true;
  if (std::all_of(word.begin(), word.end(), [](char c) { return c >= '0' && c <= '9'; })) return true;
  const Entry* e = find(word);
  return e && e->rank <= static_cast<std::uint32_t>(std::max(stop_rank, 0));
}

}  // namespace geoterms
