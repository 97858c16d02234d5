#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "geoterms/corpus.hpp"

namespace geoterms {

using Sentence = std::vector<std::string>;

// A document as sentences of lowercased, punctuation-free tokens.
struct PreparedText {
  std::vector<Sentence> sentences;

  std::size_t total_tokens() const;
  bool empty() const { return sentences.empty(); }
};

// Splits text into sentences and tokens.
//
// Sentences end at a token whose last character is '.', '!' or '?' (closing
// quotes and brackets ignored). Tokens are ASCII-lowercased; '.' inside a token
// is dropped ("U.S." -> "us"), hyphens and apostrophes survive only between
// word characters, and any other punctuation separates tokens. With
// strip_urls, whitespace-delimited tokens that look like URLs (scheme://... or
// www....) are removed before tokenizing.
PreparedText prepare(std::string_view text, bool strip_urls);

bool is_url(std::string_view token);

// False when raw has any non-ASCII byte, when there are no tokens, or when
// strictly more than half of the tokens are missing from the corpus.
bool is_english(const PreparedText& prepared, std::string_view raw, const ReferenceCorpus& corpus);

// True when any term occurs as a whole token; an empty term list disables the
// filter and always matches.
bool matches_topic(const PreparedText& prepared, std::span<const std::string> terms);

}  // namespace geoterms
