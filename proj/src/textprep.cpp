#include "geoterms/textprep.hpp"

#include <algorithm>
#include <cstdint>

namespace geoterms {

namespace {

enum class CharClass { kSpace, kWord, kJoiner, kDot, kSeparator };

struct CodePoint {
  char32_t value = 0;
  std::size_t length = 1;
};

// Lenient UTF-8 decoder: an invalid byte decodes to itself with length 1.
CodePoint decode(std::string_view s, std::size_t i) {
  auto b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) return {b0, 1};
  std::size_t len = b0 >= 0xF0 ? 4 : b0 >= 0xE0 ? 3 : b0 >= 0xC0 ? 2 : 0;
  if (len == 0 || i + len > s.size()) return {b0, 1};
  char32_t cp = b0 & (0xFF >> (len + 1));
  for (std::size_t k = 1; k < len; ++k) {
    auto b = static_cast<unsigned char>(s[i + k]);
    if ((b & 0xC0) != 0x80) return {b0, 1};
    cp = (cp << 6) | (b & 0x3F);
  }
  return {cp, len};
}

CharClass classify(char32_t cp) {
  if (cp < 0x80) {
    if (cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == '\f' || cp == '\v') {
      return CharClass::kSpace;
    }
    if ((cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') || (cp >= '0' && cp <= '9')) {
      return CharClass::kWord;
    }
    if (cp == '-' || cp == '\'') return CharClass::kJoiner;
    if (cp == '.') return CharClass::kDot;
    return CharClass::kSeparator;
  }
  if (cp == 0xA0 || (cp >= 0x2000 && cp <= 0x200B) || cp == 0x3000) return CharClass::kSpace;
  if (cp == 0x2010 || cp == 0x2011 || cp == 0x2018 || cp == 0x2019) return CharClass::kJoiner;
  if ((cp >= 0xA1 && cp <= 0xBF) || cp == 0xD7 || cp == 0xF7 || (cp >= 0x2012 && cp <= 0x206F) ||
      (cp >= 0x3001 && cp <= 0x303F)) {
    return CharClass::kSeparator;
  }
  return CharClass::kWord;
}

bool is_closing(char32_t cp) {
  return cp == ')' || cp == ']' || cp == '}' || cp == '"' || cp == '\'' || cp == 0x201D ||
         cp == 0x2019 || cp == 0xBB;
}

bool is_terminal(char32_t cp) { return cp == '.' || cp == '!' || cp == '?' || cp == 0x2026; }

std::vector<CodePoint> code_points(std::string_view s) {
  std::vector<CodePoint> out;
  for (std::size_t i = 0; i < s.size();) {
    CodePoint cp = decode(s, i);
    out.push_back(cp);
    i += cp.length;
  }
  return out;
}

bool ends_sentence(const std::vector<char32_t>& cps) {
  auto it = cps.rbegin();
  while (it != cps.rend() && is_closing(*it)) ++it;
  return it != cps.rend() && is_terminal(*it);
}

void append_code_point(std::string& out, std::string_view raw, std::size_t offset, std::size_t length) {
  for (std::size_t k = 0; k < length; ++k) {
    char c = raw[offset + k];
    out.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : c);
  }
}

// Splits one whitespace-free chunk into tokens.
void tokenize_chunk(std::string_view raw, Sentence& sentence) {
  std::vector<std::pair<CodePoint, std::size_t>> cps;  // code point, byte offset
  for (std::size_t i = 0; i < raw.size();) {
    CodePoint cp = decode(raw, i);
    cps.emplace_back(cp, i);
    i += cp.length;
  }
  std::string word;
  auto flush = [&] {
    if (!word.empty()) sentence.push_back(std::move(word));
    word.clear();
  };
  for (std::size_t k = 0; k < cps.size(); ++k) {
    const auto& [cp, offset] = cps[k];
    switch (classify(cp.value)) {
      case CharClass::kWord:
        append_code_point(word, raw, offset, cp.length);
        break;
      case CharClass::kJoiner: {
        bool next_is_word = k + 1 < cps.size() && classify(cps[k + 1].first.value) == CharClass::kWord;
        bool prev_is_word = !word.empty() && word.back() != '-' && word.back() != '\'';
        if (prev_is_word && next_is_word) {
          word.push_back(cp.value == 0x2010 || cp.value == 0x2011 || cp.value == '-' ? '-' : '\'');
        }
        break;
      }
      case CharClass::kDot:
        break;
      case CharClass::kSpace:
      case CharClass::kSeparator:
        flush();
        break;
    }
  }
  flush();
}

}  // namespace

std::size_t PreparedText::total_tokens() const {
  std::size_t n = 0;
  for (const auto& s : sentences) n += s.size();
  return n;
}

bool is_url(std::string_view token) {
  while (!token.empty() && (token.front() == '(' || token.front() == '"' || token.front() == '\'' ||
                            token.front() == '<' || token.front() == '[')) {
    token.remove_prefix(1);
  }
  auto lower_prefix = [&](std::string_view prefix) {
    if (token.size() < prefix.size()) return false;
    for (std::size_t i = 0; i < prefix.size(); ++i) {
      char c = token[i];
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
      if (c != prefix[i]) return false;
    }
    return true;
  };
  if (lower_prefix("www.")) return true;
  auto sep = token.find("://");
  if (sep == std::string_view::npos || sep == 0) return false;
  auto alpha = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); };
  if (!alpha(token[0])) return false;
  return std::all_of(token.begin(), token.begin() + static_cast<std::ptrdiff_t>(sep), [&](char c) {
    return alpha(c) || (c >= '0' && c <= '9') || c == '+' || c == '.' || c == '-';
  });
}

PreparedText prepare(std::string_view text, bool strip_urls) {
  PreparedText out;
  Sentence current;
  auto cps = code_points(text);

  std::size_t offset = 0;
  std::size_t k = 0;
  while (k < cps.size()) {
    while (k < cps.size() && classify(cps[k].value) == CharClass::kSpace) {
      offset += cps[k].length;
      ++k;
    }
    if (k == cps.size()) break;
    std::size_t chunk_begin = offset;
    std::vector<char32_t> chunk_cps;
    while (k < cps.size() && classify(cps[k].value) != CharClass::kSpace) {
      chunk_cps.push_back(cps[k].value);
      offset += cps[k].length;
      ++k;
    }
    std::string_view chunk = text.substr(chunk_begin, offset - chunk_begin);
    if (!(strip_urls && is_url(chunk))) tokenize_chunk(chunk, current);
    if (ends_sentence(chunk_cps) && !current.empty()) {
      out.sentences.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) out.sentences.push_back(std::move(current));
  return out;
}

bool is_english(const PreparedText& prepared, std::string_view raw, const ReferenceCorpus& corpus) {
  if (std::any_of(raw.begin(), raw.end(), [](char c) { return static_cast<unsigned char>(c) >= 0x80; })) {
    return false;
  }
  std::size_t total = 0;
  std::size_t unmatched = 0;
  for (const auto& sentence : prepared.sentences) {
    for (const auto& token : sentence) {
      ++total;
      if (!corpus.contains(token)) ++unmatched;
    }
  }
  if (total == 0) return false;
  return unmatched * 2 <= total;
}

bool matches_topic(const PreparedText& prepared, std::span<const std::string> terms) {
  if (terms.empty()) return true;
  for (const auto& sentence : prepared.sentences) {
    for (const auto& token : sentence) {
      if (std::find(terms.begin(), terms.end(), token) != terms.end()) return true;
    }
  }
  return false;
}

}  // namespace geoterms
