#include "geoterms/synth.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

namespace geoterms {

namespace {

// Multi-word technical phrases planted in documents.
constexpr const char* kTopicPhrases[] = {
    "magnetosphere dynamics",          "solar wind coupling",
    "undergraduate research experience", "information visualization technique",
    "nanoparticle synthesis",          "graphene transistor fabrication",
    "protein folding simulation",      "coral reef ecology",
    "seismic wave propagation",        "quantum dot photovoltaics",
    "k-12 science curriculum",         "machine learning classifier",
    "climate model ensemble",          "genome sequencing pipeline",
    "polymer membrane transport",      "dark matter detector",
    "wireless sensor network",         "hydrologic watershed model",
    "stem cell differentiation",       "ocean acidification",
    "high performance computing cluster", "combinatorial optimization",
    "neural circuit mapping",          "atmospheric aerosol chemistry",
    "plate tectonics",                 "microbial community assembly",
    "superconducting qubit coherence", "glacier mass balance",
    "topological insulator",           "cyberinfrastructure deployment",
    "catalytic hydrogen production",   "biodiversity survey",
    "fluid turbulence modeling",       "cryptographic protocol verification",
    "permafrost carbon release",       "laser spectroscopy",
    "social network analysis",         "robotic manipulation",
    "soil nitrogen cycling",           "galaxy cluster survey",
};

std::string capitalize(std::string s) {
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

}  // namespace

std::vector<Record> synthesize(const ReferenceCorpus& corpus, const SynthOptions& options) {
  std::mt19937_64 rng(options.seed);

  const auto words = corpus.words_by_rank();
  const std::size_t filler_count = std::min<std::size_t>(words.size(), 20000);
  std::vector<double> filler_weights(filler_count);
  for (std::size_t i = 0; i < filler_count; ++i) filler_weights[i] = static_cast<double>(corpus.frequency(words[i]));
  std::discrete_distribution<std::size_t> filler(filler_weights.begin(), filler_weights.end());

  std::vector<std::string> places = options.places;
  if (places.empty()) places.push_back("40.4249,-86.9162");
  std::vector<double> place_weights(places.size());
  for (std::size_t i = 0; i < places.size(); ++i) place_weights[i] = 1.0 / std::pow(static_cast<double>(i + 1), 0.8);
  std::discrete_distribution<std::size_t> place(place_weights.begin(), place_weights.end());

  constexpr std::size_t kTopics = std::size(kTopicPhrases);
  std::uniform_int_distribution<std::size_t> topic(0, kTopics - 1);
  std::uniform_int_distribution<int> topics_per_doc(2, 4);
  std::uniform_int_distribution<int> sentence_len(8, 20);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> year(options.first_year, options.last_year);
  std::uniform_int_distribution<int> day_of_year(0, 364);
  std::uniform_int_distribution<int> duration_days(180, 3 * 365);
  std::lognormal_distribution<double> amount(12.0, 1.0);

  std::vector<Record> out;
  out.reserve(options.documents);
  for (std::size_t d = 0; d < options.documents; ++d) {
    std::vector<std::string> doc_topics;
    const int n_topics = topics_per_doc(rng);
    for (int t = 0; t < n_topics; ++t) doc_topics.emplace_back(kTopicPhrases[topic(rng)]);

    const auto target = static_cast<std::size_t>(static_cast<double>(options.mean_chars) * (0.6 + 0.8 * unit(rng)));
    std::string text;
    text.reserve(target + 200);
    while (text.size() < target) {
      const int len = sentence_len(rng);
      std::string sentence;
      for (int w = 0; w < len; ++w) {
        std::string word = unit(rng) < 0.08 ? doc_topics[static_cast<std::size_t>(unit(rng) * n_topics)]
                                            : words[filler(rng)];
        if (!sentence.empty()) sentence.push_back(' ');
        sentence += word;
      }
      if (!text.empty()) text.push_back(' ');
      text += capitalize(sentence) + ".";
    }

    Record r;
    r.text = std::move(text);
    r.geo = places[place(rng)];
    using namespace std::chrono;
    sys_days start = sys_days(std::chrono::year(year(rng)) / January / 1) + days(day_of_year(rng));
    r.range.begin = Instant(start);
    r.range.end = unit(rng) < 0.3 ? r.range.begin : Instant(start + days(duration_days(rng)));
    r.value = std::round(amount(rng));
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace geoterms
