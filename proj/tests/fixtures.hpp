#pragma once

// Deterministic synthetic fixtures shared by the unit and acceptance suites.

#include <algorithm>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "elsa/mcq.hpp"
#include "elsa/tune.hpp"
#include "elsa/vsm.hpp"

namespace elsa::fixture {

/// mt19937 output is fully specified by the standard; the distributions are
/// not, so draws are reduced by hand to stay identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint32_t seed) : engine_(seed) {}

  std::size_t below(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }

  /// Uniform in [0, 1).
  double unit() { return static_cast<double>(engine_() >> 5) / 134217728.0; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

  /// `count` distinct indices from [0, n), in draw order.
  std::vector<std::size_t> sample(std::size_t n, std::size_t count) {
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;
    for (std::size_t i = 0; i < count; ++i) std::swap(pool[i], pool[i + below(n - i)]);
    pool.resize(count);
    return pool;
  }

 private:
  std::mt19937 engine_;
};

/// Pronounceable pseudo-word for an index: three consonant-vowel syllables.
/// No generated word ends in 's', so a ("", "s") plural rule never merges
/// two generated words.
inline std::string pseudo_word(std::size_t index) {
  static const std::string consonants = "bdfgklmnprtvz";
  static const std::string vowels = "aeiou";
  std::string w;
  for (int syllable = 0; syllable < 3; ++syllable) {
    const std::size_t s = index % 65;
    index /= 65;
    w += consonants[s / 5];
    w += vowels[s % 5];
  }
  return w;
}

/// Two-topic corpus with a questionnaire whose correct answers share topic
/// vocabulary (but no literal word) with their stems, while one distractor
/// per question repeats a stem word next to off-topic vocabulary.
struct TopicFixture {
  Corpus corpus;
  std::vector<Question> mcq;
  Lexicon lexicon;
  RunConfig best;  // best-style settings; k filled in by a scan
};

struct TopicFixtureParams {
  std::uint32_t seed = 7;
  std::size_t docs_per_topic = 10;
  std::size_t topic_words = 95;
  std::size_t shared_words = 10;
  std::size_t words_per_doc = 30;
  std::size_t questions = 10;
};

inline TopicFixture make_topic_fixture(const TopicFixtureParams& p = {}) {
  Rng rng(p.seed);
  const std::vector<std::string> stop = {"the", "of", "and", "is", "a"};
  auto topic_word = [&](std::size_t topic, std::size_t i) {
    return pseudo_word(1000 + topic * p.topic_words + i);
  };
  auto shared_word = [&](std::size_t i) { return pseudo_word(5000 + i); };

  TopicFixture f;
  f.corpus.name = "topics";
  for (std::size_t topic = 0; topic < 2; ++topic) {
    for (std::size_t d = 0; d < p.docs_per_topic; ++d) {
      std::string body;
      auto add = [&](const std::string& w) { body += (body.empty() ? "" : " ") + w; };
      for (std::size_t i : rng.sample(p.topic_words, p.words_per_doc)) {
        const std::size_t reps = 1 + rng.below(3);
        for (std::size_t r = 0; r < reps; ++r) add(topic_word(topic, i));
        add(stop[rng.below(stop.size())]);
      }
      for (std::size_t i : rng.sample(p.shared_words, 3)) add(shared_word(i));
      f.corpus.documents.push_back({"topic " + topic_word(topic, d), body + "."});
    }
  }

  for (std::size_t qi = 0; qi < p.questions; ++qi) {
    const std::size_t topic = qi % 2;
    const std::size_t other = 1 - topic;
    const auto own = rng.sample(p.topic_words, 7);
    const auto off = rng.sample(p.topic_words, 4);
    Question q;
    q.id = std::to_string(qi + 1);
    q.stem = "What is the " + topic_word(topic, own[0]) + " of the " + topic_word(topic, own[1]) +
             " and " + topic_word(topic, own[2]) + "?";
    const std::string correct = "The " + topic_word(topic, own[3]) + "s and the " +
                                topic_word(topic, own[4]) + " of " + topic_word(topic, own[5]) + ".";
    const std::string tricky = "The " + topic_word(topic, own[0]) + " of the " +
                               topic_word(other, off[0]) + " and " + topic_word(other, off[1]) + ".";
    const std::string plain = "A " + topic_word(other, off[2]) + " is " + topic_word(other, off[3]) + ".";
    const std::size_t slot = rng.below(3);
    q.correct = static_cast<int>(slot) + 1;
    std::vector<std::string> wrong = {tricky, plain};
    if (rng.below(2) == 1) std::swap(wrong[0], wrong[1]);
    for (std::size_t a = 0, w = 0; a < kAnswers; ++a) {
      q.answers[a] = a == slot ? correct : wrong[w++];
    }
    f.mcq.push_back(std::move(q));
  }

  f.lexicon.rules = {SuffixRule("", "s")};
  f.lexicon.stop_words = {stop.begin(), stop.end()};
  f.lexicon.min_stem = 3;
  f.best.joint_lemmatization = true;
  f.best.use_stoplist = true;
  f.best.three_set = true;
  return f;
}

}  // namespace elsa::fixture
