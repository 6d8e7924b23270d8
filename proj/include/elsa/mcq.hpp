#pragma once

// Multiple choice questions: parsing, bag-of-words undecidability, 3-set
// entropy weighting of answers and answer selection.

#include <array>
#include <cctype>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "elsa/csv.hpp"
#include "elsa/entropy.hpp"
#include "elsa/error.hpp"
#include "elsa/space.hpp"
#include "elsa/text.hpp"
#include "elsa/vsm.hpp"

namespace elsa {

inline constexpr std::size_t kAnswers = 3;

struct ManualFlags {
  bool out_of_subject = false;
  bool uncorrelated = false;

  bool any() const { return out_of_subject || uncorrelated; }
  friend bool operator==(const ManualFlags&, const ManualFlags&) = default;
};

struct Question {
  std::string id;
  std::string stem;
  std::array<std::string, kAnswers> answers;
  int correct = 1;  // 1-based
  ManualFlags flags;
};

// ---------------------------------------------------------------------------
// Parsing
//
//   Q <id>
//   <stem, one or more lines>
//   A1 <answer>
//   A2 <answer>
//   A3 <answer>
//   CORRECT <1|2|3>
//   FLAGS <out_of_subject|uncorrelated>[,...]     (optional)
//
// Questions are separated by blank lines; '#' lines are comments.

namespace detail {

inline bool keyword(std::string_view line, std::string_view kw, std::string& rest) {
  if (line.substr(0, kw.size()) != kw) return false;
  if (line.size() > kw.size() && line[kw.size()] != ' ' && line[kw.size()] != '\t') return false;
  rest = trim(line.substr(kw.size()));
  return true;
}

}  // namespace detail

inline std::vector<Question> parse_mcq(std::istream& in, const std::string& source = "mcq") {
  std::vector<Question> questions;
  std::set<std::string> ids;

  struct Block {
    Question q;
    std::size_t first_line = 0;
    std::size_t answers = 0;
    bool has_correct = false;
    bool in_stem = true;
  };
  std::optional<Block> block;

  auto finish = [&] {
    if (!block) return;
    const auto at = detail::where(source, block->first_line);
    if (block->answers != kAnswers) {
      throw ConfigError(at + "question " + block->q.id + ": expected 3 answers, found " +
                        std::to_string(block->answers));
    }
    if (!block->has_correct) {
      throw ConfigError(at + "question " + block->q.id + ": missing CORRECT line");
    }
    if (!ids.insert(block->q.id).second) {
      throw ConfigError(at + "duplicate question id " + block->q.id);
    }
    questions.push_back(std::move(block->q));
    block.reset();
  };

  std::string raw;
  std::size_t n = 0;
  while (std::getline(in, raw)) {
    ++n;
    const std::string line = detail::trim(raw);
    const auto at = detail::where(source, n);
    if (line.empty()) {
      finish();
      continue;
    }
    if (line.front() == '#') continue;

    std::string rest;
    if (detail::keyword(line, "Q", rest)) {
      finish();
      if (rest.empty()) throw ConfigError(at + "question id missing");
      block = Block{};
      block->q.id = rest;
      block->first_line = n;
      continue;
    }
    if (!block) throw ConfigError(at + "expected 'Q <id>'");

    bool matched_answer = false;
    for (std::size_t a = 0; a < kAnswers; ++a) {
      if (!detail::keyword(line, "A" + std::to_string(a + 1), rest)) continue;
      if (block->answers != a) {
        throw ConfigError(at + "answer A" + std::to_string(a + 1) + " out of order");
      }
      block->q.answers[a] = rest;
      block->answers = a + 1;
      block->in_stem = false;
      matched_answer = true;
    }
    if (matched_answer) continue;
    if (line.size() > 1 && line[0] == 'A' && std::isdigit(static_cast<unsigned char>(line[1]))) {
      throw ConfigError(at + "expected 3 answers (found '" + line.substr(0, 2) + "')");
    }

    if (detail::keyword(line, "CORRECT", rest)) {
      if (rest != "1" && rest != "2" && rest != "3") {
        throw ConfigError(at + "CORRECT must be 1, 2 or 3");
      }
      block->q.correct = rest[0] - '0';
      block->has_correct = true;
      block->in_stem = false;
      continue;
    }
    if (detail::keyword(line, "FLAGS", rest)) {
      std::stringstream list(rest);
      std::string flag;
      while (std::getline(list, flag, ',')) {
        flag = detail::trim(flag);
        if (flag == "out_of_subject") {
          block->q.flags.out_of_subject = true;
        } else if (flag == "uncorrelated") {
          block->q.flags.uncorrelated = true;
        } else {
          throw ConfigError(at + "unknown flag '" + flag + "'");
        }
      }
      block->in_stem = false;
      continue;
    }

    if (block->in_stem) {
      if (!block->q.stem.empty()) block->q.stem += '\n';
      block->q.stem += line;
    } else if (block->answers > 0 && !block->has_correct) {
      block->q.answers[block->answers - 1] += ' ' + line;  // continuation
    } else {
      throw ConfigError(at + "unexpected line after CORRECT");
    }
  }
  finish();
  return questions;
}

inline std::vector<Question> load_mcq(const std::string& path) {
  auto in = detail::open_input(path, "MCQ");
  return parse_mcq(in, path);
}

// ---------------------------------------------------------------------------
// Bags of words

/// Anything that can tell whether a term belongs to the corpus vocabulary.
template <class V>
concept TermVocabulary = requires(const V& v, const std::string& term) {
  { v.contains(term) } -> std::convertible_to<bool>;
};

/// Set of corpus terms (matrix rows).
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(const std::vector<std::string>& terms) : terms_(terms.begin(), terms.end()) {}
  bool contains(const std::string& term) const { return terms_.count(term) != 0; }
  std::size_t size() const { return terms_.size(); }

 private:
  std::set<std::string> terms_;
};

using Bag = std::map<std::string, std::uint32_t>;

/// Term multiset of a text after lemmatization, stop-word removal and
/// restriction to the corpus vocabulary.
template <TermVocabulary V>
Bag bag_of_words(std::string_view text, const V& vocabulary, const TermMap& term_map,
                 const StopList& stoplist) {
  Bag bag;
  for (const auto& token : tokenize(text)) {
    std::string term = term_map.term_of(token);
    if (stoplist.stops(term) || !vocabulary.contains(term)) continue;
    ++bag[std::move(term)];
  }
  return bag;
}

using AnswerWeights = std::map<std::string, double>;

/// Entropy global weighting over the three answers of one question, treated
/// as a three-document collection.
inline AnswerWeights three_set_entropy(const std::array<Bag, kAnswers>& answers) {
  std::map<std::string, std::array<double, kAnswers>> profile;
  for (std::size_t a = 0; a < kAnswers; ++a) {
    for (const auto& [term, f] : answers[a]) {
      profile.try_emplace(term, std::array<double, kAnswers>{})
          .first->second[a] = static_cast<double>(f);
    }
  }
  if (profile.empty()) throw Error("question unanswerable: no corpus terms");
  AnswerWeights w;
  for (const auto& [term, freqs] : profile) w.emplace(term, entropy_weight(freqs, kAnswers));
  return w;
}

enum class Decidability { decidable, hard, soft };

struct Undecidability {
  Decidability kind = Decidability::decidable;
  std::pair<int, int> answers{0, 0};  // 1-based, ascending; set unless decidable
};

/// Lexical test on the answers' term multisets: hard when the correct answer
/// equals an incorrect one, soft when the two incorrect answers are equal.
inline Undecidability classify_bags(const std::array<Bag, kAnswers>& bags, int correct) {
  const auto c = static_cast<std::size_t>(correct - 1);
  std::array<std::size_t, 2> wrong{};
  for (std::size_t a = 0, n = 0; a < kAnswers; ++a) {
    if (a != c) wrong[n++] = a;
  }
  auto pair_of = [](std::size_t x, std::size_t y) {
    return std::pair<int, int>(static_cast<int>(std::min(x, y)) + 1,
                               static_cast<int>(std::max(x, y)) + 1);
  };
  for (std::size_t w : wrong) {
    if (bags[c] == bags[w]) return {Decidability::hard, pair_of(c, w)};
  }
  if (bags[wrong[0]] == bags[wrong[1]]) return {Decidability::soft, pair_of(wrong[0], wrong[1])};
  return {};
}

template <TermVocabulary V>
std::array<Bag, kAnswers> answer_bags(const Question& q, const V& vocabulary,
                                      const TermMap& term_map, const StopList& stoplist) {
  std::array<Bag, kAnswers> bags;
  for (std::size_t a = 0; a < kAnswers; ++a) {
    bags[a] = bag_of_words(q.answers[a], vocabulary, term_map, stoplist);
  }
  return bags;
}

template <TermVocabulary V>
Undecidability detect_undecidability(const Question& q, const V& vocabulary,
                                     const TermMap& term_map, const StopList& stoplist) {
  return classify_bags(answer_bags(q, vocabulary, term_map, stoplist), q.correct);
}

// ---------------------------------------------------------------------------
// Answering

enum class VerdictStatus { answered, rejected_manual, hard_undecidable, soft_undecidable_answered };

inline std::string_view to_string(VerdictStatus s) {
  switch (s) {
    case VerdictStatus::answered: return "answered";
    case VerdictStatus::rejected_manual: return "rejected_manual";
    case VerdictStatus::hard_undecidable: return "hard_undecidable";
    case VerdictStatus::soft_undecidable_answered: return "soft_undecidable_answered";
  }
  return "?";
}

struct Verdict {
  std::string id;
  VerdictStatus status = VerdictStatus::answered;
  std::string reason;          // why a question was rejected or excluded
  std::optional<int> chosen;   // 1-based
  int correct_index = 1;
  // NaN where an answer has no usable pseudo-document.
  std::array<double, kAnswers> cosines{};
  std::array<double, kAnswers> angles{};
  bool correct = false;
  Undecidability undecidability;

  bool scored() const {
    return status == VerdictStatus::answered ||
           status == VerdictStatus::soft_undecidable_answered;
  }

  friend bool operator==(const Verdict& a, const Verdict& b) {
    auto same = [](const std::array<double, kAnswers>& x, const std::array<double, kAnswers>& y) {
      for (std::size_t i = 0; i < kAnswers; ++i) {
        if (!(x[i] == y[i] || (std::isnan(x[i]) && std::isnan(y[i])))) return false;
      }
      return true;
    };
    return a.id == b.id && a.status == b.status && a.reason == b.reason && a.chosen == b.chosen &&
           a.correct_index == b.correct_index && same(a.cosines, b.cosines) &&
           same(a.angles, b.angles) && a.correct == b.correct;
  }
};

struct AnswerOptions {
  LocalWeight local = LocalWeight::log1p;
  bool three_set = true;
};

/// Index of the largest finite value; the first one wins ties.
inline std::optional<int> argmax_first(const std::array<double, kAnswers>& values) {
  std::optional<int> best;
  for (std::size_t a = 0; a < kAnswers; ++a) {
    if (std::isnan(values[a])) continue;
    if (!best || values[a] > values[static_cast<std::size_t>(*best - 1)]) {
      best = static_cast<int>(a) + 1;
    }
  }
  return best;
}

/// Chooses the answer whose pseudo-document has the highest cosine with the
/// question's. `corpus_weights` are the global weights aligned with
/// `space.terms()`. The question is weighted like a corpus document; answers
/// use 3-set entropy instead of the corpus global weight when enabled.
inline Verdict answer_question(const Question& q, const SemanticSpace& space,
                               const GlobalWeights& corpus_weights, const TermMap& term_map,
                               const StopList& stoplist, const AnswerOptions& options = {}) {
  if (corpus_weights.size() != space.n_terms()) {
    throw Error("global weights do not match the space vocabulary");
  }
  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
  Verdict v;
  v.id = q.id;
  v.correct_index = q.correct;
  v.cosines.fill(kNaN);
  v.angles.fill(kNaN);

  if (q.flags.any()) {
    v.status = VerdictStatus::rejected_manual;
    v.reason = q.flags.out_of_subject ? "out of subject" : "uncorrelated";
    return v;
  }

  const auto bags = answer_bags(q, space, term_map, stoplist);
  v.undecidability = classify_bags(bags, q.correct);

  auto reject_empty = [&] {
    v.status = VerdictStatus::hard_undecidable;
    v.reason = "empty bag of words";
    return v;
  };

  auto corpus_weight = [&](const std::string& term) {
    return corpus_weights[*space.term_index(term)];
  };

  std::map<std::string, double> question_bow;
  for (const auto& [term, f] : bag_of_words(q.stem, space, term_map, stoplist)) {
    question_bow[term] = apply_local(options.local, f) * corpus_weight(term);
  }
  const PseudoDoc question = fold_in(question_bow, space);
  if (question.empty) return reject_empty();
  if (bags[0].empty() && bags[1].empty() && bags[2].empty()) return reject_empty();

  const AnswerWeights answer_weights =
      options.three_set ? three_set_entropy(bags) : AnswerWeights{};
  for (std::size_t a = 0; a < kAnswers; ++a) {
    std::map<std::string, double> bow;
    for (const auto& [term, f] : bags[a]) {
      const double global = options.three_set ? answer_weights.at(term) : corpus_weight(term);
      bow[term] = apply_local(options.local, f) * global;
    }
    const PseudoDoc answer = fold_in(bow, space);
    if (answer.empty) continue;
    v.cosines[a] = cosine(question, answer);
    v.angles[a] = std::acos(v.cosines[a]);
  }

  v.chosen = argmax_first(v.cosines);
  if (!v.chosen) return reject_empty();

  switch (v.undecidability.kind) {
    case Decidability::hard:
      v.status = VerdictStatus::hard_undecidable;
      v.reason = "hard undecidable";
      return v;
    case Decidability::soft:
      v.status = VerdictStatus::soft_undecidable_answered;
      break;
    case Decidability::decidable:
      v.status = VerdictStatus::answered;
      break;
  }
  v.correct = *v.chosen == q.correct;
  return v;
}

struct Score {
  std::size_t correct = 0;
  std::size_t denominator = 0;
  std::vector<std::string> excluded;

  friend bool operator==(const Score&, const Score&) = default;
};

/// Correct answers over questions neither manually rejected nor hard
/// undecidable.
inline Score score(const std::vector<Verdict>& verdicts) {
  Score s;
  for (const auto& v : verdicts) {
    if (!v.scored()) {
      s.excluded.push_back(v.id);
      continue;
    }
    ++s.denominator;
    if (v.chosen && *v.chosen == v.correct_index) ++s.correct;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Reports

inline void write_verdicts_csv(std::ostream& out, const std::vector<Verdict>& verdicts,
                               const CsvStyle& style = {}) {
  const char sep = style.separator();
  out << "id" << sep << "status" << sep << "chosen" << sep << "correct_index" << sep << "cos1"
      << sep << "cos2" << sep << "cos3" << sep << "angle1" << sep << "angle2" << sep << "angle3"
      << sep << "is_correct\n";
  for (const auto& v : verdicts) {
    out << v.id << sep << to_string(v.status) << sep << (v.chosen ? std::to_string(*v.chosen) : "")
        << sep << v.correct_index;
    for (double c : v.cosines) out << sep << style.number(c);
    for (double a : v.angles) out << sep << style.number(a);
    out << sep << (v.correct ? 1 : 0) << '\n';
  }
}

/// Text with in-vocabulary, non-stopped words bracketed.
template <TermVocabulary V>
std::string bracket_terms(std::string_view text, const V& vocabulary, const TermMap& term_map,
                          const StopList& stoplist) {
  std::string out;
  std::size_t pos = 0;
  for (const auto& span : tokenize_spans(text)) {
    out.append(text.substr(pos, span.begin - pos));
    const std::string term = term_map.term_of(span.token);
    const auto word = text.substr(span.begin, span.end - span.begin);
    if (!stoplist.stops(term) && vocabulary.contains(term)) {
      out += '[';
      out.append(word);
      out += ']';
    } else {
      out.append(word);
    }
    pos = span.end;
  }
  out.append(text.substr(pos));
  return out;
}

/// Human-readable log entry for one question, e.g.
///
///   RMCQ38 best: 2 ref: 2 :-)
///   => 1, 3 soft undecidable for the bag of words.
///   Question: [What] [apparatus] allows to [measure] ...
///   1) The thermometer.
///   *2) The [oxymeter].
///   3) The oscilloscope.
template <TermVocabulary V>
void write_question_log(std::ostream& out, const Question& q, const Verdict& v, const V& vocabulary,
                        const TermMap& term_map, const StopList& stoplist) {
  out << "RMCQ" << q.id;
  if (v.status == VerdictStatus::rejected_manual) {
    out << " rejected: " << v.reason << "\n\n";
    return;
  }
  out << " best: " << (v.chosen ? std::to_string(*v.chosen) : "-") << " ref: " << q.correct;
  if (v.scored() && v.correct) out << " :-)";
  out << '\n';
  const auto [x, y] = v.undecidability.answers;
  if (v.undecidability.kind == Decidability::hard) {
    out << "=> " << x << ", " << y << " hard undecidable for a bag of words.\n";
  } else if (v.undecidability.kind == Decidability::soft) {
    out << "=> " << x << ", " << y << " soft undecidable for the bag of words.\n";
  }
  if (v.reason == "empty bag of words") out << "=> rejected: empty bag of words.\n";
  out << "Question: " << bracket_terms(q.stem, vocabulary, term_map, stoplist) << '\n';
  for (std::size_t a = 0; a < kAnswers; ++a) {
    if (static_cast<int>(a) + 1 == q.correct) out << '*';
    out << a + 1 << ") " << bracket_terms(q.answers[a], vocabulary, term_map, stoplist) << '\n';
  }
  out << '\n';
}

}  // namespace elsa
