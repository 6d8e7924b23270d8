#pragma once

// Tokenization, co-triggered suffix-pair lemmatization and stop lists.

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "elsa/error.hpp"
#include "elsa/utf8.hpp"

namespace elsa {

// ---------------------------------------------------------------------------
// Tokenization

/// A token with the byte range it was read from in the source text.
struct TokenSpan {
  std::string token;  // lowercased
  std::size_t begin = 0;
  std::size_t end = 0;
};

/// Splits text into maximal runs of letters, lowercased. Everything else
/// (digits, punctuation, apostrophes, hyphens, whitespace) separates tokens,
/// so elided clitics such as "l'air" become two tokens.
inline std::vector<TokenSpan> tokenize_spans(std::string_view text) {
  std::vector<TokenSpan> out;
  TokenSpan current;
  bool in_token = false;
  for (std::size_t pos = 0; pos < text.size();) {
    const auto [cp, len] = utf8::decode(text, pos);
    if (utf8::is_letter(cp)) {
      if (!in_token) {
        current = TokenSpan{{}, pos, pos};
        in_token = true;
      }
      utf8::append(current.token, utf8::to_lower(cp));
      current.end = pos + len;
    } else if (in_token) {
      out.push_back(std::move(current));
      in_token = false;
    }
    pos += len;
  }
  if (in_token) out.push_back(std::move(current));
  return out;
}

inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  for (auto& span : tokenize_spans(text)) out.push_back(std::move(span.token));
  return out;
}

// ---------------------------------------------------------------------------
// Lemmatization

/// Unordered pair of permissible suffixes. Two words sharing a stem whose
/// remainders form this pair are merged into one term.
class SuffixRule {
 public:
  SuffixRule(std::string a, std::string b) : a_(std::move(a)), b_(std::move(b)) {
    if (a_ == b_) throw ConfigError("suffix rule sides must differ: '" + a_ + "'");
    if (b_ < a_) std::swap(a_, b_);
  }

  const std::string& first() const { return a_; }
  const std::string& second() const { return b_; }

  friend auto operator<=>(const SuffixRule&, const SuffixRule&) = default;

 private:
  std::string a_;
  std::string b_;
};

using WordPair = std::pair<std::string, std::string>;

inline WordPair make_word_pair(std::string a, std::string b) {
  if (b < a) std::swap(a, b);
  return {std::move(a), std::move(b)};
}

/// Equivalence classes of surface words. A term is identified by its
/// representative: the shortest member word, ties broken lexicographically.
class TermMap {
 public:
  TermMap() = default;

  /// `classes` are the member lists of each equivalence class.
  explicit TermMap(std::vector<std::vector<std::string>> classes) {
    for (auto& members : classes) {
      if (members.empty()) continue;
      std::sort(members.begin(), members.end(), shorter);
      std::string rep = members.front();
      for (const auto& w : members) {
        if (!term_of_.emplace(w, rep).second) {
          throw Error("word '" + w + "' assigned to two terms");
        }
      }
      std::sort(members.begin(), members.end());
      members_.emplace(std::move(rep), std::move(members));
    }
  }

  /// Term of a word. Words outside the vocabulary form their own singleton
  /// term.
  std::string term_of(const std::string& word) const {
    auto it = term_of_.find(word);
    return it == term_of_.end() ? word : it->second;
  }

  bool contains(const std::string& word) const { return term_of_.count(word) != 0; }

  /// Member words of a term, sorted. Empty when the term is unknown.
  const std::vector<std::string>& members(const std::string& term) const {
    static const std::vector<std::string> kEmpty;
    auto it = members_.find(term);
    return it == members_.end() ? kEmpty : it->second;
  }

  std::size_t word_count() const { return term_of_.size(); }
  std::size_t term_count() const { return members_.size(); }

  /// Representatives in lexicographic order.
  std::vector<std::string> terms() const {
    std::vector<std::string> out;
    out.reserve(members_.size());
    for (const auto& [rep, _] : members_) out.push_back(rep);
    return out;
  }

  const std::map<std::string, std::vector<std::string>>& classes() const {
    return members_;
  }

  /// Orders words shortest first (in code points), then lexicographically.
  static bool shorter(const std::string& a, const std::string& b) {
    const auto la = utf8::length(a);
    const auto lb = utf8::length(b);
    return la != lb ? la < lb : a < b;
  }

 private:
  std::unordered_map<std::string, std::string> term_of_;
  std::map<std::string, std::vector<std::string>> members_;
};

namespace detail {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n), rank_(n, 0) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<unsigned> rank_;
};

inline bool ends_with(std::string_view word, std::string_view suffix) {
  return word.size() >= suffix.size() &&
         word.compare(word.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace detail

inline constexpr std::size_t kDefaultMinStem = 3;
inline constexpr std::size_t kSpuriousClassSize = 5;

/// Co-triggered lemmatization. Words w1 = p + a and w2 = p + b are merged
/// when (a, b) is a rule, the stem p has at least `min_stem` code points and
/// the pair is not listed in `exceptions`. Merges are closed transitively.
inline TermMap build_term_map(const std::set<std::string>& vocabulary,
                              const std::vector<SuffixRule>& rules,
                              const std::set<WordPair>& exceptions,
                              std::size_t min_stem = kDefaultMinStem,
                              Diagnostics* diag = nullptr) {
  if (min_stem == 0) throw ConfigError("min_stem must be at least 1");
  if (vocabulary.empty()) throw Error("cannot lemmatize an empty vocabulary");

  std::vector<std::string> words(vocabulary.begin(), vocabulary.end());
  std::unordered_map<std::string_view, std::size_t> index;
  index.reserve(words.size());
  for (std::size_t i = 0; i < words.size(); ++i) index.emplace(words[i], i);

  detail::DisjointSets sets(words.size());
  auto try_merge = [&](std::size_t i, std::string_view from, std::string_view to) {
    const std::string_view word = words[i];
    if (!detail::ends_with(word, from)) return;
    const std::string_view stem = word.substr(0, word.size() - from.size());
    if (utf8::length(stem) < min_stem) return;
    std::string partner(stem);
    partner += to;
    auto it = index.find(partner);
    if (it == index.end()) return;
    if (exceptions.count(make_word_pair(words[i], partner)) != 0) return;
    sets.unite(i, it->second);
  };

  for (std::size_t i = 0; i < words.size(); ++i) {
    for (const auto& rule : rules) {
      try_merge(i, rule.first(), rule.second());
      try_merge(i, rule.second(), rule.first());
    }
  }

  std::map<std::size_t, std::vector<std::string>> grouped;
  for (std::size_t i = 0; i < words.size(); ++i) grouped[sets.find(i)].push_back(words[i]);

  std::vector<std::vector<std::string>> classes;
  classes.reserve(grouped.size());
  for (auto& [_, members] : grouped) {
    if (members.size() > kSpuriousClassSize) {
      std::string list;
      for (const auto& m : members) list += (list.empty() ? "" : " ") + m;
      warn(diag, "spurious equivalence class risk (" + std::to_string(members.size()) +
                     " words): " + list);
    }
    classes.push_back(std::move(members));
  }
  return TermMap(std::move(classes));
}

/// Lemmatization over the union of the corpus and questionnaire vocabularies.
inline TermMap joint_term_map(const std::set<std::string>& corpus_vocab,
                              const std::set<std::string>& mcq_vocab,
                              const std::vector<SuffixRule>& rules,
                              const std::set<WordPair>& exceptions,
                              std::size_t min_stem = kDefaultMinStem,
                              Diagnostics* diag = nullptr) {
  std::set<std::string> all = corpus_vocab;
  all.insert(mcq_vocab.begin(), mcq_vocab.end());
  return build_term_map(all, rules, exceptions, min_stem, diag);
}

// ---------------------------------------------------------------------------
// Stop lists

/// Stop words as surface forms, plus the terms they map to under a TermMap.
class StopList {
 public:
  StopList() = default;

  StopList(std::set<std::string> words, const TermMap& term_map) : words_(std::move(words)) {
    for (const auto& w : words_) terms_.insert(term_map.term_of(w));
  }

  const std::set<std::string>& words() const { return words_; }
  const std::set<std::string>& terms() const { return terms_; }
  bool stops(const std::string& term) const { return terms_.count(term) != 0; }
  bool empty() const { return words_.empty(); }

 private:
  std::set<std::string> words_;
  std::set<std::string> terms_;
};

// ---------------------------------------------------------------------------
// Resource files

namespace detail {

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

inline std::ifstream open_input(const std::string& path, std::string_view what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + std::string(what) + " file: " + path);
  return in;
}

inline std::string where(const std::string& source, std::size_t line) {
  return source + ":" + std::to_string(line) + ": ";
}

}  // namespace detail

/// One rule per line, `suffix_a,suffix_b`; one side may be empty. Lines
/// starting with '#' are comments.
inline std::vector<SuffixRule> parse_suffix_rules(std::istream& in,
                                                  const std::string& source = "rules") {
  std::set<SuffixRule> rules;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    const std::string text = detail::trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto comma = text.find(',');
    if (comma == std::string::npos || text.find(',', comma + 1) != std::string::npos) {
      throw ConfigError(detail::where(source, n) + "expected 'suffix_a,suffix_b'");
    }
    const std::string a = utf8::lowercase(detail::trim(text.substr(0, comma)));
    const std::string b = utf8::lowercase(detail::trim(text.substr(comma + 1)));
    if (a == b) throw ConfigError(detail::where(source, n) + "suffix rule sides must differ");
    rules.emplace(a, b);
  }
  return {rules.begin(), rules.end()};
}

/// One `word_a,word_b` pair per line.
inline std::set<WordPair> parse_exceptions(std::istream& in,
                                           const std::string& source = "exceptions") {
  std::set<WordPair> pairs;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    const std::string text = detail::trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto comma = text.find(',');
    if (comma == std::string::npos) {
      throw ConfigError(detail::where(source, n) + "expected 'word_a,word_b'");
    }
    std::string a = utf8::lowercase(detail::trim(text.substr(0, comma)));
    std::string b = utf8::lowercase(detail::trim(text.substr(comma + 1)));
    if (a.empty() || b.empty()) {
      throw ConfigError(detail::where(source, n) + "exception words must be non-empty");
    }
    pairs.insert(make_word_pair(std::move(a), std::move(b)));
  }
  return pairs;
}

/// One word per line. Words are kept as written (lowercased), so entries such
/// as "peut-on" that never survive tokenization are harmless.
inline std::set<std::string> parse_stop_words(std::istream& in) {
  std::set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    const std::string text = detail::trim(line);
    if (text.empty() || text.front() == '#') continue;
    words.insert(utf8::lowercase(text));
  }
  return words;
}

inline void write_stop_words(std::ostream& out, const std::set<std::string>& words) {
  for (const auto& w : words) out << w << '\n';  // std::set is already sorted
}

inline std::vector<SuffixRule> load_suffix_rules(const std::string& path) {
  auto in = detail::open_input(path, "suffix rules");
  return parse_suffix_rules(in, path);
}

inline std::set<WordPair> load_exceptions(const std::string& path) {
  auto in = detail::open_input(path, "exceptions");
  return parse_exceptions(in, path);
}

inline std::set<std::string> load_stop_words(const std::string& path) {
  auto in = detail::open_input(path, "stop list");
  return parse_stop_words(in);
}

}  // namespace elsa
