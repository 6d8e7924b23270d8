#pragma once

// Parameter tuning: single runs, dimension scans, one-at-a-time ablation,
// dimensionality heuristics and correlation with observed answer choices.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "elsa/csv.hpp"
#include "elsa/error.hpp"
#include "elsa/mcq.hpp"
#include "elsa/space.hpp"
#include "elsa/text.hpp"
#include "elsa/vsm.hpp"

namespace elsa {

/// Linguistic resources shared by every run.
struct Lexicon {
  std::vector<SuffixRule> rules;
  std::set<WordPair> exceptions;
  std::set<std::string> stop_words;
  std::size_t min_stem = kDefaultMinStem;
};

/// The seven tunable parameters plus the fixed weighting functions.
struct RunConfig {
  WeightingConfig weighting;  // titles, both normalizations, local/global functions
  bool joint_lemmatization = true;
  bool use_stoplist = true;
  bool three_set = true;
  std::optional<std::size_t> k;  // nullopt: no reduction (full rank)

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

struct RunResult {
  Score score;
  std::vector<Verdict> verdicts;
  std::size_t k = 0;  // dimensionality actually used
};

namespace detail {

/// Runs `f`, prefixing any error message with the pipeline stage.
template <class F>
auto in_stage(std::string_view stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(stage) + ": " + e.what());
  } catch (const Error& e) {
    throw Error(std::string(stage) + ": " + e.what());
  }
}

inline std::set<std::string> mcq_vocabulary(const std::vector<Question>& mcq) {
  std::set<std::string> vocab;
  for (const auto& q : mcq) {
    for (auto& t : tokenize(q.stem)) vocab.insert(std::move(t));
    for (const auto& a : q.answers) {
      for (auto& t : tokenize(a)) vocab.insert(std::move(t));
    }
  }
  return vocab;
}

}  // namespace detail

/// Everything up to and including the full-rank decomposition. Dimension
/// scans slice `space` instead of decomposing again.
struct PreparedRun {
  TermMap term_map;
  StopList stoplist;
  TermDocMatrix matrix;
  WeightedMatrix weighted;
  SemanticSpace space;  // full numerical rank
};

inline PreparedRun prepare_run(const Corpus& corpus, const std::vector<Question>& mcq,
                               const Lexicon& lexicon, const RunConfig& config,
                               Diagnostics* diag = nullptr) {
  PreparedRun run;
  const bool titles = config.weighting.use_titles;
  detail::in_stage("text", [&] {
    const auto corpus_vocab = corpus.vocabulary(titles);
    if (corpus_vocab.empty()) throw Error("corpus has no tokens");
    run.term_map = config.joint_lemmatization
                       ? joint_term_map(corpus_vocab, detail::mcq_vocabulary(mcq), lexicon.rules,
                                        lexicon.exceptions, lexicon.min_stem, diag)
                       : build_term_map(corpus_vocab, lexicon.rules, lexicon.exceptions,
                                        lexicon.min_stem, diag);
    if (config.use_stoplist) run.stoplist = StopList(lexicon.stop_words, run.term_map);
  });
  detail::in_stage("vsm", [&] {
    run.matrix = count_matrix(corpus, run.term_map, run.stoplist, titles, diag);
    run.weighted = weight_matrix(run.matrix, config.weighting, diag);
  });
  detail::in_stage("space", [&] {
    run.space = svd_full(run.weighted.values, run.matrix.terms(), diag);
  });
  return run;
}

/// Answers every question against one space.
inline RunResult answer_all(const PreparedRun& run, const SemanticSpace& space,
                            const std::vector<Question>& mcq, const RunConfig& config) {
  RunResult result;
  result.k = space.k();
  const AnswerOptions options{config.weighting.local, config.three_set};
  detail::in_stage("mcq", [&] {
    for (const auto& q : mcq) {
      result.verdicts.push_back(
          answer_question(q, space, run.weighted.global, run.term_map, run.stoplist, options));
    }
  });
  result.score = score(result.verdicts);
  return result;
}

/// Full pipeline with a decomposition computed for `config.k` alone.
inline RunResult run_once(const Corpus& corpus, const std::vector<Question>& mcq,
                          const Lexicon& lexicon, const RunConfig& config,
                          Diagnostics* diag = nullptr) {
  const PreparedRun run = prepare_run(corpus, mcq, lexicon, config, diag);
  if (!config.k) return answer_all(run, run.space, mcq, config);

  const auto max_k = std::min(run.matrix.n_terms(), run.matrix.n_docs());
  std::size_t k = *config.k;
  if (k > max_k) {
    warn(diag, "k = " + std::to_string(k) + " exceeds min(T, D); clamped to " +
                   std::to_string(max_k));
    k = max_k;
  }
  const SemanticSpace space = detail::in_stage(
      "space", [&] { return svd_truncate(run.weighted.values, k, run.matrix.terms(), diag); });
  return answer_all(run, space, mcq, config);
}

// ---------------------------------------------------------------------------
// Dimension scan

struct ScanPoint {
  std::size_t k;
  std::size_t correct;
  std::size_t denominator;
};

struct DimScan {
  std::vector<ScanPoint> points;
  std::size_t best_k = 0;  // smallest k reaching the best score
  std::size_t best_score = 0;
  std::size_t rank = 0;
};

struct KRange {
  std::size_t first = 1;
  std::size_t last = 0;  // 0: numerical rank
  std::size_t stride = 1;
};

/// Sets best_k to the smallest k reaching the highest score.
inline void select_best(DimScan& scan) {
  scan.best_k = 0;
  scan.best_score = 0;
  for (const auto& p : scan.points) {
    if (scan.best_k == 0 || p.correct > scan.best_score ||
        (p.correct == scan.best_score && p.k < scan.best_k)) {
      scan.best_score = p.correct;
      scan.best_k = p.k;
    }
  }
}

/// Scores every k in the range by slicing one full-rank decomposition.
inline DimScan dimension_scan(const Corpus& corpus, const std::vector<Question>& mcq,
                              const Lexicon& lexicon, const RunConfig& config,
                              const KRange& range = {}, Diagnostics* diag = nullptr) {
  if (range.first == 0 || range.stride == 0) throw ConfigError("k range must start at 1 with stride >= 1");
  const PreparedRun run = prepare_run(corpus, mcq, lexicon, config, diag);
  DimScan scan;
  scan.rank = run.space.k();
  std::size_t last = range.last == 0 ? scan.rank : range.last;
  if (last > scan.rank) {
    warn(diag, "scan end " + std::to_string(last) + " exceeds rank " + std::to_string(scan.rank));
    last = scan.rank;
  }
  for (std::size_t k = range.first; k <= last; k += range.stride) {
    const RunResult r = answer_all(run, run.space.truncated(k), mcq, config);
    scan.points.push_back({k, r.score.correct, r.score.denominator});
  }
  if (scan.points.empty()) throw ConfigError("empty k range");
  select_best(scan);
  return scan;
}

inline void write_scan_csv(std::ostream& out, const DimScan& scan, const CsvStyle& style = {}) {
  const char sep = style.separator();
  out << "k" << sep << "correct" << sep << "denominator\n";
  for (const auto& p : scan.points) out << p.k << sep << p.correct << sep << p.denominator << '\n';
}

// ---------------------------------------------------------------------------
// Ablation

enum class Parameter {
  titles,
  document_normalization,
  joint_lemmatization,
  frequency_normalization,
  three_set_weighting,
  stop_words,
  truncation,
};

inline constexpr std::array<Parameter, 7> kParameters{
    Parameter::titles,
    Parameter::document_normalization,
    Parameter::joint_lemmatization,
    Parameter::frequency_normalization,
    Parameter::three_set_weighting,
    Parameter::stop_words,
    Parameter::truncation,
};

inline std::string_view to_string(Parameter p) {
  switch (p) {
    case Parameter::titles: return "Titles";
    case Parameter::document_normalization: return "Document Normalisation";
    case Parameter::joint_lemmatization: return "Joint Lemmatisation";
    case Parameter::frequency_normalization: return "Frequency Normalisation";
    case Parameter::three_set_weighting: return "3-set entropy weighting";
    case Parameter::stop_words: return "Stop words";
    case Parameter::truncation: return "LSA truncation";
  }
  return "?";
}

/// Whether the parameter is switched on in `config`.
inline bool setting(const RunConfig& config, Parameter p) {
  switch (p) {
    case Parameter::titles: return config.weighting.use_titles;
    case Parameter::document_normalization: return config.weighting.document_normalization;
    case Parameter::joint_lemmatization: return config.joint_lemmatization;
    case Parameter::frequency_normalization: return config.weighting.frequency_normalization;
    case Parameter::three_set_weighting: return config.three_set;
    case Parameter::stop_words: return config.use_stoplist;
    case Parameter::truncation: return config.k.has_value();
  }
  return false;
}

/// `config` with one parameter switched to its other setting. Truncation can
/// only be switched off (no reduction); a config without truncation is
/// returned unchanged.
inline RunConfig flipped(RunConfig config, Parameter p) {
  switch (p) {
    case Parameter::titles: config.weighting.use_titles = !config.weighting.use_titles; break;
    case Parameter::document_normalization:
      config.weighting.document_normalization = !config.weighting.document_normalization;
      break;
    case Parameter::joint_lemmatization: config.joint_lemmatization = !config.joint_lemmatization; break;
    case Parameter::frequency_normalization:
      config.weighting.frequency_normalization = !config.weighting.frequency_normalization;
      break;
    case Parameter::three_set_weighting: config.three_set = !config.three_set; break;
    case Parameter::stop_words: config.use_stoplist = !config.use_stoplist; break;
    case Parameter::truncation: config.k.reset(); break;
  }
  return config;
}

/// (best - ablated) / best as a percentage in tenths, rounded half away from
/// zero: 27 vs 18 gives 333 (33.3%).
inline long contribution_tenths(std::size_t best, std::size_t ablated) {
  if (best == 0) throw Error("relative contribution undefined for a best score of 0");
  const long b = static_cast<long>(best);
  const long diff = b - static_cast<long>(ablated);
  const long num = 1000 * (diff < 0 ? -diff : diff);
  const long rounded = (2 * num + b) / (2 * b);
  return diff < 0 ? -rounded : rounded;
}

inline double relative_contribution(std::size_t best, std::size_t ablated) {
  if (best == 0) throw Error("relative contribution undefined for a best score of 0");
  return (static_cast<double>(best) - static_cast<double>(ablated)) / static_cast<double>(best);
}

/// One decimal, trailing ",0"/".0" dropped: "33.3%", "4%", "0%".
inline std::string format_percent(long tenths, Locale locale = Locale::point) {
  const long mag = tenths < 0 ? -tenths : tenths;
  std::string s = (tenths < 0 ? "-" : "") + std::to_string(mag / 10);
  if (mag % 10 != 0) {
    s += locale == Locale::comma ? ',' : '.';
    s += static_cast<char>('0' + mag % 10);
  }
  return s + '%';
}

struct AblationRow {
  Parameter parameter;
  bool best_setting;
  std::size_t score;
  std::size_t denominator;
  long contribution_tenths;
  std::vector<std::string> new_hard_undecidable;  // ids newly hard undecidable
};

struct AblationReport {
  RunConfig best_config;
  Score best;
  std::vector<AblationRow> rows;
};

/// Re-runs the pipeline once per parameter, each time with only that
/// parameter switched away from `best_config`.
inline AblationReport ablate(const Corpus& corpus, const std::vector<Question>& mcq,
                             const Lexicon& lexicon, const RunConfig& best_config,
                             Diagnostics* diag = nullptr) {
  AblationReport report;
  report.best_config = best_config;
  const RunResult best = run_once(corpus, mcq, lexicon, best_config, diag);
  report.best = best.score;

  std::set<std::string> hard_before;
  for (const auto& v : best.verdicts) {
    if (v.status == VerdictStatus::hard_undecidable) hard_before.insert(v.id);
  }

  for (Parameter p : kParameters) {
    const RunResult r = run_once(corpus, mcq, lexicon, flipped(best_config, p), diag);
    AblationRow row{p, setting(best_config, p), r.score.correct, r.score.denominator,
                    best.score.correct == 0 ? 0 : contribution_tenths(best.score.correct, r.score.correct),
                    {}};
    for (const auto& v : r.verdicts) {
      if (v.status == VerdictStatus::hard_undecidable && hard_before.count(v.id) == 0) {
        row.new_hard_undecidable.push_back(v.id);
      }
    }
    if (!row.new_hard_undecidable.empty()) {
      warn(diag, std::string(to_string(p)) + " ablation creates hard undecidability");
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

/// Ablation table: a best-score row, then one row per parameter with the
/// best-run setting (+/-), the ablated score and its relative contribution.
inline void write_ablation_csv(std::ostream& out, const AblationReport& report,
                               const CsvStyle& style = {}) {
  const char sep = style.separator();
  out << "parameter" << sep << "best_setting" << sep << "correct" << sep << "denominator" << sep
      << "relative_contribution" << sep << "new_hard_undecidable\n";
  out << "Best score" << sep << sep << report.best.correct << sep << report.best.denominator << sep
      << sep << '\n';
  for (const auto& row : report.rows) {
    std::string ids;
    for (const auto& id : row.new_hard_undecidable) ids += (ids.empty() ? "" : " ") + id;
    out << to_string(row.parameter) << sep << (row.best_setting ? '+' : '-') << sep << row.score
        << sep << row.denominator << sep << format_percent(row.contribution_tenths, style.locale)
        << sep << ids << '\n';
  }
}

// ---------------------------------------------------------------------------
// Dimensionality heuristic

enum class WildMode { terms, min };

struct Fraction {
  std::size_t numerator = 1;
  std::size_t denominator = 50;
};

/// floor(fraction * n_terms), or floor(fraction * min(n_terms, n_docs)),
/// never below 1.
inline std::size_t wild_estimate(std::size_t n_terms, std::size_t n_docs,
                                 WildMode mode = WildMode::terms, Fraction fraction = {}) {
  if (n_terms == 0 || n_docs == 0) throw Error("wild_estimate needs positive counts");
  if (fraction.denominator == 0) throw ConfigError("fraction denominator must be positive");
  const std::size_t base = mode == WildMode::terms ? n_terms : std::min(n_terms, n_docs);
  return std::max<std::size_t>(1, base * fraction.numerator / fraction.denominator);
}

// ---------------------------------------------------------------------------
// Correlation with answer-choice frequencies

using ChoiceKey = std::pair<std::string, int>;  // question id, 1-based answer
using ChoiceFrequencies = std::map<ChoiceKey, double>;

/// CSV `question_id,answer_index,frequency`; a non-numeric first line is
/// taken as a header.
inline ChoiceFrequencies parse_choice_frequencies(std::istream& in,
                                                  const std::string& source = "choices") {
  ChoiceFrequencies out;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    const std::string text = detail::trim(line);
    if (text.empty() || text.front() == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ss(text);
    for (std::string f; std::getline(ss, f, ',');) fields.push_back(detail::trim(f));
    if (fields.size() != 3) {
      throw ConfigError(detail::where(source, n) + "expected question_id,answer_index,frequency");
    }
    int answer = 0;
    double freq = 0.0;
    try {
      std::size_t used = 0;
      answer = std::stoi(fields[1], &used);
      if (used != fields[1].size()) throw std::invalid_argument("answer");
      freq = std::stod(fields[2], &used);
      if (used != fields[2].size()) throw std::invalid_argument("frequency");
    } catch (const std::exception&) {
      if (n == 1 && out.empty()) continue;  // header
      throw ConfigError(detail::where(source, n) + "bad number");
    }
    if (answer < 1 || answer > 3) throw ConfigError(detail::where(source, n) + "answer_index must be 1..3");
    if (!out.emplace(ChoiceKey{fields[0], answer}, freq).second) {
      throw ConfigError(detail::where(source, n) + "duplicate entry");
    }
  }
  return out;
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw Error("undefined correlation: too few points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw Error("undefined correlation: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

/// Pearson r between answer angles and how often each answer was chosen,
/// over every answer of every scored question that has a defined angle.
inline double correlate_with_choices(const std::vector<Verdict>& verdicts,
                                     const ChoiceFrequencies& frequencies) {
  std::vector<double> angles;
  std::vector<double> freqs;
  for (const auto& v : verdicts) {
    if (!v.scored()) continue;
    for (std::size_t a = 0; a < kAnswers; ++a) {
      if (std::isnan(v.angles[a])) continue;
      const ChoiceKey key{v.id, static_cast<int>(a) + 1};
      auto it = frequencies.find(key);
      if (it == frequencies.end()) {
        throw Error("no choice frequency for question " + v.id + " answer " +
                    std::to_string(a + 1));
      }
      angles.push_back(v.angles[a]);
      freqs.push_back(it->second);
    }
  }
  return pearson(angles, freqs);
}

}  // namespace elsa
