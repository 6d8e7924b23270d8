#pragma once

// Command implementations behind the `elsa` tool: project configuration,
// fail-fast input loading, output locking and report files.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "elsa/csv.hpp"
#include "elsa/error.hpp"
#include "elsa/mcq.hpp"
#include "elsa/space.hpp"
#include "elsa/stoplist.hpp"
#include "elsa/text.hpp"
#include "elsa/tune.hpp"
#include "elsa/vsm.hpp"

namespace elsa::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitPipeline = 1;
inline constexpr int kExitConfig = 2;

/// Flat `key = value` settings; '#' starts a comment line.
using Settings = std::map<std::string, std::string>;

inline Settings parse_settings(std::istream& in, const std::string& source = "config") {
  Settings s;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    const std::string text = elsa::detail::trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(elsa::detail::where(source, n) + "expected 'key = value'");
    }
    s[elsa::detail::trim(text.substr(0, eq))] = elsa::detail::trim(text.substr(eq + 1));
  }
  return s;
}

/// Reads a config file. Relative paths in it are taken relative to the
/// file's own directory.
inline Settings load_settings(const std::string& path) {
  auto in = elsa::detail::open_input(path, "config");
  Settings s = parse_settings(in, path);
  const auto base = std::filesystem::path(path).parent_path();
  for (const char* key : {"corpus", "mcq", "rules", "exceptions", "stoplist", "choices", "out"}) {
    auto it = s.find(key);
    if (it == s.end() || it->second.empty()) continue;
    const std::filesystem::path p(it->second);
    if (p.is_relative()) it->second = (base / p).lexically_normal().string();
  }
  return s;
}

struct ProjectConfig {
  std::string corpus;
  std::string mcq;
  std::string rules;
  std::string exceptions;
  std::string stoplist;
  std::string choices;
  std::string out = ".";
  RunConfig run;
  std::size_t min_stem = kDefaultMinStem;
  KRange scan;
  std::size_t candidates = 200;
  Fraction wild_fraction;
  Locale locale = Locale::point;
  bool timestamp = true;
  bool dump_matrix = false;

  static ProjectConfig from_settings(const Settings& settings);
};

namespace detail {

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on" || v == "+") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off" || v == "-") return false;
  throw ConfigError("config key '" + key + "': expected a boolean, got '" + v + "'");
}

inline std::size_t parse_count(const std::string& key, const std::string& v, std::size_t min) {
  std::size_t used = 0;
  unsigned long long x = 0;
  try {
    if (v.empty() || v.front() == '-') throw std::invalid_argument(v);
    x = std::stoull(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size() || x < min) {
    throw ConfigError("config key '" + key + "': expected an integer >= " + std::to_string(min) +
                      ", got '" + v + "'");
  }
  return static_cast<std::size_t>(x);
}

inline Fraction parse_fraction(const std::string& key, const std::string& v) {
  const auto slash = v.find('/');
  if (slash == std::string::npos) throw ConfigError("config key '" + key + "': expected p/q");
  return {parse_count(key, v.substr(0, slash), 1), parse_count(key, v.substr(slash + 1), 1)};
}

}  // namespace detail

inline ProjectConfig ProjectConfig::from_settings(const Settings& settings) {
  ProjectConfig c;
  for (const auto& [key, value] : settings) {
    if (key == "corpus") c.corpus = value;
    else if (key == "mcq") c.mcq = value;
    else if (key == "rules") c.rules = value;
    else if (key == "exceptions") c.exceptions = value;
    else if (key == "stoplist") c.stoplist = value;
    else if (key == "choices") c.choices = value;
    else if (key == "out") c.out = value;
    else if (key == "k") {
      if (value == "full" || value == "none") c.run.k.reset();
      else c.run.k = detail::parse_count(key, value, 1);
    }
    else if (key == "titles") c.run.weighting.use_titles = detail::parse_bool(key, value);
    else if (key == "doc_norm") c.run.weighting.document_normalization = detail::parse_bool(key, value);
    else if (key == "freq_norm") c.run.weighting.frequency_normalization = detail::parse_bool(key, value);
    else if (key == "joint_lemma") c.run.joint_lemmatization = detail::parse_bool(key, value);
    else if (key == "three_set") c.run.three_set = detail::parse_bool(key, value);
    else if (key == "use_stoplist") c.run.use_stoplist = detail::parse_bool(key, value);
    else if (key == "local") {
      if (value == "log1p") c.run.weighting.local = LocalWeight::log1p;
      else if (value == "raw") c.run.weighting.local = LocalWeight::raw;
      else throw ConfigError("config key 'local': expected log1p or raw");
    }
    else if (key == "global") {
      if (value == "entropy") c.run.weighting.global = GlobalWeight::entropy;
      else if (value == "none") c.run.weighting.global = GlobalWeight::none;
      else throw ConfigError("config key 'global': expected entropy or none");
    }
    else if (key == "min_stem") c.min_stem = detail::parse_count(key, value, 1);
    else if (key == "k_min") c.scan.first = detail::parse_count(key, value, 1);
    else if (key == "k_max") c.scan.last = detail::parse_count(key, value, 0);
    else if (key == "stride") c.scan.stride = detail::parse_count(key, value, 1);
    else if (key == "n") c.candidates = detail::parse_count(key, value, 1);
    else if (key == "wild_fraction") c.wild_fraction = detail::parse_fraction(key, value);
    else if (key == "locale") c.locale = parse_locale(value);
    else if (key == "timestamp") c.timestamp = detail::parse_bool(key, value);
    else if (key == "dump_matrix") c.dump_matrix = detail::parse_bool(key, value);
    else throw ConfigError("unknown config key '" + key + "'");
  }
  return c;
}

/// Every input a command needs, loaded and parsed up front.
struct Inputs {
  Corpus corpus;
  std::vector<Question> mcq;
  Lexicon lexicon;
  ChoiceFrequencies choices;
};

struct Needs {
  bool mcq = false;
  bool choices = false;
};

inline Inputs load_inputs(const ProjectConfig& config, Needs needs) {
  if (config.corpus.empty()) throw ConfigError("no corpus given (--corpus)");
  if (needs.mcq && config.mcq.empty()) throw ConfigError("no MCQ file given (--mcq)");
  if (needs.choices && config.choices.empty()) throw ConfigError("no choice frequencies given (--choices)");
  if (config.run.use_stoplist && config.stoplist.empty()) {
    throw ConfigError("stop list enabled but no stop-list file given (--stoplist or --no-stoplist)");
  }

  Inputs in;
  in.corpus = load_corpus(config.corpus);
  if (!config.mcq.empty()) in.mcq = load_mcq(config.mcq);
  if (!config.rules.empty()) in.lexicon.rules = load_suffix_rules(config.rules);
  if (!config.exceptions.empty()) in.lexicon.exceptions = load_exceptions(config.exceptions);
  if (!config.stoplist.empty()) in.lexicon.stop_words = load_stop_words(config.stoplist);
  in.lexicon.min_stem = config.min_stem;
  if (needs.choices) {
    auto f = elsa::detail::open_input(config.choices, "choice frequencies");
    in.choices = parse_choice_frequencies(f, config.choices);
  }
  return in;
}

/// Exclusive claim on an output directory for the lifetime of the object.
class OutputLock {
 public:
  explicit OutputLock(const std::filesystem::path& dir) : path_(dir / ".elsa.lock") {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
    std::FILE* f = std::fopen(path_.c_str(), "wx");
    if (f == nullptr) {
      throw ConfigError("output directory is locked (" + path_.string() + " exists)");
    }
    std::fclose(f);
  }
  ~OutputLock() {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }
  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;

 private:
  std::filesystem::path path_;
};

/// Files rendered in memory and written together once every stage succeeded.
class OutputSet {
 public:
  std::ostringstream& file(const std::string& name) { return files_[name]; }

  void commit(const std::filesystem::path& dir) const {
    for (const auto& [name, content] : files_) {
      std::ofstream out(dir / name, std::ios::binary);
      out << content.str();
      if (!out) throw ConfigError("cannot write " + (dir / name).string());
    }
  }

 private:
  std::map<std::string, std::ostringstream> files_;
};

inline void write_header(std::ostream& out, const ProjectConfig& config) {
  if (!config.timestamp) return;
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  out << "# generated " << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ") << '\n';
}

inline void print_warnings(std::ostream& err, const Diagnostics& diag) {
  for (const auto& w : diag.warnings) err << "warning: " << w << '\n';
}

// ---------------------------------------------------------------------------
// Commands. Each returns an exit code; errors propagate as exceptions.

inline int cmd_build_space(const ProjectConfig& config, std::ostream& out, std::ostream& err) {
  const Inputs in = load_inputs(config, {});
  OutputLock lock(config.out);
  Diagnostics diag;
  const PreparedRun run = prepare_run(in.corpus, in.mcq, in.lexicon, config.run, &diag);
  const SemanticSpace space = config.run.k ? run.space.truncated(*config.run.k, &diag) : run.space;

  const bool titles = config.run.weighting.use_titles;
  std::size_t tokens = 0;
  for (std::size_t j = 0; j < in.corpus.documents.size(); ++j) tokens += in.corpus.tokens(j, titles).size();
  const auto words = in.corpus.vocabulary(titles);
  std::set<std::string> terms;
  std::size_t kept_words = 0;
  for (const auto& w : words) {
    const std::string t = run.term_map.term_of(w);
    terms.insert(t);
    if (!run.stoplist.stops(t)) ++kept_words;
  }

  OutputSet files;
  write_space(files.file("space.txt"), space);
  auto& stats = files.file("stats.txt");
  write_header(stats, config);
  const CsvStyle style{config.locale};
  stats << "corpus: " << in.corpus.name << '\n'
        << "documents: " << in.corpus.documents.size() << '\n'
        << "titles: " << (titles ? "yes" : "no") << '\n'
        << "tokens: " << tokens << '\n'
        << "words: " << words.size() << '\n'
        << "terms: " << terms.size() << '\n'
        << "stop_list_words: " << run.stoplist.words().size() << '\n'
        << "stop_list_terms: " << run.stoplist.terms().size() << '\n'
        << "words_after_stop_list: " << kept_words << '\n'
        << "terms_after_stop_list: " << run.matrix.n_terms() << '\n'
        << "T: " << run.matrix.n_terms() << '\n'
        << "D: " << run.matrix.n_docs() << '\n'
        << "nnz: " << run.matrix.nnz() << '\n'
        << "density_percent: " << style.number(run.matrix.density_percent()) << '\n'
        << "rank: " << run.space.k() << '\n'
        << "k: " << space.k() << '\n'
        << "wild_estimate_terms: "
        << wild_estimate(run.matrix.n_terms(), run.matrix.n_docs(), WildMode::terms, config.wild_fraction)
        << '\n'
        << "wild_estimate_min: "
        << wild_estimate(run.matrix.n_terms(), run.matrix.n_docs(), WildMode::min, config.wild_fraction)
        << '\n';
  if (!config.run.weighting.is_standard_setting()) {
    stats << "note: frequency and document normalization both enabled; entropy then sees doubly rescaled values\n";
  }
  if (config.dump_matrix) run.matrix.write_triplets(files.file("matrix.txt"));

  files.commit(config.out);
  print_warnings(err, diag);
  out << "T=" << run.matrix.n_terms() << " D=" << run.matrix.n_docs() << " density="
      << style.number(run.matrix.density_percent()) << "% rank=" << run.space.k() << " k=" << space.k()
      << '\n';
  return kExitOk;
}

inline int cmd_answer(const ProjectConfig& config, std::ostream& out, std::ostream& err) {
  const Inputs in = load_inputs(config, {.mcq = true});
  OutputLock lock(config.out);
  Diagnostics diag;
  const PreparedRun run = prepare_run(in.corpus, in.mcq, in.lexicon, config.run, &diag);
  const SemanticSpace space = config.run.k ? run.space.truncated(*config.run.k, &diag) : run.space;
  const RunResult result = answer_all(run, space, in.mcq, config.run);

  OutputSet files;
  const CsvStyle style{config.locale};
  auto& csv = files.file("verdicts.csv");
  write_header(csv, config);
  write_verdicts_csv(csv, result.verdicts, style);
  auto& log = files.file("answers.log");
  for (std::size_t i = 0; i < in.mcq.size(); ++i) {
    write_question_log(log, in.mcq[i], result.verdicts[i], space, run.term_map, run.stoplist);
  }
  const std::string line =
      std::to_string(result.score.correct) + "/" + std::to_string(result.score.denominator);
  files.file("score.txt") << line << '\n';

  files.commit(config.out);
  print_warnings(err, diag);
  out << "score: " << line << " (k=" << result.k << ")\n";
  if (!result.score.excluded.empty()) {
    out << "excluded:";
    for (const auto& id : result.score.excluded) out << ' ' << id;
    out << '\n';
  }
  return kExitOk;
}

inline int cmd_scan_dims(const ProjectConfig& config, std::ostream& out, std::ostream& err) {
  const Inputs in = load_inputs(config, {.mcq = true});
  OutputLock lock(config.out);
  Diagnostics diag;
  const DimScan scan = dimension_scan(in.corpus, in.mcq, in.lexicon, config.run, config.scan, &diag);

  OutputSet files;
  auto& csv = files.file("scan.csv");
  write_header(csv, config);
  write_scan_csv(csv, scan, CsvStyle{config.locale});
  files.commit(config.out);
  print_warnings(err, diag);
  out << "best k=" << scan.best_k << " correct=" << scan.best_score << " rank=" << scan.rank << '\n';
  return kExitOk;
}

inline int cmd_ablate(const ProjectConfig& config, std::ostream& out, std::ostream& err) {
  const Inputs in = load_inputs(config, {.mcq = true});
  OutputLock lock(config.out);
  Diagnostics diag;
  const AblationReport report = ablate(in.corpus, in.mcq, in.lexicon, config.run, &diag);

  OutputSet files;
  auto& csv = files.file("ablation.csv");
  write_header(csv, config);
  write_ablation_csv(csv, report, CsvStyle{config.locale});
  files.commit(config.out);
  print_warnings(err, diag);
  out << "best score: " << report.best.correct << "/" << report.best.denominator << '\n';
  for (const auto& row : report.rows) {
    out << "  " << to_string(row.parameter) << ": " << row.score << " ("
        << format_percent(row.contribution_tenths, config.locale) << ")\n";
  }
  return kExitOk;
}

/// Candidate stop words from a matrix built without any stop list.
inline int cmd_stoplist_suggest(const ProjectConfig& config, std::ostream& out, std::ostream& err) {
  ProjectConfig c = config;
  c.run.use_stoplist = false;
  const Inputs in = load_inputs(c, {});
  OutputLock lock(config.out);
  Diagnostics diag;

  const bool titles = c.run.weighting.use_titles;
  const auto vocab = in.corpus.vocabulary(titles);
  const TermMap term_map =
      c.run.joint_lemmatization
          ? joint_term_map(vocab, elsa::detail::mcq_vocabulary(in.mcq), in.lexicon.rules,
                           in.lexicon.exceptions, in.lexicon.min_stem, &diag)
          : build_term_map(vocab, in.lexicon.rules, in.lexicon.exceptions, in.lexicon.min_stem, &diag);
  const TermDocMatrix matrix = count_matrix(in.corpus, term_map, StopList{}, titles, &diag);
  const auto ranked = stoplist_candidates(matrix, c.candidates);

  OutputSet files;
  const CsvStyle style{c.locale};
  const char sep = style.separator();
  auto& csv = files.file("stoplist_candidates.csv");
  write_header(csv, c);
  csv << "rank" << sep << "term" << sep << "entropy_weight" << sep << "words\n";
  for (std::size_t r = 0; r < ranked.size(); ++r) {
    std::string words;
    for (const auto& w : term_map.members(ranked[r].term)) words += (words.empty() ? "" : " ") + w;
    csv << r + 1 << sep << ranked[r].term << sep << style.number(ranked[r].weight) << sep << words << '\n';
  }
  files.commit(config.out);
  print_warnings(err, diag);
  out << ranked.size() << " candidates written\n";
  return kExitOk;
}

inline int cmd_correlate(const ProjectConfig& config, std::ostream& out, std::ostream& err) {
  const Inputs in = load_inputs(config, {.mcq = true, .choices = true});
  OutputLock lock(config.out);
  Diagnostics diag;
  const RunResult result = run_once(in.corpus, in.mcq, in.lexicon, config.run, &diag);
  const double r = correlate_with_choices(result.verdicts, in.choices);

  OutputSet files;
  const CsvStyle style{config.locale};
  auto& csv = files.file("correlation.csv");
  write_header(csv, config);
  csv << "k" << style.separator() << "pearson_r\n" << result.k << style.separator() << style.number(r) << '\n';
  files.commit(config.out);
  print_warnings(err, diag);
  out << "r = " << style.number(r) << '\n';
  return kExitOk;
}

}  // namespace elsa::cli
