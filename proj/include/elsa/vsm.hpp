#pragma once

// Vector space model: corpus loading, term-by-document counts and the
// log-entropy weighting pipeline.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "elsa/entropy.hpp"
#include "elsa/error.hpp"
#include "elsa/text.hpp"

namespace elsa {

struct Document {
  std::optional<std::string> title;
  std::string body;
};

struct Corpus {
  std::string name;
  std::vector<Document> documents;

  /// Tokens of document `j`, title first when `use_titles` is set.
  std::vector<std::string> tokens(std::size_t j, bool use_titles) const {
    const Document& doc = documents.at(j);
    std::vector<std::string> out;
    if (use_titles && doc.title) out = tokenize(*doc.title);
    auto body = tokenize(doc.body);
    out.insert(out.end(), std::make_move_iterator(body.begin()),
               std::make_move_iterator(body.end()));
    return out;
  }

  std::set<std::string> vocabulary(bool use_titles) const {
    std::set<std::string> vocab;
    for (std::size_t j = 0; j < documents.size(); ++j) {
      for (auto& t : tokens(j, use_titles)) vocab.insert(std::move(t));
    }
    return vocab;
  }
};

/// Documents are separated by blank lines. A block whose first line starts
/// with '#' uses the rest of that line as its title.
inline Corpus parse_corpus(std::istream& in, std::string name = "corpus") {
  Corpus corpus{std::move(name), {}};
  Document current;
  bool open = false;
  bool first_line = true;
  auto flush = [&] {
    if (open) corpus.documents.push_back(std::move(current));
    current = Document{};
    open = false;
    first_line = true;
  };

  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim(line).empty()) {
      flush();
      continue;
    }
    open = true;
    if (first_line && line.front() == '#') {
      current.title = detail::trim(std::string_view(line).substr(1));
    } else {
      if (!current.body.empty()) current.body += '\n';
      current.body += line;
    }
    first_line = false;
  }
  flush();
  return corpus;
}

/// A directory of `.txt` files, one document each, read in filename order.
/// The first line starting with '#' is the title.
inline Corpus load_corpus_directory(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());

  Corpus corpus{dir.filename().string(), {}};
  for (const auto& file : files) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw ConfigError("cannot open corpus document: " + file.string());
    Document doc;
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!doc.title && !line.empty() && line.front() == '#') {
        doc.title = detail::trim(std::string_view(line).substr(1));
        continue;
      }
      if (!doc.body.empty()) doc.body += '\n';
      doc.body += line;
    }
    corpus.documents.push_back(std::move(doc));
  }
  return corpus;
}

inline Corpus load_corpus(const std::string& path) {
  namespace fs = std::filesystem;
  if (fs::is_directory(path)) {
    Corpus c = load_corpus_directory(path);
    if (c.documents.empty()) throw ConfigError("corpus directory has no .txt files: " + path);
    return c;
  }
  auto in = detail::open_input(path, "corpus");
  Corpus c = parse_corpus(in, fs::path(path).stem().string());
  if (c.documents.empty()) throw ConfigError("corpus file has no documents: " + path);
  return c;
}

// ---------------------------------------------------------------------------

/// Sparse term-by-document frequency counts, stored row-wise. Rows are terms
/// in lexicographic order of their representative; columns follow corpus
/// order.
class TermDocMatrix {
 public:
  struct Entry {
    std::size_t doc;
    std::uint32_t count;
  };

  TermDocMatrix() = default;

  /// `rows[i]` maps document index to a positive count.
  TermDocMatrix(std::vector<std::string> terms,
                const std::vector<std::map<std::size_t, std::uint32_t>>& rows,
                std::size_t n_docs)
      : terms_(std::move(terms)), n_docs_(n_docs) {
    if (terms_.size() != rows.size()) throw Error("term labels do not match rows");
    if (terms_.empty() || n_docs_ == 0) throw Error("term-document matrix is empty");
    offsets_.reserve(rows.size() + 1);
    offsets_.push_back(0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (const auto& [doc, count] : rows[i]) {
        if (doc >= n_docs_) throw Error("document index out of range");
        if (count == 0) continue;
        entries_.push_back({doc, count});
      }
      offsets_.push_back(entries_.size());
      index_.emplace(terms_[i], i);
    }
  }

  std::size_t n_terms() const { return terms_.size(); }
  std::size_t n_docs() const { return n_docs_; }
  std::size_t nnz() const { return entries_.size(); }

  /// Percentage of non-zero cells.
  double density_percent() const {
    return 100.0 * static_cast<double>(nnz()) /
           (static_cast<double>(n_terms()) * static_cast<double>(n_docs()));
  }

  const std::vector<std::string>& terms() const { return terms_; }

  std::optional<std::size_t> term_index(const std::string& term) const {
    auto it = index_.find(term);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::span<const Entry> row(std::size_t i) const {
    return std::span<const Entry>(entries_).subspan(offsets_[i], offsets_[i + 1] - offsets_[i]);
  }

  std::uint32_t count(std::size_t i, std::size_t j) const {
    for (const auto& e : row(i)) {
      if (e.doc == j) return e.count;
    }
    return 0;
  }

  Eigen::MatrixXd dense() const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_terms()),
                                              static_cast<Eigen::Index>(n_docs()));
    for (std::size_t i = 0; i < n_terms(); ++i) {
      for (const auto& e : row(i)) {
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(e.doc)) = e.count;
      }
    }
    return m;
  }

  /// Debug dump: header `T D nnz`, then `term_index doc_index value` lines.
  void write_triplets(std::ostream& out) const {
    out << n_terms() << ' ' << n_docs() << ' ' << nnz() << '\n';
    for (std::size_t i = 0; i < n_terms(); ++i) {
      for (const auto& e : row(i)) out << i << ' ' << e.doc << ' ' << e.count << '\n';
    }
  }

 private:
  std::vector<std::string> terms_;
  std::size_t n_docs_ = 0;
  std::vector<std::size_t> offsets_;
  std::vector<Entry> entries_;
  std::map<std::string, std::size_t> index_;
};

/// Counts lemmatized, stop-filtered term frequencies per document. Terms
/// that never occur are not rows; documents left empty stay as zero columns.
inline TermDocMatrix count_matrix(const Corpus& corpus, const TermMap& term_map,
                                  const StopList& stoplist, bool use_titles,
                                  Diagnostics* diag = nullptr) {
  if (corpus.documents.empty()) throw Error("corpus has no documents");
  std::map<std::string, std::map<std::size_t, std::uint32_t>> counts;
  for (std::size_t j = 0; j < corpus.documents.size(); ++j) {
    std::size_t kept = 0;
    for (const auto& token : corpus.tokens(j, use_titles)) {
      std::string term = term_map.term_of(token);
      if (stoplist.stops(term)) continue;
      ++counts[std::move(term)][j];
      ++kept;
    }
    if (kept == 0) warn(diag, "document " + std::to_string(j + 1) + " has no terms (empty column kept)");
  }
  if (counts.empty()) throw Error("term-document matrix is empty after stop-word removal");

  std::vector<std::string> terms;
  std::vector<std::map<std::size_t, std::uint32_t>> rows;
  terms.reserve(counts.size());
  rows.reserve(counts.size());
  for (auto& [term, row] : counts) {
    terms.push_back(term);
    rows.push_back(std::move(row));
  }
  return TermDocMatrix(std::move(terms), rows, corpus.documents.size());
}

using GlobalWeights = std::vector<double>;

/// Entropy global weight of every term row.
inline GlobalWeights entropy_weights(const TermDocMatrix& matrix) {
  GlobalWeights e(matrix.n_terms());
  std::vector<double> freqs;
  for (std::size_t i = 0; i < matrix.n_terms(); ++i) {
    freqs.clear();
    for (const auto& entry : matrix.row(i)) freqs.push_back(entry.count);
    e[i] = entropy_weight(freqs, matrix.n_docs());
  }
  return e;
}

// ---------------------------------------------------------------------------

enum class LocalWeight { log1p, raw };
enum class GlobalWeight { entropy, none };

struct WeightingConfig {
  bool use_titles = false;
  bool frequency_normalization = false;
  LocalWeight local = LocalWeight::log1p;
  GlobalWeight global = GlobalWeight::entropy;
  bool document_normalization = false;

  /// Both normalizations at once is not one of the studied settings.
  bool is_standard_setting() const { return !(frequency_normalization && document_normalization); }

  friend bool operator==(const WeightingConfig&, const WeightingConfig&) = default;
};

inline double apply_local(LocalWeight local, double x) {
  return local == LocalWeight::log1p ? std::log1p(x) : x;
}

struct WeightedMatrix {
  Eigen::MatrixXd values;  // T x D
  GlobalWeights global;    // per term; all ones when global weighting is off
};

/// Weighting pipeline, in order: column sums to 1 (frequency normalization),
/// unit-norm columns (document normalization), local function, then row
/// scaling by the entropy global weight. The global weight is computed on the
/// matrix as it stands after the normalization steps.
inline WeightedMatrix weight_matrix(const TermDocMatrix& matrix, const WeightingConfig& config,
                                    Diagnostics* diag = nullptr) {
  Eigen::MatrixXd x = matrix.dense();
  const auto n_docs = x.cols();

  for (Eigen::Index j = 0; j < n_docs; ++j) {
    if (!config.frequency_normalization && !config.document_normalization) break;
    if (x.col(j).sum() == 0.0) {
      warn(diag, "document " + std::to_string(j + 1) + " is empty; normalization skipped");
      continue;
    }
    if (config.frequency_normalization) x.col(j) /= x.col(j).sum();
    if (config.document_normalization) x.col(j) /= x.col(j).norm();
  }

  WeightedMatrix out;
  out.global.assign(matrix.n_terms(), 1.0);
  if (config.global == GlobalWeight::entropy) {
    std::vector<double> freqs;
    for (std::size_t i = 0; i < matrix.n_terms(); ++i) {
      freqs.clear();
      for (const auto& e : matrix.row(i)) {
        freqs.push_back(x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(e.doc)));
      }
      out.global[i] = entropy_weight(freqs, matrix.n_docs());
    }
  }

  out.values = x.unaryExpr([&](double v) { return apply_local(config.local, v); });
  for (std::size_t i = 0; i < matrix.n_terms(); ++i) {
    out.values.row(static_cast<Eigen::Index>(i)) *= out.global[i];
  }
  return out;
}

}  // namespace elsa
