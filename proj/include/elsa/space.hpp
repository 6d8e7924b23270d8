#pragma once

// Truncated singular space, pseudo-document folding-in and similarity.

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "elsa/error.hpp"

namespace elsa {

/// Relative cutoff below which singular values count as zero.
inline constexpr double kRankTolerance = 1e-10;

/// Rank-k factors A ~ U diag(sigma) V^T of a weighted term-document matrix.
/// Immutable once built.
class SemanticSpace {
 public:
  SemanticSpace() = default;

  SemanticSpace(Eigen::MatrixXd u, Eigen::VectorXd sigma, Eigen::MatrixXd v, std::size_t rank,
                std::vector<std::string> terms)
      : u_(std::move(u)), sigma_(std::move(sigma)), v_(std::move(v)), rank_(rank),
        terms_(std::move(terms)) {
    if (u_.cols() != sigma_.size() || v_.cols() != sigma_.size()) {
      throw Error("semantic space factors have inconsistent dimensions");
    }
    if (static_cast<Eigen::Index>(terms_.size()) != u_.rows()) {
      throw Error("semantic space vocabulary does not match U rows");
    }
    for (std::size_t i = 0; i < terms_.size(); ++i) index_.emplace(terms_[i], i);
  }

  std::size_t k() const { return static_cast<std::size_t>(sigma_.size()); }
  /// Numerical rank of the decomposed matrix.
  std::size_t rank() const { return rank_; }
  std::size_t n_terms() const { return static_cast<std::size_t>(u_.rows()); }
  std::size_t n_docs() const { return static_cast<std::size_t>(v_.rows()); }

  const Eigen::MatrixXd& u() const { return u_; }
  const Eigen::VectorXd& sigma() const { return sigma_; }
  const Eigen::MatrixXd& v() const { return v_; }
  const std::vector<std::string>& terms() const { return terms_; }

  std::optional<std::size_t> term_index(const std::string& term) const {
    auto it = index_.find(term);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  bool contains(const std::string& term) const { return index_.count(term) != 0; }

  /// The leading `k` dimensions. Requests beyond the current dimensionality
  /// are clamped, with a warning.
  SemanticSpace truncated(std::size_t k, Diagnostics* diag = nullptr) const {
    if (k == 0) throw Error("dimensionality must be at least 1");
    if (k > this->k()) {
      warn(diag, "k = " + std::to_string(k) + " exceeds numerical rank; clamped to " +
                     std::to_string(this->k()));
      k = this->k();
    }
    const auto kk = static_cast<Eigen::Index>(k);
    return SemanticSpace(u_.leftCols(kk), sigma_.head(kk), v_.leftCols(kk), rank_, terms_);
  }

  Eigen::MatrixXd reconstruct() const {
    return u_ * sigma_.asDiagonal() * v_.transpose();
  }

 private:
  Eigen::MatrixXd u_;
  Eigen::VectorXd sigma_;
  Eigen::MatrixXd v_;
  std::size_t rank_ = 0;
  std::vector<std::string> terms_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Best rank-k approximation of `weighted` (T x D). Singular values below
/// kRankTolerance * sigma_max are discarded; if `k` exceeds the numerical
/// rank it is clamped with a warning. Empty `terms` labels rows by index.
inline SemanticSpace svd_truncate(const Eigen::MatrixXd& weighted, std::size_t k,
                                  std::vector<std::string> terms = {},
                                  Diagnostics* diag = nullptr) {
  const auto max_k = static_cast<std::size_t>(std::min(weighted.rows(), weighted.cols()));
  if (k == 0 || k > max_k) {
    throw Error("k = " + std::to_string(k) + " outside [1, min(T, D) = " +
                std::to_string(max_k) + "]");
  }
  if (terms.empty()) {
    for (Eigen::Index i = 0; i < weighted.rows(); ++i) terms.push_back(std::to_string(i));
  }

  Eigen::BDCSVD<Eigen::MatrixXd> svd(weighted, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  if (s.size() == 0 || !(s(0) > 0.0)) throw Error("cannot decompose a zero matrix");

  std::size_t rank = 0;
  while (rank < static_cast<std::size_t>(s.size()) &&
         s(static_cast<Eigen::Index>(rank)) > kRankTolerance * s(0)) {
    ++rank;
  }
  if (k > rank) {
    warn(diag, "k = " + std::to_string(k) + " exceeds numerical rank; clamped to " +
                   std::to_string(rank));
    k = rank;
  }
  const auto kk = static_cast<Eigen::Index>(k);
  return SemanticSpace(svd.matrixU().leftCols(kk), s.head(kk), svd.matrixV().leftCols(kk), rank,
                       std::move(terms));
}

/// Decomposition at full numerical rank, for slicing with truncated().
inline SemanticSpace svd_full(const Eigen::MatrixXd& weighted, std::vector<std::string> terms = {},
                              Diagnostics* diag = nullptr) {
  const auto max_k = static_cast<std::size_t>(std::min(weighted.rows(), weighted.cols()));
  return svd_truncate(weighted, max_k, std::move(terms), diag);
}

// ---------------------------------------------------------------------------

struct PseudoDoc {
  Eigen::VectorXd vec;
  std::vector<std::string> used;     // in-vocabulary terms
  std::vector<std::string> dropped;  // out-of-vocabulary terms
  bool empty = true;                 // zero vector; similarity is undefined
};

/// Projects a dense T-vector: q_hat = diag(sigma)^-1 U^T q.
inline PseudoDoc fold_in(const Eigen::VectorXd& q, const SemanticSpace& space) {
  if (static_cast<std::size_t>(q.size()) != space.n_terms()) {
    throw Error("fold-in vector length does not match the space vocabulary");
  }
  PseudoDoc out;
  out.vec = (space.u().transpose() * q).cwiseQuotient(space.sigma());
  out.empty = out.vec.squaredNorm() == 0.0;
  return out;
}

/// Projects a weighted bag of words given by term label. Terms outside the
/// space vocabulary are dropped and reported.
inline PseudoDoc fold_in(const std::map<std::string, double>& bow, const SemanticSpace& space) {
  Eigen::VectorXd q = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(space.n_terms()));
  std::vector<std::string> used;
  std::vector<std::string> dropped;
  for (const auto& [term, value] : bow) {
    if (auto i = space.term_index(term)) {
      q(static_cast<Eigen::Index>(*i)) += value;
      used.push_back(term);
    } else {
      dropped.push_back(term);
    }
  }
  PseudoDoc out = fold_in(q, space);
  out.used = std::move(used);
  out.dropped = std::move(dropped);
  return out;
}

inline double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) throw Error("cosine of vectors with different dimensions");
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) throw Error("undefined similarity: zero vector");
  return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

inline double cosine(const PseudoDoc& a, const PseudoDoc& b) {
  if (a.empty || b.empty) throw Error("undefined similarity: empty pseudo-document");
  return cosine(a.vec, b.vec);
}

inline double angle(const PseudoDoc& a, const PseudoDoc& b) { return std::acos(cosine(a, b)); }

inline double angle(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return std::acos(cosine(a, b));
}

// ---------------------------------------------------------------------------
// Serialization
//
//   elsa-space 1
//   T D k rank
//   <T term labels, one per line>
//   <k singular values>
//   <T lines of U, k values each>
//   <D lines of V, k values each>
//
// Values use the shortest decimal form that round-trips exactly.

namespace detail {

inline std::string format_double(double x) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

inline double parse_double(const std::string& s) {
  double x = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("space file: bad number '" + s + "'");
  }
  return x;
}

}  // namespace detail

inline constexpr int kSpaceFormatVersion = 1;

inline void write_space(std::ostream& out, const SemanticSpace& space) {
  out << "elsa-space " << kSpaceFormatVersion << '\n';
  out << space.n_terms() << ' ' << space.n_docs() << ' ' << space.k() << ' ' << space.rank()
      << '\n';
  for (const auto& t : space.terms()) out << t << '\n';
  auto write_row = [&](const auto& row) {
    for (Eigen::Index c = 0; c < row.size(); ++c) {
      if (c != 0) out << ' ';
      out << detail::format_double(row(c));
    }
    out << '\n';
  };
  write_row(space.sigma());
  for (Eigen::Index i = 0; i < space.u().rows(); ++i) write_row(space.u().row(i));
  for (Eigen::Index j = 0; j < space.v().rows(); ++j) write_row(space.v().row(j));
}

inline SemanticSpace read_space(std::istream& in) {
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != "elsa-space") {
    throw ConfigError("not a semantic space file");
  }
  if (version != kSpaceFormatVersion) {
    throw ConfigError("unsupported space file version " + std::to_string(version));
  }
  std::size_t t = 0, d = 0, k = 0, rank = 0;
  if (!(in >> t >> d >> k >> rank)) throw ConfigError("space file: bad header");

  std::vector<std::string> terms(t);
  for (auto& term : terms) {
    if (!(in >> term)) throw ConfigError("space file: truncated vocabulary");
  }
  auto read_value = [&] {
    std::string token;
    if (!(in >> token)) throw ConfigError("space file: truncated factors");
    return detail::parse_double(token);
  };
  const auto kk = static_cast<Eigen::Index>(k);
  Eigen::VectorXd sigma(kk);
  for (Eigen::Index c = 0; c < kk; ++c) sigma(c) = read_value();
  Eigen::MatrixXd u(static_cast<Eigen::Index>(t), kk);
  for (Eigen::Index i = 0; i < u.rows(); ++i)
    for (Eigen::Index c = 0; c < kk; ++c) u(i, c) = read_value();
  Eigen::MatrixXd v(static_cast<Eigen::Index>(d), kk);
  for (Eigen::Index j = 0; j < v.rows(); ++j)
    for (Eigen::Index c = 0; c < kk; ++c) v(j, c) = read_value();
  return SemanticSpace(std::move(u), std::move(sigma), std::move(v), rank, std::move(terms));
}

}  // namespace elsa
