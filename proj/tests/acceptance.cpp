// Acceptance suite. Prints one [PASS]/[FAIL] line per criterion and exits
// non-zero if any criterion fails. Pass criterion names (AC1 ... AC10) to run
// a subset.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "elsa/mcq.hpp"
#include "elsa/tune.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace elsa;

namespace {

/// Collects failure messages; keeps the first few for the report line.
struct Check {
  std::size_t failures = 0;
  std::vector<std::string> first;
  std::string summary;

  void expect(bool ok, const std::string& what) {
    if (ok) return;
    ++failures;
    if (first.size() < 3) first.push_back(what);
  }
  void near(double got, double want, double tol, const std::string& what) {
    std::ostringstream s;
    s.precision(17);
    s << what << ": got " << got << ", want " << want;
    expect(std::abs(got - want) <= tol, s.str());
  }
};

struct Criterion {
  std::string id;
  std::string title;
  double limit_seconds;
  std::function<void(Check&)> run;
};

// ---------------------------------------------------------------------------

void wild_rule(Check& c) {
  const std::size_t terms[] = {1418, 3174, 976, 1083};
  const std::size_t docs[] = {149, 425, 191, 294};
  const std::size_t want[] = {28, 63, 19, 21};
  std::string got;
  for (int i = 0; i < 4; ++i) {
    const auto k = wild_estimate(terms[i], docs[i], WildMode::terms);
    c.expect(k == want[i], std::to_string(terms[i]) + " terms gave " + std::to_string(k));
    got += (i ? " " : "") + std::to_string(k);
  }
  c.summary = "k = " + got;
}

void ablation_arithmetic(Check& c) {
  struct Cell {
    const char* corpus;
    Parameter parameter;
    std::size_t best;
    std::size_t ablated;
    const char* expected;
  };
  using P = Parameter;
  const Cell cells[] = {
      {"Cb", P::titles, 27, 26, "3,7%"},
      {"Cb", P::document_normalization, 27, 24, "11,1%"},
      {"Cb", P::joint_lemmatization, 27, 24, "11,1%"},
      {"Cb", P::frequency_normalization, 27, 22, "18,5%"},
      {"Cb", P::three_set_weighting, 27, 22, "18,5%"},
      {"Cb", P::stop_words, 27, 18, "33,3%"},
      {"Cb", P::truncation, 27, 18, "33,3%"},
      {"Ce", P::titles, 25, 25, "0%"},
      {"Ce", P::document_normalization, 25, 23, "4%"},
      {"Ce", P::joint_lemmatization, 25, 22, "12%"},
      {"Ce", P::frequency_normalization, 25, 21, "16%"},
      {"Ce", P::three_set_weighting, 25, 22, "12%"},
      {"Ce", P::stop_words, 25, 20, "20%"},
      {"Ce", P::truncation, 25, 17, "32%"},
      {"Mb", P::titles, 22, 21, "4,5%"},
      {"Mb", P::document_normalization, 22, 20, "9,1%"},
      {"Mb", P::frequency_normalization, 22, 20, "9,1%"},
      {"Mb", P::three_set_weighting, 22, 18, "18,2%"},
      {"Mb", P::stop_words, 22, 16, "27,3%"},
      {"Mb", P::truncation, 22, 14, "36,4%"},
      {"Me", P::titles, 22, 19, "13,6%"},
      {"Me", P::document_normalization, 22, 18, "18,2%"},
      {"Me", P::frequency_normalization, 22, 19, "13,6%"},
      {"Me", P::three_set_weighting, 22, 17, "22,7%"},
      {"Me", P::stop_words, 22, 16, "27,3%"},
      {"Me", P::truncation, 22, 13, "40,9%"},
  };
  std::size_t matched = 0;
  for (const auto& cell : cells) {
    const auto got = format_percent(contribution_tenths(cell.best, cell.ablated), Locale::comma);
    const bool ok = got == cell.expected;
    matched += ok;
    c.expect(ok, std::string(cell.corpus) + " " + std::string(to_string(cell.parameter)) + ": (" +
                     std::to_string(cell.best) + "-" + std::to_string(cell.ablated) + ")/" +
                     std::to_string(cell.best) + " = " + got + ", expected " + cell.expected);
  }
  c.summary = std::to_string(matched) + "/" + std::to_string(std::size(cells)) + " cells";
}

void entropy_properties(Check& c) {
  fixture::Rng rng(1001);
  std::size_t rows_checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t d = 2 + rng.below(19);
    const std::size_t t = 2 + rng.below(49);
    std::vector<std::map<std::size_t, std::uint32_t>> rows(t);
    std::vector<std::string> terms;
    // Row 0: one document only. Row 1: uniform over all documents.
    rows[0][rng.below(d)] = 1 + static_cast<std::uint32_t>(rng.below(9));
    const auto u = 1 + static_cast<std::uint32_t>(rng.below(5));
    for (std::size_t j = 0; j < d; ++j) rows[1][j] = u;
    for (std::size_t i = 2; i < t; ++i) {
      rows[i][rng.below(d)] = 1;
      for (std::size_t j = 0; j < d; ++j) {
        if (rng.below(5) == 0) rows[i][j] += static_cast<std::uint32_t>(1 + rng.below(7));
      }
    }
    for (std::size_t i = 0; i < t; ++i) terms.push_back(fixture::pseudo_word(i));
    const TermDocMatrix m(terms, rows, d);
    const auto e = entropy_weights(m);

    std::vector<std::size_t> perm(d);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t j = d - 1; j > 0; --j) std::swap(perm[j], perm[rng.below(j + 1)]);
    std::vector<std::map<std::size_t, std::uint32_t>> permuted(t);
    for (std::size_t i = 0; i < t; ++i)
      for (const auto& [j, f] : rows[i]) permuted[i][perm[j]] = f;
    const auto ep = entropy_weights(TermDocMatrix(terms, permuted, d));

    c.near(e[0], 1.0, 1e-12, "single-document term");
    c.near(e[1], 0.0, 1e-12, "uniform term");
    for (std::size_t i = 0; i < t; ++i) {
      c.expect(e[i] >= 0.0 && e[i] <= 1.0, "weight outside [0,1]");
      c.near(ep[i], e[i], 1e-12, "document permutation");
      std::vector<double> dense(d, 0.0);
      for (const auto& [j, f] : rows[i]) dense[j] = f;
      c.near(e[i], oracle::entropy_weight(dense, d), 1e-12, "long-double oracle");
      ++rows_checked;
    }
  }
  c.summary = "1000 matrices, " + std::to_string(rows_checked) + " rows";
}

Eigen::MatrixXd random_dense(fixture::Rng& rng, Eigen::Index t, Eigen::Index d) {
  Eigen::MatrixXd a(t, d);
  for (Eigen::Index i = 0; i < t; ++i)
    for (Eigen::Index j = 0; j < d; ++j) a(i, j) = rng.uniform(-1.0, 1.0);
  return a;
}

void svd_oracle(Check& c) {
  fixture::Rng rng(2002);
  std::size_t ks = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto t = static_cast<Eigen::Index>(1 + rng.below(30));
    const auto d = static_cast<Eigen::Index>(1 + rng.below(20));
    const Eigen::MatrixXd a = random_dense(rng, t, d);
    const auto sigma = oracle::singular_values(a);
    const SemanticSpace full = svd_full(a);
    c.expect(full.k() == static_cast<std::size_t>(std::min(t, d)), "unexpected rank deficiency");
    for (std::size_t i = 0; i < full.k(); ++i) {
      c.near(full.sigma()(static_cast<Eigen::Index>(i)), sigma[i], 1e-8, "singular value");
    }
    for (std::size_t k = 1; k <= full.k(); ++k) {
      double tail = 0.0;
      for (std::size_t i = k; i < sigma.size(); ++i) tail += sigma[i] * sigma[i];
      c.near((a - full.truncated(k).reconstruct()).norm(), std::sqrt(tail), 1e-8,
             "Frobenius error at k=" + std::to_string(k));
      ++ks;
    }
  }
  c.summary = "200 matrices, " + std::to_string(ks) + " ranks";
}

void fold_in_identity(Check& c) {
  fixture::Rng rng(3003);
  double worst_identity = 0.0, worst_linear = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t d = 2 + rng.below(19);
    const std::size_t t = 2 + rng.below(29);
    std::vector<std::map<std::size_t, std::uint32_t>> rows(t);
    std::vector<std::string> terms;
    for (std::size_t i = 0; i < t; ++i) {
      rows[i][rng.below(d)] = 1 + static_cast<std::uint32_t>(rng.below(3));
      for (std::size_t j = 0; j < d; ++j) {
        if (rng.below(3) == 0) rows[i][j] += static_cast<std::uint32_t>(1 + rng.below(5));
      }
      terms.push_back(fixture::pseudo_word(i));
    }
    const TermDocMatrix m(terms, rows, d);
    const WeightedMatrix w = weight_matrix(m, {});
    if (w.values.isZero(0.0)) continue;
    const SemanticSpace s = svd_full(w.values, terms);
    for (Eigen::Index j = 0; j < w.values.cols(); ++j) {
      const auto p = fold_in(Eigen::VectorXd(w.values.col(j)), s);
      const double err = (p.vec - s.v().row(j).transpose()).cwiseAbs().maxCoeff();
      worst_identity = std::max(worst_identity, err);
      c.expect(err <= 1e-8, "column " + std::to_string(j) + " fold-in error " + std::to_string(err));
    }
    Eigen::VectorXd q1(static_cast<Eigen::Index>(t)), q2(static_cast<Eigen::Index>(t));
    for (Eigen::Index i = 0; i < q1.size(); ++i) {
      q1(i) = rng.uniform(0, 1);
      q2(i) = rng.uniform(0, 1);
    }
    const double alpha = rng.uniform(-2, 2), beta = rng.uniform(-2, 2);
    const Eigen::VectorXd lhs = fold_in(Eigen::VectorXd(alpha * q1 + beta * q2), s).vec;
    const Eigen::VectorXd rhs = alpha * fold_in(q1, s).vec + beta * fold_in(q2, s).vec;
    const double lin = (lhs - rhs).cwiseAbs().maxCoeff();
    worst_linear = std::max(worst_linear, lin);
    c.expect(lin <= 1e-10, "linearity error " + std::to_string(lin));
  }
  std::ostringstream s;
  s << "max identity error " << worst_identity << ", max linearity error " << worst_linear;
  c.summary = s.str();
}

Corpus organ_corpus() {
  Corpus corpus{"organs", {}};
  for (const char* body : {"the blood carries oxygen to the organs",
                           "the lungs take oxygen from the air",
                           "the heart pumps the blood",
                           "an oximeter measures the oxygen in the blood"}) {
    corpus.documents.push_back({std::nullopt, body});
  }
  return corpus;
}

void undecidability_oracle(Check& c) {
  // Vocabulary: 8 corpus words; answers also draw out-of-vocabulary words,
  // stop words and plural forms, and copy or shuffle each other on purpose.
  std::vector<std::string> corpus_words, oov_words;
  for (std::size_t i = 0; i < 8; ++i) corpus_words.push_back(fixture::pseudo_word(i));
  for (std::size_t i = 0; i < 4; ++i) oov_words.push_back(fixture::pseudo_word(200 + i));
  const std::set<std::string> stop_words = {"the", "of"};
  const Vocabulary vocabulary(corpus_words);
  std::set<std::string> all_words(corpus_words.begin(), corpus_words.end());
  for (const auto& w : corpus_words) all_words.insert(w + "s");
  for (const auto& w : oov_words) {
    all_words.insert(w);
    all_words.insert(w + "s");
  }
  all_words.insert(stop_words.begin(), stop_words.end());
  const TermMap term_map = build_term_map(all_words, {SuffixRule("", "s")}, {}, 3);
  const StopList stoplist(stop_words, term_map);

  fixture::Rng rng(6006);
  std::size_t counts[3] = {0, 0, 0};
  for (int trial = 0; trial < 1000; ++trial) {
    std::array<std::vector<std::string>, 3> words;  // surface words per answer
    std::array<std::vector<std::string>, 3> oracle_terms;
    for (std::size_t a = 0; a < 3; ++a) {
      for (std::size_t n = rng.below(4); n > 0; --n) {
        switch (rng.below(4)) {
          case 0: {
            const auto& w = corpus_words[rng.below(3)];
            words[a].push_back(rng.below(2) ? w : w + "s");
            oracle_terms[a].push_back(w);
            break;
          }
          case 1: words[a].push_back(oov_words[rng.below(oov_words.size())]); break;
          case 2: words[a].push_back(rng.below(2) ? "the" : "of"); break;
          default: {
            const auto& w = corpus_words[3 + rng.below(2)];
            words[a].push_back(w);
            oracle_terms[a].push_back(w);
          }
        }
      }
    }
    // Deliberate collisions: copy one answer over another, shuffled, with
    // extra out-of-vocabulary noise.
    if (rng.below(2) == 0) {
      const std::size_t from = rng.below(3), to = rng.below(3);
      if (from != to) {
        words[to] = words[from];
        oracle_terms[to] = oracle_terms[from];
        for (std::size_t i = words[to].size(); i > 1; --i) std::swap(words[to][i - 1], words[to][rng.below(i)]);
        if (rng.below(2)) words[to].push_back(oov_words[rng.below(oov_words.size())]);
      }
    }
    Question q;
    q.id = std::to_string(trial);
    q.stem = corpus_words[5];
    q.correct = 1 + static_cast<int>(rng.below(3));
    for (std::size_t a = 0; a < 3; ++a) {
      std::string text = "The";
      for (const auto& w : words[a]) text += (rng.below(3) == 0 ? ", " : " ") + w;
      q.answers[a] = text + ".";
    }
    const int expected = oracle::undecidability(oracle_terms, q.correct);
    const auto got = detect_undecidability(q, vocabulary, term_map, stoplist);
    const int got_code = got.kind == Decidability::decidable ? 0 : got.kind == Decidability::hard ? 1 : 2;
    ++counts[expected];
    c.expect(got_code == expected, "fixture " + q.id + ": got " + std::to_string(got_code) + ", oracle " +
                                       std::to_string(expected));
  }

  // Named fixtures: out-of-vocabulary words collapse answers.
  const Corpus corpus = organ_corpus();
  Lexicon lex;
  lex.rules = {SuffixRule("", "s")};
  lex.stop_words = {"the", "a", "an", "to", "in", "from", "which", "what"};
  const auto run = prepare_run(corpus, {}, lex, {});
  Question q24;
  q24.stem = "What does the blood carry?";
  q24.answers = {"The heart.", "Oxygenated blood.", "Deoxygenated blood."};
  q24.correct = 2;
  const auto u24 = detect_undecidability(q24, run.space, run.term_map, run.stoplist);
  c.expect(u24.kind == Decidability::hard && u24.answers == std::make_pair(2, 3), "Q24-style fixture is not hard 2, 3");
  Question q38;
  q38.stem = "Which apparatus measures oxygen?";
  q38.answers = {"A thermometer.", "An oximeter.", "An oscilloscope."};
  q38.correct = 2;
  const auto u38 = detect_undecidability(q38, run.space, run.term_map, run.stoplist);
  c.expect(u38.kind == Decidability::soft && u38.answers == std::make_pair(1, 3), "Q38-style fixture is not soft 1, 3");

  c.summary = "1000 fixtures (" + std::to_string(counts[0]) + " decidable, " + std::to_string(counts[1]) +
              " hard, " + std::to_string(counts[2]) + " soft); Q24 hard, Q38 soft";
}

void three_set_extremes(Check& c) {
  const auto w = three_set_entropy({Bag{{"only", 1}, {"all", 1}, {"pair", 1}},
                                    Bag{{"all", 1}, {"pair", 1}},
                                    Bag{{"all", 1}}});
  c.near(w.at("only"), 1.0, 1e-12, "term unique to one answer");
  c.near(w.at("all"), 0.0, 1e-12, "term uniform across answers");
  c.near(w.at("pair"), 1.0 - std::log(2.0) / std::log(3.0), 1e-12, "f = (1,1,0)");
  c.near(w.at("pair"), 0.369070246428542563, 1e-12, "f = (1,1,0) against 30-digit value");
  std::ostringstream s;
  s.precision(15);
  s << "w = " << w.at("only") << ", " << w.at("all") << ", " << w.at("pair");
  c.summary = s.str();
}

oracle::Counts counts_of(const Bag& bag, const SemanticSpace& space) {
  oracle::Counts out;
  for (const auto& [term, f] : bag) out[static_cast<Eigen::Index>(*space.term_index(term))] = f;
  return out;
}

/// Score recomputed with the independent SVD and cosine oracle.
std::size_t oracle_score(const fixture::TopicFixture& f, const PreparedRun& run, std::size_t k) {
  std::size_t correct = 0;
  for (const auto& q : f.mcq) {
    const auto bags = answer_bags(q, run.space, run.term_map, run.stoplist);
    const auto cos = oracle::answer_cosines(
        run.weighted.values, k, run.weighted.global,
        counts_of(bag_of_words(q.stem, run.space, run.term_map, run.stoplist), run.space),
        {counts_of(bags[0], run.space), counts_of(bags[1], run.space), counts_of(bags[2], run.space)});
    std::size_t best = 0;
    for (std::size_t a = 1; a < 3; ++a)
      if (cos[a] > cos[best]) best = a;
    correct += static_cast<int>(best) + 1 == q.correct;
  }
  return correct;
}

void synthetic_end_to_end(Check& c) {
  const auto f = fixture::make_topic_fixture();
  const auto scan = dimension_scan(f.corpus, f.mcq, f.lexicon, f.best);
  auto full_cfg = f.best;
  full_cfg.k.reset();
  const auto full = run_once(f.corpus, f.mcq, f.lexicon, full_cfg);
  const auto run = prepare_run(f.corpus, f.mcq, f.lexicon, f.best);

  c.expect(scan.best_score >= 9, "best scanned score " + std::to_string(scan.best_score) + " < 9");
  c.expect(full.score.correct < scan.best_score, "no-reduction score is not below the best");
  c.expect(full.score.denominator == 10, "denominator is not 10");
  const auto oracle_best = oracle_score(f, run, scan.best_k);
  const auto oracle_full = oracle_score(f, run, run.space.k());
  c.expect(oracle_best == scan.best_score, "oracle disagrees at best k: " + std::to_string(oracle_best));
  c.expect(oracle_full == full.score.correct, "oracle disagrees at full rank: " + std::to_string(oracle_full));
  c.summary = "T=" + std::to_string(run.matrix.n_terms()) + " D=" + std::to_string(run.matrix.n_docs()) +
              "; best k=" + std::to_string(scan.best_k) + " " + std::to_string(scan.best_score) +
              "/10, no reduction k=" + std::to_string(full.k) + " " + std::to_string(full.score.correct) +
              "/10 (oracle " + std::to_string(oracle_best) + ", " + std::to_string(oracle_full) + ")";
}

void tie_break(Check& c) {
  const auto f = fixture::make_topic_fixture();
  Question q = f.mcq.front();
  const std::string correct = q.answers[static_cast<std::size_t>(q.correct - 1)];
  // Same words in another order, so both answers fold to the same vector.
  auto words = tokenize(correct);
  std::reverse(words.begin(), words.end());
  std::string reordered;
  for (const auto& w : words) reordered += (reordered.empty() ? "" : " ") + w;
  q.answers = {correct, reordered + ".", "A " + fixture::pseudo_word(50) + "."};
  q.correct = 3;

  auto cfg = f.best;
  cfg.k = 2;
  std::size_t first = 0;
  for (int i = 0; i < 100; ++i) {
    const auto r = run_once(f.corpus, {q}, f.lexicon, cfg);
    const auto& v = r.verdicts.front();
    c.expect(v.cosines[0] == v.cosines[1], "answers 1 and 2 do not tie exactly");
    c.expect(v.chosen == 1, "run " + std::to_string(i) + " chose " + (v.chosen ? std::to_string(*v.chosen) : "-"));
    first += v.chosen == 1;
  }
  c.summary = "answer 1 chosen in " + std::to_string(first) + "/100 runs";
}

void scan_consistency(Check& c) {
  const auto f = fixture::make_topic_fixture();
  const auto scan = dimension_scan(f.corpus, f.mcq, f.lexicon, f.best);
  std::size_t agree = 0;
  for (const auto& p : scan.points) {
    auto cfg = f.best;
    cfg.k = p.k;
    const auto r = run_once(f.corpus, f.mcq, f.lexicon, cfg);
    const bool ok = r.score.correct == p.correct && r.score.denominator == p.denominator;
    agree += ok;
    c.expect(ok, "k=" + std::to_string(p.k) + ": scan " + std::to_string(p.correct) + ", run " +
                     std::to_string(r.score.correct));
  }
  c.summary = std::to_string(agree) + "/" + std::to_string(scan.points.size()) + " values of k agree";
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {"AC1", "wild-rule regression", 0.001, wild_rule},
      {"AC2", "ablation arithmetic regression", 0.001, ablation_arithmetic},
      {"AC3", "entropy property suite", 5, entropy_properties},
      {"AC4", "SVD oracle equivalence", 30, svd_oracle},
      {"AC5", "fold-in identity", 10, fold_in_identity},
      {"AC6", "undecidability oracle", 5, undecidability_oracle},
      {"AC7", "3-set entropy extremes", 1, three_set_extremes},
      {"AC8", "synthetic end-to-end", 60, synthetic_end_to_end},
      {"AC9", "tie-break determinism", 1, tie_break},
      {"AC10", "dimension-scan consistency", 60, scan_consistency},
  };
  const std::set<std::string> only(argv + 1, argv + argc);

  int failed = 0;
  for (const auto& criterion : criteria) {
    if (!only.empty() && only.count(criterion.id) == 0) continue;
    Check check;
    const auto start = std::chrono::steady_clock::now();
    try {
      criterion.run(check);
    } catch (const std::exception& e) {
      check.expect(false, std::string("exception: ") + e.what());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    check.expect(seconds <= criterion.limit_seconds, "time limit exceeded");
    const bool pass = check.failures == 0;
    failed += !pass;

    std::ostringstream line;
    line << (pass ? "[PASS] " : "[FAIL] ") << criterion.id << ' ' << criterion.title << ": " << check.summary;
    line.precision(3);
    line << " (" << seconds * 1000.0 << " ms, limit " << criterion.limit_seconds * 1000.0 << " ms)";
    if (!pass) {
      line << "\n       " << check.failures << " failure(s)";
      for (const auto& m : check.first) line << "\n       - " << m;
    }
    std::cout << line.str() << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
