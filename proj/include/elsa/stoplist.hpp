#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "elsa/vsm.hpp"

namespace elsa {

struct StopCandidate {
  std::string term;
  double weight;  // entropy global weight
};

/// The `n` terms with the lowest entropy global weight, ascending, ties in
/// lexicographic order. Run on a matrix built without a stop list; the
/// result still needs a human pass to drop overly specialized terms.
inline std::vector<StopCandidate> stoplist_candidates(const TermDocMatrix& matrix, std::size_t n) {
  const GlobalWeights e = entropy_weights(matrix);
  std::vector<StopCandidate> ranked;
  ranked.reserve(matrix.n_terms());
  for (std::size_t i = 0; i < matrix.n_terms(); ++i) ranked.push_back({matrix.terms()[i], e[i]});
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.weight != b.weight ? a.weight < b.weight : a.term < b.term;
  });
  if (ranked.size() > n) ranked.resize(n);
  return ranked;
}

}  // namespace elsa
