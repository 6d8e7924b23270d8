#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>

#include "elsa/error.hpp"

namespace elsa {

/// Entropy global weight (1 - normalized entropy) of one term whose
/// frequencies over a collection of `n_docs` documents are `frequencies`.
///
///   e = 1 + sum_j p_j log(p_j) / log(n_docs),   p_j = f_j / sum_j f_j
///
/// Zero frequencies contribute nothing (0 log 0 := 0), so callers may pass
/// only the non-zero entries of a sparse row. The result lies in [0, 1]: 1 for
/// a term concentrated in a single document, 0 for a term spread uniformly
/// over all `n_docs` documents.
inline double entropy_weight(std::span<const double> frequencies,
                             std::size_t n_docs) {
  if (n_docs < 2) {
    throw Error("entropy weighting undefined for fewer than 2 documents");
  }
  double total = 0.0;
  for (double f : frequencies) {
    if (f < 0.0) throw Error("entropy weighting: negative frequency");
    total += f;
  }
  if (!(total > 0.0)) throw Error("entropy weighting: term has zero total frequency");

  double sum = 0.0;
  for (double f : frequencies) {
    if (f == 0.0) continue;
    const double p = f / total;
    sum += p * std::log(p);
  }
  const double e = 1.0 + sum / std::log(static_cast<double>(n_docs));
  return std::clamp(e, 0.0, 1.0);
}

}  // namespace elsa
