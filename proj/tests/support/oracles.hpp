#pragma once

// Reference implementations used to check the library.

#include <algorithm>
#include <string>
#include <vector>

#include "causalrag/index.hpp"

namespace causalrag::testing {

struct OracleHit {
  std::string chunk_id;
  double composite = 0.0;
};

// Scores every entry, sorts all of them, keeps the first k.
inline std::vector<OracleHit> brute_force_top_k(const Index& index, const EmbeddingVector& query,
                                                double alpha, double beta, std::size_t k) {
  std::vector<OracleHit> all;
  for (const auto& e : index.entries()) {
    double s = 0.0;
    for (std::size_t i = 0; i < query.values.size(); ++i) {
      s += static_cast<double>(query.values[i]) * static_cast<double>(e.vector.values[i]);
    }
    s = std::clamp(s, -1.0, 1.0);
    all.push_back({e.chunk_id, alpha * s + beta * e.psi});
  }
  std::sort(all.begin(), all.end(), [](const OracleHit& a, const OracleHit& b) {
    if (a.composite != b.composite) {
      return a.composite > b.composite;
    }
    return a.chunk_id < b.chunk_id;
  });
  all.resize(std::min(k, all.size()));
  return all;
}

inline std::vector<std::string> ids_of(const std::vector<ScoredDocument>& docs) {
  std::vector<std::string> out;
  for (const auto& d : docs) {
    out.push_back(d.chunk_id);
  }
  return out;
}

inline std::vector<std::string> ids_of(const std::vector<OracleHit>& hits) {
  std::vector<std::string> out;
  for (const auto& h : hits) {
    out.push_back(h.chunk_id);
  }
  return out;
}

} // namespace causalrag::testing
