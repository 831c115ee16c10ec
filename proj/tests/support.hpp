#pragma once

#include <random>
#include <vector>

#include "gvarma/graph.hpp"

namespace testing_support {

using gvarma::Edge;
using gvarma::Graph;
using gvarma::Matrix;

inline Graph ring(int n, double w = 1.0) {
  std::vector<Edge> e;
  for (int i = 0; i < n; ++i) e.push_back({i, (i + 1) % n, w});
  return Graph::from_edges(n, e);
}

inline Graph path(int n) {
  std::vector<Edge> e;
  for (int i = 0; i + 1 < n; ++i) e.push_back({i, i + 1, 1.0});
  return Graph::from_edges(n, e);
}

// Connected random graph: a path plus random chords with random weights.
inline Graph random_connected(int n, std::uint64_t seed, double chord_prob = 0.4) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Edge> e;
  for (int i = 0; i + 1 < n; ++i) e.push_back({i, i + 1, 0.5 + u(rng)});
  for (int i = 0; i < n; ++i)
    for (int j = i + 2; j < n; ++j)
      if (u(rng) < chord_prob) e.push_back({i, j, 0.5 + u(rng)});
  return Graph::from_edges(n, e);
}

inline Matrix gaussian(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  Matrix M(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) M(i, j) = z(rng);
  return M;
}

}  // namespace testing_support
