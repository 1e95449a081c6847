// Copyright 2026 The pdmp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "pdmp/types.hpp"

namespace pdmp {

struct Edge {
  int i = 0;
  int j = 0;  // i < j always holds for edges stored in a NetworkGraph

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

// Undirected, simple, connected agent network. Edge l = (i, j) with i < j is
// oriented +1 at i and -1 at j; its dual variable is owned by i.
class NetworkGraph {
 public:
  // Validates and normalizes (swaps pairs so that i < j, sorts). Rejects
  // self-loops, duplicates, out-of-range vertices and disconnected graphs.
  static NetworkGraph from_edges(int n, std::vector<Edge> edges);

  int agents() const { return n_; }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(int l) const { return edges_[l]; }

  std::span<const int> neighbors(int i) const { return neighbors_[i]; }
  std::span<const int> incident_edges(int i) const { return incident_[i]; }
  std::span<const int> owned_edges(int i) const { return owned_[i]; }
  int owner(int l) const { return edges_[l].i; }

  int degree(int i) const { return static_cast<int>(neighbors_[i].size()); }
  int max_degree() const;
  bool has_edge(int i, int j) const;

  // New graph with vertex v renamed to perm[v].
  NetworkGraph relabeled(std::span<const int> perm) const;

  // One "i j" pair per line, 0-indexed.
  void write_edge_list(std::ostream& out) const;

 private:
  NetworkGraph() = default;

  int n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> neighbors_;
  std::vector<std::vector<int>> incident_;
  std::vector<std::vector<int>> owned_;
};

NetworkGraph build_path(int n);
NetworkGraph build_cycle(int n);
NetworkGraph build_complete(int n);
// Circulant graph: each agent linked to its k/2 nearest ring neighbors on
// each side.
NetworkGraph build_ring_lattice(int n, int k);

// Ring plus (k-2)/2 random chords per agent, resampled until simple.
NetworkGraph build_k_regular_random(int n, int k, std::uint64_t seed,
                                    int max_attempts = 1000);

// e x n edge-node incidence matrix, +1 at the smaller endpoint.
Matrix incidence_matrix(const NetworkGraph& g);
Matrix laplacian(const NetworkGraph& g);

struct BKind {
  enum class Tag { kLaplacian, kBetaLaplacian, kCustom };

  Tag tag = Tag::kLaplacian;
  double beta = 1.0;
  Matrix custom;

  static BKind laplacian() { return {}; }
  static BKind beta_laplacian(double beta) { return {Tag::kBetaLaplacian, beta, {}}; }
  static BKind from_matrix(Matrix b) { return {Tag::kCustom, 1.0, std::move(b)}; }

  std::string name() const;
};

struct ConstraintMatrices {
  Matrix A;
  Matrix B;
  BKind kind;
};

// Throws kAssumptionViolation naming the failed check: shape, symmetry,
// topology (non-edge entry), positive semidefiniteness or null space.
void check_augmentation(const NetworkGraph& g, const Matrix& b);

Matrix build_B(const NetworkGraph& g, const BKind& kind);
ConstraintMatrices build_constraints(const NetworkGraph& g, const BKind& kind);

struct SpectralBounds {
  double rhoB = 0.0;    // largest eigenvalue of B
  double rhoAtA = 0.0;  // largest eigenvalue of A'A
  double sAAt = 0.0;    // smallest nonzero eigenvalue of AA'
};

// Eigenvalues below this are treated as zero.
double zero_threshold(double largest);

SpectralBounds spectral(const NetworkGraph& g, const ConstraintMatrices& mats);

// Ascending eigenvalues of a symmetric matrix.
Vector symmetric_eigenvalues(const Matrix& m);

}  // namespace pdmp
