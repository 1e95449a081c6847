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

#include "pdmp/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <queue>
#include <set>
#include <sstream>

#include "pdmp/error.hpp"
#include "pdmp/random.hpp"

namespace pdmp {

namespace {

bool is_connected(int n, const std::vector<std::vector<int>>& adj) {
  std::vector<char> seen(n, 0);
  std::queue<int> frontier;
  frontier.push(0);
  seen[0] = 1;
  int reached = 1;
  while (!frontier.empty()) {
    const int v = frontier.front();
    frontier.pop();
    for (int w : adj[v]) {
      if (!seen[w]) {
        seen[w] = 1;
        ++reached;
        frontier.push(w);
      }
    }
  }
  return reached == n;
}

}  // namespace

NetworkGraph NetworkGraph::from_edges(int n, std::vector<Edge> edges) {
  if (n < 1) fail(ErrorCode::kInvalidTopology, "graph needs at least one agent");
  for (auto& e : edges) {
    if (e.i < 0 || e.j < 0 || e.i >= n || e.j >= n) {
      std::ostringstream msg;
      msg << "edge (" << e.i << ", " << e.j << ") out of range for n=" << n;
      fail(ErrorCode::kInvalidTopology, msg.str());
    }
    if (e.i == e.j) {
      fail(ErrorCode::kInvalidTopology, "self-loop at vertex " + std::to_string(e.i));
    }
    if (e.i > e.j) std::swap(e.i, e.j);
  }
  std::sort(edges.begin(), edges.end());
  if (auto dup = std::adjacent_find(edges.begin(), edges.end()); dup != edges.end()) {
    std::ostringstream msg;
    msg << "duplicate edge (" << dup->i << ", " << dup->j << ")";
    fail(ErrorCode::kInvalidTopology, msg.str());
  }

  NetworkGraph g;
  g.n_ = n;
  g.edges_ = std::move(edges);
  g.neighbors_.assign(n, {});
  g.incident_.assign(n, {});
  g.owned_.assign(n, {});
  for (int l = 0; l < g.edge_count(); ++l) {
    const auto [i, j] = g.edges_[l];
    g.neighbors_[i].push_back(j);
    g.neighbors_[j].push_back(i);
    g.incident_[i].push_back(l);
    g.incident_[j].push_back(l);
    g.owned_[i].push_back(l);
  }
  for (auto& nb : g.neighbors_) std::sort(nb.begin(), nb.end());
  if (!is_connected(n, g.neighbors_)) {
    fail(ErrorCode::kInvalidTopology, "graph is not connected");
  }
  return g;
}

int NetworkGraph::max_degree() const {
  int best = 0;
  for (int i = 0; i < n_; ++i) best = std::max(best, degree(i));
  return best;
}

bool NetworkGraph::has_edge(int i, int j) const {
  if (i == j || i < 0 || j < 0 || i >= n_ || j >= n_) return false;
  const auto& nb = neighbors_[i];
  return std::binary_search(nb.begin(), nb.end(), j);
}

NetworkGraph NetworkGraph::relabeled(std::span<const int> perm) const {
  if (static_cast<int>(perm.size()) != n_) {
    fail(ErrorCode::kInvalidInput, "permutation size does not match agent count");
  }
  std::vector<Edge> mapped;
  mapped.reserve(edges_.size());
  for (const auto& e : edges_) mapped.push_back({perm[e.i], perm[e.j]});
  return from_edges(n_, std::move(mapped));
}

void NetworkGraph::write_edge_list(std::ostream& out) const {
  for (const auto& e : edges_) out << e.i << ' ' << e.j << '\n';
}

NetworkGraph build_path(int n) {
  if (n < 2) fail(ErrorCode::kInvalidTopology, "path needs at least 2 vertices");
  std::vector<Edge> edges;
  for (int i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1});
  return NetworkGraph::from_edges(n, std::move(edges));
}

NetworkGraph build_cycle(int n) {
  if (n < 3) fail(ErrorCode::kInvalidTopology, "cycle needs at least 3 vertices, got " + std::to_string(n));
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n});
  return NetworkGraph::from_edges(n, std::move(edges));
}

NetworkGraph build_complete(int n) {
  if (n < 2) fail(ErrorCode::kInvalidTopology, "complete graph needs at least 2 vertices");
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) edges.push_back({i, j});
  return NetworkGraph::from_edges(n, std::move(edges));
}

NetworkGraph build_ring_lattice(int n, int k) {
  if (k < 2 || k % 2 != 0 || n <= k) {
    fail(ErrorCode::kInvalidTopology, "ring lattice needs even k >= 2 and n > k");
  }
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i) {
    for (int hop = 1; hop <= k / 2; ++hop) {
      const int j = (i + hop) % n;
      edges.push_back({std::min(i, j), std::max(i, j)});
    }
  }
  return NetworkGraph::from_edges(n, std::move(edges));
}

NetworkGraph build_k_regular_random(int n, int k, std::uint64_t seed, int max_attempts) {
  if (k < 2 || k % 2 != 0 || n <= k) {
    std::ostringstream msg;
    msg << "no ring-based " << k << "-regular graph on " << n
        << " vertices (need even k >= 2 and n > k)";
    fail(ErrorCode::kInvalidTopology, msg.str());
  }
  Rng rng(seed);
  const int chords_per_agent = k - 2;

  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    std::set<Edge> edges;
    for (int i = 0; i < n; ++i) {
      const int j = (i + 1) % n;
      edges.insert({std::min(i, j), std::max(i, j)});
    }

    // Each agent holds k-2 chord endpoints; pair them up uniformly among
    // the admissible partners, restarting on a dead end.
    std::vector<int> stubs;
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < chords_per_agent; ++c) stubs.push_back(i);
    for (std::size_t s = stubs.size(); s > 1; --s) {
      std::swap(stubs[s - 1], stubs[rng.uniform_index(s)]);
    }

    bool dead_end = false;
    std::vector<std::size_t> candidates;
    while (!stubs.empty()) {
      const int u = stubs.back();
      stubs.pop_back();
      candidates.clear();
      for (std::size_t s = 0; s < stubs.size(); ++s) {
        const int v = stubs[s];
        if (v != u && !edges.contains({std::min(u, v), std::max(u, v)})) candidates.push_back(s);
      }
      if (candidates.empty()) {
        dead_end = true;
        break;
      }
      const std::size_t pick = candidates[rng.uniform_index(candidates.size())];
      const int v = stubs[pick];
      stubs.erase(stubs.begin() + static_cast<std::ptrdiff_t>(pick));
      edges.insert({std::min(u, v), std::max(u, v)});
    }
    if (dead_end) continue;

    // The ring keeps every candidate connected.
    return NetworkGraph::from_edges(n, {edges.begin(), edges.end()});
  }
  std::ostringstream msg;
  msg << "random " << k << "-regular construction on " << n << " vertices failed after "
      << max_attempts << " attempts";
  fail(ErrorCode::kConstructionFailure, msg.str());
}

Matrix incidence_matrix(const NetworkGraph& g) {
  Matrix a = Matrix::Zero(g.edge_count(), g.agents());
  for (int l = 0; l < g.edge_count(); ++l) {
    a(l, g.edge(l).i) = 1.0;
    a(l, g.edge(l).j) = -1.0;
  }
  return a;
}

Matrix laplacian(const NetworkGraph& g) {
  Matrix lap = Matrix::Zero(g.agents(), g.agents());
  for (const auto& e : g.edges()) {
    lap(e.i, e.j) = -1.0;
    lap(e.j, e.i) = -1.0;
  }
  for (int i = 0; i < g.agents(); ++i) lap(i, i) = g.degree(i);
  return lap;
}

std::string BKind::name() const {
  switch (tag) {
    case Tag::kLaplacian: return "laplacian";
    case Tag::kBetaLaplacian: {
      std::ostringstream s;
      s << "beta_laplacian(" << beta << ")";
      return s.str();
    }
    case Tag::kCustom: return "custom";
  }
  return "unknown";
}

double zero_threshold(double largest) { return 1e-9 * std::max(1.0, largest); }

Vector symmetric_eigenvalues(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    fail(ErrorCode::kDegenerateConfiguration, "symmetric eigensolver did not converge");
  }
  return solver.eigenvalues();
}

void check_augmentation(const NetworkGraph& g, const Matrix& b) {
  const int n = g.agents();
  if (b.rows() != n || b.cols() != n) {
    fail(ErrorCode::kAssumptionViolation, "augmentation check failed: shape must be n x n");
  }
  const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
  if ((b - b.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    fail(ErrorCode::kAssumptionViolation, "augmentation check failed: symmetry");
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j && b(i, j) != 0.0 && !g.has_edge(i, j)) {
        std::ostringstream msg;
        msg << "augmentation check failed: topology (entry (" << i << ", " << j
            << ") is nonzero but not an edge)";
        fail(ErrorCode::kAssumptionViolation, msg.str());
      }
    }
  }
  const Vector eig = symmetric_eigenvalues(0.5 * (b + b.transpose()));
  const double tol = zero_threshold(eig.maxCoeff());
  if (eig.minCoeff() < -tol) {
    fail(ErrorCode::kAssumptionViolation, "augmentation check failed: positive semidefinite");
  }
  const int zeros = static_cast<int>((eig.array() <= tol).count());
  const double ones_residual = (b * Vector::Ones(n)).cwiseAbs().maxCoeff();
  if (zeros != 1 || ones_residual > tol) {
    fail(ErrorCode::kAssumptionViolation,
         "augmentation check failed: null space must equal span(1)");
  }
}

Matrix build_B(const NetworkGraph& g, const BKind& kind) {
  switch (kind.tag) {
    case BKind::Tag::kLaplacian: return laplacian(g);
    case BKind::Tag::kBetaLaplacian:
      if (!(kind.beta > 0.0)) {
        fail(ErrorCode::kAssumptionViolation, "augmentation check failed: beta must be positive");
      }
      return kind.beta * laplacian(g);
    case BKind::Tag::kCustom:
      check_augmentation(g, kind.custom);
      return kind.custom;
  }
  fail(ErrorCode::kInvalidInput, "unknown augmentation kind");
}

ConstraintMatrices build_constraints(const NetworkGraph& g, const BKind& kind) {
  return {incidence_matrix(g), build_B(g, kind), kind};
}

SpectralBounds spectral(const NetworkGraph& g, const ConstraintMatrices& mats) {
  const Matrix ata = mats.A.transpose() * mats.A;
  const Vector lap_eig = symmetric_eigenvalues(ata);
  const double largest = lap_eig.maxCoeff();
  const double tol = zero_threshold(largest);

  const int zeros = static_cast<int>((lap_eig.array() < tol).count());
  if (zeros >= 2 || g.agents() < 2) {
    fail(ErrorCode::kInvalidTopology, "graph is disconnected: A'A has " +
                                          std::to_string(zeros) + " zero eigenvalues");
  }
  SpectralBounds out;
  out.rhoAtA = largest;
  out.sAAt = lap_eig(zeros);
  out.rhoB = symmetric_eigenvalues(mats.B).maxCoeff();
  return out;
}

}  // namespace pdmp
