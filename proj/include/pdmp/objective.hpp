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
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "pdmp/types.hpp"

namespace pdmp {

// One agent's smooth, strongly convex local function f_i over R^d.
class LocalObjective {
 public:
  virtual ~LocalObjective() = default;

  virtual int dim() const = 0;
  virtual double value(std::span<const double> x) const = 0;
  virtual void gradient(std::span<const double> x, std::span<double> out) const = 0;
  // Adds the d x d Hessian at x into out.
  virtual void add_hessian(std::span<const double> x, Eigen::Ref<Matrix> out) const = 0;

  virtual double strong_convexity() const = 0;   // m_i
  virtual double lipschitz_gradient() const = 0;  // L_i
  virtual bool is_quadratic() const { return false; }
};

// c (x - b)^2 on the real line.
class QuadraticLocal final : public LocalObjective {
 public:
  QuadraticLocal(double c, double b);

  int dim() const override { return 1; }
  double value(std::span<const double> x) const override;
  void gradient(std::span<const double> x, std::span<double> out) const override;
  void add_hessian(std::span<const double> x, Eigen::Ref<Matrix> out) const override;
  double strong_convexity() const override { return 2.0 * c_; }
  double lipschitz_gradient() const override { return 2.0 * c_; }
  bool is_quadratic() const override { return true; }

  double c() const { return c_; }
  double b() const { return b_; }

 private:
  double c_;
  double b_;
};

// Labelled points: row j of features is u_j, labels[j] in {-1, +1}.
struct Dataset {
  Stacked features;
  std::vector<double> labels;

  int size() const { return static_cast<int>(labels.size()); }
  int dim() const { return static_cast<int>(features.cols()); }
};

// nu/(2n) |x|^2 + (1/K) sum_j log(1 + exp(-v_j u_j' x)) over a contiguous
// batch [first, first + count) of a shared dataset.
class LogisticLocal final : public LocalObjective {
 public:
  LogisticLocal(std::shared_ptr<const Dataset> data, int first, int count, double nu,
                int agents, int total_points);

  int dim() const override { return data_->dim(); }
  double value(std::span<const double> x) const override;
  void gradient(std::span<const double> x, std::span<double> out) const override;
  void add_hessian(std::span<const double> x, Eigen::Ref<Matrix> out) const override;
  double strong_convexity() const override { return ridge_; }
  double lipschitz_gradient() const override { return lipschitz_; }

 private:
  std::shared_ptr<const Dataset> data_;
  int first_;
  int count_;
  double ridge_;      // nu / n
  double inv_total_;  // 1 / K
  double lipschitz_;
};

// Bundle of n local functions sharing the decision dimension d. Stacked
// arguments are n x d with row i belonging to agent i.
class Objective {
 public:
  explicit Objective(std::vector<std::shared_ptr<const LocalObjective>> parts);

  int agents() const { return static_cast<int>(parts_.size()); }
  int dim() const { return dim_; }
  const LocalObjective& local(int i) const { return *parts_[i]; }

  double m() const { return m_; }
  double L() const { return L_; }
  bool is_quadratic() const { return quadratic_; }

  double value(const Stacked& x) const;
  void gradient(const Stacked& x, Stacked& out) const;
  Stacked gradient(const Stacked& x) const;

  // Block-diagonal (n d) x (n d) Hessian of the stacked objective.
  Matrix stacked_hessian(const Stacked& x) const;

  // sum_i f_i evaluated at a single common point.
  double consensus_value(std::span<const double> x) const;
  Vector consensus_gradient(std::span<const double> x) const;
  Matrix consensus_hessian(std::span<const double> x) const;

 private:
  std::vector<std::shared_ptr<const LocalObjective>> parts_;
  int dim_ = 0;
  double m_ = 0.0;
  double L_ = 0.0;
  bool quadratic_ = true;
};

Objective quadratic_objective(std::span<const double> c, std::span<const double> b);

// c_i uniform integer in c_range, b_i uniform integer in b_range.
struct IntRange {
  std::int64_t lo;
  std::int64_t hi;
};
Objective random_quadratic_instance(int n, std::uint64_t seed, IntRange c_range = {1, 10000},
                                    IntRange b_range = {1, 100});

// Agent i receives points [i*k, (i+1)*k) with k = floor(K/n); the K mod n
// trailing points are dropped.
Objective logistic_objective(std::shared_ptr<const Dataset> data, int n, double nu);

// LIBSVM sparse text: "label idx:val idx:val ..." with 1-based indices.
// Labels are mapped to {-1, +1}: the smaller raw label becomes -1.
Dataset parse_libsvm(std::istream& in);
Dataset load_libsvm(const std::filesystem::path& path);

// Writes LIBSVM text, omitting zero features.
void write_libsvm(const Dataset& data, std::ostream& out);

// Deterministic random subset of `count` points (order preserved).
Dataset subsample(const Dataset& data, int count, std::uint64_t seed);

}  // namespace pdmp
