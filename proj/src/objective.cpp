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

#include "pdmp/objective.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "pdmp/error.hpp"
#include "pdmp/random.hpp"

namespace pdmp {

namespace {

// log(1 + exp(-t)) without overflow.
double softplus_neg(double t) {
  return t > 0.0 ? std::log1p(std::exp(-t)) : -t + std::log1p(std::exp(t));
}

// 1 / (1 + exp(t))
double sigmoid_neg(double t) {
  if (t >= 0.0) {
    const double z = std::exp(-t);
    return z / (1.0 + z);
  }
  return 1.0 / (1.0 + std::exp(t));
}

}  // namespace

QuadraticLocal::QuadraticLocal(double c, double b) : c_(c), b_(b) {
  if (!(c > 0.0) || !std::isfinite(c) || !std::isfinite(b)) {
    fail(ErrorCode::kInvalidObjective, "quadratic coefficient c must be positive and finite, got " +
                                           std::to_string(c));
  }
}

double QuadraticLocal::value(std::span<const double> x) const {
  const double r = x[0] - b_;
  return c_ * r * r;
}

void QuadraticLocal::gradient(std::span<const double> x, std::span<double> out) const {
  out[0] = 2.0 * c_ * (x[0] - b_);
}

void QuadraticLocal::add_hessian(std::span<const double>, Eigen::Ref<Matrix> out) const {
  out(0, 0) += 2.0 * c_;
}

LogisticLocal::LogisticLocal(std::shared_ptr<const Dataset> data, int first, int count, double nu,
                             int agents, int total_points)
    : data_(std::move(data)),
      first_(first),
      count_(count),
      ridge_(nu / agents),
      inv_total_(1.0 / total_points) {
  if (!(nu > 0.0)) fail(ErrorCode::kInvalidObjective, "logistic regularizer nu must be positive");
  double sq = 0.0;
  for (int j = first_; j < first_ + count_; ++j) sq += data_->features.row(j).squaredNorm();
  lipschitz_ = ridge_ + 0.25 * inv_total_ * sq;
}

double LogisticLocal::value(std::span<const double> x) const {
  const Eigen::Map<const Vector> xv(x.data(), static_cast<Eigen::Index>(x.size()));
  double loss = 0.0;
  for (int j = first_; j < first_ + count_; ++j) {
    const double t = data_->labels[j] * data_->features.row(j).dot(xv);
    loss += softplus_neg(t);
  }
  return 0.5 * ridge_ * xv.squaredNorm() + inv_total_ * loss;
}

void LogisticLocal::gradient(std::span<const double> x, std::span<double> out) const {
  const Eigen::Map<const Vector> xv(x.data(), static_cast<Eigen::Index>(x.size()));
  Eigen::Map<Vector> g(out.data(), static_cast<Eigen::Index>(out.size()));
  g = ridge_ * xv;
  for (int j = first_; j < first_ + count_; ++j) {
    const double v = data_->labels[j];
    const double t = v * data_->features.row(j).dot(xv);
    g -= (inv_total_ * v * sigmoid_neg(t)) * data_->features.row(j).transpose();
  }
}

void LogisticLocal::add_hessian(std::span<const double> x, Eigen::Ref<Matrix> out) const {
  const Eigen::Map<const Vector> xv(x.data(), static_cast<Eigen::Index>(x.size()));
  out.diagonal().array() += ridge_;
  for (int j = first_; j < first_ + count_; ++j) {
    const auto u = data_->features.row(j);
    const double s = sigmoid_neg(data_->labels[j] * u.dot(xv));
    out.noalias() += (inv_total_ * s * (1.0 - s)) * (u.transpose() * u);
  }
}

Objective::Objective(std::vector<std::shared_ptr<const LocalObjective>> parts)
    : parts_(std::move(parts)) {
  if (parts_.empty()) fail(ErrorCode::kInvalidObjective, "objective needs at least one agent");
  dim_ = parts_.front()->dim();
  m_ = std::numeric_limits<double>::infinity();
  L_ = 0.0;
  for (const auto& p : parts_) {
    if (p->dim() != dim_) fail(ErrorCode::kInvalidObjective, "agent dimensions differ");
    const double mi = p->strong_convexity();
    const double li = p->lipschitz_gradient();
    if (!(mi > 0.0) || !(mi <= li)) {
      fail(ErrorCode::kInvalidObjective, "moduli must satisfy 0 < m_i <= L_i");
    }
    m_ = std::min(m_, mi);
    L_ = std::max(L_, li);
    quadratic_ = quadratic_ && p->is_quadratic();
  }
}

double Objective::value(const Stacked& x) const {
  double total = 0.0;
  for (int i = 0; i < agents(); ++i) total += parts_[i]->value({x.row(i).data(), static_cast<std::size_t>(dim_)});
  return total;
}

void Objective::gradient(const Stacked& x, Stacked& out) const {
  out.resize(agents(), dim_);
  for (int i = 0; i < agents(); ++i) {
    parts_[i]->gradient({x.row(i).data(), static_cast<std::size_t>(dim_)},
                        {out.row(i).data(), static_cast<std::size_t>(dim_)});
  }
}

Stacked Objective::gradient(const Stacked& x) const {
  Stacked out;
  gradient(x, out);
  return out;
}

Matrix Objective::stacked_hessian(const Stacked& x) const {
  const int nd = agents() * dim_;
  Matrix h = Matrix::Zero(nd, nd);
  for (int i = 0; i < agents(); ++i) {
    parts_[i]->add_hessian({x.row(i).data(), static_cast<std::size_t>(dim_)},
                           h.block(i * dim_, i * dim_, dim_, dim_));
  }
  return h;
}

double Objective::consensus_value(std::span<const double> x) const {
  double total = 0.0;
  for (const auto& p : parts_) total += p->value(x);
  return total;
}

Vector Objective::consensus_gradient(std::span<const double> x) const {
  Vector total = Vector::Zero(dim_);
  Vector g(dim_);
  for (const auto& p : parts_) {
    p->gradient(x, {g.data(), static_cast<std::size_t>(dim_)});
    total += g;
  }
  return total;
}

Matrix Objective::consensus_hessian(std::span<const double> x) const {
  Matrix h = Matrix::Zero(dim_, dim_);
  for (const auto& p : parts_) p->add_hessian(x, h);
  return h;
}

Objective quadratic_objective(std::span<const double> c, std::span<const double> b) {
  if (c.size() != b.size() || c.empty()) {
    fail(ErrorCode::kInvalidObjective, "quadratic objective needs matching nonempty c and b");
  }
  std::vector<std::shared_ptr<const LocalObjective>> parts;
  for (std::size_t i = 0; i < c.size(); ++i) parts.push_back(std::make_shared<QuadraticLocal>(c[i], b[i]));
  return Objective(std::move(parts));
}

Objective random_quadratic_instance(int n, std::uint64_t seed, IntRange c_range, IntRange b_range) {
  if (n < 1) fail(ErrorCode::kInvalidInput, "instance needs at least one agent");
  if (c_range.lo < 1 || c_range.hi < c_range.lo || b_range.hi < b_range.lo) {
    fail(ErrorCode::kInvalidInput, "invalid coefficient ranges");
  }
  Rng rng(seed);
  std::vector<double> c(n), b(n);
  for (int i = 0; i < n; ++i) {
    c[i] = static_cast<double>(rng.uniform_int(c_range.lo, c_range.hi));
    b[i] = static_cast<double>(rng.uniform_int(b_range.lo, b_range.hi));
  }
  return quadratic_objective(c, b);
}

Objective logistic_objective(std::shared_ptr<const Dataset> data, int n, double nu) {
  if (!data || data->size() == 0) fail(ErrorCode::kInvalidPartition, "dataset is empty");
  if (n < 1 || data->size() < n) {
    fail(ErrorCode::kInvalidPartition, "need at least one point per agent: K=" +
                                           std::to_string(data ? data->size() : 0) +
                                           ", n=" + std::to_string(n));
  }
  if (!(nu > 0.0)) fail(ErrorCode::kInvalidObjective, "logistic regularizer nu must be positive");
  const int total = data->size();
  const int batch = total / n;
  std::vector<std::shared_ptr<const LocalObjective>> parts;
  for (int i = 0; i < n; ++i) {
    parts.push_back(std::make_shared<LogisticLocal>(data, i * batch, batch, nu, n, total));
  }
  return Objective(std::move(parts));
}

Dataset parse_libsvm(std::istream& in) {
  struct Row {
    double label;
    std::vector<std::pair<int, double>> entries;
  };
  std::vector<Row> rows;
  int max_index = 0;
  std::string line;
  int line_no = 0;

  auto parse_error = [&](const std::string& what) {
    fail(ErrorCode::kParseError, "line " + std::to_string(line_no) + ": " + what);
  };
  auto to_double = [&](std::string_view tok, const char* what) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v)) {
      parse_error(std::string("malformed ") + what + " '" + std::string(tok) + "'");
    }
    return v;
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream tokens(line);
    std::string tok;
    if (!(tokens >> tok) || tok.front() == '#') continue;

    Row row;
    // Some LIBSVM files write labels as "+1".
    std::string_view label_tok = tok;
    if (label_tok.size() > 1 && label_tok.front() == '+') label_tok.remove_prefix(1);
    row.label = to_double(label_tok, "label");
    int last_index = 0;
    while (tokens >> tok) {
      if (tok.front() == '#') break;
      const auto colon = tok.find(':');
      if (colon == std::string::npos) parse_error("expected idx:val, got '" + tok + "'");
      const std::string_view idx_tok(tok.data(), colon);
      int idx = 0;
      const auto [ptr, ec] = std::from_chars(idx_tok.data(), idx_tok.data() + idx_tok.size(), idx);
      if (ec != std::errc() || ptr != idx_tok.data() + idx_tok.size() || idx < 1) {
        parse_error("malformed feature index '" + std::string(idx_tok) + "'");
      }
      if (idx <= last_index) parse_error("feature indices must be strictly increasing");
      last_index = idx;
      const double val = to_double(std::string_view(tok).substr(colon + 1), "feature value");
      row.entries.emplace_back(idx, val);
      max_index = std::max(max_index, idx);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail(ErrorCode::kParseError, "no data points found");

  std::map<double, int> distinct;
  for (const auto& r : rows) distinct[r.label] = 0;
  if (distinct.size() > 2) {
    fail(ErrorCode::kUnsupportedDataset, "expected at most two distinct labels, found " +
                                             std::to_string(distinct.size()));
  }
  double negative = distinct.begin()->first;
  if (distinct.size() == 1) {
    // A single class keeps its sign.
    negative = negative <= 0.0 ? negative : -std::numeric_limits<double>::infinity();
  }

  Dataset out;
  out.features = Stacked::Zero(static_cast<Eigen::Index>(rows.size()), max_index);
  out.labels.reserve(rows.size());
  for (std::size_t j = 0; j < rows.size(); ++j) {
    out.labels.push_back(rows[j].label == negative ? -1.0 : 1.0);
    for (const auto& [idx, val] : rows[j].entries) out.features(static_cast<Eigen::Index>(j), idx - 1) = val;
  }
  return out;
}

Dataset load_libsvm(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIoError, "cannot open dataset '" + path.string() + "'");
  try {
    return parse_libsvm(in);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void write_libsvm(const Dataset& data, std::ostream& out) {
  char buf[64];
  for (int j = 0; j < data.size(); ++j) {
    out << (data.labels[j] > 0 ? "+1" : "-1");
    for (int f = 0; f < data.dim(); ++f) {
      const double v = data.features(j, f);
      if (v == 0.0) continue;
      const auto res = std::to_chars(buf, buf + sizeof buf, v);
      out << ' ' << (f + 1) << ':' << std::string_view(buf, res.ptr - buf);
    }
    out << '\n';
  }
}

Dataset subsample(const Dataset& data, int count, std::uint64_t seed) {
  if (count <= 0 || count >= data.size()) return data;
  std::vector<int> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (std::size_t s = order.size(); s > 1; --s) std::swap(order[s - 1], order[rng.uniform_index(s)]);
  order.resize(count);
  std::sort(order.begin(), order.end());
  Dataset out;
  out.features.resize(count, data.dim());
  out.labels.reserve(count);
  for (int j = 0; j < count; ++j) {
    out.features.row(j) = data.features.row(order[j]);
    out.labels.push_back(data.labels[order[j]]);
  }
  return out;
}

}  // namespace pdmp
