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

#include "pdmp/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ctime>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "pdmp/baselines.hpp"
#include "pdmp/error.hpp"
#include "pdmp/random.hpp"

namespace pdmp {

using nlohmann::json;

namespace {

[[noreturn]] void config_fail(const std::string& msg) { fail(ErrorCode::kConfigError, "config: " + msg); }

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) config_fail(where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; });
    if (!known) config_fail("unknown key " + where + "." + key);
  }
}

template <class T>
T get(const json& j, const char* key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    config_fail(where + "." + key + " is missing or has the wrong type");
  }
}

std::vector<int> int_list(const json& j, const char* key, const std::string& where) {
  const json& v = j.at(key);
  if (v.is_number_integer()) return {v.get<int>()};
  if (!v.is_array() || v.empty()) config_fail(where + "." + key + " must be an integer or nonempty list");
  std::vector<int> out;
  for (const json& e : v) {
    if (!e.is_number_integer()) config_fail(where + "." + key + " entries must be integers");
    out.push_back(e.get<int>());
  }
  return out;
}

bool is_pd_family(const std::string& name) { return name == "pd" || name == "extra"; }

json algorithm_defaults(const std::string& name) {
  if (is_pd_family(name)) {
    return json{{"name", name},
                {"T", json::array({1})},
                {"alpha", {{"mode", "bound"}, {"scale", 0.99}, {"beta_bound", "auto"}}},
                {"beta", {{"mode", "T"}}},
                {"B", "beta_laplacian"},
                {"engine", "compact"},
                {"comm", "T"}};
  }
  if (name == "mm") {
    return json{{"name", name},
                {"beta", {{"mode", "manual"}, {"value", 4.0}}},
                {"B", "beta_laplacian"},
                {"inner_tol", 1e-10}};
  }
  const double scale = name == "diging" ? 0.5 : 1.0;
  return json{{"name", name}, {"alpha", {{"mode", "inverse_L"}, {"scale", scale}}}};
}

json defaults_for(ExperimentKind kind) {
  json base;
  base["output"] = {{"dir", "results"}};
  switch (kind) {
    case ExperimentKind::kQuadraticSweep:
      base["experiment"] = "quadratic_sweep";
      base["graph"] = {{"topology", "k_regular"}, {"n", {5, 10, 15, 20}}, {"k", 4},
                       {"seeds", {{"first", 0}, {"count", 50}}}};
      base["objective"] = {{"kind", "quadratic"}, {"c_range", {1, 10000}}, {"b_range", {1, 100}}};
      base["algorithms"] = json::array({json{{"name", "pd"}, {"T", {1, 2, 3, 4}}}, json{{"name", "mm"}}});
      base["stopping"] = {{"epsilon", 0.01}, {"max_iters", 2000000}, {"stop_at_epsilon", true}};
      break;
    case ExperimentKind::kLogisticCompare:
      base["experiment"] = "logistic_compare";
      base["graph"] = {{"topology", "ring_lattice"}, {"n", 10}, {"k", 4},
                       {"seeds", {{"first", 0}, {"count", 1}}}};
      base["objective"] = {{"kind", "logistic"}, {"dataset", "data/mushrooms"}, {"nu", 1.0}, {"subsample", 0}};
      base["algorithms"] = json::array(
          {json{{"name", "pd"}, {"T", {1, 2, 3, 4}}, {"beta", {{"mode", "manual"}, {"value", 1.0}}}},
           json{{"name", "extra"}, {"beta", {{"mode", "manual"}, {"value", 1.0}}}}, json{{"name", "diging"}},
           json{{"name", "near_dgd_plus"}}});
      base["stopping"] = {{"epsilon", 0.01}, {"max_iters", 500}, {"stop_at_epsilon", false}};
      break;
    case ExperimentKind::kCertify:
      base["experiment"] = "certify";
      base["graph"] = {{"topology", "k_regular"}, {"n", 10}, {"k", 4}, {"seeds", {{"first", 0}, {"count", 1}}}};
      base["objective"] = {{"kind", "quadratic"}, {"c_range", {1, 10000}}, {"b_range", {1, 100}}};
      base["algorithms"] = json::array({json{{"name", "pd"},
                                             {"T", {1, 2, 3, 4}},
                                             {"alpha", {{"mode", "bound"}, {"scale", 0.9}}},
                                             {"beta", {{"mode", "fraction_of_max"}, {"value", 0.5}}},
                                             {"B", "laplacian"},
                                             {"engine", "agentwise"}}});
      base["stopping"] = {{"epsilon", 0.01}, {"max_iters", 500}, {"stop_at_epsilon", false}};
      break;
    case ExperimentKind::kSingleRun:
      base["experiment"] = "single_run";
      base["graph"] = {{"topology", "k_regular"}, {"n", 10}, {"k", 4}, {"seeds", {{"first", 0}, {"count", 1}}}};
      base["objective"] = {{"kind", "quadratic"}, {"c_range", {1, 10000}}, {"b_range", {1, 100}}};
      base["algorithms"] = json::array({json{{"name", "pd"}, {"T", {2}}, {"engine", "agentwise"}}});
      base["stopping"] = {{"epsilon", 0.01}, {"max_iters", 200000}, {"stop_at_epsilon", true}};
      break;
  }
  return base;
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) config_fail("override '" + assignment + "' must be key=value");
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string part = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) config_fail("override key '" + path + "' has an empty component");
    json* next = nullptr;
    if (node->is_array()) {
      std::size_t idx = 0;
      const auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), idx);
      if (ec != std::errc() || p != part.data() + part.size() || idx >= node->size()) {
        config_fail("override key '" + path + "': bad list index '" + part + "'");
      }
      next = &(*node)[idx];
    } else {
      if (!node->is_object()) *node = json::object();
      next = &(*node)[part];
    }
    if (dot == std::string::npos) {
      *next = std::move(value);
      return;
    }
    node = next;
    start = dot + 1;
  }
}

AlgorithmSpec parse_algorithm(const json& raw, std::size_t index, json& resolved) {
  const std::string where = "algorithms." + std::to_string(index);
  if (!raw.is_object() || !raw.contains("name") || !raw["name"].is_string()) {
    config_fail(where + ".name is required");
  }
  const std::string name = raw["name"].get<std::string>();
  static const std::vector<std::string> known{"pd", "extra", "diging", "near_dgd_plus", "dgd", "mm"};
  if (std::find(known.begin(), known.end(), name) == known.end()) {
    config_fail(where + ".name: unknown algorithm '" + name + "'");
  }
  json j = algorithm_defaults(name);
  j.merge_patch(raw);
  check_keys(j, {"name", "T", "alpha", "beta", "B", "engine", "comm", "inner_tol"}, where);

  AlgorithmSpec spec;
  spec.name = name;
  if (j.contains("T")) {
    spec.T_list = int_list(j, "T", where);
    for (int t : spec.T_list) {
      if (t < 1) config_fail(where + ".T entries must be >= 1");
    }
    if (name == "extra" && (spec.T_list.size() != 1 || spec.T_list[0] != 1)) {
      config_fail(where + ": extra runs with T = 1 only");
    }
  } else {
    spec.T_list.clear();
  }

  if (j.contains("alpha")) {
    const json& a = j["alpha"];
    check_keys(a, {"mode", "value", "scale", "eta", "beta_bound"}, where + ".alpha");
    const std::string mode = get<std::string>(a, "mode", where + ".alpha");
    if (mode == "bound") {
      if (!is_pd_family(name)) config_fail(where + ".alpha.mode 'bound' applies to pd and extra only");
      spec.alpha.mode = AlphaRule::Mode::kBound;
    } else if (mode == "manual") {
      spec.alpha.mode = AlphaRule::Mode::kManual;
      spec.alpha.value = get<double>(a, "value", where + ".alpha");
      if (!(spec.alpha.value > 0)) config_fail(where + ".alpha.value must be positive");
    } else if (mode == "inverse_L") {
      spec.alpha.mode = AlphaRule::Mode::kInverseL;
    } else {
      config_fail(where + ".alpha.mode must be bound, manual or inverse_L");
    }
    if (a.contains("scale")) spec.alpha.scale = get<double>(a, "scale", where + ".alpha");
    if (!(spec.alpha.scale > 0)) config_fail(where + ".alpha.scale must be positive");
    if (a.contains("eta") && !a["eta"].is_null()) spec.alpha.eta = get<double>(a, "eta", where + ".alpha");
    if (a.contains("beta_bound")) {
      const std::string bb = get<std::string>(a, "beta_bound", where + ".alpha");
      if (bb != "auto" && bb != "enforce") config_fail(where + ".alpha.beta_bound must be auto or enforce");
      spec.alpha.relax_when_needed = bb == "auto";
    }
  }
  if (j.contains("beta")) {
    const json& b = j["beta"];
    check_keys(b, {"mode", "value"}, where + ".beta");
    const std::string mode = get<std::string>(b, "mode", where + ".beta");
    if (mode == "T") {
      spec.beta.mode = BetaRule::Mode::kEqualsT;
    } else if (mode == "manual") {
      spec.beta.mode = BetaRule::Mode::kManual;
      spec.beta.value = get<double>(b, "value", where + ".beta");
    } else if (mode == "fraction_of_max") {
      spec.beta.mode = BetaRule::Mode::kFractionOfMax;
      spec.beta.value = get<double>(b, "value", where + ".beta");
    } else {
      config_fail(where + ".beta.mode must be T, manual or fraction_of_max");
    }
    if (spec.beta.mode != BetaRule::Mode::kEqualsT && !(spec.beta.value > 0)) {
      config_fail(where + ".beta.value must be positive");
    }
    if (name == "mm" && spec.beta.mode == BetaRule::Mode::kEqualsT) {
      config_fail(where + ".beta.mode 'T' does not apply to mm");
    }
  }
  if (j.contains("B")) {
    spec.b_kind = get<std::string>(j, "B", where);
    if (spec.b_kind != "beta_laplacian" && spec.b_kind != "laplacian") {
      config_fail(where + ".B must be beta_laplacian or laplacian");
    }
    if (name == "extra" && spec.b_kind != "beta_laplacian") config_fail(where + ": extra uses B = beta_laplacian");
  }
  if (j.contains("engine")) {
    spec.engine = get<std::string>(j, "engine", where);
    if (spec.engine != "compact" && spec.engine != "agentwise") {
      config_fail(where + ".engine must be compact or agentwise");
    }
  }
  if (j.contains("comm")) {
    const std::string comm = get<std::string>(j, "comm", where);
    if (comm == "T") {
      spec.comm = CommAccounting::kPiggyback;
    } else if (comm == "T+1") {
      spec.comm = CommAccounting::kSeparateDual;
    } else {
      config_fail(where + ".comm must be \"T\" or \"T+1\"");
    }
  }
  if (j.contains("inner_tol")) {
    spec.inner_tol = get<double>(j, "inner_tol", where);
    if (!(spec.inner_tol > 0)) config_fail(where + ".inner_tol must be positive");
  }
  resolved = j;
  return spec;
}

std::string iso_stamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string pad(std::int64_t v, int width) {
  std::string s = std::to_string(v);
  if (static_cast<int>(s.size()) < width) s.insert(0, width - s.size(), '0');
  return s;
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kQuadraticSweep: return "quadratic_sweep";
    case ExperimentKind::kLogisticCompare: return "logistic_compare";
    case ExperimentKind::kCertify: return "certify";
    case ExperimentKind::kSingleRun: return "single_run";
  }
  return "unknown";
}

std::optional<ExperimentKind> parse_experiment_kind(const std::string& name) {
  for (auto k : {ExperimentKind::kQuadraticSweep, ExperimentKind::kLogisticCompare, ExperimentKind::kCertify,
                 ExperimentKind::kSingleRun}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

std::string default_config_json(ExperimentKind kind) { return defaults_for(kind).dump(2); }

ExperimentConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir,
                              std::optional<ExperimentKind> fallback, const std::vector<std::string>& overrides) {
  json user = json::object();
  if (!json_text.empty()) {
    try {
      user = json::parse(json_text);
    } catch (const json::parse_error& e) {
      config_fail(std::string("invalid JSON: ") + e.what());
    }
  }
  if (!user.is_object()) config_fail("top level must be an object");

  std::optional<ExperimentKind> kind = fallback;
  if (user.contains("experiment")) {
    if (!user["experiment"].is_string()) config_fail("experiment must be a string");
    const std::string name = user["experiment"].get<std::string>();
    auto parsed = parse_experiment_kind(name);
    if (!parsed) config_fail("unknown experiment '" + name + "'");
    if (fallback && *parsed != *fallback) {
      config_fail("config declares experiment '" + name + "' but '" + to_string(*fallback) + "' was requested");
    }
    kind = parsed;
  }
  if (!kind) config_fail("experiment kind is not given");

  json doc = defaults_for(*kind);
  json algorithms = user.contains("algorithms") ? user["algorithms"] : doc["algorithms"];
  json rest = user;
  rest.erase("algorithms");
  doc.merge_patch(rest);
  doc["algorithms"] = algorithms;
  for (const std::string& o : overrides) apply_override(doc, o);
  doc["experiment"] = to_string(*kind);

  check_keys(doc, {"experiment", "graph", "objective", "algorithms", "stopping", "output"}, "config");

  ExperimentConfig cfg;
  cfg.kind = *kind;

  const json& gj = doc["graph"];
  check_keys(gj, {"topology", "n", "k", "seeds"}, "graph");
  cfg.graph.topology = get<std::string>(gj, "topology", "graph");
  static const std::vector<std::string> topologies{"k_regular", "ring_lattice", "cycle", "path", "complete"};
  if (std::find(topologies.begin(), topologies.end(), cfg.graph.topology) == topologies.end()) {
    config_fail("graph.topology: unknown topology '" + cfg.graph.topology + "'");
  }
  cfg.graph.n_list = int_list(gj, "n", "graph");
  for (int n : cfg.graph.n_list) {
    if (n < 2) config_fail("graph.n entries must be >= 2");
    if (cfg.kind == ExperimentKind::kQuadraticSweep && (n < 5 || n > 30)) {
      cfg.warnings.push_back("n = " + std::to_string(n) + " lies outside the studied range [5, 30]");
    }
  }
  cfg.graph.k = get<int>(gj, "k", "graph");
  const json& sj = gj.at("seeds");
  check_keys(sj, {"first", "count"}, "graph.seeds");
  cfg.graph.seed_first = get<std::uint64_t>(sj, "first", "graph.seeds");
  cfg.graph.seed_count = get<int>(sj, "count", "graph.seeds");
  if (cfg.graph.seed_count < 1) config_fail("graph.seeds.count must be >= 1 (empty seed range)");

  json& oj = doc["objective"];
  check_keys(oj, {"kind", "c_range", "b_range", "dataset", "nu", "subsample"}, "objective");
  cfg.objective.kind = get<std::string>(oj, "kind", "objective");
  if (cfg.objective.kind == "quadratic") {
    for (const char* key : {"c_range", "b_range"}) {
      if (!oj.contains(key)) oj[key] = key == std::string("c_range") ? json{1, 10000} : json{1, 100};
      auto range = get<std::vector<std::int64_t>>(oj, key, "objective");
      if (range.size() != 2 || range[0] > range[1]) config_fail(std::string("objective.") + key + " must be [lo, hi]");
      (key == std::string("c_range") ? cfg.objective.c_range : cfg.objective.b_range) = {range[0], range[1]};
    }
    if (cfg.objective.c_range.lo < 1) config_fail("objective.c_range must be positive");
  } else if (cfg.objective.kind == "logistic") {
    const std::filesystem::path p = get<std::string>(oj, "dataset", "objective");
    cfg.objective.dataset = p.is_absolute() || base_dir.empty() ? p : base_dir / p;
    if (!std::filesystem::exists(cfg.objective.dataset)) {
      config_fail("objective.dataset: file not found: " + cfg.objective.dataset.string());
    }
    if (oj.contains("nu")) cfg.objective.nu = get<double>(oj, "nu", "objective");
    if (!(cfg.objective.nu > 0)) config_fail("objective.nu must be positive");
    if (oj.contains("subsample")) cfg.objective.subsample = get<int>(oj, "subsample", "objective");
    if (cfg.objective.subsample < 0) config_fail("objective.subsample must be >= 0");
  } else {
    config_fail("objective.kind must be quadratic or logistic");
  }

  json& aj = doc["algorithms"];
  if (!aj.is_array() || aj.empty()) config_fail("algorithms must be a nonempty list");
  for (std::size_t i = 0; i < aj.size(); ++i) {
    json resolved;
    cfg.algorithms.push_back(parse_algorithm(aj[i], i, resolved));
    aj[i] = resolved;
  }
  if (cfg.kind == ExperimentKind::kCertify) {
    for (const auto& a : cfg.algorithms) {
      if (!is_pd_family(a.name)) config_fail("certify supports pd and extra only");
    }
  }

  const json& st = doc["stopping"];
  check_keys(st, {"epsilon", "max_iters", "stop_at_epsilon"}, "stopping");
  cfg.stopping.epsilon = get<double>(st, "epsilon", "stopping");
  if (!(cfg.stopping.epsilon > 0 && cfg.stopping.epsilon < 1)) config_fail("stopping.epsilon must lie in (0, 1)");
  cfg.stopping.max_iters = get<std::int64_t>(st, "max_iters", "stopping");
  if (cfg.stopping.max_iters < 1) config_fail("stopping.max_iters must be >= 1");
  cfg.stopping.stop_at_epsilon = get<bool>(st, "stop_at_epsilon", "stopping");

  const json& out = doc["output"];
  check_keys(out, {"dir"}, "output");
  cfg.output_dir = get<std::string>(out, "dir", "output");

  cfg.resolved_json = doc.dump(2);
  return cfg;
}

Reference reference_solution(const Objective& obj, const Matrix& a, ReferenceMethod method) {
  const int n = obj.agents();
  const int d = obj.dim();
  Vector xt = Vector::Zero(d);

  bool closed = method == ReferenceMethod::kClosedForm && obj.is_quadratic() && d == 1;
  if (closed) {
    double num = 0.0;
    double den = 0.0;
    for (int i = 0; i < n; ++i) {
      const auto* q = dynamic_cast<const QuadraticLocal*>(&obj.local(i));
      if (!q) {
        closed = false;
        break;
      }
      num += q->c() * q->b();
      den += q->c();
    }
    if (closed) xt(0) = num / den;
  }
  if (!closed) {
    // Damped Newton on the consensus objective. The stopping level is
    // 1e-12 measured against the size of the per-agent gradient terms.
    Vector grad_i(d);
    auto term_scale = [&](const Vector& x) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) {
        obj.local(i).gradient(std::span<const double>(x.data(), d), std::span<double>(grad_i.data(), d));
        s += grad_i.norm();
      }
      return std::max(1.0, s);
    };
    bool converged = false;
    for (int it = 0; it < 200; ++it) {
      const Vector g = obj.consensus_gradient(std::span<const double>(xt.data(), d));
      if (g.norm() <= 1e-12 * term_scale(xt)) {
        converged = true;
        break;
      }
      const Matrix h = obj.consensus_hessian(std::span<const double>(xt.data(), d));
      const Vector dir = -h.llt().solve(g);
      const double f0 = obj.consensus_value(std::span<const double>(xt.data(), d));
      const double slope = g.dot(dir);
      double t = 1.0;
      Vector trial = xt + dir;
      // Decrements below the value's resolution take the full step.
      const bool resolvable = -slope > 1e-12 * std::max(1.0, std::abs(f0));
      while (resolvable && obj.consensus_value(std::span<const double>(trial.data(), d)) > f0 + 1e-4 * t * slope &&
             t > 1e-12) {
        t *= 0.5;
        trial = xt + t * dir;
      }
      if (trial == xt) {
        converged = g.norm() <= 1e-9 * term_scale(xt);
        break;
      }
      xt = trial;
    }
    if (!converged) fail(ErrorCode::kReferenceFailure, "Newton did not reach the reference tolerance");
  }

  Reference ref;
  ref.x_star = Stacked(n, d);
  for (int i = 0; i < n; ++i) ref.x_star.row(i) = xt.transpose();
  ref.lambda_star = dual_optimum(a, obj.gradient(ref.x_star));
  return ref;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

std::string csv_row(const ResultRecord& r) {
  auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string("NA"); };
  std::ostringstream out;
  out << r.run_id << ',' << r.algorithm << ',' << (r.T ? std::to_string(*r.T) : "NA") << ',' << r.n << ','
      << r.seed << ',' << format_number(r.iter) << ',' << format_number(r.comm_rounds) << ','
      << format_number(r.grad_evals) << ',' << format_number(r.rel_error) << ',' << opt(r.gnorm_error) << ','
      << format_number(r.consensus_gap) << ',';
  if (r.diverged) {
    out << "DIVERGED,DIVERGED";
  } else {
    out << opt(r.steps_to_eps) << ',' << opt(r.comms_to_eps);
  }
  out << ',' << opt(r.delta_certified);
  return out.str();
}

void write_results_csv(std::ostream& out, std::vector<ResultRecord> rows, const std::string& stamp) {
  std::stable_sort(rows.begin(), rows.end(),
                   [](const ResultRecord& a, const ResultRecord& b) { return a.run_id < b.run_id; });
  out << "# generated " << stamp << '\n' << kResultHeader << '\n';
  for (const auto& r : rows) out << csv_row(r) << '\n';
}

void write_plot_data(std::ostream& out, const std::vector<Series>& series, const std::string& x_label,
                     const std::string& y_label) {
  for (const auto& s : series) {
    out << "# " << s.label << '\n' << "# " << x_label << ' ' << y_label << '\n';
    for (std::size_t i = 0; i < s.x.size(); ++i) out << format_number(s.x[i]) << ' ' << format_number(s.y[i]) << '\n';
    out << "\n\n";
  }
}

PdStepsizes resolve_pd_stepsizes(const AlgorithmSpec& spec, int T, const NetworkGraph& g, const Objective& obj) {
  if (!is_pd_family(spec.name)) fail(ErrorCode::kConfigError, "config: " + spec.name + " is not a PD method");
  if (spec.name == "extra") T = 1;
  const double m = obj.m();
  const double L = obj.L();
  const double rho_ata = spectral(g, build_constraints(g, BKind::laplacian())).rhoAtA;
  const double beta_max = beta_bound(m, rho_ata);

  double beta = 0.0;
  switch (spec.beta.mode) {
    case BetaRule::Mode::kEqualsT: beta = T; break;
    case BetaRule::Mode::kManual: beta = spec.beta.value; break;
    case BetaRule::Mode::kFractionOfMax: beta = spec.beta.value * beta_max; break;
  }
  const bool beta_laplacian = spec.name == "extra" || spec.b_kind == "beta_laplacian";
  const BKind kind = beta_laplacian ? BKind::beta_laplacian(beta) : BKind::laplacian();

  PdStepsizes out;
  out.config.beta = beta;
  out.config.T = T;
  out.config.b_kind = kind;
  out.config.dim = obj.dim();
  out.config.comm = spec.comm;

  if (beta >= beta_max) {
    if (beta_laplacian && spec.alpha.relax_when_needed) {
      out.relaxed = true;
    } else if (spec.alpha.mode == AlphaRule::Mode::kBound) {
      std::ostringstream msg;
      msg << "beta = " << beta << " is not below its bound " << beta_max;
      fail(ErrorCode::kStepsizeViolation, msg.str());
    }
  }

  const double rho_b = spectral(g, build_constraints(g, kind)).rhoB;
  const auto eta_for = [&] { return spec.alpha.eta.value_or(default_eta(m, beta, rho_ata, out.relaxed)); };
  switch (spec.alpha.mode) {
    case AlphaRule::Mode::kBound:
      out.eta = eta_for();
      out.alpha_max = alpha_bound(out.eta, L, rho_b, T, m, beta, rho_ata, out.relaxed);
      out.config.alpha = spec.alpha.scale * *out.alpha_max;
      break;
    case AlphaRule::Mode::kManual:
    case AlphaRule::Mode::kInverseL:
      out.config.alpha = spec.alpha.mode == AlphaRule::Mode::kManual ? spec.alpha.value : spec.alpha.scale / L;
      if (beta < beta_max || out.relaxed) {
        try {
          out.eta = eta_for();
          out.alpha_max = alpha_bound(out.eta, L, rho_b, T, m, beta, rho_ata, out.relaxed);
        } catch (const Error&) {
          out.alpha_max.reset();
        }
      }
      break;
  }
  return out;
}

namespace {

struct Instance {
  std::uint64_t seed;
  NetworkGraph graph;
  Objective objective;
  Reference ref;
};

NetworkGraph make_graph(const GraphSpec& spec, int n, std::uint64_t seed) {
  if (spec.topology == "k_regular") return build_k_regular_random(n, spec.k, Rng::derive(seed, 1));
  if (spec.topology == "ring_lattice") return build_ring_lattice(n, spec.k);
  if (spec.topology == "cycle") return build_cycle(n);
  if (spec.topology == "path") return build_path(n);
  return build_complete(n);
}

class InstanceFactory {
 public:
  explicit InstanceFactory(const ExperimentConfig& cfg) : cfg_(cfg) {
    if (cfg.objective.kind == "logistic") {
      data_ = std::make_shared<const Dataset>(load_libsvm(cfg.objective.dataset));
    }
  }

  Instance make(int n, std::uint64_t seed) const {
    NetworkGraph g = make_graph(cfg_.graph, n, seed);
    Objective obj = make_objective(n, seed);
    Reference ref = reference_solution(obj, incidence_matrix(g));
    return Instance{seed, std::move(g), std::move(obj), std::move(ref)};
  }

 private:
  Objective make_objective(int n, std::uint64_t seed) const {
    const ObjectiveSpec& o = cfg_.objective;
    if (o.kind == "quadratic") return random_quadratic_instance(n, Rng::derive(seed, 2), o.c_range, o.b_range);
    std::shared_ptr<const Dataset> data = data_;
    if (o.subsample > 0 && o.subsample < data_->size()) {
      data = std::make_shared<const Dataset>(subsample(*data_, o.subsample, Rng::derive(seed, 3)));
    }
    return logistic_objective(data, n, o.nu);
  }

  const ExperimentConfig& cfg_;
  std::shared_ptr<const Dataset> data_;
};

std::unique_ptr<Stepper> make_engine(const PdSystem& sys, const std::string& engine) {
  if (engine == "agentwise") return std::make_unique<AgentwiseEngine>(sys);
  return std::make_unique<CompactEngine>(sys);
}

struct AlgorithmRun {
  Trajectory traj;
  std::optional<double> delta;
  bool diverged = false;
};

AlgorithmRun run_algorithm(const AlgorithmSpec& spec, std::optional<int> T, const Instance& inst,
                           const StoppingSpec& stopping) {
  const Objective& obj = inst.objective;
  const NetworkGraph& g = inst.graph;
  const Stacked x0 = Stacked::Zero(obj.agents(), obj.dim());
  StopRule stop{stopping.max_iters, stopping.epsilon, inst.ref.x_star};
  RunOptions opts;
  opts.keep_iterates = false;
  opts.stop_at_epsilon = stopping.stop_at_epsilon;

  AlgorithmRun out;
  try {
    if (is_pd_family(spec.name)) {
      const PdStepsizes st = resolve_pd_stepsizes(spec, T.value_or(1), g, obj);
      PdSystem sys(st.config, g, obj);
      const MNPair mn = build_MN(st.config.alpha, sys.B(), st.config.T);
      try {
        RateInputs in;
        in.alpha = st.config.alpha;
        in.beta = st.config.beta;
        in.T = st.config.T;
        in.m = obj.m();
        in.L = obj.L();
        in.eta = st.eta;
        in.spectra = sys.spectra();
        in.M = &mn.M;
        in.N = &mn.N;
        in.A = &sys.A();
        in.relax_beta_bound = st.relaxed;
        out.delta = rate_delta(in).delta;
      } catch (const Error&) {
        out.delta.reset();
      }
      GMetric metric{mn.M, st.config.alpha / st.config.beta, inst.ref.x_star, inst.ref.lambda_star};
      opts.metric = &metric;
      auto engine = make_engine(sys, spec.engine);
      RunState state = init(sys, x0);
      out.traj = run(*engine, state, stop, opts);
    } else if (spec.name == "mm") {
      const double beta = spec.beta.value;
      const BKind kind = spec.b_kind == "laplacian" ? BKind::laplacian() : BKind::beta_laplacian(beta);
      const ConstraintMatrices mats = build_constraints(g, kind);
      out.traj = method_of_multipliers(obj, mats.A, mats.B, beta, spec.inner_tol, stopping.max_iters, x0, stop, opts);
    } else {
      const double alpha = spec.alpha.mode == AlphaRule::Mode::kManual ? spec.alpha.value : spec.alpha.scale / obj.L();
      MixingMatrix w = metropolis_weights(g);
      std::unique_ptr<Stepper> stepper;
      RunState state;
      if (spec.name == "diging") {
        auto s = std::make_unique<DigingStepper>(w, alpha, obj);
        state = s->start(x0);
        stepper = std::move(s);
      } else if (spec.name == "near_dgd_plus") {
        auto s = std::make_unique<NearDgdPlusStepper>(w, alpha, obj);
        state = s->start(x0);
        stepper = std::move(s);
      } else {
        auto s = std::make_unique<DgdStepper>(w, alpha, obj);
        state = s->start(x0);
        stepper = std::move(s);
      }
      out.traj = run(*stepper, state, stop, opts);
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kDivergence) throw;
    out.diverged = true;
  }
  return out;
}

std::string run_id_for(int n, std::uint64_t seed, const std::string& algorithm, std::optional<int> T) {
  std::string id = "n" + pad(n, 3) + "-s" + pad(static_cast<std::int64_t>(seed), 6) + "-" + algorithm;
  if (T) id += "-T" + std::to_string(*T);
  return id;
}

ResultRecord make_record(const AlgorithmRun& r, const std::string& algorithm, std::optional<int> T, int n,
                         std::uint64_t seed) {
  ResultRecord rec;
  rec.run_id = run_id_for(n, seed, algorithm, T);
  rec.algorithm = algorithm;
  rec.T = T;
  rec.n = n;
  rec.seed = std::to_string(seed);
  rec.delta_certified = r.delta;
  if (r.diverged) {
    rec.diverged = true;
    rec.iter = std::numeric_limits<double>::quiet_NaN();
    rec.comm_rounds = rec.grad_evals = rec.iter;
    rec.rel_error = std::numeric_limits<double>::infinity();
    rec.consensus_gap = std::numeric_limits<double>::quiet_NaN();
    return rec;
  }
  const Snapshot& last = r.traj.last();
  rec.iter = static_cast<double>(last.iter);
  rec.comm_rounds = static_cast<double>(last.comm_rounds);
  rec.grad_evals = static_cast<double>(last.grad_evals);
  rec.rel_error = last.rel_error;
  if (!std::isnan(last.gnorm_error)) rec.gnorm_error = last.gnorm_error;
  rec.consensus_gap = last.consensus_gap;
  if (r.traj.reached) {
    rec.steps_to_eps = static_cast<double>(r.traj.steps_to_eps);
    rec.comms_to_eps = static_cast<double>(r.traj.comms_to_eps);
  }
  return rec;
}

CompareResult::Trace make_trace(const AlgorithmRun& r, const std::string& algorithm, std::optional<int> T) {
  CompareResult::Trace t;
  t.algorithm = algorithm;
  t.T = T;
  if (r.diverged) return t;
  for (const auto& s : r.traj.snapshots) {
    t.iter.push_back(s.iter);
    t.comm_rounds.push_back(s.comm_rounds);
    t.rel_error.push_back(s.rel_error);
  }
  return t;
}

std::vector<std::optional<int>> t_values(const AlgorithmSpec& a) {
  if (a.T_list.empty() || !is_pd_family(a.name)) return {std::nullopt};
  return {a.T_list.begin(), a.T_list.end()};
}

// Runs every (n, seed, algorithm, T) cell in canonical order.
void run_grid(const ExperimentConfig& cfg, std::vector<ResultRecord>& rows,
              std::vector<CompareResult::Trace>* traces) {
  InstanceFactory factory(cfg);
  for (int n : cfg.graph.n_list) {
    for (int s = 0; s < cfg.graph.seed_count; ++s) {
      const Instance inst = factory.make(n, cfg.graph.seed_first + static_cast<std::uint64_t>(s));
      for (const auto& alg : cfg.algorithms) {
        for (const auto& T : t_values(alg)) {
          const AlgorithmRun r = run_algorithm(alg, T, inst, cfg.stopping);
          rows.push_back(make_record(r, alg.name, T, n, inst.seed));
          if (traces) traces->push_back(make_trace(r, alg.name, T));
        }
      }
    }
  }
}

std::vector<ResultRecord> seed_means(const std::vector<ResultRecord>& runs) {
  struct Key {
    int n;
    std::string algorithm;
    int T;
    auto operator<=>(const Key&) const = default;
  };
  std::map<Key, std::vector<const ResultRecord*>> groups;
  for (const auto& r : runs) groups[{r.n, r.algorithm, r.T.value_or(-1)}].push_back(&r);

  std::vector<ResultRecord> means;
  for (const auto& [key, members] : groups) {
    ResultRecord m;
    m.run_id = "mean-n" + pad(key.n, 3) + "-" + key.algorithm + (key.T >= 0 ? "-T" + std::to_string(key.T) : "");
    m.algorithm = key.algorithm;
    if (key.T >= 0) m.T = key.T;
    m.n = key.n;
    m.seed = "mean";
    const double count = static_cast<double>(members.size());
    auto mean_of = [&](auto field) {
      double s = 0.0;
      for (const auto* r : members) s += field(*r);
      return s / count;
    };
    auto mean_opt = [&](auto field) -> std::optional<double> {
      double s = 0.0;
      for (const auto* r : members) {
        const std::optional<double> v = field(*r);
        if (!v || r->diverged) return std::nullopt;
        s += *v;
      }
      return s / count;
    };
    m.iter = mean_of([](const ResultRecord& r) { return r.iter; });
    m.comm_rounds = mean_of([](const ResultRecord& r) { return r.comm_rounds; });
    m.grad_evals = mean_of([](const ResultRecord& r) { return r.grad_evals; });
    m.rel_error = mean_of([](const ResultRecord& r) { return r.rel_error; });
    m.consensus_gap = mean_of([](const ResultRecord& r) { return r.consensus_gap; });
    m.gnorm_error = mean_opt([](const ResultRecord& r) { return r.gnorm_error; });
    m.steps_to_eps = mean_opt([](const ResultRecord& r) { return r.steps_to_eps; });
    m.comms_to_eps = mean_opt([](const ResultRecord& r) { return r.comms_to_eps; });
    m.delta_certified = mean_opt([](const ResultRecord& r) { return r.delta_certified; });
    means.push_back(std::move(m));
  }
  return means;
}

std::string label_of(const std::string& algorithm, std::optional<int> T) {
  return T ? algorithm + "-T" + std::to_string(*T) : algorithm;
}

}  // namespace

SweepResult run_quadratic_sweep(const ExperimentConfig& cfg) {
  SweepResult out;
  run_grid(cfg, out.runs, nullptr);
  out.means = seed_means(out.runs);
  return out;
}

CompareResult run_logistic_compare(const ExperimentConfig& cfg) {
  CompareResult out;
  run_grid(cfg, out.finals, &out.traces);
  return out;
}

std::vector<ResultRecord> run_single(const ExperimentConfig& cfg, std::vector<CompareResult::Trace>* traces) {
  std::vector<ResultRecord> rows;
  run_grid(cfg, rows, traces);
  return rows;
}

CertifyReport certify_instance(const NetworkGraph& g, const Objective& obj, const AlgorithmSpec& spec, int T,
                               const StoppingSpec& stopping, std::string label) {
  CertifyReport rep;
  rep.label = std::move(label);
  const PdStepsizes st = resolve_pd_stepsizes(spec, T, g, obj);
  if (st.alpha_max && st.config.alpha >= *st.alpha_max) {
    std::ostringstream msg;
    msg << "alpha = " << st.config.alpha << " is not below its bound " << *st.alpha_max
        << "; refusing to certify";
    fail(ErrorCode::kStepsizeViolation, msg.str());
  }
  rep.config = st.config;
  PdSystem sys(st.config, g, obj);
  const Reference ref = reference_solution(obj, sys.A());
  const MNPair mn = build_MN(st.config.alpha, sys.B(), st.config.T);

  RateInputs in;
  in.alpha = st.config.alpha;
  in.beta = st.config.beta;
  in.T = st.config.T;
  in.m = obj.m();
  in.L = obj.L();
  in.eta = st.eta;
  in.spectra = sys.spectra();
  in.M = &mn.M;
  in.N = &mn.N;
  in.A = &sys.A();
  in.relax_beta_bound = st.relaxed;
  rep.certificate = rate_delta(in);
  if (rep.certificate.beta_laplacian_regime) {
    rep.notes.push_back(rep.certificate.beta_bound_relaxed
                            ? "B = beta A'A: beta bound removed (relaxed)"
                            : "B = beta A'A: beta bound removable, still enforced");
  }
  if (rep.certificate.extra_regime) rep.notes.push_back("T = 1 with B = beta A'A: EXTRA-equivalent iteration");

  const GMetric metric{mn.M, st.config.alpha / st.config.beta, ref.x_star, ref.lambda_star};
  auto engine = make_engine(sys, spec.engine);
  RunState state = init(sys, Stacked::Zero(obj.agents(), obj.dim()));
  StopRule stop{stopping.max_iters, stopping.epsilon, ref.x_star};
  RunOptions opts;
  opts.keep_iterates = true;
  opts.stop_at_epsilon = stopping.stop_at_epsilon;
  opts.metric = &metric;
  const Trajectory traj = run(*engine, state, stop, opts);
  rep.iterations = traj.last().iter;
  rep.contraction = check_contraction(traj, rep.certificate, metric);

  MonitorContext ctx;
  ctx.M = &mn.M;
  ctx.N = &mn.N;
  ctx.A = &sys.A();
  ctx.objective = &obj;
  ctx.alpha = st.config.alpha;
  ctx.beta = st.config.beta;
  ctx.m = obj.m();
  ctx.L = obj.L();
  ctx.spectra = sys.spectra();
  ctx.x_star = ref.x_star;
  ctx.lambda_star = ref.lambda_star;
  const auto [e_opt, g_opt] = optimal_e_g(ctx);

  auto as_state = [](const Snapshot& s) {
    RunState r;
    r.x = s.x;
    r.lambda = s.lambda;
    return r;
  };
  const Matrix& a = sys.A();
  for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
    const Snapshot& s = traj.snapshots[k];
    rep.worst_null_component =
        std::max(rep.worst_null_component, null_space_component(a, s.lambda) / std::max(1.0, s.lambda.norm()));
    if (k + 1 == traj.snapshots.size()) break;
    const RunState s0 = as_state(s);
    const RunState s1 = as_state(traj.snapshots[k + 1]);
    rep.worst_identity_residual = std::max(rep.worst_identity_residual, check_error_identity(s0, s1, ctx));
    const InequalityCheck l3 = check_descent_inequality(s0, s1, ctx, st.eta);
    rep.worst_descent_margin = std::max(rep.worst_descent_margin, (l3.lhs - l3.rhs) / std::max(1.0, l3.scale));
    if (!l3.holds) ++rep.descent_failures;
    const InequalityCheck l4 = check_dual_bound(s0, s1, ctx, rep.certificate.d_star, rep.certificate.e, rep.certificate.g);
    if (!l4.holds) ++rep.dual_bound_failures;
    const InequalityCheck l4o = check_dual_bound(s0, s1, ctx, 2.0, e_opt, g_opt);
    rep.worst_dual_bound_margin = std::max(rep.worst_dual_bound_margin, (l4o.lhs - l4o.rhs) / std::max(1.0, l4o.scale));
    if (!l4o.holds) ++rep.dual_bound_opt_failures;
  }
  rep.spectrum = check_mn_spectrum(st.config.alpha, sys.B(), st.config.T, mn);

  RunState fixed;
  fixed.x = ref.x_star;
  fixed.lambda = ref.lambda_star;
  auto probe = make_engine(sys, spec.engine);
  probe->step(fixed);
  rep.fixed_point_motion = std::max((fixed.x - ref.x_star).cwiseAbs().maxCoeff(),
                                    (fixed.lambda - ref.lambda_star).cwiseAbs().maxCoeff());

  rep.passed = rep.contraction.passed() && rep.worst_identity_residual <= 1e-10 && rep.descent_failures == 0 &&
               rep.dual_bound_failures == 0 && rep.dual_bound_opt_failures == 0 && rep.spectrum.passed &&
               rep.worst_null_component <= 1e-8 && rep.fixed_point_motion <= 1e-10;
  return rep;
}

std::vector<CertifyReport> run_certify(const ExperimentConfig& cfg) {
  InstanceFactory factory(cfg);
  std::vector<CertifyReport> reports;
  for (int n : cfg.graph.n_list) {
    for (int s = 0; s < cfg.graph.seed_count; ++s) {
      const Instance inst = factory.make(n, cfg.graph.seed_first + static_cast<std::uint64_t>(s));
      for (const auto& alg : cfg.algorithms) {
        for (const auto& T : t_values(alg)) {
          reports.push_back(certify_instance(inst.graph, inst.objective, alg, T.value_or(1), cfg.stopping,
                                             run_id_for(n, inst.seed, alg.name, T)));
        }
      }
    }
  }
  return reports;
}

std::string CertifyReport::to_json() const {
  const RateCertificate& c = certificate;
  json j;
  j["label"] = label;
  j["passed"] = passed;
  j["config"] = config.describe();
  j["iterations"] = iterations;
  j["certificate"] = {{"beta_max", c.beta_max},
                      {"eta", c.eta},
                      {"alpha_max", c.alpha_max},
                      {"delta", c.delta},
                      {"contraction", c.contraction},
                      {"d", c.d_star},
                      {"e", c.e},
                      {"g", c.g},
                      {"rho_M", c.rho_m},
                      {"rho_gap", c.rho_gap},
                      {"metric", c.metric},
                      {"beta_laplacian_regime", c.beta_laplacian_regime},
                      {"extra_regime", c.extra_regime},
                      {"beta_bound_relaxed", c.beta_bound_relaxed}};
  j["contraction"] = {{"checked", contraction.checked},
                      {"violations", contraction.violations},
                      {"worst_ratio", contraction.worst_ratio},
                      {"worst_excess", contraction.worst_excess}};
  j["error_identity_worst_residual"] = worst_identity_residual;
  j["descent_inequality"] = {{"failures", descent_failures}, {"worst_margin", worst_descent_margin}};
  j["dual_bound"] = {{"failures_certificate_parameters", dual_bound_failures},
                 {"failures_optimal_parameters", dual_bound_opt_failures},
                 {"worst_margin_optimal", worst_dual_bound_margin}};
  j["mn_spectrum"] = {{"M_asymmetry", spectrum.m_asymmetry}, {"N_asymmetry", spectrum.n_asymmetry},
                 {"M_min", spectrum.m_min},            {"M_max", spectrum.m_max},
                 {"N_min", spectrum.n_min},            {"lower_bound", spectrum.lower_bound},
                 {"upper_bound", spectrum.upper_bound}, {"passed", spectrum.passed}};
  j["dual_null_component"] = worst_null_component;
  j["fixed_point_motion"] = fixed_point_motion;
  j["notes"] = notes;
  return j.dump(2);
}

std::string CertifyReport::summary() const {
  std::ostringstream out;
  out << (passed ? "PASS " : "FAIL ") << label << ": " << config.describe() << "\n"
      << "  delta = " << certificate.delta << " (contraction " << certificate.contraction << "), "
      << contraction.checked << " steps checked, " << contraction.violations.size() << " violations, worst ratio "
      << contraction.worst_ratio << "\n"
      << "  error identity residual " << worst_identity_residual << ", descent failures " << descent_failures << ", dual bound failures "
      << dual_bound_failures << "/" << dual_bound_opt_failures << ", M/N spectrum " << (spectrum.passed ? "ok" : "violated")
      << ", dual null component " << worst_null_component << ", fixed point motion " << fixed_point_motion;
  for (const auto& n : notes) out << "\n  note: " << n;
  return out.str();
}

ExperimentOutcome run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir, bool quiet) {
  (void)quiet;
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) fail(ErrorCode::kIoError, "cannot create output directory " + out_dir.string() + ": " + ec.message());

  ExperimentOutcome outcome;
  const std::string stamp = iso_stamp();
  auto open = [&](const std::string& name) {
    const auto path = out_dir / name;
    std::ofstream f(path);
    if (!f) fail(ErrorCode::kIoError, "cannot write " + path.string());
    outcome.files.push_back(path);
    return f;
  };
  auto write_series_csv = [&](const std::vector<CompareResult::Trace>& traces) {
    std::ofstream f = open("series.csv");
    f << "algorithm,T,iter,comm_rounds,rel_error\n";
    for (const auto& t : traces) {
      for (std::size_t i = 0; i < t.iter.size(); ++i) {
        f << t.algorithm << ',' << (t.T ? std::to_string(*t.T) : "NA") << ',' << t.iter[i] << ','
          << t.comm_rounds[i] << ',' << format_number(t.rel_error[i]) << '\n';
      }
    }
  };
  auto write_trace_plots = [&](const std::vector<CompareResult::Trace>& traces) {
    std::vector<Series> by_iter;
    std::vector<Series> by_comm;
    for (const auto& t : traces) {
      Series a{label_of(t.algorithm, t.T) + " rel_error vs iter", {}, {}};
      Series b{label_of(t.algorithm, t.T) + " rel_error vs comm_rounds", {}, {}};
      for (std::size_t i = 0; i < t.iter.size(); ++i) {
        a.x.push_back(static_cast<double>(t.iter[i]));
        b.x.push_back(static_cast<double>(t.comm_rounds[i]));
        a.y.push_back(t.rel_error[i]);
        b.y.push_back(t.rel_error[i]);
      }
      by_iter.push_back(std::move(a));
      by_comm.push_back(std::move(b));
    }
    std::ofstream f = open("plot_data.txt");
    write_plot_data(f, by_iter, "iter", "rel_error");
    write_plot_data(f, by_comm, "comm_rounds", "rel_error");
  };

  std::ostringstream summary;
  switch (cfg.kind) {
    case ExperimentKind::kQuadraticSweep: {
      const SweepResult res = run_quadratic_sweep(cfg);
      std::vector<ResultRecord> rows = res.runs;
      rows.insert(rows.end(), res.means.begin(), res.means.end());
      {
        std::ofstream f = open("results.csv");
        write_results_csv(f, rows, stamp);
      }
      std::map<std::string, std::pair<Series, Series>> plots;
      for (const auto& m : res.means) {
        auto& [steps, comms] = plots[label_of(m.algorithm, m.T)];
        steps.label = label_of(m.algorithm, m.T) + " mean steps_to_eps";
        comms.label = label_of(m.algorithm, m.T) + " mean comms_to_eps";
        steps.x.push_back(m.n);
        comms.x.push_back(m.n);
        steps.y.push_back(m.steps_to_eps.value_or(std::numeric_limits<double>::quiet_NaN()));
        comms.y.push_back(m.comms_to_eps.value_or(std::numeric_limits<double>::quiet_NaN()));
      }
      std::vector<Series> steps;
      std::vector<Series> comms;
      for (auto& [label, pair] : plots) {
        steps.push_back(pair.first);
        comms.push_back(pair.second);
      }
      std::ofstream f = open("plot_data.txt");
      write_plot_data(f, steps, "n", "steps_to_eps");
      write_plot_data(f, comms, "n", "comms_to_eps");
      summary << "sweep: " << res.runs.size() << " runs\n";
      for (const auto& m : res.means) {
        summary << "  " << m.run_id << ": steps_to_eps "
                << (m.steps_to_eps ? format_number(*m.steps_to_eps) : std::string("NA")) << ", comms_to_eps "
                << (m.comms_to_eps ? format_number(*m.comms_to_eps) : std::string("NA")) << "\n";
      }
      for (const auto& r : res.runs) {
        if (r.diverged) summary << "  diverged: " << r.run_id << "\n";
      }
      break;
    }
    case ExperimentKind::kLogisticCompare:
    case ExperimentKind::kSingleRun: {
      CompareResult res;
      if (cfg.kind == ExperimentKind::kLogisticCompare) {
        res = run_logistic_compare(cfg);
      } else {
        res.finals = run_single(cfg, &res.traces);
      }
      {
        std::ofstream f = open("results.csv");
        write_results_csv(f, res.finals, stamp);
      }
      write_series_csv(res.traces);
      write_trace_plots(res.traces);
      summary << to_string(cfg.kind) << ": " << res.finals.size() << " runs\n";
      for (const auto& r : res.finals) {
        summary << "  " << r.run_id << ": iter " << format_number(r.iter) << ", comm_rounds "
                << format_number(r.comm_rounds) << ", rel_error " << format_number(r.rel_error)
                << (r.diverged ? " (diverged)" : "") << "\n";
      }
      break;
    }
    case ExperimentKind::kCertify: {
      const std::vector<CertifyReport> reports = run_certify(cfg);
      json all = json::array();
      bool ok = true;
      for (const auto& rep : reports) {
        ok = ok && rep.passed;
        all.push_back(json::parse(rep.to_json()));
        summary << rep.summary() << "\n";
      }
      std::vector<ResultRecord> records;
      std::size_t idx = 0;
      for (int n : cfg.graph.n_list) {
        for (int s = 0; s < cfg.graph.seed_count; ++s) {
          const std::uint64_t seed = cfg.graph.seed_first + static_cast<std::uint64_t>(s);
          for (const auto& alg : cfg.algorithms) {
            for (const auto& T : t_values(alg)) {
              const CertifyReport& rep = reports[idx++];
              ResultRecord r;
              r.run_id = rep.label;
              r.algorithm = alg.name;
              r.T = T;
              r.n = n;
              r.seed = std::to_string(seed);
              r.iter = static_cast<double>(rep.iterations);
              r.comm_rounds = static_cast<double>(rep.iterations * rounds_per_iteration(rep.config));
              r.grad_evals = static_cast<double>(rep.iterations);
              r.rel_error = std::numeric_limits<double>::quiet_NaN();
              r.consensus_gap = std::numeric_limits<double>::quiet_NaN();
              r.delta_certified = rep.certificate.delta;
              records.push_back(r);
            }
          }
        }
      }
      {
        std::ofstream f = open("results.csv");
        write_results_csv(f, records, stamp);
      }
      {
        std::ofstream f = open("certify_report.json");
        f << all.dump(2) << '\n';
      }
      {
        std::vector<Series> series;
        for (const auto& rep : reports) {
          series.push_back({rep.label + " certified delta", {static_cast<double>(rep.config.T)}, {rep.certificate.delta}});
        }
        std::ofstream f = open("plot_data.txt");
        write_plot_data(f, series, "T", "delta");
      }
      summary << (ok ? "certify: all checks passed" : "certify: monitor violations found") << "\n";
      outcome.status = ok ? 0 : 1;
      break;
    }
  }

  {
    json meta;
    meta["generated"] = stamp;
    meta["experiment"] = to_string(cfg.kind);
    meta["config"] = json::parse(cfg.resolved_json);
    meta["warnings"] = cfg.warnings;
    json files = json::array();
    for (const auto& p : outcome.files) files.push_back(p.filename().string());
    meta["files"] = files;
    std::ofstream f(out_dir / "metadata.json");
    if (!f) fail(ErrorCode::kIoError, "cannot write " + (out_dir / "metadata.json").string());
    f << meta.dump(2) << '\n';
    outcome.files.push_back(out_dir / "metadata.json");
  }
  for (const auto& w : cfg.warnings) summary << "warning: " << w << "\n";
  outcome.summary = summary.str();
  return outcome;
}

}  // namespace pdmp
