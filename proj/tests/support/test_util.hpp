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

#include <filesystem>
#include <numeric>
#include <string>
#include <vector>

#include "pdmp/error.hpp"
#include "pdmp/random.hpp"
#include "pdmp/types.hpp"

namespace pdmp::testing {

// Error code thrown by f, or a value-initialized code when nothing is thrown.
template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode{};
}

template <class F>
std::string message_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

inline std::vector<int> random_permutation(int n, Rng& rng) {
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (int i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.uniform_index(i + 1)]);
  return perm;
}

inline Stacked random_stacked(int rows, int cols, Rng& rng, double scale = 1.0) {
  Stacked s(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) s(r, c) = scale * rng.normal();
  return s;
}

inline double max_abs(const Stacked& s) { return s.size() == 0 ? 0.0 : s.cwiseAbs().maxCoeff(); }

inline std::filesystem::path fresh_dir(const std::filesystem::path& p) {
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace pdmp::testing
