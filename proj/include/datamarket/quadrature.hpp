// Copyright 2026 The datamarket Authors
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

#include <functional>
#include <vector>

namespace datamarket {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// n-point Gauss-Hermite rule: integrates f against exp(-t^2) over the real
// line. Nodes/weights by Newton iteration on the Hermite recurrence.
const QuadratureRule& gauss_hermite(int n);

// n-point Gauss-Legendre rule on [-1, 1].
const QuadratureRule& gauss_legendre(int n);

// Integral of f over [lo, hi] with a single Gauss-Legendre panel.
double integrate_segment(const std::function<double(double)>& f, double lo,
                         double hi, const QuadratureRule& gl);

}  // namespace datamarket
