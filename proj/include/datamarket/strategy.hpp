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

#include <string>

#include "datamarket/mechanism.hpp"
#include "datamarket/rng.hpp"

namespace datamarket {

// How much data a contributor actually collects given a request.
struct CollectRule {
  enum class Kind { kIdentity, kFixed, kFraction };
  Kind kind = Kind::kIdentity;
  int fixed = 0;
  double fraction = 1.0;

  static CollectRule Identity() { return {}; }
  static CollectRule Fixed(int n);
  static CollectRule Fraction(double rho);

  int collected(int requested) const;
  std::string label() const;
};

// What a contributor submits given what she collected. Rules that reference
// the collected sample mean use 0 when nothing was collected, mirroring the
// mechanism's empty-mean convention.
struct ReportRule {
  enum class Kind {
    kIdentity,              // submit the collected data unaltered
    kFabricateNormal,       // submit `count` fresh draws from Normal(mu0, sigma2)
    kShiftMean,             // add a constant to every point
    kScaleAroundMean,       // x -> mean + scale * (x - mean); mean unchanged
    kRepeatSampleMean,      // submit `count` copies of the collected mean
    kTruncateTo,            // submit only the first `count` points
    kReplaceWithMeanCopies, // pad (or collapse) to `count` points, preserving the mean
  };
  Kind kind = Kind::kIdentity;
  double mu0 = 0.0;
  double shift = 0.0;
  double scale = 1.0;
  int count = 0;

  static ReportRule Identity() { return {}; }
  static ReportRule FabricateNormal(double mu0, int count);
  static ReportRule ShiftMean(double shift);
  static ReportRule ScaleAroundMean(double scale);
  static ReportRule RepeatSampleMean(int count);
  static ReportRule TruncateTo(int count);
  static ReportRule ReplaceWithMeanCopies(int count);

  Dataset apply(const Dataset& collected, double sigma2, Rng& rng) const;
  std::string label() const;
};

struct Strategy {
  CollectRule collect;
  ReportRule report;

  static Strategy WellBehaved() { return {}; }
  bool is_well_behaved() const;
  std::string label() const;
};

// Distribution of the submitted sample mean when the contributor holds n
// fresh samples from Normal(mu, sigma2): the mean is tracks_mu * mu + bias
// with the given variance, and the submission has `count` points. Every
// report rule above produces a Gaussian (or degenerate) submitted mean, so
// expected payments have closed forms.
struct SubmittedMeanLaw {
  bool tracks_mu = true;
  double bias = 0.0;
  double variance = 0.0;
  int count = 0;
};

SubmittedMeanLaw submitted_mean_law(const Strategy& strategy, int requested,
                                    double sigma2);

// True when the strategy's expected utility does not depend on the true
// mean (the submitted mean tracks the collected sample mean).
bool mu_independent(const SubmittedMeanLaw& law);

}  // namespace datamarket
