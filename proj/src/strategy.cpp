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

#include "datamarket/strategy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace datamarket {
namespace {

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), pattern, v);
  return buf;
}

}  // namespace

CollectRule CollectRule::Fixed(int n) {
  if (n < 0) throw std::invalid_argument("CollectRule::Fixed: n must be >= 0");
  CollectRule r;
  r.kind = Kind::kFixed;
  r.fixed = n;
  return r;
}

CollectRule CollectRule::Fraction(double rho) {
  if (rho < 0.0)
    throw std::invalid_argument("CollectRule::Fraction: rho must be >= 0");
  CollectRule r;
  r.kind = Kind::kFraction;
  r.fraction = rho;
  return r;
}

int CollectRule::collected(int requested) const {
  switch (kind) {
    case Kind::kIdentity:
      return requested;
    case Kind::kFixed:
      return fixed;
    case Kind::kFraction:
      return std::max(
          0, static_cast<int>(std::llround(fraction * requested)));
  }
  return requested;
}

std::string CollectRule::label() const {
  switch (kind) {
    case Kind::kIdentity:
      return "collect=identity";
    case Kind::kFixed:
      return "collect=fixed(" + std::to_string(fixed) + ")";
    case Kind::kFraction:
      return "collect=fraction(" + fmt("%.2f", fraction) + ")";
  }
  return "collect=?";
}

ReportRule ReportRule::FabricateNormal(double mu0, int count) {
  if (count < 0)
    throw std::invalid_argument("FabricateNormal: count must be >= 0");
  ReportRule r;
  r.kind = Kind::kFabricateNormal;
  r.mu0 = mu0;
  r.count = count;
  return r;
}

ReportRule ReportRule::ShiftMean(double shift) {
  ReportRule r;
  r.kind = Kind::kShiftMean;
  r.shift = shift;
  return r;
}

ReportRule ReportRule::ScaleAroundMean(double scale) {
  if (scale < 0.0)
    throw std::invalid_argument("ScaleAroundMean: scale must be >= 0");
  ReportRule r;
  r.kind = Kind::kScaleAroundMean;
  r.scale = scale;
  return r;
}

ReportRule ReportRule::RepeatSampleMean(int count) {
  if (count < 0)
    throw std::invalid_argument("RepeatSampleMean: count must be >= 0");
  ReportRule r;
  r.kind = Kind::kRepeatSampleMean;
  r.count = count;
  return r;
}

ReportRule ReportRule::TruncateTo(int count) {
  if (count < 0) throw std::invalid_argument("TruncateTo: count must be >= 0");
  ReportRule r;
  r.kind = Kind::kTruncateTo;
  r.count = count;
  return r;
}

ReportRule ReportRule::ReplaceWithMeanCopies(int count) {
  if (count < 0)
    throw std::invalid_argument("ReplaceWithMeanCopies: count must be >= 0");
  ReportRule r;
  r.kind = Kind::kReplaceWithMeanCopies;
  r.count = count;
  return r;
}

Dataset ReportRule::apply(const Dataset& collected, double sigma2,
                          Rng& rng) const {
  switch (kind) {
    case Kind::kIdentity:
      return collected;
    case Kind::kFabricateNormal: {
      Dataset out(static_cast<std::size_t>(count));
      const double sd = std::sqrt(sigma2);
      for (auto& x : out) x = rng.normal(mu0, sd);
      return out;
    }
    case Kind::kShiftMean: {
      Dataset out = collected;
      for (auto& x : out) x += shift;
      return out;
    }
    case Kind::kScaleAroundMean: {
      const double mean = mean_or_zero(collected);
      Dataset out = collected;
      for (auto& x : out) x = mean + scale * (x - mean);
      return out;
    }
    case Kind::kRepeatSampleMean:
      return Dataset(static_cast<std::size_t>(count), mean_or_zero(collected));
    case Kind::kTruncateTo: {
      const auto keep =
          std::min(collected.size(), static_cast<std::size_t>(count));
      return Dataset(collected.begin(),
                     collected.begin() + static_cast<std::ptrdiff_t>(keep));
    }
    case Kind::kReplaceWithMeanCopies: {
      const double mean = mean_or_zero(collected);
      const auto want = static_cast<std::size_t>(count);
      if (collected.size() <= want) {
        Dataset out = collected;
        out.resize(want, mean);  // padding with the mean preserves the mean
        return out;
      }
      return Dataset(want, mean);
    }
  }
  return collected;
}

std::string ReportRule::label() const {
  switch (kind) {
    case Kind::kIdentity:
      return "report=identity";
    case Kind::kFabricateNormal:
      return "report=fabricate(mu0=" + fmt("%.3f", mu0) +
             ",count=" + std::to_string(count) + ")";
    case Kind::kShiftMean:
      return "report=shift(" + fmt("%.3f", shift) + ")";
    case Kind::kScaleAroundMean:
      return "report=scale(" + fmt("%.2f", scale) + ")";
    case Kind::kRepeatSampleMean:
      return "report=repeat_mean(" + std::to_string(count) + ")";
    case Kind::kTruncateTo:
      return "report=truncate(" + std::to_string(count) + ")";
    case Kind::kReplaceWithMeanCopies:
      return "report=mean_copies(" + std::to_string(count) + ")";
  }
  return "report=?";
}

bool Strategy::is_well_behaved() const {
  return collect.kind == CollectRule::Kind::kIdentity &&
         report.kind == ReportRule::Kind::kIdentity;
}

std::string Strategy::label() const {
  return collect.label() + "|" + report.label();
}

SubmittedMeanLaw submitted_mean_law(const Strategy& strategy, int requested,
                                    double sigma2) {
  const int n = strategy.collect.collected(requested);
  const auto& r = strategy.report;
  SubmittedMeanLaw law;
  switch (r.kind) {
    case ReportRule::Kind::kIdentity:
      if (n >= 1) return {true, 0.0, sigma2 / n, n};
      return {false, 0.0, 0.0, 0};
    case ReportRule::Kind::kFabricateNormal:
      if (r.count >= 1) return {false, r.mu0, sigma2 / r.count, r.count};
      return {false, 0.0, 0.0, 0};
    case ReportRule::Kind::kShiftMean:
      if (n >= 1) return {true, r.shift, sigma2 / n, n};
      return {false, 0.0, 0.0, 0};
    case ReportRule::Kind::kScaleAroundMean:
      // Scaling around the sample mean leaves the mean untouched.
      if (n >= 1) return {true, 0.0, sigma2 / n, n};
      return {false, 0.0, 0.0, 0};
    case ReportRule::Kind::kRepeatSampleMean:
    case ReportRule::Kind::kReplaceWithMeanCopies:
      if (r.count == 0) return {false, 0.0, 0.0, 0};
      if (n >= 1) return {true, 0.0, sigma2 / n, r.count};
      // Nothing collected: the empty-mean convention submits copies of 0.
      return {false, 0.0, 0.0, r.count};
    case ReportRule::Kind::kTruncateTo: {
      const int keep = std::min(n, r.count);
      if (keep >= 1) return {true, 0.0, sigma2 / keep, keep};
      return {false, 0.0, 0.0, 0};
    }
  }
  return law;
}

bool mu_independent(const SubmittedMeanLaw& law) { return law.tracks_mu; }

}  // namespace datamarket
