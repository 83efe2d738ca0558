#pragma once

#include <span>
#include <vector>

#include "datapact/rng.hpp"

namespace datapact {

enum class DeployKind { DataShare, Congress };

// Mining-to-deployment latency, modeled as a seeded uniform draw inside the
// measured envelopes. Decorative: reports sample it, protocol logic never
// consults it.
struct LatencyModel {
  double datashare_lo = 20.0;
  double datashare_hi = 50.0;
  double congress_lo = 25.0;
  double congress_hi = 40.0;

  double sample(DeployKind kind, DeterministicRng& rng) const {
    double lo = kind == DeployKind::DataShare ? datashare_lo : congress_lo;
    double hi = kind == DeployKind::DataShare ? datashare_hi : congress_hi;
    return lo + rng.next_double() * (hi - lo);
  }
};

// Population statistics over a latency sample set, with error bars as the
// min/max deviation from the mean.
struct SampleStats {
  double mean = 0.0;
  double variance = 0.0;  // population variance
  double stddev = 0.0;
  double min = 0.0;
  double max = 0.0;
  double err_below = 0.0;  // mean - min
  double err_above = 0.0;  // max - mean

  static SampleStats from(std::span<const double> samples);
};

}  // namespace datapact
