#include "datapact/latency.hpp"

#include <algorithm>
#include <cmath>

namespace datapact {

SampleStats SampleStats::from(std::span<const double> samples) {
  SampleStats s;
  if (samples.empty()) {
    return s;
  }
  double sum = 0.0;
  for (double x : samples) sum += x;
  s.mean = sum / static_cast<double>(samples.size());
  double sq = 0.0;
  for (double x : samples) {
    double d = x - s.mean;
    sq += d * d;
  }
  s.variance = sq / static_cast<double>(samples.size());
  s.stddev = std::sqrt(s.variance);
  auto [mn, mx] = std::minmax_element(samples.begin(), samples.end());
  s.min = *mn;
  s.max = *mx;
  s.err_below = s.mean - s.min;
  s.err_above = s.max - s.mean;
  return s;
}

}  // namespace datapact
