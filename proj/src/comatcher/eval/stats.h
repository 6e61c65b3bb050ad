#pragma once

#include <vector>

namespace comatcher {

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for fewer than 2
};
MeanStd ComputeMeanStd(const std::vector<double>& values);

// One-sided sign test: probability of at least `wins` successes out of
// wins + losses fair coin flips. Ties are dropped by the caller.
double SignTestPValue(int wins, int losses);

}  // namespace comatcher
