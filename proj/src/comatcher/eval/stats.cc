#include "comatcher/eval/stats.h"

#include <algorithm>
#include <cmath>

namespace comatcher {

MeanStd ComputeMeanStd(const std::vector<double>& v) {
  MeanStd r;
  if (v.empty()) return r;
  for (double x : v) r.mean += x;
  r.mean /= static_cast<double>(v.size());
  if (v.size() < 2) return r;
  double ss = 0;
  for (double x : v) ss += (x - r.mean) * (x - r.mean);
  r.stddev = std::sqrt(ss / static_cast<double>(v.size() - 1));
  return r;
}

double SignTestPValue(int wins, int losses) {
  const int n = wins + losses;
  if (n == 0) return 1.0;
  double p = 0;
  for (int k = wins; k <= n; ++k) {
    p += std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) -
                  std::lgamma(n - k + 1.0) - n * std::log(2.0));
  }
  return std::min(1.0, p);
}

}  // namespace comatcher
