#pragma once

#include <vector>

namespace apnn {

/// Ranks starting at 1; ties share their average rank.
std::vector<double> ranks(const std::vector<double>& x);
double pearson(const std::vector<double>& x, const std::vector<double>& y);
double spearman(const std::vector<double>& x, const std::vector<double>& y);

/// Least-squares fit log y = log c - rate * t over positive y.
struct DecayFit {
  double rate = 0, log_c = 0, r2 = 0;
};
DecayFit fit_exponential_decay(const std::vector<double>& t, const std::vector<double>& y);

/// Largest increase of a series above its running minimum.
double max_rise(const std::vector<double>& y);

/// Slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

double mean(const std::vector<double>& x);

/// Trapezoid average of y over t.
double time_average(const std::vector<double>& t, const std::vector<double>& y);

}  // namespace apnn
