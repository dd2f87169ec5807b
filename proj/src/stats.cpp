#include "apnn/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "apnn/errors.hpp"

namespace apnn {

std::vector<double> ranks(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> r(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && x[idx[j + 1]] == x[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

double mean(const std::vector<double>& x) {
  if (x.empty()) throw InvalidArgument("mean of an empty series");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("correlation needs two equal series of length >= 2");
  const double mx = mean(x), my = mean(y);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0 || syy == 0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) { return pearson(ranks(x), ranks(y)); }

DecayFit fit_exponential_decay(const std::vector<double>& t, const std::vector<double>& y) {
  std::vector<double> tt, ly;
  for (std::size_t i = 0; i < t.size() && i < y.size(); ++i)
    if (y[i] > 0) {
      tt.push_back(t[i]);
      ly.push_back(std::log(y[i]));
    }
  DecayFit f;
  if (tt.size() < 2) return f;
  const double mt = mean(tt), ml = mean(ly);
  double stl = 0, stt = 0, sll = 0;
  for (std::size_t i = 0; i < tt.size(); ++i) {
    stl += (tt[i] - mt) * (ly[i] - ml);
    stt += (tt[i] - mt) * (tt[i] - mt);
    sll += (ly[i] - ml) * (ly[i] - ml);
  }
  if (stt == 0) return f;
  const double slope = stl / stt;
  f.rate = -slope;
  f.log_c = ml - slope * mt;
  f.r2 = sll > 0 ? stl * stl / (stt * sll) : 1.0;
  return f;
}

double max_rise(const std::vector<double>& y) {
  double lo = INFINITY, rise = 0;
  for (double v : y) {
    lo = std::min(lo, v);
    rise = std::max(rise, v - lo);
  }
  return rise;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i)
    if (x[i] > 0 && y[i] > 0) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  if (lx.size() < 2) return 0.0;
  const double mx = mean(lx), my = mean(ly);
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  return sxx > 0 ? sxy / sxx : 0.0;
}

double time_average(const std::vector<double>& t, const std::vector<double>& y) {
  if (t.size() != y.size() || t.empty()) throw InvalidArgument("time average needs matching series");
  if (t.size() == 1) return y[0];
  double s = 0;
  for (std::size_t i = 0; i + 1 < t.size(); ++i) s += 0.5 * (y[i] + y[i + 1]) * (t[i + 1] - t[i]);
  const double span = t.back() - t.front();
  return span > 0 ? s / span : y[0];
}

}  // namespace apnn
