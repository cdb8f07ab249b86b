#pragma once

#include <cmath>
#include <sstream>
#include <utility>
#include <vector>

#include "mkdv/error.hpp"

namespace mkdv::lab {

struct RateFit {
  std::vector<double> times;      // samples inside the window
  std::vector<double> distances;
  double varpi = 0.0;
  double C = 0.0;
  std::pair<double, double> window{0.0, 0.0};
  double r_squared = 0.0;
  /// Distances sit at round-off level; the slope carries no information.
  bool floor_limited = false;
};

/// Least-squares line through (t, log d) on the closed window [ta, tb]:
/// varpi = -slope, C = exp(intercept).
inline RateFit fit_exponential_rate(const std::vector<double>& times, const std::vector<double>& distances,
                                    std::pair<double, double> window, double floor = 1e-12) {
  if (times.size() != distances.size()) throw InvalidArgument("times and distances differ in length");
  RateFit f;
  f.window = window;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < window.first || times[i] > window.second) continue;
    if (!(distances[i] > 0.0)) {
      std::ostringstream os;
      os << "distance " << distances[i] << " at t=" << times[i] << " is not positive";
      throw NonPositiveDistance(os.str());
    }
    f.times.push_back(times[i]);
    f.distances.push_back(distances[i]);
  }
  const std::size_t n = f.times.size();
  if (n < 2) throw InvalidArgument("fit window holds fewer than two samples");

  double st = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    st += f.times[i];
    sy += std::log(f.distances[i]);
  }
  const double tm = st / n, ym = sy / n;
  double stt = 0.0, sty = 0.0, syy = 0.0;
  double peak = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dt = f.times[i] - tm, dy = std::log(f.distances[i]) - ym;
    stt += dt * dt;
    sty += dt * dy;
    syy += dy * dy;
    peak = std::max(peak, f.distances[i]);
  }
  if (stt == 0.0) throw InvalidArgument("fit window has no time spread");
  const double slope = sty / stt;
  f.varpi = -slope;
  f.C = std::exp(ym - slope * tm);
  // constant series: no variance to explain
  const double explained = slope * sty;
  f.r_squared = syy > 1e-300 ? std::min(1.0, explained / syy) : 0.0;
  f.floor_limited = peak < floor;
  return f;
}

}  // namespace mkdv::lab
