#pragma once

// Brute-force daily arbitrage: dynamic programming over SoC levels on a
// fixed grid, with the start-of-day level equal to the end-of-day level.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

namespace oracle {

struct ArbitrageDay {
  std::array<double, 24> net{};    // load + EV - PV, kW, must be >= 0
  std::array<double, 24> price{};  // $/kWh
  double capacity = 0.0;           // kWh
  double hours = 1.0;              // duration class: rate limit = capacity / hours
  double eta_ch = 1.0, eta_dis = 1.0;
  double step = 0.1;               // SoC grid, kWh
};

struct ArbitrageResult {
  double cost = 0.0;                // minimum daily purchase cost
  std::array<double, 24> soc{};     // end-of-hour SoC of the best schedule
  long evaluated = 0;               // transitions examined
};

inline ArbitrageResult solve_arbitrage(const ArbitrageDay& d) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  const int k = static_cast<int>(std::floor(d.capacity / d.step + 1e-9));
  const double rate = d.capacity / d.hours;
  const int states = k + 1;

  // Cost of moving from level i to level j during hour t, or inf.
  auto hour_cost = [&](int t, int i, int j) {
    const double ds = (j - i) * d.step;
    double util = d.net[t];
    if (ds >= 0.0) {
      const double ch = ds / d.eta_ch;
      if (ch > rate + 1e-12) return inf;
      util += ch;
    } else {
      const double dis = -ds * d.eta_dis;
      if (dis > rate + 1e-12 || dis > d.net[t] + 1e-12) return inf;
      util -= dis;
    }
    return d.price[t] * util;
  };

  ArbitrageResult best;
  best.cost = inf;
  std::vector<double> f(states), g(states);
  std::vector<std::array<int, 24>> from(states);
  for (int start = 0; start < states; ++start) {
    std::fill(f.begin(), f.end(), inf);
    f[start] = 0.0;
    for (int t = 0; t < 24; ++t) {
      std::fill(g.begin(), g.end(), inf);
      for (int i = 0; i < states; ++i) {
        if (f[i] == inf) continue;
        for (int j = 0; j < states; ++j) {
          ++best.evaluated;
          const double c = hour_cost(t, i, j);
          if (c == inf) continue;
          if (f[i] + c < g[j]) {
            g[j] = f[i] + c;
            from[j][t] = i;
          }
        }
      }
      std::swap(f, g);
    }
    if (f[start] < best.cost) {
      best.cost = f[start];
      int level = start;
      for (int t = 23; t >= 0; --t) {
        best.soc[t] = level * d.step;
        level = from[level][t];
      }
    }
  }
  return best;
}

}  // namespace oracle
