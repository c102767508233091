#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "gridvest/csv.hpp"
#include "gridvest/error.hpp"
#include "gridvest/time_grid.hpp"

namespace gridvest {

/// Exogenous hourly series aligned to a TimeGrid. Units: W/m², °C, kW, kW, $/kWh.
struct ScenarioData {
  TimeGrid grid;
  std::vector<double> irradiance;
  std::vector<double> ambient_temp;
  std::vector<double> residential_load;
  std::vector<double> ev_demand;
  std::vector<double> utility_price;

  ScenarioData() = default;
  explicit ScenarioData(TimeGrid g)
      : grid(g),
        irradiance(g.slot_count(), 0.0),
        ambient_temp(g.slot_count(), 0.0),
        residential_load(g.slot_count(), 0.0),
        ev_demand(g.slot_count(), 0.0),
        utility_price(g.slot_count(), 0.0) {}

  std::size_t size() const { return irradiance.size(); }

  /// Throws InputError naming the first offending slot.
  void validate() const {
    const auto n = grid.slot_count();
    if (irradiance.size() != n || ambient_temp.size() != n || residential_load.size() != n ||
        ev_demand.size() != n || utility_price.size() != n)
      throw InputError("scenario series length does not match the time grid");
    for (std::size_t s = 0; s < n; ++s) {
      auto check = [&](double v, const char* name) {
        if (!std::isfinite(v)) throw InputError(std::string("non-finite ") + name + " at slot " + grid.coord(s).str());
        if (v < 0.0) throw InputError(std::string("negative ") + name + " at slot " + grid.coord(s).str());
      };
      check(irradiance[s], "irradiance");
      check(residential_load[s], "load");
      check(ev_demand[s], "ev_demand");
      check(utility_price[s], "price");
      if (!std::isfinite(ambient_temp[s]))
        throw InputError("non-finite ambient_temp at slot " + grid.coord(s).str());
    }
  }
};

enum class PriceUnit { kPerKwh, kPerMwh };

struct ScenarioUnits {
  PriceUnit price = PriceUnit::kPerKwh;
};

inline constexpr const char* kScenarioHeader =
    "year,quarter,day,hour,irradiance,ambient_temp,load,ev_demand,price";

inline ScenarioData load_scenario(const std::string& path, const TimeGrid& grid, ScenarioUnits units = {}) {
  const auto table = csv::read_file(path);
  if (csv::join(table.header) != kScenarioHeader)
    throw InputError(path + ": expected header '" + kScenarioHeader + "'");

  ScenarioData data(grid);
  std::vector<char> seen(grid.slot_count(), 0);
  const double price_scale = units.price == PriceUnit::kPerMwh ? 1.0 / 1000.0 : 1.0;

  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const auto where = path + ":" + std::to_string(table.line_numbers[r]);
    if (row.size() != 9) throw InputError(where + ": malformed row (expected 9 fields)");
    SlotCoord c;
    auto y = csv::parse_int(row[0]), q = csv::parse_int(row[1]), d = csv::parse_int(row[2]),
         t = csv::parse_int(row[3]);
    if (!y || !q || !d || !t) throw InputError(where + ": malformed slot index");
    c = {*y, *q, *d, *t};
    if (!grid.contains(c)) {
      // Rows for years beyond the planning horizon are ignored.
      if (c.year > grid.years() && c.quarter >= 1 && c.quarter <= kQuartersPerYear) continue;
      throw InputError(where + ": slot " + c.str() + " is outside the time grid");
    }
    std::array<double, 5> v{};
    for (int k = 0; k < 5; ++k) {
      auto parsed = csv::parse_double(row[4 + k]);
      if (!parsed || !std::isfinite(*parsed))
        throw InputError(where + ": malformed value in column " + std::to_string(5 + k));
      v[k] = *parsed;
    }
    const auto s = grid.index(c);
    if (seen[s]) throw InputError(where + ": duplicate slot " + c.str());
    seen[s] = 1;
    if (v[0] < 0) throw InputError("negative irradiance at slot " + c.str());
    if (v[2] < 0) throw InputError("negative load at slot " + c.str());
    if (v[3] < 0) throw InputError("negative ev_demand at slot " + c.str());
    if (v[4] < 0) throw InputError("negative price at slot " + c.str());
    data.irradiance[s] = v[0];
    data.ambient_temp[s] = v[1];
    data.residential_load[s] = v[2];
    data.ev_demand[s] = v[3];
    data.utility_price[s] = v[4] * price_scale;
  }
  for (std::size_t s = 0; s < seen.size(); ++s)
    if (!seen[s]) throw InputError("missing slot " + grid.coord(s).str());
  data.validate();
  return data;
}

inline void write_scenario(const ScenarioData& data, const std::string& path, const std::string& comment = {}) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  if (!comment.empty()) out << "# " << comment << '\n';
  out << kScenarioHeader << '\n';
  for (std::size_t s = 0; s < data.size(); ++s) {
    const auto c = data.grid.coord(s);
    out << c.year << ',' << c.quarter << ',' << c.day << ',' << c.hour << ','
        << csv::format_double(data.irradiance[s]) << ',' << csv::format_double(data.ambient_temp[s]) << ','
        << csv::format_double(data.residential_load[s]) << ',' << csv::format_double(data.ev_demand[s]) << ','
        << csv::format_double(data.utility_price[s]) << '\n';
  }
}

/// Shape parameters of the synthetic scenario generator. Quarter 1 is the
/// southern-hemisphere summer.
struct SynthProfile {
  double solar_peak = 800.0;  // W/m² at solar noon in the sunniest quarter
  std::array<double, 4> solar_season = {1.0, 0.65, 0.45, 0.85};
  double solar_noon = 13.0;   // hour label of the peak
  double solar_width = 2.5;   // hours, bell standard deviation
  double daylight_half = 6.0; // hours either side of noon with nonzero sun

  std::array<double, 4> temp_mean = {22.0, 15.0, 10.0, 16.0};
  double temp_swing = 6.0;

  double load_base = 180.0;       // kW
  double load_morning_peak = 70.0;
  double load_evening_peak = 130.0;
  double load_growth = 0.01;      // per year

  double ev_base = 10.0;
  double ev_peak = 110.0;         // kW at the evening EV peak
  double ev_growth = 0.08;

  double price_offpeak = 0.20;    // $/kWh
  double price_peak = 0.45;
  int peak_first_hour = 16;
  int peak_last_hour = 21;
  double price_growth = 0.02;

  double noise = 0.05;            // relative amplitude of multiplicative noise
};

namespace detail {

/// Uniform draw in [-1, 1] built directly from the engine bits, so the stream
/// does not depend on the standard library's distribution implementations.
inline double symmetric_unit(std::mt19937_64& rng) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return 2.0 * u - 1.0;
}

inline double bump(double hour, double centre, double width) {
  const double z = (hour - centre) / width;
  return std::exp(-0.5 * z * z);
}

}  // namespace detail

/// Noise-free solar bell value (W/m²) for a quarter and hour label.
inline double synth_clear_sky(const SynthProfile& p, int quarter, int hour) {
  const double h = static_cast<double>(hour);
  if (std::abs(h - p.solar_noon) > p.daylight_half) return 0.0;
  return p.solar_peak * p.solar_season[quarter - 1] * detail::bump(h, p.solar_noon, p.solar_width);
}

inline ScenarioData synth_scenario(std::uint64_t seed, const TimeGrid& grid, const SynthProfile& p = {}) {
  ScenarioData data(grid);
  std::mt19937_64 rng(seed);
  for (std::size_t s = 0; s < grid.slot_count(); ++s) {
    const auto c = grid.coord(s);
    const double h = c.hour;
    const double years_elapsed = c.year - 1;
    const double n_irr = detail::symmetric_unit(rng);
    const double n_tmp = detail::symmetric_unit(rng);
    const double n_load = detail::symmetric_unit(rng);
    const double n_ev = detail::symmetric_unit(rng);

    data.irradiance[s] = std::max(0.0, synth_clear_sky(p, c.quarter, c.hour) * (1.0 + p.noise * n_irr));

    const double diurnal = std::sin(std::numbers::pi * (h - 9.0) / 12.0);
    data.ambient_temp[s] = p.temp_mean[c.quarter - 1] + p.temp_swing * diurnal + p.noise * 10.0 * n_tmp;

    const double load = p.load_base + p.load_morning_peak * detail::bump(h, 8.0, 1.5) +
                        p.load_evening_peak * detail::bump(h, 19.0, 2.0);
    data.residential_load[s] =
        std::max(0.0, load * std::pow(1.0 + p.load_growth, years_elapsed) * (1.0 + p.noise * n_load));

    const double ev = p.ev_base + p.ev_peak * detail::bump(h, 19.5, 1.8);
    data.ev_demand[s] = std::max(0.0, ev * std::pow(1.0 + p.ev_growth, years_elapsed) * (1.0 + p.noise * n_ev));

    const bool peak = c.hour >= p.peak_first_hour && c.hour <= p.peak_last_hour;
    data.utility_price[s] = (peak ? p.price_peak : p.price_offpeak) * std::pow(1.0 + p.price_growth, years_elapsed);
  }
  return data;
}

/// Collapses a full-mode scenario to one mean day per quarter.
inline ScenarioData aggregate_representative(const ScenarioData& full) {
  if (full.grid.representative_days()) return full;
  const auto rep_grid = TimeGrid::representative(full.grid.years());
  ScenarioData rep(rep_grid);
  for (std::size_t s = 0; s < full.size(); ++s) {
    const auto c = full.grid.coord(s);
    const auto r = rep_grid.index({c.year, c.quarter, 1, c.hour});
    const double inv_days = 1.0 / full.grid.days_in_quarter(c.quarter);
    rep.irradiance[r] += full.irradiance[s] * inv_days;
    rep.ambient_temp[r] += full.ambient_temp[s] * inv_days;
    rep.residential_load[r] += full.residential_load[s] * inv_days;
    rep.ev_demand[r] += full.ev_demand[s] * inv_days;
    rep.utility_price[r] += full.utility_price[s] * inv_days;
  }
  return rep;
}

struct SeriesStats {
  double min = 0.0, max = 0.0, mean = 0.0;
};

inline SeriesStats stats_of(const std::vector<double>& v) {
  SeriesStats st;
  if (v.empty()) return st;
  auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  st.min = *lo;
  st.max = *hi;
  double sum = 0.0;
  for (double x : v) sum += x;
  st.mean = sum / static_cast<double>(v.size());
  return st;
}

}  // namespace gridvest
