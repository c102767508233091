#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "gridvest/error.hpp"
#include "gridvest/scenario.hpp"

namespace gridvest {

struct PvParams {
  double rating = 600.0;      // kW
  double efficiency = 0.95;
  double derating = 0.004;    // 1/°C
  double noct = 45.0;         // °C
  double i_stc = 1000.0;      // W/m²
  double t_stc = 25.0;        // °C

  void validate() const {
    if (!(rating >= 0.0)) throw InputError("pv.rating_kw must be >= 0");
    if (!(efficiency > 0.0 && efficiency <= 1.0)) throw InputError("pv.efficiency must lie in (0, 1]");
    if (!(derating >= 0.0)) throw InputError("pv.gamma must be >= 0");
    if (!(i_stc > 0.0)) throw InputError("pv.i_stc must be > 0");
  }
};

/// NOCT cell-temperature estimate; NOCT is rated at 800 W/m² and 20 °C ambient.
inline double cell_temperature(double t_amb, double irradiance, const PvParams& p) {
  return t_amb + (p.noct - 20.0) / 800.0 * irradiance;
}

/// Output of the unclamped formula; may be negative at extreme cell temperatures.
inline double pv_power_raw(double t_amb, double irradiance, const PvParams& p) {
  const double t_cell = cell_temperature(t_amb, irradiance, p);
  return p.efficiency * p.rating * (irradiance / p.i_stc) * (1.0 - p.derating * (t_cell - p.t_stc));
}

inline double pv_power(double t_amb, double irradiance, const PvParams& p) {
  return std::max(0.0, pv_power_raw(t_amb, irradiance, p));
}

struct PvProfile {
  std::vector<double> power;     // kW per slot
  std::size_t clamped_slots = 0; // slots where the raw formula went negative
};

inline PvProfile build_pv_profile(const ScenarioData& scenario, const PvParams& params) {
  params.validate();
  PvProfile out;
  out.power.resize(scenario.size());
  for (std::size_t s = 0; s < scenario.size(); ++s) {
    const double raw = pv_power_raw(scenario.ambient_temp[s], scenario.irradiance[s], params);
    if (raw < 0.0) ++out.clamped_slots;
    out.power[s] = std::max(0.0, raw);
  }
  return out;
}

}  // namespace gridvest
