#pragma once

#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "gridvest/csv.hpp"
#include "gridvest/error.hpp"

namespace gridvest {

/// Battery duration classes in hours; maximum power is capacity / duration.
inline constexpr std::array<int, 4> kBatteryTypes = {1, 2, 4, 8};

inline int battery_type_slot(int hours) {
  for (std::size_t i = 0; i < kBatteryTypes.size(); ++i)
    if (kBatteryTypes[i] == hours) return static_cast<int>(i);
  throw InputError("unknown battery type " + std::to_string(hours) + "h (expected 1, 2, 4 or 8)");
}

/// Investment cost ($/kWh) per planning year and duration class, plus
/// round-trip efficiencies shared by every class.
class BatteryCatalog {
public:
  BatteryCatalog() = default;
  BatteryCatalog(int base_year, std::vector<std::array<double, 4>> costs, double charge_eff = 0.95,
                 double discharge_eff = 0.95)
      : base_year_(base_year), costs_(std::move(costs)) {
    set_efficiencies(charge_eff, discharge_eff);
    for (std::size_t y = 0; y < costs_.size(); ++y)
      for (std::size_t k = 0; k < 4; ++k)
        if (!(costs_[y][k] > 0.0) || !std::isfinite(costs_[y][k]))
          throw InputError("catalog cost must be positive at year " + std::to_string(y + 1) + ", type " +
                           std::to_string(kBatteryTypes[k]) + "h");
  }

  int base_year() const { return base_year_; }
  int horizon() const { return static_cast<int>(costs_.size()); }
  double charge_eff() const { return charge_eff_; }
  double discharge_eff() const { return discharge_eff_; }

  void set_efficiencies(double charge, double discharge) {
    if (!(charge > 0.0 && charge <= 1.0) || !(discharge > 0.0 && discharge <= 1.0))
      throw InputError("battery efficiencies must lie in (0, 1]");
    charge_eff_ = charge;
    discharge_eff_ = discharge;
  }

  /// Cost in $/kWh for 1-based planning year `year` and duration `hours`.
  double cost(int year, int hours) const {
    if (year < 1 || year > horizon())
      throw InputError("catalog has no entry for year " + std::to_string(year));
    return costs_[year - 1][battery_type_slot(hours)];
  }

  BatteryCatalog scaled(double factor) const {
    auto copy = *this;
    for (auto& row : copy.costs_)
      for (auto& c : row) c *= factor;
    return copy;
  }

  BatteryCatalog with_uniform_cost(double value) const {
    auto copy = *this;
    for (auto& row : copy.costs_) row.fill(value);
    return copy;
  }

private:
  int base_year_ = 2023;
  std::vector<std::array<double, 4>> costs_;
  double charge_eff_ = 0.95;
  double discharge_eff_ = 0.95;
};

inline constexpr const char* kCatalogHeader = "year,type_1h,type_2h,type_4h,type_8h";

/// Built-in battery prices in $/kWh for 2023-2037 (types 1h, 2h, 4h, 8h).
inline constexpr std::array<std::array<int, 5>, 15> kGenCostPrices = {{
    {2023, 935, 676, 549, 487},
    {2024, 879, 635, 516, 458},
    {2025, 830, 600, 487, 433},
    {2026, 786, 568, 461, 410},
    {2027, 791, 554, 448, 397},
    {2028, 773, 539, 441, 396},
    {2029, 755, 525, 427, 383},
    {2030, 737, 510, 414, 371},
    {2031, 719, 496, 401, 358},
    {2032, 701, 481, 388, 345},
    {2033, 683, 467, 374, 332},
    {2034, 665, 453, 361, 320},
    {2035, 647, 438, 348, 307},
    {2036, 629, 424, 335, 294},
    {2037, 612, 410, 322, 282},
}};

inline BatteryCatalog gencost_catalog(int horizon = 15) {
  if (horizon < 1 || horizon > static_cast<int>(kGenCostPrices.size()))
    throw InputError("built-in catalog covers 1..15 years");
  std::vector<std::array<double, 4>> costs;
  for (int y = 0; y < horizon; ++y) {
    const auto& row = kGenCostPrices[y];
    costs.push_back({double(row[1]), double(row[2]), double(row[3]), double(row[4])});
  }
  return BatteryCatalog(kGenCostPrices[0][0], std::move(costs));
}

inline void write_catalog(const std::string& path, int horizon = 15) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out << kCatalogHeader << '\n';
  for (int y = 0; y < horizon; ++y) {
    const auto& r = kGenCostPrices[y];
    out << r[0] << ',' << r[1] << ',' << r[2] << ',' << r[3] << ',' << r[4] << '\n';
  }
}

/// Reads a catalog CSV keyed by calendar year. Planning year 1 is `base_year`;
/// every year of the horizon must be present.
inline BatteryCatalog load_catalog(const std::string& path, int horizon, int base_year = 2023) {
  const auto table = csv::read_file(path);
  if (csv::join(table.header) != kCatalogHeader)
    throw InputError(path + ": expected header '" + kCatalogHeader + "'");
  std::map<int, std::array<double, 4>> rows;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const auto where = path + ":" + std::to_string(table.line_numbers[r]);
    if (row.size() != 5) throw InputError(where + ": malformed row (expected 5 fields)");
    auto year = csv::parse_int(row[0]);
    if (!year) throw InputError(where + ": malformed year");
    std::array<double, 4> cost{};
    for (int k = 0; k < 4; ++k) {
      auto v = csv::parse_double(row[1 + k]);
      if (!v) throw InputError(where + ": missing cost for type " + std::to_string(kBatteryTypes[k]) + "h");
      cost[k] = *v;
    }
    if (!rows.emplace(*year, cost).second) throw InputError(where + ": duplicate year " + std::to_string(*year));
  }
  std::vector<std::array<double, 4>> costs;
  for (int y = 1; y <= horizon; ++y) {
    auto it = rows.find(base_year + y - 1);
    if (it == rows.end())
      throw InputError("catalog gap at year " + std::to_string(y) + " (" + std::to_string(base_year + y - 1) + ")");
    costs.push_back(it->second);
  }
  return BatteryCatalog(base_year, std::move(costs));
}

/// Discounting with γ_y = 1 / (1 + r)^y for 1-based year y.
struct EconomicParams {
  double inflation_rate = 0.03;

  void validate() const {
    if (!(inflation_rate > -1.0)) throw InputError("inflation rate must exceed -1");
  }
  double discount(int year) const { return 1.0 / std::pow(1.0 + inflation_rate, year); }
};

}  // namespace gridvest
