#pragma once

#include <array>
#include <cstddef>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "gridvest/error.hpp"

namespace gridvest {

inline constexpr int kQuartersPerYear = 4;
inline constexpr int kHoursPerDay = 24;

/// Days in each quarter of a planning year.
inline constexpr std::array<int, kQuartersPerYear> kQuarterDays = {90, 91, 92, 93};

/// 1-based coordinates of one hourly slot.
struct SlotCoord {
  int year = 1;
  int quarter = 1;
  int day = 1;
  int hour = 1;

  std::string str() const {
    std::ostringstream os;
    os << "(y=" << year << ",q=" << quarter << ",d=" << day << ",t=" << hour << ")";
    return os.str();
  }
  friend bool operator==(const SlotCoord&, const SlotCoord&) = default;
};

enum class DayMode { kRepresentative, kFull };

/// The planning index space: years x quarters x days x hours.
///
/// In representative-day mode every quarter holds a single averaged day whose
/// weight is the quarter's day count. In full mode every calendar day is its
/// own slot block with weight 1. Slots are laid out year-major, then quarter,
/// day and hour, so a day is always 24 consecutive slots.
class TimeGrid {
public:
  TimeGrid() : TimeGrid(15, DayMode::kRepresentative) {}

  TimeGrid(int years, DayMode mode) : years_(years), mode_(mode) {
    if (years < 1) throw InputError("time grid needs at least one year");
    for (int q = 0; q < kQuartersPerYear; ++q) {
      days_[q] = mode == DayMode::kFull ? kQuarterDays[q] : 1;
      weights_[q] = mode == DayMode::kFull ? 1.0 : static_cast<double>(kQuarterDays[q]);
    }
    quarter_offset_[0] = 0;
    for (int q = 1; q <= kQuartersPerYear; ++q)
      quarter_offset_[q] = quarter_offset_[q - 1] + days_[q - 1] * kHoursPerDay;
  }

  static TimeGrid representative(int years) { return {years, DayMode::kRepresentative}; }
  static TimeGrid full(int years) { return {years, DayMode::kFull}; }

  int years() const { return years_; }
  DayMode mode() const { return mode_; }
  bool representative_days() const { return mode_ == DayMode::kRepresentative; }
  int days_in_quarter(int quarter) const { return days_.at(quarter - 1); }
  double day_weight(int quarter) const { return weights_.at(quarter - 1); }

  std::size_t slots_per_year() const { return static_cast<std::size_t>(quarter_offset_[kQuartersPerYear]); }
  std::size_t slot_count() const { return slots_per_year() * static_cast<std::size_t>(years_); }
  std::size_t day_count() const { return slot_count() / kHoursPerDay; }

  bool contains(const SlotCoord& c) const {
    return c.year >= 1 && c.year <= years_ && c.quarter >= 1 && c.quarter <= kQuartersPerYear &&
           c.day >= 1 && c.day <= days_[c.quarter - 1] && c.hour >= 1 && c.hour <= kHoursPerDay;
  }

  std::size_t index(const SlotCoord& c) const {
    if (!contains(c)) throw InputError("slot " + c.str() + " is outside the time grid");
    return static_cast<std::size_t>(c.year - 1) * slots_per_year() +
           static_cast<std::size_t>(quarter_offset_[c.quarter - 1]) +
           static_cast<std::size_t>((c.day - 1) * kHoursPerDay + (c.hour - 1));
  }

  SlotCoord coord(std::size_t slot) const {
    SlotCoord c;
    c.year = static_cast<int>(slot / slots_per_year()) + 1;
    auto in_year = static_cast<int>(slot % slots_per_year());
    int q = 0;
    while (in_year >= quarter_offset_[q + 1]) ++q;
    c.quarter = q + 1;
    in_year -= quarter_offset_[q];
    c.day = in_year / kHoursPerDay + 1;
    c.hour = in_year % kHoursPerDay + 1;
    return c;
  }

  /// Weight applied to the cost of one slot (day weight of its quarter).
  double slot_weight(std::size_t slot) const { return day_weight(coord(slot).quarter); }

  int year_of(std::size_t slot) const { return static_cast<int>(slot / slots_per_year()) + 1; }

  /// First slot of day `day_index` (0-based over the whole grid).
  std::size_t day_start(std::size_t day_index) const { return day_index * kHoursPerDay; }

private:
  int years_;
  DayMode mode_;
  std::array<int, kQuartersPerYear> days_{};
  std::array<double, kQuartersPerYear> weights_{};
  std::array<int, kQuartersPerYear + 1> quarter_offset_{};
};

}  // namespace gridvest
