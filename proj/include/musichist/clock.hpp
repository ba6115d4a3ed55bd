// Copyright 2026 The musichist Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MUSICHIST_CLOCK_HPP
#define MUSICHIST_CLOCK_HPP

#include <chrono>
#include <cstdio>
#include <string>

#include "musichist/core.hpp"

namespace musichist {

inline constexpr Timestamp kSecondsPerDay = 86400;

/// Wall-clock view of epoch seconds under a fixed UTC offset.
struct LocalClock {
  int utc_offset_minutes = 0;

  Timestamp local_seconds(Timestamp t) const { return t + Timestamp{utc_offset_minutes} * 60; }

  /// Local day number (days since 1970-01-01, floor division).
  Timestamp day_index(Timestamp t) const {
    auto s = local_seconds(t);
    return s >= 0 ? s / kSecondsPerDay : -((-s + kSecondsPerDay - 1) / kSecondsPerDay);
  }

  int hour_of_day(Timestamp t) const {
    auto s = local_seconds(t) - day_index(t) * kSecondsPerDay;
    return static_cast<int>(s / 3600);
  }

  /// Seconds into the local day, as a fraction of an hour added to the hour.
  double fractional_hour(Timestamp t) const {
    auto s = local_seconds(t) - day_index(t) * kSecondsPerDay;
    return static_cast<double>(s) / 3600.0;
  }

  static std::string date_string(Timestamp day) {
    using namespace std::chrono;
    year_month_day ymd{sys_days{days{day}}};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
  }
};

}  // namespace musichist

#endif  // MUSICHIST_CLOCK_HPP
