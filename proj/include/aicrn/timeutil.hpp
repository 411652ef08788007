// Copyright 2026 The AICRN Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef AICRN_TIMEUTIL_HPP_
#define AICRN_TIMEUTIL_HPP_

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace aicrn {

namespace detail {

// Proleptic Gregorian calendar conversions (H. Hinnant's algorithms).
inline std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const auto yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const auto doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp < 10 ? mp + 3 : mp - 9;
  y += m <= 2;
}

}  // namespace detail

/// Formats Unix seconds as "YYYY-MM-DDTHH:MM:SSZ".
inline std::string format_iso8601(std::int64_t unix_seconds) {
  std::int64_t days = unix_seconds / 86400;
  std::int64_t rem = unix_seconds % 86400;
  if (rem < 0) {
    rem += 86400;
    --days;
  }
  std::int64_t y;
  unsigned m, d;
  detail::civil_from_days(days, y, m, d);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02uT%02lld:%02lld:%02lldZ", static_cast<long long>(y), m, d,
                static_cast<long long>(rem / 3600), static_cast<long long>(rem / 60 % 60),
                static_cast<long long>(rem % 60));
  return buf;
}

/// Parses "YYYY-MM-DD", "YYYY-MM-DDTHH:MM[:SS[.fff]]" with an optional "Z" or
/// "+HH:MM" offset into Unix seconds. Returns nullopt for anything else.
inline std::optional<double> parse_iso8601(std::string_view s) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0;
  double sec = 0.0;
  char tail[16] = {0};
  const std::string str(s);
  int n = std::sscanf(str.c_str(), "%4d-%2d-%2d", &y, &mo, &d);
  if (n != 3) return std::nullopt;
  std::size_t pos = 10;
  if (str.size() > pos) {
    if (str[pos] != 'T' && str[pos] != ' ') return std::nullopt;
    int consumed = 0;
    n = std::sscanf(str.c_str() + pos + 1, "%2d:%2d%n", &h, &mi, &consumed);
    if (n != 2) return std::nullopt;
    pos += 1 + static_cast<std::size_t>(consumed);
    if (pos < str.size() && str[pos] == ':') {
      consumed = 0;
      if (std::sscanf(str.c_str() + pos + 1, "%lf%n", &sec, &consumed) != 1) return std::nullopt;
      pos += 1 + static_cast<std::size_t>(consumed);
    }
    double offset = 0.0;
    if (pos < str.size()) {
      const std::string rest = str.substr(pos);
      if (rest == "Z") {
        offset = 0.0;
      } else if ((rest[0] == '+' || rest[0] == '-') && rest.size() == 6) {
        int oh = 0, om = 0;
        if (std::sscanf(rest.c_str() + 1, "%2d:%2d%15s", &oh, &om, tail) != 2) return std::nullopt;
        offset = (rest[0] == '+' ? 1.0 : -1.0) * (oh * 3600.0 + om * 60.0);
      } else {
        return std::nullopt;
      }
    }
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || sec >= 61.0) return std::nullopt;
    return static_cast<double>(detail::days_from_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d))) * 86400.0 +
           h * 3600.0 + mi * 60.0 + sec - offset;
  }
  if (mo < 1 || mo > 12 || d < 1 || d > 31) return std::nullopt;
  return static_cast<double>(detail::days_from_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d))) * 86400.0;
}

}  // namespace aicrn

#endif  // AICRN_TIMEUTIL_HPP_
