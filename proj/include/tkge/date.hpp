#pragma once
// Gregorian calendar dates: validation, parsing, day arithmetic.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tkge {

struct Date {
  int year = 1970;
  int month = 1;  // 1..12
  int day = 1;    // 1..31

  friend constexpr bool operator==(const Date&, const Date&) = default;
  friend constexpr auto operator<=>(const Date&, const Date&) = default;
};

constexpr bool is_leap_year(int y) {
  return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
}

constexpr int days_in_month(int y, int m) {
  constexpr int table[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (m < 1 || m > 12) return 0;
  if (m == 2 && is_leap_year(y)) return 29;
  return table[m - 1];
}

// Four year digits keep the digit-token encoding total.
constexpr bool is_valid_date(const Date& d) {
  return d.year >= 1 && d.year <= 9999 && d.month >= 1 && d.month <= 12 &&
         d.day >= 1 && d.day <= days_in_month(d.year, d.month);
}

// Days since 1970-01-01, valid over the whole supported range.
constexpr std::int64_t day_serial(const Date& d) {
  std::int64_t y = d.year;
  const int m = d.month;
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy =
      (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
      static_cast<unsigned>(d.day) - 1u;
  const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

// Inverse of day_serial.
constexpr Date date_from_serial(std::int64_t z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned day = doy - (153 * mp + 2) / 5 + 1;
  const unsigned month = mp < 10 ? mp + 3 : mp - 9;
  return Date{static_cast<int>(y + (month <= 2)), static_cast<int>(month),
              static_cast<int>(day)};
}

inline std::string format_date(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", d.year, d.month, d.day);
  return buf;
}

namespace detail {

inline int parse_digits(std::string_view s, std::size_t& pos, int width,
                        const char* field) {
  int value = 0;
  int consumed = 0;
  while (consumed < width && pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
    value = value * 10 + (s[pos] - '0');
    ++pos;
    ++consumed;
  }
  if (consumed == 0) {
    throw std::invalid_argument(std::string("bad date: missing ") + field +
                                " in \"" + std::string(s) + "\"");
  }
  return value;
}

}  // namespace detail

// Formats use %Y (year), %m (month), %d (day) plus literal separators.
inline Date parse_date(std::string_view s, std::string_view fmt = "%Y-%m-%d") {
  Date out;
  bool saw_y = false, saw_m = false, saw_d = false;
  std::size_t pos = 0;
  for (std::size_t f = 0; f < fmt.size(); ++f) {
    if (fmt[f] == '%' && f + 1 < fmt.size()) {
      const char spec = fmt[++f];
      switch (spec) {
        case 'Y':
          out.year = detail::parse_digits(s, pos, 4, "year");
          saw_y = true;
          break;
        case 'm':
          out.month = detail::parse_digits(s, pos, 2, "month");
          saw_m = true;
          break;
        case 'd':
          out.day = detail::parse_digits(s, pos, 2, "day");
          saw_d = true;
          break;
        default:
          throw std::invalid_argument(std::string("bad date format spec %") +
                                      spec);
      }
    } else {
      if (pos >= s.size() || s[pos] != fmt[f]) {
        throw std::invalid_argument("bad date: \"" + std::string(s) +
                                    "\" does not match format \"" +
                                    std::string(fmt) + "\"");
      }
      ++pos;
    }
  }
  if (!saw_y || !saw_m || !saw_d) {
    throw std::invalid_argument("date format must contain %Y, %m and %d");
  }
  if (pos != s.size()) {
    throw std::invalid_argument("bad date: trailing characters in \"" +
                                std::string(s) + "\"");
  }
  if (!is_valid_date(out)) {
    std::string field = "day";
    if (out.month < 1 || out.month > 12) field = "month";
    if (out.year < 1 || out.year > 9999) field = "year";
    throw std::invalid_argument("invalid calendar date \"" + std::string(s) +
                                "\": bad " + field);
  }
  return out;
}

}  // namespace tkge
