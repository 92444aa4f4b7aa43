#include "terrafuse/date.hpp"

#include <cstdio>

#include "terrafuse/error.hpp"

namespace terrafuse {

Date Date::parse(std::string_view iso) {
  auto digits = [&](std::size_t from, std::size_t n) {
    int v = 0;
    for (std::size_t i = from; i < from + n; ++i) {
      if (iso[i] < '0' || iso[i] > '9') return -1;
      v = v * 10 + (iso[i] - '0');
    }
    return v;
  };
  if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-')
    throw Error(ErrorKind::Parse, "expected YYYY-MM-DD, got '" + std::string(iso) + "'");
  int y = digits(0, 4), m = digits(5, 2), d = digits(8, 2);
  std::chrono::year_month_day ymd{std::chrono::year(y), std::chrono::month(static_cast<unsigned>(m)),
                                  std::chrono::day(static_cast<unsigned>(d))};
  if (y < 0 || m < 0 || d < 0 || !ymd.ok())
    throw Error(ErrorKind::Parse, "invalid date '" + std::string(iso) + "'");
  return Date(std::chrono::sys_days(ymd));
}

std::string Date::iso() const {
  std::chrono::year_month_day ymd(days_);
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

}  // namespace terrafuse
