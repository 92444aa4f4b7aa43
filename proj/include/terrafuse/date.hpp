#pragma once

#include <chrono>
#include <compare>
#include <string>
#include <string_view>

namespace terrafuse {

/// Calendar day, exchanged as ISO-8601 `YYYY-MM-DD`.
class Date {
 public:
  Date() = default;
  explicit Date(std::chrono::sys_days days) : days_(days) {}

  /// Throws Error{Parse} on anything but a valid `YYYY-MM-DD`.
  static Date parse(std::string_view iso);

  std::string iso() const;
  std::chrono::sys_days days() const noexcept { return days_; }
  Date plus_days(long n) const { return Date(days_ + std::chrono::days(n)); }
  long days_until(const Date& other) const {
    return static_cast<long>((other.days_ - days_).count());
  }

  friend auto operator<=>(const Date&, const Date&) = default;

 private:
  std::chrono::sys_days days_{};
};

}  // namespace terrafuse
