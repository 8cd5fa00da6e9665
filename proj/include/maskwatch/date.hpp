#pragma once

#include <chrono>
#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace maskwatch {

enum class WeekStart { monday, sunday };

/// Calendar day (proleptic Gregorian), stored as days since 1970-01-01.
class Date {
public:
    constexpr Date() = default;
    constexpr explicit Date(std::chrono::sys_days d) : days_(d.time_since_epoch().count()) {}
    Date(int y, unsigned m, unsigned d);

    /// Strict YYYY-MM-DD; returns nullopt for anything else, including 2020-13-40.
    static std::optional<Date> parse(std::string_view text);

    std::string str() const;

    int year() const;
    unsigned month() const;
    unsigned day() const;

    Date first_of_month() const;
    Date week_start(WeekStart convention) const;

    constexpr long serial() const noexcept { return days_; }
    std::chrono::sys_days sys_days() const { return std::chrono::sys_days{std::chrono::days{days_}}; }

    friend constexpr Date operator+(Date d, long n) noexcept { d.days_ += n; return d; }
    friend constexpr Date operator-(Date d, long n) noexcept { d.days_ -= n; return d; }
    friend constexpr long operator-(Date a, Date b) noexcept { return a.days_ - b.days_; }
    friend constexpr auto operator<=>(Date, Date) = default;

private:
    long days_ = 0;
};

} // namespace maskwatch
