#include "maskwatch/date.hpp"

#include <charconv>
#include <cstdio>

#include "maskwatch/error.hpp"

namespace maskwatch {

namespace chr = std::chrono;

Date::Date(int y, unsigned m, unsigned d) {
    chr::year_month_day ymd{chr::year{y}, chr::month{m}, chr::day{d}};
    if (!ymd.ok()) throw DomainError("invalid calendar date");
    *this = Date(std::chrono::sys_days{ymd});
}

std::optional<Date> Date::parse(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    auto num = [&](std::size_t pos, std::size_t len, int& out) {
        auto first = text.data() + pos;
        auto [ptr, ec] = std::from_chars(first, first + len, out);
        return ec == std::errc{} && ptr == first + len;
    };
    int y = 0, m = 0, d = 0;
    if (!num(0, 4, y) || !num(5, 2, m) || !num(8, 2, d)) return std::nullopt;
    if (m < 1 || d < 1) return std::nullopt;
    chr::year_month_day ymd{chr::year{y}, chr::month{static_cast<unsigned>(m)}, chr::day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) return std::nullopt;
    return Date(std::chrono::sys_days{ymd});
}

std::string Date::str() const {
    chr::year_month_day ymd{sys_days()};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", int(ymd.year()), unsigned(ymd.month()),
                  unsigned(ymd.day()));
    return buf;
}

int Date::year() const { return int(chr::year_month_day{sys_days()}.year()); }
unsigned Date::month() const { return unsigned(chr::year_month_day{sys_days()}.month()); }
unsigned Date::day() const { return unsigned(chr::year_month_day{sys_days()}.day()); }

Date Date::first_of_month() const {
    chr::year_month_day ymd{sys_days()};
    return Date(std::chrono::sys_days{ymd.year() / ymd.month() / chr::day{1}});
}

Date Date::week_start(WeekStart convention) const {
    // c_encoding: Sunday = 0 .. Saturday = 6
    const unsigned wd = chr::weekday{sys_days()}.c_encoding();
    const unsigned back = convention == WeekStart::sunday ? wd : (wd + 6) % 7;
    return *this - static_cast<long>(back);
}

} // namespace maskwatch
