#include "oscgeo/dates.hpp"

#include <charconv>
#include <cstdio>

namespace oscgeo::dates {

namespace {

bool parse_field(std::string_view text, int& out) {
    if (text.empty()) return false;
    for (char ch : text) {
        if (ch < '0' || ch > '9') return false;
    }
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc{} && ptr == text.data() + text.size();
}

}  // namespace

std::optional<std::chrono::sys_days> parse_iso(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    int y = 0, m = 0, d = 0;
    if (!parse_field(text.substr(0, 4), y) || !parse_field(text.substr(5, 2), m) ||
        !parse_field(text.substr(8, 2), d)) {
        return std::nullopt;
    }
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                                          std::chrono::day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) return std::nullopt;
    return std::chrono::sys_days{ymd};
}

std::string format_iso(std::chrono::sys_days day) {
    const std::chrono::year_month_day ymd{day};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

int year_of(std::chrono::sys_days day) {
    return static_cast<int>(std::chrono::year_month_day{day}.year());
}

std::chrono::sys_days next_weekday(std::chrono::sys_days day) {
    do {
        day += std::chrono::days{1};
    } while (std::chrono::weekday{day} == std::chrono::Saturday ||
             std::chrono::weekday{day} == std::chrono::Sunday);
    return day;
}

}  // namespace oscgeo::dates
