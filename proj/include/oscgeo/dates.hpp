#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace oscgeo::dates {

/// Parses a strict ISO-8601 calendar date (yyyy-mm-dd).
std::optional<std::chrono::sys_days> parse_iso(std::string_view text);

std::string format_iso(std::chrono::sys_days day);

int year_of(std::chrono::sys_days day);

/// Next Monday-to-Friday day strictly after `day`.
std::chrono::sys_days next_weekday(std::chrono::sys_days day);

}  // namespace oscgeo::dates
