#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace plantkg::util {

// Milliseconds since the Unix epoch, UTC.
using TimestampMs = std::int64_t;

// Parses "YYYY-MM-DDThh:mm:ss(.fff)?Z". Returns nullopt on malformed input.
std::optional<TimestampMs> parse_iso8601(std::string_view text);

// Formats with millisecond precision: "2024-01-01T00:00:00.000Z".
std::string format_iso8601(TimestampMs t);

}  // namespace plantkg::util
