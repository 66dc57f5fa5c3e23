#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace plantkg::util {

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

// Splits on runs of whitespace; no empty fields.
std::vector<std::string> split_ws(std::string_view s);

bool starts_with(std::string_view s, std::string_view prefix);
bool ends_with(std::string_view s, std::string_view suffix);

// Lowercases ASCII only.
std::string to_lower(std::string_view s);

bool is_integer(std::string_view s);
bool is_decimal(std::string_view s);  // optional sign, digits, optional fraction

// Shortest round-trip formatting of a double (std::to_chars).
std::string format_double(double v);

// Fixed-point formatting with `decimals` digits after the point.
std::string format_fixed(double v, int decimals);

}  // namespace plantkg::util
