#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace mobisim {

/// Shortest decimal string that parses back to the same double.
/// Always uses '.' and never groups digits, regardless of locale.
std::string format_double(double v);

/// Locale-independent parse of the full string; nullopt on any trailing junk.
std::optional<double> parse_double(std::string_view text);

} // namespace mobisim
