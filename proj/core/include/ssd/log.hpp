#pragma once

#include <string_view>

namespace ssd::log {

enum class Level { debug, info, warn, error, off };

// Logs go to stderr. In JSON mode each line is an object with ts, level and
// msg fields.
void configure(Level level, bool json);

void debug(std::string_view msg);
void info(std::string_view msg);
void warn(std::string_view msg);
void error(std::string_view msg);

}  // namespace ssd::log
