#ifndef POLARCBO_LOG_HPP
#define POLARCBO_LOG_HPP

#include <functional>
#include <string>

namespace polarcbo {

using WarnHandler = std::function<void(const std::string&)>;

/// Replaces the warning sink (default writes to stderr). Pass nullptr to
/// silence warnings. Returns the previous handler.
WarnHandler set_warn_handler(WarnHandler handler);

void warn(const std::string& message);

}  // namespace polarcbo

#endif
