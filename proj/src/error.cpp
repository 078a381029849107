#include "fedm/error.hpp"

#include <fmt/format.h>

namespace fedm {

ParseError::ParseError(const std::string& message, int line, int column)
    : Error(fmt::format("line {}, column {}: {}", line, column, message)),
      detail_(message),
      line_(line),
      column_(column)
{
}

} // namespace fedm
