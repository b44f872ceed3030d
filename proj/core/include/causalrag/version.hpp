#pragma once

#include <string_view>

namespace causalrag {

std::string_view library_version() noexcept;

} // namespace causalrag
