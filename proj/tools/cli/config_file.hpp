#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace causalrag::cli {

/// Flat `key = value` file. '#' starts a comment line, surrounding quotes on
/// values are stripped and '_' in keys is read as '-', so `max_chunk_chars`
/// and `max-chunk-chars` name the same flag.
using ConfigValues = std::map<std::string, std::string>;

ConfigValues parse_config_text(std::string_view text, const std::string& source_name);
ConfigValues load_config_file(const std::filesystem::path& path);

} // namespace causalrag::cli
