#include "cli/config_file.hpp"

#include <fstream>
#include <sstream>

#include "causalrag/error.hpp"
#include "causalrag/text.hpp"

namespace causalrag::cli {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) {
    s.remove_prefix(1);
  }
  while (!s.empty() && is_space(s.back())) {
    s.remove_suffix(1);
  }
  return s;
}

} // namespace

ConfigValues parse_config_text(std::string_view text, const std::string& source_name) {
  ConfigValues values;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError(source_name, line_no, "expected 'key = value'");
    }
    std::string key(trim(line.substr(0, eq)));
    auto value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ParseError(source_name, line_no, "empty key");
    }
    for (char& c : key) {
      c = c == '_' ? '-' : ascii_lower(c);
    }
    if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') &&
        value.back() == value.front()) {
      value = value.substr(1, value.size() - 2);
    }
    if (!values.emplace(key, std::string(value)).second) {
      throw ParseError(source_name, line_no, "duplicate key '" + key + "'");
    }
  }
  return values;
}

ConfigValues load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("cannot open config file '" + path.string() + "'");
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str(), path.string());
}

} // namespace causalrag::cli
