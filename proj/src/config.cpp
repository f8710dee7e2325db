#include "fhn/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "fhn/io.hpp"

namespace fhn {

namespace {

std::string_view trim(std::string_view s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) return {};
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

Config Config::parse(std::string_view text) {
  Config config;
  std::string section;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;

    const auto hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        throw std::invalid_argument("config line " + std::to_string(line_no) +
                                    ": malformed section header");
      }
      section = std::string(trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected key = value");
    }
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": empty key");
    }
    const std::string full_key =
        section.empty() ? std::string(key) : section + "." + std::string(key);
    config.entries_[full_key] = std::string(value);
  }
  return config;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

void Config::set(const std::string& key, std::string value) {
  entries_[key] = std::move(value);
}

template <typename T>
void Config::set_value(const std::string& key, const T& value) {
  if constexpr (std::is_same_v<T, double>) {
    entries_[key] = format_g17(value);
  } else if constexpr (std::is_same_v<T, bool>) {
    entries_[key] = value ? "true" : "false";
  } else if constexpr (std::is_same_v<T, std::string>) {
    entries_[key] = value;
  } else {
    entries_[key] = std::to_string(value);
  }
}

template void Config::set_value<double>(const std::string&, const double&);
template void Config::set_value<bool>(const std::string&, const bool&);
template void Config::set_value<int>(const std::string&, const int&);
template void Config::set_value<std::int64_t>(const std::string&, const std::int64_t&);
template void Config::set_value<std::uint64_t>(const std::string&, const std::uint64_t&);
template void Config::set_value<std::string>(const std::string&, const std::string&);

bool Config::has(const std::string& key) const { return entries_.count(key) != 0; }

std::optional<std::string> Config::get(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::string Config::get_string(const std::string& key, std::string fallback) const {
  return get(key).value_or(std::move(fallback));
}

double Config::get_double(const std::string& key, double fallback) const {
  const auto raw = get(key);
  if (!raw) return fallback;
  try {
    std::size_t used = 0;
    const double value = std::stod(*raw, &used);
    if (used != raw->size()) throw std::invalid_argument("trailing characters");
    return value;
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "' is not a number: " + *raw);
  }
}

std::int64_t Config::get_int(const std::string& key, std::int64_t fallback) const {
  const auto raw = get(key);
  if (!raw) return fallback;
  std::int64_t value = 0;
  const auto [ptr, ec] = std::from_chars(raw->data(), raw->data() + raw->size(), value);
  if (ec != std::errc{} || ptr != raw->data() + raw->size()) {
    throw std::invalid_argument("config key '" + key + "' is not an integer: " + *raw);
  }
  return value;
}

std::uint64_t Config::get_uint(const std::string& key, std::uint64_t fallback) const {
  const auto raw = get(key);
  if (!raw) return fallback;
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(raw->data(), raw->data() + raw->size(), value);
  if (ec != std::errc{} || ptr != raw->data() + raw->size()) {
    throw std::invalid_argument("config key '" + key + "' is not an unsigned integer: " + *raw);
  }
  return value;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  const auto raw = get(key);
  if (!raw) return fallback;
  if (*raw == "true" || *raw == "1" || *raw == "yes") return true;
  if (*raw == "false" || *raw == "0" || *raw == "no") return false;
  throw std::invalid_argument("config key '" + key + "' is not a boolean: " + *raw);
}

std::string Config::serialize() const {
  std::string out;
  for (const auto& [key, value] : entries_) {  // std::map iterates sorted
    out += key;
    out += " = ";
    out += value;
    out += '\n';
  }
  return out;
}

std::uint64_t Config::hash() const {
  // FNV-1a, 64-bit.
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const char c : serialize()) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace fhn
