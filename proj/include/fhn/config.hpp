#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace fhn {

/// Line-oriented configuration: `key = value` entries grouped by optional
/// `[section]` headers; `#` starts a comment. Keys are flattened to
/// "section.key". Serialization is canonical (sorted keys), so equal configs
/// serialize and hash identically.
class Config {
 public:
  Config() = default;

  [[nodiscard]] static Config parse(std::string_view text);
  [[nodiscard]] static Config load(const std::filesystem::path& path);

  void set(const std::string& key, std::string value);
  template <typename T>
  void set_value(const std::string& key, const T& value);

  [[nodiscard]] bool has(const std::string& key) const;
  [[nodiscard]] std::optional<std::string> get(const std::string& key) const;

  [[nodiscard]] std::string get_string(const std::string& key, std::string fallback) const;
  [[nodiscard]] double get_double(const std::string& key, double fallback) const;
  [[nodiscard]] std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  [[nodiscard]] std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;
  [[nodiscard]] bool get_bool(const std::string& key, bool fallback) const;

  /// Canonical text form: keys sorted, one `key = value` per line.
  [[nodiscard]] std::string serialize() const;

  /// FNV-1a hash of the canonical form.
  [[nodiscard]] std::uint64_t hash() const;

  [[nodiscard]] const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

}  // namespace fhn
