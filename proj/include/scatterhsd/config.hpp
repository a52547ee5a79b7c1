#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "scatterhsd/scatter.hpp"
#include "scatterhsd/trainer.hpp"

namespace scatterhsd::config {

/// Flat "section.key" -> value store read from a key=value file with [section] headers.
/// Keys outside any section are top-level. '#' and ';' start comments.
class Config {
 public:
  /// Every key accepted by the parser, with its default rendering.
  static const std::map<std::string, std::string>& defaults();

  static Config parse(std::istream& in);
  static Config load(const std::filesystem::path& path);

  /// "section.key=value"; throws InvalidInput for unknown keys or missing '='.
  void apply_override(const std::string& assignment);
  void set(const std::string& key, const std::string& value);

  const std::string& get(const std::string& key) const;
  double get_double(const std::string& key) const;
  std::uint64_t get_uint(const std::string& key) const;
  bool get_bool(const std::string& key) const;

  /// Effective configuration in the same file format; parsing it back yields this config.
  void dump(std::ostream& out) const;

  scatter::ScatterConfig scatter() const;
  trainer::ModelConfig model() const;
  trainer::TrainConfig train() const;

  bool operator==(const Config&) const = default;

 private:
  std::map<std::string, std::string> values_ = defaults();
};

std::vector<std::size_t> parse_size_list(const std::string& text);

}  // namespace scatterhsd::config
