#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "lorhol/constructions.hpp"

namespace lorhol::cli {

using Json = nlohmann::ordered_json;

/// Sectioned key/value configuration; keys keep their file order.
class Config {
 public:
  using Section = std::vector<std::pair<std::string, std::string>>;

  static Config from_file(const std::string& path);
  static Config from_string(const std::string& text);

  bool has_section(const std::string& name) const;
  bool has(const std::string& section, const std::string& key) const;
  const Section& section(const std::string& name) const;
  std::optional<std::string> get(const std::string& section, const std::string& key) const;

  std::string get_string(const std::string& section, const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  int get_int(const std::string& section, const std::string& key, int fallback) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
  /// Whitespace or comma separated numbers.
  std::vector<double> get_list(const std::string& section, const std::string& key,
                               const std::vector<double>& fallback) const;
  /// Rows separated by ';', entries by whitespace or commas.
  std::optional<Matrix> get_matrix(const std::string& section, const std::string& key) const;

  Json echo() const;

 private:
  friend class ConfigBuilder;
  std::vector<std::pair<std::string, Section>> sections_;
};

/// Metric from the [metric] and [define] sections: kind = walker, general or a demo name.
Construction build_metric(const Config& cfg);

struct CommandResult {
  Json report;
  int exit_code = 0;
  std::string csv;  // trajectories (geodesic command only)
  std::vector<std::string> text;  // human-readable summary lines
};

CommandResult cmd_check(const Config& cfg, std::uint64_t seed);
CommandResult cmd_holonomy(const Config& cfg, std::uint64_t seed);
CommandResult cmd_geodesic(const Config& cfg, std::uint64_t seed);
CommandResult cmd_structure(const Config& cfg, std::uint64_t seed);
CommandResult cmd_complete(const Config& cfg, std::uint64_t seed);

/// Config text for one of the demo charts, used by `lorhol demo NAME`.
std::string demo_config(const std::string& name);

/// Report header fields (tool, version, command, seed, timestamp).
Json report_header(const std::string& command, std::uint64_t seed);

/// Maps library exceptions to exit codes: 2 parse/config, 3 validation, 4 numerical.
int exit_code_for(const std::exception& e);

}  // namespace lorhol::cli
