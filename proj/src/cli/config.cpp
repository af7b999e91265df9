#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "lorhol/cli.hpp"

namespace lorhol::cli {

namespace {

namespace pt = boost::property_tree;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  std::string out = s.substr(b, e - b + 1);
  if (out.size() >= 2 && (out.front() == '"' || out.front() == '\'') && out.back() == out.front())
    out = out.substr(1, out.size() - 2);
  return out;
}

ParseError config_error(const std::string& what) { return ParseError(ParseError::Kind::Config, 0, what); }

std::vector<double> parse_numbers(const std::string& text, const std::string& where) {
  std::string s = text;
  std::replace(s.begin(), s.end(), ',', ' ');
  std::istringstream in(s);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) {
    try {
      std::size_t used = 0;
      const double v = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      out.push_back(v);
    } catch (const std::exception&) {
      throw config_error("not a number in " + where + ": '" + tok + "'");
    }
  }
  return out;
}

}  // namespace

class ConfigBuilder {
 public:
  static Config build(const pt::ptree& tree) {
    Config cfg;
    for (const auto& [name, sec] : tree) {
      if (sec.empty()) throw config_error("key '" + name + "' outside of a section");
      Config::Section entries;
      for (const auto& [key, value] : sec) entries.emplace_back(key, trim(value.data()));
      cfg.sections_.emplace_back(name, std::move(entries));
    }
    return cfg;
  }
};

Config Config::from_string(const std::string& text) {
  std::istringstream in(text);
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError(ParseError::Kind::Config, e.line(), "config: " + e.message());
  }
  return ConfigBuilder::build(tree);
}

Config Config::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return from_string(buf.str());
}

bool Config::has_section(const std::string& name) const {
  return std::any_of(sections_.begin(), sections_.end(), [&](const auto& s) { return s.first == name; });
}

const Config::Section& Config::section(const std::string& name) const {
  static const Section empty;
  for (const auto& s : sections_)
    if (s.first == name) return s.second;
  return empty;
}

std::optional<std::string> Config::get(const std::string& sec, const std::string& key) const {
  for (const auto& [k, v] : section(sec))
    if (k == key) return v;
  return std::nullopt;
}

bool Config::has(const std::string& sec, const std::string& key) const { return get(sec, key).has_value(); }

std::string Config::get_string(const std::string& sec, const std::string& key, const std::string& fallback) const {
  return get(sec, key).value_or(fallback);
}

double Config::get_double(const std::string& sec, const std::string& key, double fallback) const {
  const auto v = get(sec, key);
  if (!v) return fallback;
  const auto nums = parse_numbers(*v, "[" + sec + "] " + key);
  if (nums.size() != 1) throw config_error("[" + sec + "] " + key + " must be a single number");
  return nums[0];
}

int Config::get_int(const std::string& sec, const std::string& key, int fallback) const {
  const auto v = get(sec, key);
  if (!v) return fallback;
  const double d = get_double(sec, key, 0.0);
  if (d != static_cast<double>(static_cast<int>(d))) throw config_error("[" + sec + "] " + key + " must be an integer");
  return static_cast<int>(d);
}

bool Config::get_bool(const std::string& sec, const std::string& key, bool fallback) const {
  const auto v = get(sec, key);
  if (!v) return fallback;
  std::string s = *v;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (s == "true" || s == "yes" || s == "1" || s == "on") return true;
  if (s == "false" || s == "no" || s == "0" || s == "off") return false;
  throw config_error("[" + sec + "] " + key + " must be a boolean");
}

std::vector<double> Config::get_list(const std::string& sec, const std::string& key,
                                     const std::vector<double>& fallback) const {
  const auto v = get(sec, key);
  if (!v) return fallback;
  return parse_numbers(*v, "[" + sec + "] " + key);
}

std::optional<Matrix> Config::get_matrix(const std::string& sec, const std::string& key) const {
  const auto v = get(sec, key);
  if (!v) return std::nullopt;
  std::vector<std::vector<double>> rows;
  std::istringstream in(*v);
  std::string row;
  while (std::getline(in, row, ';')) {
    if (trim(row).empty()) continue;
    rows.push_back(parse_numbers(row, "[" + sec + "] " + key));
  }
  if (rows.empty()) throw config_error("[" + sec + "] " + key + " is an empty matrix");
  Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size()) throw config_error("[" + sec + "] " + key + " has ragged rows");
    for (std::size_t j = 0; j < rows[i].size(); ++j) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return out;
}

Json Config::echo() const {
  Json out = Json::object();
  for (const auto& [name, sec] : sections_) {
    Json s = Json::object();
    for (const auto& [k, v] : sec) s[k] = v;
    out[name] = s;
  }
  return out;
}

}  // namespace lorhol::cli
