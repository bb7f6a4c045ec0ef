#include "heatrl/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "heatrl/csv.hpp"
#include "heatrl/errors.hpp"

namespace heatrl {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::string_view text, const std::string& source) {
  KeyValueConfig cfg;
  cfg.source_ = source;
  std::string section;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view raw = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ParseError(source + ":" + std::to_string(line_no) + ": unterminated section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError(source + ":" + std::to_string(line_no) + ": expected key = value");
    std::string key = trim(std::string_view(line).substr(0, eq));
    if (key.empty()) throw ParseError(source + ":" + std::to_string(line_no) + ": empty key");
    if (!section.empty()) key = section + "." + key;
    cfg.values_[key] = trim(std::string_view(line).substr(eq + 1));
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

void KeyValueConfig::set(const std::string& key, const std::string& value) { values_[key] = value; }

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  used_.insert(key);
  return it->second;
}

std::optional<double> KeyValueConfig::get_double(const std::string& key) const {
  auto v = get(key);
  if (!v) return std::nullopt;
  double out = 0;
  if (!csv::parse_double(*v, out)) throw ParseError(source_ + ": " + key + " is not a number: " + *v);
  return out;
}

std::optional<long long> KeyValueConfig::get_int(const std::string& key) const {
  auto v = get(key);
  if (!v) return std::nullopt;
  long long out = 0;
  if (!csv::parse_long(*v, out)) throw ParseError(source_ + ": " + key + " is not an integer: " + *v);
  return out;
}

std::optional<bool> KeyValueConfig::get_bool(const std::string& key) const {
  auto v = get(key);
  if (!v) return std::nullopt;
  std::string s = *v;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
  if (s == "0" || s == "false" || s == "no" || s == "off") return false;
  throw ParseError(source_ + ": " + key + " is not a boolean: " + *v);
}

void KeyValueConfig::read(const std::string& key, double& out) const {
  if (auto v = get_double(key)) out = *v;
}

void KeyValueConfig::read(const std::string& key, int& out) const {
  if (auto v = get_int(key)) out = static_cast<int>(*v);
}

void KeyValueConfig::read(const std::string& key, std::size_t& out) const {
  if (auto v = get_int(key)) {
    if (*v < 0) throw ParseError(source_ + ": " + key + " must be non-negative");
    out = static_cast<std::size_t>(*v);
  }
}

void KeyValueConfig::read(const std::string& key, bool& out) const {
  if (auto v = get_bool(key)) out = *v;
}

void KeyValueConfig::read(const std::string& key, std::string& out) const {
  if (auto v = get(key)) out = *v;
}

std::vector<std::string> KeyValueConfig::unused_keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_)
    if (!used_.count(k)) out.push_back(k);
  return out;
}

}  // namespace heatrl
