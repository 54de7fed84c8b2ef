#include "slowstart/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include <openssl/evp.h>

#include "json.hpp"

#ifndef SLOWSTART_VERSION
#define SLOWSTART_VERSION "0.0.0"
#endif

namespace slowstart::io {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double value = 0.0;
  const auto* end = t.data() + t.size();
  const auto [ptr, ec] = std::from_chars(t.data(), end, value);
  if (t.empty() || ec != std::errc() || ptr != end) {
    throw ConfigError(key, key + ": expected a number, got '" + text + "'");
  }
  return value;
}

}  // namespace

const std::set<std::string>& config_keys() {
  static const std::set<std::string> keys{
      "lambda", "window_lo", "window_hi", "horizon", "palm",      "seed",      "replicas",
      "times",  "scales_L",  "grid_step", "dt",      "extent_lo", "extent_hi", "out_dir"};
  return keys;
}

Config Config::parse(const std::string& text, std::set<std::string> allowed) {
  Config config(std::move(allowed));
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("", "line " + std::to_string(number) + ": expected key=value");
    }
    config.set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return config;
}

Config Config::load(const std::filesystem::path& path, std::set<std::string> allowed) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", "cannot read config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), std::move(allowed));
}

void Config::set(const std::string& key, const std::string& value) {
  if (!allowed_.empty() && allowed_.count(key) == 0) {
    throw ConfigError(key, "unknown config key '" + key + "'");
  }
  values_[key] = value;
}

double Config::get_double(const std::string& key, double fallback) {
  const auto it = values_.find(key);
  const double v = it == values_.end() ? fallback : parse_double(key, it->second);
  resolved_[key] = format_double(v);
  return v;
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) {
  const auto it = values_.find(key);
  std::uint64_t v = fallback;
  if (it != values_.end()) {
    const std::string t = trim(it->second);
    const auto* end = t.data() + t.size();
    const auto [ptr, ec] = std::from_chars(t.data(), end, v);
    if (t.empty() || ec != std::errc() || ptr != end) {
      throw ConfigError(key, key + ": expected a non-negative integer, got '" + it->second + "'");
    }
  }
  resolved_[key] = std::to_string(v);
  return v;
}

bool Config::get_bool(const std::string& key, bool fallback) {
  const auto it = values_.find(key);
  bool v = fallback;
  if (it != values_.end()) {
    const std::string t = trim(it->second);
    if (t == "true" || t == "1" || t == "yes") {
      v = true;
    } else if (t == "false" || t == "0" || t == "no") {
      v = false;
    } else {
      throw ConfigError(key, key + ": expected true or false, got '" + it->second + "'");
    }
  }
  resolved_[key] = v ? "true" : "false";
  return v;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) {
  const auto it = values_.find(key);
  const std::string v = it == values_.end() ? fallback : it->second;
  resolved_[key] = v;
  return v;
}

std::vector<double> Config::get_list(const std::string& key, const std::vector<double>& fallback) {
  const auto it = values_.find(key);
  std::vector<double> v = fallback;
  if (it != values_.end()) {
    v.clear();
    std::istringstream in(it->second);
    std::string item;
    while (std::getline(in, item, ',')) {
      if (trim(item).empty()) continue;
      v.push_back(parse_double(key, item));
    }
    if (v.empty()) throw ConfigError(key, key + ": expected a comma-separated list of numbers");
  }
  resolved_[key] = format_list(v);
  return v;
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string format_list(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    if (k > 0) out += ',';
    out += format_double(xs[k]);
  }
  return out;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int k = 0; k < len; ++k) {
    out += hex[digest[k] >> 4];
    out += hex[digest[k] & 15];
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  const auto tmp = path.parent_path() /
                   ("." + path.filename().string() + ".tmp." + std::to_string(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot rename into " + path.string() + ": " + ec.message());
  }
}

OutputSet::OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw std::runtime_error("cannot create " + dir_.string() + ": " + ec.message());
  // A stale manifest would vouch for files this run is about to replace.
  std::filesystem::remove(dir_ / "manifest.json", ec);
}

void OutputSet::write(const std::string& name, const std::string& content) {
  write_atomic(dir_ / name, content);
  files_.emplace_back(name, sha256_hex(content));
}

void OutputSet::write_manifest(const std::string& command,
                               const std::map<std::string, std::string>& config, double seconds) {
  nlohmann::ordered_json m;
  m["tool"] = "slowstart";
  m["version"] = SLOWSTART_VERSION;
  m["command"] = command;
  const auto seed = config.find("seed");
  m["seed"] = seed == config.end() ? "" : seed->second;
  m["config"] = config;
  nlohmann::ordered_json files = nlohmann::ordered_json::array();
  for (const auto& [name, sum] : files_) files.push_back({{"name", name}, {"sha256", sum}});
  m["files"] = files;
  m["duration_seconds"] = seconds;
  write_atomic(dir_ / "manifest.json", m.dump(2) + "\n");
}

CsvTable::CsvTable(std::vector<std::string> header) : width_(header.size()) { row(header); }

void CsvTable::row(const std::vector<std::string>& cells) {
  if (cells.size() != width_) throw std::logic_error("csv row width mismatch");
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (k > 0) text_ += ',';
    text_ += cells[k];
  }
  text_ += '\n';
}

}  // namespace slowstart::io
