#pragma once

// Configuration, output files and run manifests.

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace slowstart::io {

/// Invalid or inconsistent configuration; `key` names the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::runtime_error(message), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

/// Flat key=value configuration. Lines starting with '#' are comments; list
/// values are comma separated. Every read records the value actually used,
/// so resolved() is the full effective configuration of a run.
class Config {
 public:
  Config() = default;
  /// Only keys in `allowed` are accepted; an empty set accepts anything.
  explicit Config(std::set<std::string> allowed) : allowed_(std::move(allowed)) {}

  static Config parse(const std::string& text, std::set<std::string> allowed = {});
  static Config load(const std::filesystem::path& path, std::set<std::string> allowed = {});

  /// Later calls override earlier ones (flags after the config file).
  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const { return values_.count(key) != 0; }

  double get_double(const std::string& key, double fallback);
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback);
  bool get_bool(const std::string& key, bool fallback);
  std::string get_string(const std::string& key, const std::string& fallback);
  std::vector<double> get_list(const std::string& key, const std::vector<double>& fallback);

  const std::map<std::string, std::string>& values() const { return values_; }
  const std::map<std::string, std::string>& resolved() const { return resolved_; }
  /// Records a derived setting that is not read from a key.
  void note(const std::string& key, const std::string& value) { resolved_[key] = value; }

 private:
  std::set<std::string> allowed_;
  std::map<std::string, std::string> values_;
  std::map<std::string, std::string> resolved_;
};

/// The keys understood by the command-line tool.
const std::set<std::string>& config_keys();

/// Shortest text that reads back to the same double (17 significant digits).
std::string format_double(double x);
std::string format_list(const std::vector<double>& xs);

std::string sha256_hex(const std::string& bytes);
std::string read_file(const std::filesystem::path& path);

/// Writes through a temporary file in the same directory and renames it.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// Files of one run. Each write is atomic and checksummed; the manifest is
/// written last, listing every other file.
class OutputSet {
 public:
  explicit OutputSet(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }
  void write(const std::string& name, const std::string& content);
  const std::vector<std::pair<std::string, std::string>>& files() const { return files_; }

  /// manifest.json with tool version, command, seed, resolved config,
  /// checksums and wall-clock duration.
  void write_manifest(const std::string& command, const std::map<std::string, std::string>& config,
                      double seconds);

 private:
  std::filesystem::path dir_;
  std::vector<std::pair<std::string, std::string>> files_;  // name, sha256
};

/// Text of a simple CSV table; every row must have the header's width.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);
  void row(const std::vector<std::string>& cells);
  const std::string& text() const { return text_; }

 private:
  std::size_t width_;
  std::string text_;
};

}  // namespace slowstart::io
