#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

// Deterministic text I/O: 17-significant-digit float formatting (round-trip
// exact for doubles), CSV tables, flat key=value config files, FNV-1a content
// digests, and atomic file writes (tmp + rename).

namespace cyclelab::io {

// Shortest-of-17 is not used; a fixed %.17g keeps bytes identical across
// writers and is still parse-exact.
std::string format_double(double v);
std::string format_int(long long v);

struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> cells);
  std::string serialize() const;  // \n line endings, no trailing blank line
  static Csv parse(const std::string& text);
};

// Flat config: one key=value per line, '#' starts a comment, blank lines
// ignored, keys may not repeat. Values stay strings until typed access.
class Config {
 public:
  static Config parse(const std::string& text);
  static Config load(const std::string& path);

  bool has(const std::string& key) const;
  std::string get(const std::string& key) const;  // throws if missing
  std::string get_or(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double_or(const std::string& key, double fallback) const;
  long long get_int(const std::string& key) const;
  long long get_int_or(const std::string& key, long long fallback) const;
  bool get_bool_or(const std::string& key, bool fallback) const;

  void set(const std::string& key, const std::string& value);

  // Keys in sorted order, for manifests and error messages.
  std::vector<std::pair<std::string, std::string>> items() const;

  // The keys actually read through any get* accessor; lets a caller reject
  // configs containing unknown keys.
  std::vector<std::string> unused_keys() const;

 private:
  std::map<std::string, std::string> values_;
  mutable std::map<std::string, bool> touched_;
};

// 64-bit FNV-1a over the raw bytes, rendered as 16 lowercase hex digits.
std::uint64_t fnv1a(const std::string& bytes);
std::string hex_digest(const std::string& bytes);

// Writes to <path>.tmp.<pid> then renames over <path>. Throws
// std::runtime_error on any failure; never leaves a partial target.
void write_file_atomic(const std::string& path, const std::string& bytes);

std::string read_file(const std::string& path);

}  // namespace cyclelab::io
