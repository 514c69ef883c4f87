#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "ht/census.hpp"

namespace ht {

inline constexpr int kCacheVersion = 1;
inline constexpr const char* kCsvHeader = "d,h,invariants,k3_count,k5_count,k7_count,k9_count";
inline constexpr const char* kCacheRootEnv = "HT_CACHE_ROOT";

struct RunConfig {
  std::string command;
  std::map<std::string, std::string> values;

  bool has(const std::string& key) const { return values.count(key) != 0; }
  std::string get(const std::string& key, const std::string& fallback) const;
  i64 get_int(const std::string& key, i64 fallback, i64 lo, i64 hi) const;
  double get_double(const std::string& key, double fallback) const;
  Rational get_rational(const std::string& key, const Rational& fallback) const;
};

// key=value lines; '#' starts a comment
RunConfig parse_config_text(const std::string& text);
// argv-style tokens: the command, then key=value pairs. config=<file> is read
// first and the remaining pairs override it.
RunConfig parse_args(const std::vector<std::string>& args);
std::string serialize_config(const RunConfig& cfg);
// rejects unknown commands and keys
void validate_config(const RunConfig& cfg);

// 0 success, 1 verification failure, 2 configuration error
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int run_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

void write_atomic(const std::string& path, const std::string& content);

struct CacheEntry {
  i64 d = 0;
  i64 h = 0;
  bool has_invariants = false;
  std::vector<i64> invariants;
  std::array<i64, 4> counts{};  // k = 3, 5, 7, 9

  bool operator==(const CacheEntry&) const = default;
};

CacheEntry cache_entry_from(const TorsionProfile& p);
std::string format_cache_line(const CacheEntry& e);
CacheEntry parse_cache_line(const std::string& line);

struct CacheReadResult {
  std::vector<CacheEntry> entries;
  std::vector<std::string> warnings;
  bool truncated = false;
};

// appends entries, writing the version header to a new file
void cache_write(const std::string& path, const std::vector<CacheEntry>& entries);
// a corrupt trailing record is cut off the file and reported as a warning;
// a version mismatch throws ConfigError
CacheReadResult cache_read(const std::string& path);
// concatenation of shard files sorted by d; conflicting duplicates throw IntegrityError
std::vector<CacheEntry> cache_merge(const std::vector<std::string>& paths);
std::string default_cache_path();

struct CacheFillResult {
  std::vector<CacheEntry> entries;  // every valid d in [lo, hi], ascending
  i64 computed = 0;
  i64 reused = 0;
};
// entries missing from the cache are computed and appended
CacheFillResult cache_fill(const std::string& path, i64 lo, i64 hi, bool with_invariants,
                           int shards = 1);

std::string census_csv(const std::vector<CacheEntry>& entries);

} // namespace ht
