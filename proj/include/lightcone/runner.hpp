#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lightcone::runner {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitResourceCap = 3;

// Config or input problem found before any work starts. `line` is 0 when the problem is
// not tied to a config line.
class ValidationError : public std::runtime_error {
 public:
  ValidationError(const std::string& source, int line, const std::string& what);
  int line() const { return line_; }

 private:
  int line_;
};

class ResourceCapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Flat text config: one `key = v1, v2, ...` per line, `#` starts a comment. A single
// value may be written as a range `start:stop:step` (inclusive, numeric).
class ExperimentConfig {
 public:
  static ExperimentConfig parse(std::string_view text, std::string source = "<config>");
  static ExperimentConfig load(const std::filesystem::path& path);

  const std::string& source() const { return source_; }
  const std::filesystem::path& base_dir() const { return base_dir_; }
  const std::string& experiment() const { return experiment_; }
  void set_experiment(std::string name) { experiment_ = std::move(name); }

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  int line_of(const std::string& key) const;
  std::vector<std::string> keys() const;
  // Replaces (or adds) a key; used for command-line overrides.
  void set(const std::string& key, std::vector<std::string> values);

  std::vector<double> reals(const std::string& key, std::vector<double> fallback) const;
  std::vector<int> ints(const std::string& key, std::vector<int> fallback) const;
  double real(const std::string& key, double fallback) const;
  int integer(const std::string& key, int fallback) const;
  std::uint64_t u64(const std::string& key) const;
  std::string text(const std::string& key, const std::string& fallback) const;
  std::vector<std::string> words(const std::string& key, std::vector<std::string> fallback) const;
  bool flag(const std::string& key) const;

  // Sorted `key=values` lines, the input to the config hash.
  std::string canonical() const;
  std::uint64_t hash() const;

  ValidationError error(const std::string& key, const std::string& what) const;

 private:
  struct Entry {
    std::vector<std::string> values;
    int line = 0;
  };
  const Entry& entry(const std::string& key) const;

  std::string source_;
  std::filesystem::path base_dir_;
  std::string experiment_;
  std::map<std::string, Entry> entries_;
};

struct Caps {
  int max_l = 16384;                        // largest lattice extent along any axis
  std::int64_t max_sites = std::int64_t{1} << 22;
  std::int64_t max_subsets = std::int64_t{1} << 20;  // walk matrix dimension 2^L
};

struct RunOptions {
  std::filesystem::path out_dir = ".";
  std::optional<std::uint64_t> seed;  // overrides the config's `seed`
  int threads = 0;                    // 0: the config's `threads`, else 1
  std::optional<int> max_l;           // overrides the config's `max_l`
};

struct Column {
  std::string name;
  std::string unit;  // "1" for dimensionless
  std::string description;
};

struct Table {
  std::vector<Column> columns;
  std::vector<std::string> checks;  // relations the rows test, one per line
  std::vector<std::vector<std::string>> rows;
};

struct RunOutput {
  Table table;
  std::vector<std::pair<std::string, std::string>> extra_files;  // name, content
  std::string summary;                                          // one line for stdout
  std::optional<std::uint64_t> seed;
};

std::uint64_t fnv1a(std::string_view bytes);
std::string format_real(double x);
std::string hex64(std::uint64_t x);

std::vector<std::string> experiment_names();

// Validates and runs one experiment in memory. Throws ValidationError or
// ResourceCapError before doing any work.
RunOutput execute(const ExperimentConfig& config, const RunOptions& options);

// CSV with comment header, and the JSON metadata document.
std::string render_csv(const ExperimentConfig& config, const RunOutput& out);
std::string render_metadata(const ExperimentConfig& config, const RunOutput& out);

// execute + write <out>/<experiment>.csv, .json and any extra files. Returns the exit code
// and reports problems on `err`.
int run(const ExperimentConfig& config, const RunOptions& options, std::ostream& log, std::ostream& err);

}  // namespace lightcone::runner
