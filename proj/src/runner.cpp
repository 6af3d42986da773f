#include "lightcone/runner.hpp"

#include <cctype>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <set>
#include <sstream>

#include "runner_internal.hpp"

namespace lightcone::runner {

namespace {

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

std::optional<double> to_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  std::size_t pos = 0;
  try {
    const double v = std::stod(s, &pos);
    if (pos != s.size()) return std::nullopt;
    return v;
  } catch (...) {
    return std::nullopt;
  }
}

bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  for (char c : k)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
  return true;
}

// "a:b:step" -> a, a+step, ..., <= b (with a little slack for rounding).
std::vector<std::string> expand_range(const std::string& v, const std::string& source, int line) {
  std::vector<std::string> parts;
  std::stringstream ss(v);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(trim(p));
  if (parts.size() != 3) throw ValidationError(source, line, "range must be start:stop:step");
  const auto a = to_double(parts[0]), b = to_double(parts[1]), s = to_double(parts[2]);
  if (!a || !b || !s) throw ValidationError(source, line, "range bounds must be numbers");
  if (!(*s > 0.0) || *b < *a) throw ValidationError(source, line, "range needs step > 0 and stop >= start");
  const double count = std::floor((*b - *a) / *s + 1e-9);
  if (count > 1e6) throw ValidationError(source, line, "range has more than 10^6 points");
  std::vector<std::string> out;
  for (long k = 0; k <= static_cast<long>(count); ++k) out.push_back(format_real(*a + static_cast<double>(k) * *s));
  return out;
}

}  // namespace

ValidationError::ValidationError(const std::string& source, int line, const std::string& what)
    : std::runtime_error(line > 0 ? source + ":" + std::to_string(line) + ": " + what : source + ": " + what),
      line_(line) {}

ExperimentConfig ExperimentConfig::parse(std::string_view text, std::string source) {
  ExperimentConfig c;
  c.source_ = std::move(source);
  std::stringstream in{std::string(text)};
  int line_no = 0;
  for (std::string raw; std::getline(in, raw);) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ValidationError(c.source_, line_no, "expected `key = value`");
    const std::string key = trim(line.substr(0, eq));
    if (!valid_key(key)) throw ValidationError(c.source_, line_no, "invalid key `" + key + "`");
    if (c.entries_.count(key) || (key == "experiment" && !c.experiment_.empty()))
      throw ValidationError(c.source_, line_no, "duplicate key `" + key + "`");
    std::vector<std::string> values;
    const std::string rest = trim(line.substr(eq + 1));
    if (!rest.empty()) {
      std::stringstream vs(rest);
      for (std::string v; std::getline(vs, v, ',');) {
        v = trim(v);
        if (v.empty()) throw ValidationError(c.source_, line_no, "empty list element in `" + key + "`");
        if (v.find(':') != std::string::npos) {
          for (auto& x : expand_range(v, c.source_, line_no)) values.push_back(std::move(x));
        } else {
          values.push_back(std::move(v));
        }
      }
    }
    if (values.empty()) throw ValidationError(c.source_, line_no, "`" + key + "` has no values");
    if (key == "experiment") {
      if (values.size() != 1) throw ValidationError(c.source_, line_no, "`experiment` takes one name");
      c.experiment_ = values.front();
      continue;
    }
    c.entries_[key] = Entry{std::move(values), line_no};
  }
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(path.string(), 0, "cannot read config file");
  std::stringstream ss;
  ss << in.rdbuf();
  auto c = parse(ss.str(), path.string());
  c.base_dir_ = path.parent_path();
  return c;
}

int ExperimentConfig::line_of(const std::string& key) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? 0 : it->second.line;
}

std::vector<std::string> ExperimentConfig::keys() const {
  std::vector<std::string> k;
  for (const auto& [name, e] : entries_) k.push_back(name);
  return k;
}

void ExperimentConfig::set(const std::string& key, std::vector<std::string> values) {
  entries_[key] = Entry{std::move(values), 0};
}

const ExperimentConfig::Entry& ExperimentConfig::entry(const std::string& key) const { return entries_.at(key); }

ValidationError ExperimentConfig::error(const std::string& key, const std::string& what) const {
  return ValidationError(source_, line_of(key), "`" + key + "`: " + what);
}

std::vector<double> ExperimentConfig::reals(const std::string& key, std::vector<double> fallback) const {
  if (!has(key)) return fallback;
  std::vector<double> out;
  for (const auto& v : entry(key).values) {
    const auto x = to_double(v);
    if (!x || !std::isfinite(*x)) throw error(key, "`" + v + "` is not a finite number");
    out.push_back(*x);
  }
  return out;
}

std::vector<int> ExperimentConfig::ints(const std::string& key, std::vector<int> fallback) const {
  if (!has(key)) return fallback;
  std::vector<int> out;
  for (double x : reals(key, {})) {
    if (x != std::floor(x) || std::abs(x) > std::numeric_limits<int>::max())
      throw error(key, "expected integers");
    out.push_back(static_cast<int>(x));
  }
  return out;
}

double ExperimentConfig::real(const std::string& key, double fallback) const {
  if (!has(key)) return fallback;
  const auto v = reals(key, {});
  if (v.size() != 1) throw error(key, "expected a single value");
  return v.front();
}

int ExperimentConfig::integer(const std::string& key, int fallback) const {
  if (!has(key)) return fallback;
  const auto v = ints(key, {});
  if (v.size() != 1) throw error(key, "expected a single value");
  return v.front();
}

std::uint64_t ExperimentConfig::u64(const std::string& key) const {
  const auto& vals = entry(key).values;
  if (vals.size() != 1) throw error(key, "expected a single value");
  const std::string& s = vals.front();
  if (s.empty() || s.size() > 20 || !std::all_of(s.begin(), s.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); }))
    throw error(key, "expected an unsigned 64-bit integer");
  try {
    return std::stoull(s);
  } catch (...) {
    throw error(key, "expected an unsigned 64-bit integer");
  }
}

std::string ExperimentConfig::text(const std::string& key, const std::string& fallback) const {
  if (!has(key)) return fallback;
  const auto& vals = entry(key).values;
  if (vals.size() != 1) throw error(key, "expected a single value");
  return vals.front();
}

std::vector<std::string> ExperimentConfig::words(const std::string& key, std::vector<std::string> fallback) const {
  return has(key) ? entry(key).values : fallback;
}

bool ExperimentConfig::flag(const std::string& key) const {
  const std::string v = text(key, "false");
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw error(key, "expected true or false");
}

std::string ExperimentConfig::canonical() const {
  std::string out = "experiment=" + experiment_ + "\n";
  for (const auto& [k, e] : entries_) {
    out += k + "=";
    for (std::size_t i = 0; i < e.values.size(); ++i) out += (i ? "," : "") + e.values[i];
    out += "\n";
  }
  return out;
}

std::uint64_t ExperimentConfig::hash() const { return fnv1a(canonical()); }

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  // Shortest representation that round-trips.
  for (int p = 1; p < 17; ++p) {
    char shorter[40];
    std::snprintf(shorter, sizeof shorter, "%.*g", p, x);
    if (std::strtod(shorter, nullptr) == x) return shorter;
  }
  return buf;
}

std::string hex64(std::uint64_t x) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, x);
  return buf;
}

std::uint64_t Context::require_seed(const ExperimentConfig& config) const {
  if (!seed) throw ValidationError(config.source(), 0, "experiment `" + config.experiment() + "` needs a seed (config `seed` or --seed)");
  return *seed;
}

void Context::check_extent(const ExperimentConfig& config, const std::string& key, long long extent) const {
  if (extent > caps.max_l)
    throw ResourceCapError(config.source() + ": `" + key + "` needs lattice extent " + std::to_string(extent) +
                           " above max_l = " + std::to_string(caps.max_l));
}

void Context::check_sites(const ExperimentConfig& config, const std::string& key, long long sites) const {
  if (sites > caps.max_sites)
    throw ResourceCapError(config.source() + ": `" + key + "` needs " + std::to_string(sites) +
                           " sites above max_sites = " + std::to_string(caps.max_sites));
}

std::vector<std::string> experiment_names() {
  std::vector<std::string> names;
  for (const auto& e : experiment_table()) names.push_back(e.name);
  return names;
}

RunOutput execute(const ExperimentConfig& config, const RunOptions& options) {
  const ExperimentSpec* spec = nullptr;
  for (const auto& e : experiment_table())
    if (e.name == config.experiment()) spec = &e;
  if (!spec) throw ValidationError(config.source(), 0, "unknown experiment `" + config.experiment() + "`");

  static const std::set<std::string> common = {"seed", "max_l", "max_sites", "max_subsets", "threads"};
  const std::set<std::string> allowed(spec->keys.begin(), spec->keys.end());
  for (const auto& k : config.keys())
    if (!common.count(k) && !allowed.count(k)) throw config.error(k, "unknown key for `" + spec->name + "`");

  Context ctx;
  ctx.options = options;
  ctx.caps.max_l = options.max_l.value_or(config.integer("max_l", ctx.caps.max_l));
  const double max_sites = config.real("max_sites", static_cast<double>(ctx.caps.max_sites));
  const double max_subsets = config.real("max_subsets", static_cast<double>(ctx.caps.max_subsets));
  if (ctx.caps.max_l < 1 || max_sites < 1 || max_subsets < 1) throw ValidationError(config.source(), 0, "caps must be positive");
  ctx.caps.max_sites = static_cast<std::int64_t>(max_sites);
  ctx.caps.max_subsets = static_cast<std::int64_t>(max_subsets);
  if (options.seed) ctx.seed = options.seed;
  else if (config.has("seed")) ctx.seed = config.u64("seed");
  ctx.options.threads = options.threads > 0 ? options.threads : config.integer("threads", 1);
  if (ctx.options.threads < 1) throw ValidationError(config.source(), 0, "threads must be at least 1");

  RunOutput out = spec->run(config, ctx);
  return out;
}

std::string render_csv(const ExperimentConfig& config, const RunOutput& out) {
  std::string s;
  s += "# experiment: " + config.experiment() + "\n";
  s += "# config_hash: " + hex64(config.hash()) + "\n";
  if (out.seed) s += "# seed: " + std::to_string(*out.seed) + "\n";
  for (const auto& c : out.table.columns) s += "# column " + c.name + " [" + c.unit + "]: " + c.description + "\n";
  for (const auto& chk : out.table.checks) s += "# checks: " + chk + "\n";
  for (std::size_t i = 0; i < out.table.columns.size(); ++i) s += (i ? "," : "") + out.table.columns[i].name;
  s += "\n";
  for (const auto& row : out.table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) s += (i ? "," : "") + row[i];
    s += "\n";
  }
  return s;
}

std::string render_metadata(const ExperimentConfig& config, const RunOutput& out) {
  nlohmann::ordered_json j;
  j["experiment"] = config.experiment();
  j["config_hash"] = hex64(config.hash());
  j["config"] = config.canonical();
  if (out.seed) j["seed"] = *out.seed;
  j["columns"] = nlohmann::ordered_json::array();
  for (const auto& c : out.table.columns)
    j["columns"].push_back({{"name", c.name}, {"unit", c.unit}, {"description", c.description}});
  j["checks"] = out.table.checks;
  j["rows"] = out.table.rows.size();
  j["summary"] = out.summary;
  j["files"] = nlohmann::ordered_json::array({config.experiment() + ".csv"});
  for (const auto& [name, content] : out.extra_files) j["files"].push_back(name);
  return j.dump(2) + "\n";
}

namespace {

void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << content;
  if (!f) throw std::runtime_error("failed writing " + p.string());
}

}  // namespace

int run(const ExperimentConfig& config, const RunOptions& options, std::ostream& log, std::ostream& err) {
  RunOutput out;
  try {
    out = execute(config, options);
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ResourceCapError& e) {
    err << "resource cap: " << e.what() << "\n";
    return kExitResourceCap;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  std::filesystem::create_directories(options.out_dir);
  write_file(options.out_dir / (config.experiment() + ".csv"), render_csv(config, out));
  write_file(options.out_dir / (config.experiment() + ".json"), render_metadata(config, out));
  for (const auto& [name, content] : out.extra_files) write_file(options.out_dir / name, content);
  log << out.summary << "\n";
  return kExitOk;
}

}  // namespace lightcone::runner
