#include "krf/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "krf/numfmt.hpp"

namespace krf {

namespace {

struct Field {
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

using FieldTable = std::map<std::string, Field>;

template <typename T>
Field real_field(T RunConfig::*member, const char* name) {
  return {[=](RunConfig& c, std::string_view v) { c.*member = parse_double(v, name); },
          [=](const RunConfig& c) { return shortest(c.*member); }};
}

Field family_real(double FamilyParams::*member, const char* name) {
  return {[=](RunConfig& c, std::string_view v) { c.family.*member = parse_double(v, name); },
          [=](const RunConfig& c) { return shortest(c.family.*member); }};
}

Field int_field(int RunConfig::*member, const char* name) {
  return {[=](RunConfig& c, std::string_view v) {
            const long long x = parse_int(v, name);
            if (x < -1000000000LL || x > 1000000000LL) throw ConfigError(std::string(name) + " out of range");
            c.*member = static_cast<int>(x);
          },
          [=](const RunConfig& c) { return std::to_string(c.*member); }};
}

// Ordered by section, then by the order fields appear in the file.
const std::vector<std::pair<std::string, std::vector<std::string>>>& layout() {
  static const std::vector<std::pair<std::string, std::vector<std::string>>> l{
      {"geometry", {"n", "family", "c", "epsilon", "s_c", "width", "s_max", "s_buf"}},
      {"grid", {"N", "sigma"}},
      {"time", {"T_end", "record_every", "snapshot_every", "early_stop"}},
      {"verdict", {"einstein_target", "min_decay_rate", "schwarz_slack"}},
      {"run", {"seed", "out", "force"}},
  };
  return l;
}

const FieldTable& fields() {
  static const FieldTable t{
      {"geometry.n", int_field(&RunConfig::n, "n")},
      {"geometry.family",
       {[](RunConfig& c, std::string_view v) { c.family.family = family_from_string(std::string(trim(v))); },
        [](const RunConfig& c) { return to_string(c.family.family); }}},
      {"geometry.c", family_real(&FamilyParams::c, "c")},
      {"geometry.epsilon", family_real(&FamilyParams::epsilon, "epsilon")},
      {"geometry.s_c", family_real(&FamilyParams::center, "s_c")},
      {"geometry.width", family_real(&FamilyParams::width, "width")},
      {"geometry.s_max", family_real(&FamilyParams::s_max, "s_max")},
      {"geometry.s_buf", family_real(&FamilyParams::s_buf, "s_buf")},
      {"grid.N", int_field(&RunConfig::intervals, "N")},
      {"grid.sigma", real_field(&RunConfig::sigma, "sigma")},
      {"time.T_end", real_field(&RunConfig::t_end, "T_end")},
      {"time.record_every", real_field(&RunConfig::record_every, "record_every")},
      {"time.snapshot_every", real_field(&RunConfig::snapshot_every, "snapshot_every")},
      {"time.early_stop", real_field(&RunConfig::early_stop, "early_stop")},
      {"verdict.einstein_target", real_field(&RunConfig::einstein_target, "einstein_target")},
      {"verdict.min_decay_rate", real_field(&RunConfig::min_decay_rate, "min_decay_rate")},
      {"verdict.schwarz_slack", real_field(&RunConfig::schwarz_slack, "schwarz_slack")},
      {"run.seed",
       {[](RunConfig& c, std::string_view v) { c.seed = parse_u64(v, "seed"); },
        [](const RunConfig& c) { return std::to_string(c.seed); }}},
      {"run.out",
       {[](RunConfig& c, std::string_view v) {
          c.out = std::string(trim(v));
          if (c.out.empty()) throw ConfigError("out must not be empty");
        },
        [](const RunConfig& c) { return c.out; }}},
      {"run.force",
       {[](RunConfig& c, std::string_view v) { c.force = parse_bool(v, "force"); },
        [](const RunConfig& c) { return std::string(c.force ? "true" : "false"); }}},
  };
  return t;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

}  // namespace

void validate(const RunConfig& c) {
  require(c.n >= 1 && c.n <= 3, "n must be 1, 2 or 3");
  const FamilyParams& f = c.family;
  require(f.c > 0.0 && std::isfinite(f.c), "c must be positive");
  require(std::isfinite(f.epsilon), "epsilon must be finite");
  require(f.s_buf > 0.0 && f.s_buf < f.s_max && f.s_max < 1.0, "need 0 < s_buf < s_max < 1");
  if (f.family == Family::perturbed_model) {
    require(f.width > 0.0, "width must be positive");
    require(f.center - f.width >= 0.0 && f.center + f.width <= f.s_buf, "bump must lie inside [0, s_buf]");
  }
  require(c.intervals >= kMinIntervals, "N must be at least 16");
  require(c.sigma > 0.0 && c.sigma <= 1.0, "sigma must lie in (0, 1]");
  require(c.t_end > 0.0 && std::isfinite(c.t_end), "T_end must be positive");
  require(c.record_every > 0.0 && c.record_every <= c.t_end, "record_every must lie in (0, T_end]");
  require(c.snapshot_every >= 0.0 && std::isfinite(c.snapshot_every), "snapshot_every must be >= 0");
  require(c.early_stop >= 0.0, "early_stop must be >= 0");
  require(c.einstein_target > 0.0, "einstein_target must be positive");
  require(c.schwarz_slack >= 0.0, "schwarz_slack must be >= 0");
  require(std::isfinite(c.min_decay_rate), "min_decay_rate must be finite");
}

RunConfig parse_config(const std::string& text) {
  RunConfig c;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view l = trim(line);
    if (const auto hash = l.find('#'); hash != std::string_view::npos) l = trim(l.substr(0, hash));
    if (l.empty()) continue;
    const std::string where = "line " + std::to_string(lineno) + ": ";
    if (l.front() == '[') {
      if (l.back() != ']') throw ConfigError(where + "unterminated section header");
      section = std::string(trim(l.substr(1, l.size() - 2)));
      bool known = false;
      for (const auto& [name, keys] : layout()) known |= name == section;
      if (!known) throw ConfigError(where + "unknown section [" + section + "]");
      continue;
    }
    const auto eq = l.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + "expected key = value");
    if (section.empty()) throw ConfigError(where + "key outside of any section");
    const std::string key = section + "." + std::string(trim(l.substr(0, eq)));
    const auto it = fields().find(key);
    if (it == fields().end()) throw ConfigError(where + "unknown key " + key);
    it->second.set(c, l.substr(eq + 1));
  }
  validate(c);
  return c;
}

RunConfig read_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize(const RunConfig& config) {
  std::string out;
  for (const auto& [section, keys] : layout()) {
    if (!out.empty()) out += '\n';
    out += "[" + section + "]\n";
    for (const auto& key : keys) out += key + " = " + fields().at(section + "." + key).get(config) + "\n";
  }
  return out;
}

RunConfig fixed_point_config(int n) {
  RunConfig c;
  c.n = n;
  c.family = FamilyParams{};
  c.family.family = Family::model_ball;
  c.family.c = n + 1;
  c.intervals = 256;
  c.t_end = 5.0;
  c.early_stop = 0.0;
  return c;
}

RunConfig benchmark_config(int n, int intervals) {
  RunConfig c;
  c.n = n;
  c.family.c = n + 1;
  c.intervals = intervals;
  c.early_stop = 0.0;
  return c;
}

VerdictSettings verdict_settings(const RunConfig& config) {
  VerdictSettings s;
  s.schwarz_slack = config.schwarz_slack;
  s.min_decay_rate = config.min_decay_rate;
  s.einstein_target = config.einstein_target;
  return s;
}

}  // namespace krf
