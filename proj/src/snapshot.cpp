#include "krf/snapshot.hpp"

#include <fstream>
#include <sstream>

#include "krf/numfmt.hpp"

namespace krf {

namespace {

constexpr const char* kMagic = "krf-snapshot 1";
constexpr int kRecordFields = 14;

std::array<double*, kRecordFields> record_fields(DiagnosticsRecord& r) {
  return {&r.t,
          &r.sup_S,
          &r.schwarz_threshold,
          &r.sup_phidot,
          &r.einstein_residual,
          &r.lambda_ratio_min,
          &r.lambda_ratio_max,
          &r.christoffel_diff,
          &r.boundary_influence,
          &r.heat_identity_residual,
          &r.dt,
          &r.sup_phi,
          &r.volume_ratio_max,
          &r.curvature_sup};
}

class Reader {
 public:
  explicit Reader(const std::string& text) : in_(text) {}

  std::string line() {
    std::string l;
    if (!std::getline(in_, l)) throw ConfigError("snapshot truncated");
    return l;
  }

  std::string value(const std::string& key) {
    const std::string l = line();
    const auto eq = l.find('=');
    if (eq == std::string::npos || trim(std::string_view(l).substr(0, eq)) != key)
      throw ConfigError("snapshot: expected '" + key + " = ...', got '" + l + "'");
    return std::string(trim(std::string_view(l).substr(eq + 1)));
  }

  void expect(const std::string& exact) {
    const std::string l = line();
    if (trim(l) != exact) throw ConfigError("snapshot: expected '" + exact + "', got '" + l + "'");
  }

 private:
  std::istringstream in_;
};

}  // namespace

std::string encode_snapshot(const Snapshot& snap) {
  std::ostringstream os;
  os << kMagic << '\n';
  os << "t = " << hex_double(snap.t) << '\n';
  os << "steps = " << snap.steps << '\n';
  os << "dt_history_length = " << snap.steps << '\n';
  os << "last_dt = " << hex_double(snap.last_dt) << '\n';
  os << "nodes = " << snap.phi.size() << '\n';
  os << "records = " << snap.records.size() << '\n';
  os << "begin config\n" << serialize(snap.config) << "end config\n";
  os << "begin phi\n";
  for (Eigen::Index i = 0; i < snap.phi.size(); ++i) os << hex_double(snap.phi(i)) << '\n';
  os << "end phi\n";
  os << "begin records\n";
  for (DiagnosticsRecord r : snap.records) {
    const auto f = record_fields(r);
    for (int k = 0; k < kRecordFields; ++k) os << (k ? " " : "") << hex_double(*f[k]);
    os << '\n';
  }
  os << "end records\n";
  return os.str();
}

Snapshot decode_snapshot(const std::string& text) {
  Reader in(text);
  in.expect(kMagic);
  Snapshot snap;
  snap.t = parse_hex_double(in.value("t"), "t");
  snap.steps = parse_u64(in.value("steps"), "steps");
  if (parse_u64(in.value("dt_history_length"), "dt_history_length") != snap.steps)
    throw ConfigError("snapshot: dt history length disagrees with step count");
  snap.last_dt = parse_hex_double(in.value("last_dt"), "last_dt");
  const std::uint64_t nodes = parse_u64(in.value("nodes"), "nodes");
  const std::uint64_t records = parse_u64(in.value("records"), "records");

  in.expect("begin config");
  std::string config_text;
  for (std::string l = in.line(); trim(l) != "end config"; l = in.line()) config_text += l + '\n';
  snap.config = parse_config(config_text);
  if (nodes != static_cast<std::uint64_t>(snap.config.intervals) + 1)
    throw ConfigError("snapshot: node count does not match the grid in its config");

  in.expect("begin phi");
  snap.phi.resize(static_cast<Eigen::Index>(nodes));
  for (Eigen::Index i = 0; i < snap.phi.size(); ++i) snap.phi(i) = parse_hex_double(in.line(), "phi");
  in.expect("end phi");

  in.expect("begin records");
  snap.records.resize(records);
  for (auto& r : snap.records) {
    std::istringstream row(in.line());
    std::string tok;
    for (double* f : record_fields(r)) {
      if (!(row >> tok)) throw ConfigError("snapshot: short record row");
      *f = parse_hex_double(tok, "record");
    }
  }
  in.expect("end records");
  return snap;
}

void write_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string snapshot_name(double t) { return "snapshot_" + shortest(t) + ".state"; }

void write_snapshot(const std::filesystem::path& dir, const Snapshot& snap) {
  write_atomic(dir / snapshot_name(snap.t), encode_snapshot(snap));
}

Snapshot read_snapshot(const std::filesystem::path& path) { return decode_snapshot(read_file(path)); }

std::optional<std::filesystem::path> latest_snapshot(const std::filesystem::path& dir) {
  std::optional<std::filesystem::path> best;
  double best_t = -1;
  if (!std::filesystem::is_directory(dir)) return best;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    constexpr std::string_view prefix = "snapshot_", suffix = ".state";
    if (name.size() <= prefix.size() + suffix.size() || name.rfind(prefix, 0) != 0 ||
        name.compare(name.size() - suffix.size(), suffix.size(), suffix) != 0)
      continue;
    const std::string_view stamp =
        std::string_view(name).substr(prefix.size(), name.size() - prefix.size() - suffix.size());
    double t;
    try {
      t = parse_double(stamp, "snapshot time");
    } catch (const ConfigError&) {
      continue;
    }
    if (t > best_t) {
      best_t = t;
      best = entry.path();
    }
  }
  return best;
}

}  // namespace krf
