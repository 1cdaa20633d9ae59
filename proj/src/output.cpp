#include "bellsim/output.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>

#include "bellsim/errors.hpp"

namespace bellsim {

using nlohmann::json;

TableFormat parse_table_format(const std::string& text) {
  if (text == "csv") return TableFormat::csv;
  if (text == "json-lines" || text == "jsonl") return TableFormat::json_lines;
  throw ConfigError("unknown output format '" + text + "' (expected csv or json-lines)");
}

const char* extension(TableFormat f) { return f == TableFormat::csv ? ".csv" : ".jsonl"; }

const char* tool_version() { return "1.0.0"; }

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  out << std::setprecision(17);
  return out;
}

// CSV cells never contain commas or quotes from our own messages.
std::string csv_safe(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '"' || c == '\n') c = ';';
  return s;
}

json row_json(const ScanPoint& p) {
  const auto w = p.table.total() > 0.0 ? p.table.normalized() : std::array<double, 4>{};
  json j{{"theta_a", p.table.theta_a}, {"theta_b", p.table.theta_b}, {"phi_a", p.table.phi_a},
         {"phi_b", p.table.phi_b},     {"W1", p.table.raw[0]},       {"W2", p.table.raw[1]},
         {"W3", p.table.raw[2]},       {"W4", p.table.raw[3]},       {"w1", w[0]},
         {"w2", w[1]},                 {"w3", w[2]},                 {"w4", w[3]}};
  j["E"] = p.ok ? json(p.correlator) : json(nullptr);
  j["status"] = p.ok ? "ok" : p.error;
  return j;
}

void csv_row(std::ostream& out, const ScanPoint& p) {
  const auto w = p.table.total() > 0.0 ? p.table.normalized() : std::array<double, 4>{};
  out << p.table.theta_a << ',' << p.table.theta_b << ',' << p.table.phi_a << ',' << p.table.phi_b;
  for (double v : p.table.raw) out << ',' << v;
  for (double v : w) out << ',' << v;
  out << ',';
  if (p.ok) out << p.correlator;
  else out << "nan";
  out << ',' << (p.ok ? std::string("ok") : "failed: " + csv_safe(p.error)) << '\n';
}

constexpr const char* kTableHeader = "theta_a,theta_b,phi_a,phi_b,W1,W2,W3,W4,w1,w2,w3,w4,E,status\n";

}  // namespace

void write_correlation_table(const std::filesystem::path& path, const std::vector<ScanPoint>& points,
                             TableFormat format) {
  auto out = open_out(path);
  if (format == TableFormat::csv) {
    out << kTableHeader;
    for (const auto& p : points) csv_row(out, p);
  } else {
    for (const auto& p : points) out << row_json(p).dump() << '\n';
  }
  if (!out) throw FormatError("write failed: " + path.string());
}

void write_chsh_summary(const std::filesystem::path& path, const ChshSummary& summary, TableFormat format) {
  static const char* labels[4] = {"a,b", "a,b'", "a',b", "a',b'"};
  auto out = open_out(path);
  if (format == TableFormat::csv) {
    out << "setting," << kTableHeader;
    for (int i = 0; i < 4; ++i) {
      out << '"' << labels[i] << "\",";
      csv_row(out, summary.runs[static_cast<std::size_t>(i)]);
    }
    out << "# S=" << summary.s << " V=" << summary.visibility << " fit_rms=" << summary.fit_rms << '\n';
  } else {
    for (int i = 0; i < 4; ++i) {
      json j = row_json(summary.runs[static_cast<std::size_t>(i)]);
      j["setting"] = labels[i];
      out << j.dump() << '\n';
    }
    out << json{{"S", summary.s}, {"visibility", summary.visibility}, {"fit_rms", summary.fit_rms}}.dump() << '\n';
  }
}

void write_field_csv(const std::filesystem::path& path, const Field2D& field, const std::string& row_axis,
                     const std::string& column_axis, double momentum_unit, const std::string& unit_name) {
  {
    auto out = open_out(path);
    for (std::size_t r = 0; r < field.n; ++r) {
      for (std::size_t c = 0; c < field.n; ++c) out << (c ? "," : "") << field.at(r, c);
      out << '\n';
    }
  }
  auto side = path;
  side += ".txt";
  auto out = open_out(side);
  out << "rows: " << row_axis << "\ncolumns: " << column_axis << "\npoints: " << field.n
      << "\nfirst: " << field.coordinate(0) / momentum_unit << ' ' << unit_name
      << "\nstep: " << field.step / momentum_unit << ' ' << unit_name << "\nvalues: probability per cell\n";
}

void RunManifest::write(const std::filesystem::path& path) const {
  json j;
  j["config_hash"] = config_hash;
  j["tool_version"] = tool_version;
  j["started"] = started;
  j["finished"] = finished;
  j["stages"] = json::array();
  for (const auto& s : stages)
    j["stages"].push_back({{"name", s.name},
                           {"start_s", s.start},
                           {"duration_s", s.duration},
                           {"parameters", s.parameters},
                           {"snapshot", s.snapshot.string()}});
  j["outputs"] = json::array();
  for (const auto& o : outputs) {
    if (!std::filesystem::exists(o)) throw FormatError("manifest lists missing output " + o.string());
    j["outputs"].push_back(o.string());
  }
  j["notes"] = notes;
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

}  // namespace bellsim
