#include "qwalk/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "qwalk/errors.hpp"

namespace qwalk::io {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

double parse_number(const std::string& cell, const std::string& path, std::size_t line) {
  const std::string t = trim(cell);
  if (t == "inf") return INFINITY;
  if (t == "-inf") return -INFINITY;
  if (t == "nan") return NAN;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (t.empty() || used != t.size())
    throw IoError(path + ":" + std::to_string(line) + ": cannot parse '" + t + "' as a number");
  return v;
}

}  // namespace

Json provenance(const std::string& subcommand, std::uint64_t seed, const Json& config) {
  Json j;
  j["tool"] = "qwalk";
  j["version"] = kToolVersion;
  j["subcommand"] = subcommand;
  j["seed"] = seed;
  j["config"] = config;
  return j;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw IoError("CSV has no column '" + name + "'");
}

std::vector<double> CsvTable::column_values(const std::string& name) const {
  const std::size_t c = column(name);
  std::vector<double> v;
  v.reserve(rows.size());
  for (const auto& r : rows) v.push_back(r[c]);
  return v;
}

void write_csv(const std::string& path, const Json& prov, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << "# " << prov.dump() << '\n';
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << format_double(r[i]);
    out << '\n';
  }
  if (!out) throw IoError("write to '" + path + "' failed");
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  CsvTable t;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string s = trim(line);
    if (s.empty()) continue;
    if (s[0] == '#') {
      if (!have_header && t.provenance.is_null()) {
        try {
          t.provenance = Json::parse(s.substr(1));
        } catch (const std::exception&) {
          // Free-form comment.
        }
      }
      continue;
    }
    auto cells = split(s, ',');
    if (!have_header) {
      for (auto& c : cells) t.header.push_back(trim(c));
      have_header = true;
      continue;
    }
    if (cells.size() != t.header.size())
      throw IoError(path + ":" + std::to_string(line_no) + ": expected " +
                    std::to_string(t.header.size()) + " fields, found " + std::to_string(cells.size()));
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_number(c, path, line_no));
    t.rows.push_back(std::move(row));
  }
  if (!have_header) throw IoError("'" + path + "' has no header row");
  return t;
}

void write_json(const std::string& path, const Json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write to '" + path + "' failed");
}

void write_signal_csv(const std::string& path, const SignalTrace& s, Json prov) {
  prov["channel"] = channel_name(s.channel);
  std::vector<std::vector<double>> rows;
  rows.reserve(s.times.size());
  for (std::size_t i = 0; i < s.times.size(); ++i) rows.push_back({s.times[i], s.p_down[i]});
  write_csv(path, prov, {"t_seconds", "p_down"}, rows);
}

SignalTrace read_signal_csv(const std::string& path, Channel fallback) {
  const CsvTable t = read_csv(path);
  SignalTrace s;
  s.times = t.column_values("t_seconds");
  s.p_down = t.column_values("p_down");
  s.channel = fallback;
  if (t.provenance.is_object() && t.provenance.contains("channel")) {
    try {
      s.channel = parse_channel(t.provenance["channel"].get<std::string>());
    } catch (const ConfigError& e) {
      throw IoError("'" + path + "': " + e.what());
    }
  }
  return s;
}

}  // namespace qwalk::io
