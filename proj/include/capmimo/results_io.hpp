#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "capmimo/experiments.hpp"

namespace capmimo {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Format { csv, jsonl };

inline Format parse_format(const std::string& s) {
  if (s == "csv") return Format::csv;
  if (s == "jsonl") return Format::jsonl;
  throw ConfigError("--format must be csv or jsonl (got '" + s + "')");
}

inline const std::vector<std::string>& result_columns() {
  static const std::vector<std::string> cols{
      "sweep", "variable", "value", "variable2", "value2", "scheme", "nf",
      "seed", "sum_rate", "iterations", "wall_time_s", "power_ma2", "error"};
  return cols;
}

namespace csv {

/// Shortest text that parses back to the same double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw IoError("csv: not a number: '" + s + "'");
  }
  return v;
}

template <class T>
T parse_unsigned(const std::string& s) {
  T v{};
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw IoError("csv: not an unsigned integer: '" + s + "'");
  }
  return v;
}

inline std::string quote(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline void write_record(std::ostream& os, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) os << ',';
    os << quote(fields[i]);
  }
  os << "\r\n";
}

/// RFC-4180 reader. Accepts CRLF or LF line endings.
inline std::vector<std::vector<std::string>> read_records(std::istream& is) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> rec;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  char c;
  auto end_field = [&] {
    rec.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    records.push_back(std::move(rec));
    rec.clear();
  };
  while (is.get(c)) {
    if (in_quotes) {
      if (c == '"') {
        if (is.peek() == '"') {
          is.get(c);
          field += '"';
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"' && !field_started) {
      in_quotes = true;
      field_started = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\r') {
      if (is.peek() == '\n') is.get(c);
      end_record();
    } else if (c == '\n') {
      end_record();
    } else {
      field += c;
      field_started = true;
    }
  }
  if (in_quotes) throw IoError("csv: unterminated quoted field");
  if (field_started || !rec.empty()) end_record();
  return records;
}

}  // namespace csv

inline std::vector<std::string> row_fields(const ResultRow& r) {
  return {r.sweep,
          r.variable,
          csv::format_double(r.value),
          r.variable2,
          csv::format_double(r.value2),
          r.scheme,
          std::to_string(r.nf),
          std::to_string(r.seed),
          csv::format_double(r.sum_rate),
          std::to_string(r.iterations),
          csv::format_double(r.wall_time_s),
          csv::format_double(r.power_ma2),
          r.error};
}

inline void write_results(std::ostream& os, const std::vector<ResultRow>& rows, Format fmt) {
  if (fmt == Format::csv) {
    csv::write_record(os, result_columns());
    for (const auto& r : rows) csv::write_record(os, row_fields(r));
  } else {
    for (const auto& r : rows) {
      nlohmann::ordered_json j;
      j["sweep"] = r.sweep;
      j["variable"] = r.variable;
      j["value"] = r.value;
      j["variable2"] = r.variable2;
      j["value2"] = r.value2;
      j["scheme"] = r.scheme;
      j["nf"] = r.nf;
      j["seed"] = r.seed;
      j["sum_rate"] = r.sum_rate;
      j["iterations"] = r.iterations;
      j["wall_time_s"] = r.wall_time_s;
      j["power_ma2"] = r.power_ma2;
      j["error"] = r.error;
      os << j.dump() << '\n';
    }
  }
}

inline std::vector<ResultRow> read_results(std::istream& is, Format fmt) {
  std::vector<ResultRow> rows;
  if (fmt == Format::csv) {
    const auto recs = csv::read_records(is);
    if (recs.empty()) throw IoError("csv: missing header");
    if (recs.front() != result_columns()) throw IoError("csv: unexpected header");
    for (std::size_t i = 1; i < recs.size(); ++i) {
      const auto& f = recs[i];
      if (f.size() != result_columns().size()) {
        throw IoError("csv: record " + std::to_string(i) + " has " + std::to_string(f.size()) + " fields");
      }
      ResultRow r;
      r.sweep = f[0];
      r.variable = f[1];
      r.value = csv::parse_double(f[2]);
      r.variable2 = f[3];
      r.value2 = csv::parse_double(f[4]);
      r.scheme = f[5];
      r.nf = csv::parse_unsigned<std::size_t>(f[6]);
      r.seed = csv::parse_unsigned<std::uint64_t>(f[7]);
      r.sum_rate = csv::parse_double(f[8]);
      r.iterations = csv::parse_unsigned<std::size_t>(f[9]);
      r.wall_time_s = csv::parse_double(f[10]);
      r.power_ma2 = csv::parse_double(f[11]);
      r.error = f[12];
      rows.push_back(std::move(r));
    }
  } else {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      if (line.empty()) continue;
      try {
        const auto j = nlohmann::json::parse(line);
        ResultRow r;
        r.sweep = j.at("sweep").get<std::string>();
        r.variable = j.at("variable").get<std::string>();
        r.value = j.at("value").get<double>();
        r.variable2 = j.at("variable2").get<std::string>();
        r.value2 = j.at("value2").get<double>();
        r.scheme = j.at("scheme").get<std::string>();
        r.nf = j.at("nf").get<std::size_t>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.sum_rate = j.at("sum_rate").get<double>();
        r.iterations = j.at("iterations").get<std::size_t>();
        r.wall_time_s = j.at("wall_time_s").get<double>();
        r.power_ma2 = j.at("power_ma2").get<double>();
        r.error = j.at("error").get<std::string>();
        rows.push_back(std::move(r));
      } catch (const nlohmann::json::exception& e) {
        throw IoError("jsonl: line " + std::to_string(lineno) + ": " + e.what());
      }
    }
  }
  return rows;
}

/// Writes to `path`, or stdout when path is empty or "-".
template <class Fn>
void with_output(const std::string& path, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  fn(os);
  os.flush();
  if (!os) throw IoError("write to '" + path + "' failed");
}

inline void emit_results(const std::vector<ResultRow>& rows, const std::string& path, Format fmt) {
  with_output(path, [&](std::ostream& os) { write_results(os, rows, fmt); });
}

inline std::vector<ResultRow> load_results(const std::string& path, Format fmt) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path + "' for reading");
  return read_results(is, fmt);
}

inline const std::vector<std::string>& pattern_columns() {
  static const std::vector<std::string> cols{
      "user", "ix", "iy", "nx", "ny", "x_m", "y_m", "jx_re", "jx_im", "jy_re", "jy_im",
      "jz_re", "jz_im", "amp_x_norm", "phase_x_rad"};
  return cols;
}

/// Per-user, per-grid-point current density dump. Amplitude of the x
/// component is normalized to its per-user maximum.
inline void write_patterns(std::ostream& os, const PatternSet& patterns, const QuadratureGrid& grid,
                           Format fmt) {
  if (fmt == Format::csv) csv::write_record(os, pattern_columns());
  for (std::size_t k = 0; k < patterns.size(); ++k) {
    detail::check_grid_samples(patterns[k].size(), grid, "write_patterns");
    double peak = 0.0;
    for (const auto& v : patterns[k]) peak = std::max(peak, std::abs(v.x()));
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const Complex3& v = patterns[k][i];
      const Real3 p = grid.local(i);
      const double amp = peak > 0.0 ? std::abs(v.x()) / peak : 0.0;
      const double phase = std::arg(v.x());
      const std::size_t ix = i % grid.nx;
      const std::size_t iy = i / grid.nx;
      if (fmt == Format::csv) {
        csv::write_record(os, {std::to_string(k), std::to_string(ix), std::to_string(iy),
                               std::to_string(grid.nx), std::to_string(grid.ny),
                               csv::format_double(p.x()), csv::format_double(p.y()),
                               csv::format_double(v.x().real()), csv::format_double(v.x().imag()),
                               csv::format_double(v.y().real()), csv::format_double(v.y().imag()),
                               csv::format_double(v.z().real()), csv::format_double(v.z().imag()),
                               csv::format_double(amp), csv::format_double(phase)});
      } else {
        nlohmann::ordered_json j;
        j["user"] = k;
        j["ix"] = ix;
        j["iy"] = iy;
        j["nx"] = grid.nx;
        j["ny"] = grid.ny;
        j["x_m"] = p.x();
        j["y_m"] = p.y();
        j["jx_re"] = v.x().real();
        j["jx_im"] = v.x().imag();
        j["jy_re"] = v.y().real();
        j["jy_im"] = v.y().imag();
        j["jz_re"] = v.z().real();
        j["jz_im"] = v.z().imag();
        j["amp_x_norm"] = amp;
        j["phase_x_rad"] = phase;
        os << j.dump() << '\n';
      }
    }
  }
}

inline const std::vector<std::string>& gain_columns() {
  static const std::vector<std::string> cols{"distance_m", "freq_ghz", "kappa_ratio", "gain_db"};
  return cols;
}

inline void write_gain(std::ostream& os, const std::vector<GainSample>& rows, Format fmt) {
  if (fmt == Format::csv) csv::write_record(os, gain_columns());
  for (const auto& g : rows) {
    if (fmt == Format::csv) {
      csv::write_record(os, {csv::format_double(g.distance_m), csv::format_double(g.freq_hz / 1e9),
                             csv::format_double(g.kappa_ratio), csv::format_double(g.gain_db)});
    } else {
      nlohmann::ordered_json j;
      j["distance_m"] = g.distance_m;
      j["freq_ghz"] = g.freq_hz / 1e9;
      j["kappa_ratio"] = g.kappa_ratio;
      j["gain_db"] = g.gain_db;
      os << j.dump() << '\n';
    }
  }
}

}  // namespace capmimo
