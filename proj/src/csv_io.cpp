#include "distdiff/csv_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "distdiff/error.hpp"

namespace distdiff {

namespace {
constexpr const char* kModule = "cli";

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    cells.emplace_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

Table read_table(std::istream& in) {
  Table t;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    if (!have_header) {
      t.header = split(line);
      have_header = true;
    } else {
      t.rows.push_back(split(line));
    }
  }
  if (!have_header) throw SchemaError(kModule, "missing header row");
  return t;
}

double parse_number(const std::string& cell, std::size_t row, const std::string& column) {
  if (cell.empty()) throw ValueError(kModule, row, "missing value in column '" + column + "'");
  double v = 0.0;
  const auto* first = cell.data();
  const auto* last = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw ValueError(kModule, row, "non-numeric value '" + cell + "' in column '" + column + "'");
  }
  return v;
}

Treatment parse_treatment(const std::string& cell, std::size_t row) {
  if (cell.empty()) throw ValueError(kModule, row, "missing value in column 'a'");
  const double v = parse_number(cell, row, "a");
  if (v != 0.0 && v != 1.0) {
    throw ValueError(kModule, row, "treatment must be 0 or 1 (got '" + cell + "')");
  }
  return static_cast<Treatment>(v);
}

// Locates the columns of a schema; every header name must be recognised.
struct Columns {
  std::optional<std::size_t> site;
  std::size_t a = 0;
  std::vector<std::size_t> y;
  std::vector<std::size_t> x;
};

Columns resolve_columns(const std::vector<std::string>& header, bool want_site, bool want_x) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (!index.emplace(header[i], i).second) {
      throw SchemaError(kModule, "duplicate column '" + header[i] + "'");
    }
  }
  Columns c;
  auto take = [&](const std::string& name) -> std::optional<std::size_t> {
    auto it = index.find(name);
    if (it == index.end()) return std::nullopt;
    const std::size_t pos = it->second;
    index.erase(it);
    return pos;
  };
  if (want_site) {
    c.site = take("site");
    if (!c.site) throw SchemaError(kModule, "missing column 'site'");
  }
  const auto a = take("a");
  if (!a) throw SchemaError(kModule, "missing column 'a'");
  c.a = *a;
  const auto y = take("y");
  if (!y) throw SchemaError(kModule, "missing column 'y'");
  c.y.push_back(*y);
  for (int k = 2; k <= 3; ++k) {
    const auto extra = take("y" + std::to_string(k));
    if (!extra) break;
    c.y.push_back(*extra);
  }
  if (want_x) {
    for (int k = 1;; ++k) {
      const auto col = take("x" + std::to_string(k));
      if (!col) break;
      c.x.push_back(*col);
    }
    if (c.x.empty()) throw SchemaError(kModule, "missing covariate column 'x1'");
  }
  if (!index.empty()) {
    throw SchemaError(kModule, "unexpected column '" + index.begin()->first + "'");
  }
  return c;
}

void check_width(const std::vector<std::string>& row, std::size_t width, std::size_t row_number) {
  if (row.size() != width) {
    throw ValueError(kModule, row_number, "expected " + std::to_string(width) + " fields, found " +
                                              std::to_string(row.size()));
  }
}

std::ifstream open(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(kModule, "cannot open '" + path + "'");
  return in;
}

void write_y_header(std::ostream& out, std::size_t dim) {
  out << "y";
  for (std::size_t k = 2; k <= dim; ++k) out << ",y" << k;
}

void write_point(std::ostream& out, std::span<const double> p) {
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (k) out << ',';
    out << format_number(p[k]);
  }
}
}  // namespace

std::string format_number(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

RandomizedSample read_randomized_csv(std::istream& in) {
  const Table t = read_table(in);
  const Columns c = resolve_columns(t.header, false, false);
  RandomizedSample out;
  out.outcome = PointSet(c.y.size());
  std::vector<double> y(c.y.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    check_width(row, t.header.size(), r + 1);
    out.treatment.push_back(parse_treatment(row[c.a], r + 1));
    for (std::size_t k = 0; k < c.y.size(); ++k) y[k] = parse_number(row[c.y[k]], r + 1, t.header[c.y[k]]);
    out.outcome.push_back(y);
  }
  return out;
}

MultiSourceSample read_multi_source_csv(std::istream& in) {
  const Table t = read_table(in);
  const Columns c = resolve_columns(t.header, true, false);
  MultiSourceSample out;
  std::map<std::string, std::size_t> site_index;
  std::vector<double> y(c.y.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    check_width(row, t.header.size(), r + 1);
    const std::string& label = row[*c.site];
    if (label.empty()) throw ValueError(kModule, r + 1, "missing value in column 'site'");
    auto [it, inserted] = site_index.emplace(label, out.sites.size());
    if (inserted) {
      out.labels.push_back(label);
      out.sites.emplace_back();
      out.sites.back().outcome = PointSet(c.y.size());
    }
    RandomizedSample& site = out.sites[it->second];
    site.treatment.push_back(parse_treatment(row[c.a], r + 1));
    for (std::size_t k = 0; k < c.y.size(); ++k) y[k] = parse_number(row[c.y[k]], r + 1, t.header[c.y[k]]);
    site.outcome.push_back(y);
  }
  return out;
}

ObservationalSample read_observational_csv(std::istream& in) {
  const Table t = read_table(in);
  const Columns c = resolve_columns(t.header, false, true);
  ObservationalSample out;
  out.covariates = PointSet(c.x.size());
  out.outcome = PointSet(c.y.size());
  std::vector<double> x(c.x.size());
  std::vector<double> y(c.y.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    check_width(row, t.header.size(), r + 1);
    for (std::size_t k = 0; k < c.x.size(); ++k) x[k] = parse_number(row[c.x[k]], r + 1, t.header[c.x[k]]);
    out.treatment.push_back(parse_treatment(row[c.a], r + 1));
    for (std::size_t k = 0; k < c.y.size(); ++k) y[k] = parse_number(row[c.y[k]], r + 1, t.header[c.y[k]]);
    out.covariates.push_back(x);
    out.outcome.push_back(y);
  }
  return out;
}

RandomizedSample load_randomized_csv(const std::string& path) {
  auto in = open(path);
  return read_randomized_csv(in);
}

MultiSourceSample load_multi_source_csv(const std::string& path) {
  auto in = open(path);
  return read_multi_source_csv(in);
}

ObservationalSample load_observational_csv(const std::string& path) {
  auto in = open(path);
  return read_observational_csv(in);
}

void write_randomized_csv(std::ostream& out, const RandomizedSample& data) {
  out << "a,";
  write_y_header(out, data.dim());
  out << '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    out << static_cast<int>(data.treatment[i]) << ',';
    write_point(out, data.outcome[i]);
    out << '\n';
  }
}

void write_multi_source_csv(std::ostream& out, const MultiSourceSample& data) {
  out << "site,a,";
  write_y_header(out, data.dim());
  out << '\n';
  for (std::size_t s = 0; s < data.sites.size(); ++s) {
    const auto& site = data.sites[s];
    for (std::size_t i = 0; i < site.size(); ++i) {
      if (s < data.labels.size()) {
        out << data.labels[s];
      } else {
        out << 's' << (s + 1);
      }
      out << ',' << static_cast<int>(site.treatment[i]) << ',';
      write_point(out, site.outcome[i]);
      out << '\n';
    }
  }
}

void write_observational_csv(std::ostream& out, const ObservationalSample& data) {
  for (std::size_t k = 1; k <= data.covariate_dim(); ++k) out << 'x' << k << ',';
  out << "a,";
  write_y_header(out, data.dim());
  out << '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    write_point(out, data.covariates[i]);
    out << ',' << static_cast<int>(data.treatment[i]) << ',';
    write_point(out, data.outcome[i]);
    out << '\n';
  }
}

}  // namespace distdiff
