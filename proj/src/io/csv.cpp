#include "fdvae/io/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "fdvae/error.hpp"

namespace fdvae::io {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::optional<double> parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw DataError("csv: missing column '" + std::string(name) + "'");
}

bool CsvTable::has_column(std::string_view name) const {
  for (const auto& h : header) {
    if (h == name) return true;
  }
  return false;
}

CsvTable parse_csv(std::string_view text) {
  CsvTable table;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false, field_started = false;
  std::size_t line = 1, record_line = 1;

  auto end_record = [&] {
    if (record.empty() && field.empty() && !field_started) return;  // blank line
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
    if (table.header.empty()) {
      table.header = std::move(record);
    } else {
      if (record.size() != table.header.size()) {
        throw DataError("csv: line " + std::to_string(record_line) + " has " + std::to_string(record.size()) +
                        " fields, header has " + std::to_string(table.header.size()));
      }
      table.rows.push_back(std::move(record));
    }
    record.clear();
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        record.push_back(std::move(field));
        field.clear();
        field_started = true;
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        ++line;
        record_line = line;
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (in_quotes) throw DataError("csv: unterminated quoted field starting on line " + std::to_string(record_line));
  end_record();
  if (table.header.empty()) throw DataError("csv: no header row");
  return table;
}

CsvTable read_csv(const fs::path& path) {
  try {
    return parse_csv(read_text_file(path));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_text_file(const fs::path& path, std::string_view text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path sidecar_path(const fs::path& csv) {
  fs::path p = csv;
  p += ".json";
  return p;
}

void write_dataset(const Dataset& d, const fs::path& csv) {
  d.validate();
  const std::size_t n = d.n(), dx = d.d_x();
  std::vector<std::string> header;
  for (std::size_t j = 0; j < dx; ++j) header.push_back("x" + std::to_string(j));
  header.insert(header.end(), {"t", "y"});
  const HiddenColumns* h = d.hidden ? &*d.hidden : nullptr;
  if (h) {
    for (std::size_t j = 0; j < h->z_fd.cols(); ++j) header.push_back("zfd" + std::to_string(j));
    header.insert(header.end(), {"u", "w1", "w2"});
    if (!h->w_y.empty()) header.push_back("w_y");
    if (!h->w_e.empty()) header.push_back("w_e");
  }
  std::string out;
  for (std::size_t j = 0; j < header.size(); ++j) out += (j ? "," : "") + header[j];
  out += '\n';
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < dx; ++j) out += format_double(d.x(i, j)) + ',';
    out += format_double(d.t[i]) + ',' + format_double(d.y[i]);
    if (h) {
      for (std::size_t j = 0; j < h->z_fd.cols(); ++j) out += ',' + format_double(h->z_fd(i, j));
      out += ',' + format_double(h->u[i]) + ',' + format_double(h->w1[i]) + ',' + format_double(h->w2[i]);
      if (!h->w_y.empty()) out += ',' + format_double(h->w_y[i]);
      if (!h->w_e.empty()) out += ',' + format_double(h->w_e[i]);
    }
    out += '\n';
  }
  write_text_file(csv, out);
  json side{{"format", "fdvae-dataset"}, {"version", 1}, {"n", n}, {"d_x", dx},
            {"true_ate", d.true_ate ? json(*d.true_ate) : json(nullptr)}, {"provenance", d.provenance}};
  write_text_file(sidecar_path(csv), side.dump(2) + "\n");
}

namespace {

std::vector<double> numeric_column(const CsvTable& t, std::size_t col, const fs::path& path) {
  std::vector<double> out;
  out.reserve(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto v = parse_double(t.rows[i][col]);
    if (!v || !std::isfinite(*v)) {
      throw DataError(path.string() + ": row " + std::to_string(i + 1) + ", column '" + t.header[col] +
                      "': not a finite number ('" + t.rows[i][col] + "')");
    }
    out.push_back(*v);
  }
  return out;
}

}  // namespace

Dataset read_dataset(const fs::path& csv) {
  const CsvTable t = read_csv(csv);
  std::size_t dx = 0;
  while (t.has_column("x" + std::to_string(dx))) ++dx;
  if (dx == 0) throw DataError(csv.string() + ": no proxy columns x0, x1, ...");
  const std::size_t n = t.rows.size();
  Dataset d;
  d.x = num::Tensor(n, dx);
  for (std::size_t j = 0; j < dx; ++j) {
    const auto col = numeric_column(t, t.column("x" + std::to_string(j)), csv);
    for (std::size_t i = 0; i < n; ++i) d.x(i, j) = col[i];
  }
  d.t = numeric_column(t, t.column("t"), csv);
  d.y = numeric_column(t, t.column("y"), csv);
  std::size_t dz = 0;
  while (t.has_column("zfd" + std::to_string(dz))) ++dz;
  if (dz > 0) {
    HiddenColumns h;
    h.z_fd = num::Tensor(n, dz);
    for (std::size_t j = 0; j < dz; ++j) {
      const auto col = numeric_column(t, t.column("zfd" + std::to_string(j)), csv);
      for (std::size_t i = 0; i < n; ++i) h.z_fd(i, j) = col[i];
    }
    h.u = numeric_column(t, t.column("u"), csv);
    h.w1 = numeric_column(t, t.column("w1"), csv);
    h.w2 = numeric_column(t, t.column("w2"), csv);
    if (t.has_column("w_y")) h.w_y = numeric_column(t, t.column("w_y"), csv);
    if (t.has_column("w_e")) h.w_e = numeric_column(t, t.column("w_e"), csv);
    d.hidden = std::move(h);
  }
  const fs::path side = sidecar_path(csv);
  if (fs::exists(side)) {
    try {
      const json j = json::parse(read_text_file(side));
      if (j.contains("true_ate") && !j["true_ate"].is_null()) d.true_ate = j["true_ate"].get<double>();
      if (j.contains("provenance")) d.provenance = j["provenance"];
    } catch (const json::exception& e) {
      throw DataError(side.string() + ": " + e.what());
    }
  }
  d.validate();
  return d;
}

}  // namespace fdvae::io
