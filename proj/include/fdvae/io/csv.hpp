#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fdvae/dataset.hpp"

namespace fdvae::io {

// Shortest decimal text that parses back to the same double.
std::string format_double(double v);
// Whole-cell parse; nullopt on any trailing garbage or empty cell.
std::optional<double> parse_double(std::string_view s);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Throws DataError naming the column when absent.
  std::size_t column(std::string_view name) const;
  bool has_column(std::string_view name) const;
};

// RFC 4180 subset: comma separator, double-quoted fields with "" escapes,
// LF or CRLF line ends, blank lines skipped. Ragged rows throw DataError
// with the line number.
CsvTable parse_csv(std::string_view text);
CsvTable read_csv(const std::filesystem::path& path);

std::string csv_escape(std::string_view field);
void write_text_file(const std::filesystem::path& path, std::string_view text);
std::string read_text_file(const std::filesystem::path& path);

// Dataset CSV layout: x0..x{d-1}, t, y and, when hidden columns exist,
// zfd0..zfd{k-1}, u, w1, w2 [, w_y] [, w_e]. A sidecar "<path>.json" holds
// the true ATE and provenance.
std::filesystem::path sidecar_path(const std::filesystem::path& csv);
void write_dataset(const Dataset& d, const std::filesystem::path& csv);
Dataset read_dataset(const std::filesystem::path& csv);

}  // namespace fdvae::io
