/*
 * Copyright 2026 the gpcmtest authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "gpcm/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string_view>

namespace gpcm {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

bool parse_number(std::string_view cell, double& out) {
  cell = trim(cell);
  if (cell.empty()) return false;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  const auto res = std::from_chars(begin, end, out);
  return res.ec == std::errc() && res.ptr == end;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      cells.emplace_back(trim(std::string_view(line).substr(start)));
      break;
    }
    cells.emplace_back(trim(std::string_view(line).substr(start, comma - start)));
    start = comma + 1;
  }
  return cells;
}

}  // namespace

Dataset parse_csv(std::istream& in, const std::string& source) {
  std::vector<std::vector<std::string>> rows;
  std::vector<int> line_numbers;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    rows.push_back(split_line(line));
    line_numbers.push_back(line_no);
  }
  if (rows.empty()) throw CsvError(source + ": no rows");

  const std::size_t width = rows.front().size();
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != width)
      throw CsvError(source + ":" + std::to_string(line_numbers[r]) + ": row has " +
                     std::to_string(rows[r].size()) + " fields, expected " +
                     std::to_string(width));
  }

  // Header detection: data rows are numeric everywhere except possibly the
  // final label column, so a non-numeric cell before the last column can
  // only belong to a header.
  double ignored;
  bool has_header = false;
  for (std::size_t c = 0; c + 1 < width; ++c) {
    if (!parse_number(rows[0][c], ignored)) {
      has_header = true;
      break;
    }
  }
  if (width == 1 && !parse_number(rows[0][0], ignored)) has_header = true;

  const std::size_t first_data = has_header ? 1 : 0;
  if (first_data >= rows.size()) throw CsvError(source + ": header but no data rows");

  bool has_labels = false;
  if (width >= 2) {
    for (std::size_t r = first_data; r < rows.size(); ++r) {
      if (!parse_number(rows[r][width - 1], ignored)) {
        has_labels = true;
        break;
      }
    }
  }

  const std::size_t ncols = has_labels ? width - 1 : width;
  const std::size_t nrows = rows.size() - first_data;
  Dataset out;
  out.values.resize(static_cast<Eigen::Index>(nrows), static_cast<Eigen::Index>(ncols));
  for (std::size_t r = first_data; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < ncols; ++c) {
      double v;
      if (!parse_number(rows[r][c], v))
        throw CsvError(source + ":" + std::to_string(line_numbers[r]) + ": column " +
                       std::to_string(c + 1) + ": '" + rows[r][c] + "' is not a number");
      out.values(static_cast<Eigen::Index>(r - first_data), static_cast<Eigen::Index>(c)) = v;
    }
    if (has_labels) out.labels.push_back(rows[r][width - 1]);
  }

  for (std::size_t c = 0; c < ncols; ++c) {
    out.columns.push_back(has_header ? rows[0][c] : "x" + std::to_string(c + 1));
  }
  return out;
}

Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CsvError(path + ": cannot open file");
  return parse_csv(in, path);
}

}  // namespace gpcm
