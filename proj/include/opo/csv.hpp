// Copyright 2026 The opokit Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef OPO_CSV_HPP
#define OPO_CSV_HPP

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace opo {

/// First line of every CSV the toolkit writes; readers skip '#' lines.
inline constexpr std::string_view kCsvVersionPrefix = "# opokit-csv v1";

struct CsvTable {
  std::string source;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;

  std::optional<std::size_t> column(std::string_view name) const;
  /// Throws ConfigError naming the source and line when `name` is absent.
  std::size_t require_column(std::string_view name) const;
  /// Empty fields read as NaN; anything else must parse fully.
  double number(std::size_t row, std::size_t col) const;
};

CsvTable read_csv(std::istream& in, std::string source = "<stream>");
CsvTable read_csv_file(const std::filesystem::path& path);

/// Shortest round-trip-safe text for a double; NaN and absent values
/// become an empty field.
std::string format_number(double value, int significant = 10);

class CsvWriter {
 public:
  CsvWriter(std::ostream& out, std::string_view kind, const std::vector<std::string>& header);
  void row(const std::vector<std::string>& fields);
  void comment(std::string_view text);

 private:
  std::ostream& out_;
  std::size_t width_;
};

}  // namespace opo

#endif  // OPO_CSV_HPP
