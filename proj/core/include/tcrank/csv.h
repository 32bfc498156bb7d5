// Copyright 2026 The tcrank Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TCRANK_CSV_H_
#define TCRANK_CSV_H_

#include <cstddef>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace tcrank {

using CsvRow = std::vector<std::string>;

// Minimal RFC 4180 support: fields containing a comma, quote or newline are
// quoted, with embedded quotes doubled.
std::string CsvEscape(std::string_view field);
void WriteCsvRow(std::ostream& os, const CsvRow& row);

// Header plus rows. Fields are looked up by header name.
class CsvTable {
 public:
  static CsvTable Parse(std::istream& is);
  static CsvTable ParseString(std::string_view text);

  const CsvRow& header() const { return header_; }
  const std::vector<CsvRow>& rows() const { return rows_; }

  // Throws kParseError when the column is missing.
  std::size_t Column(std::string_view name) const;
  bool HasColumn(std::string_view name) const;

 private:
  CsvRow header_;
  std::vector<CsvRow> rows_;
};

// Shortest decimal representation that round-trips a double.
std::string FormatDouble(double value);

}  // namespace tcrank

#endif  // TCRANK_CSV_H_
