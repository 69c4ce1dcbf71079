// Copyright 2026 The epiroute Authors
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

#ifndef EPIROUTE_IO_HPP
#define EPIROUTE_IO_HPP

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace epiroute {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Writes to `path.tmp` then renames over `path`.
void write_file_atomic(const std::string& path, std::string_view contents);
std::string read_file(const std::string& path);

/// Decimal with 12 significant digits, '.' separator regardless of locale.
std::string fmt_num(double v);

/// Small helper to accumulate CSV text.
class CsvWriter {
 public:
  explicit CsvWriter(const std::vector<std::string>& header);
  CsvWriter& row(const std::vector<std::string>& cells);
  const std::string& str() const { return text_; }

 private:
  std::size_t width_;
  std::string text_;
};

}  // namespace epiroute

#endif  // EPIROUTE_IO_HPP
