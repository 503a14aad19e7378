// Copyright 2026 The locbo Authors.
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

#pragma once

// Small helpers shared by the CSV and flat-text file formats.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace locbo {

// Shortest representation that parses back to the identical double.
std::string format_double(double v);
// "%.17g" representation (17 significant digits).
std::string format_double17(double v);

// Strict parse of the whole field; throws InvalidInput mentioning `what`.
double parse_double(std::string_view field, std::string_view what);
long long parse_integer(std::string_view field, std::string_view what);

std::vector<std::string_view> split_fields(std::string_view line, char sep = ',');

std::string read_file(const std::filesystem::path& path);
// Writes atomically enough for our purposes: truncate + write, throws on failure.
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace locbo
