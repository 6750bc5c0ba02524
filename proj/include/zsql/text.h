// Copyright 2026 The zsql Authors.
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

#ifndef ZSQL_TEXT_H_
#define ZSQL_TEXT_H_

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace zsql {

// Lowercases, splits on whitespace, and separates punctuation. Questions,
// column names and condition values all go through this one rule so that
// value spans align token-for-token.
std::vector<std::string> Tokenize(std::string_view text);

std::string Join(std::span<const std::string> tokens, std::string_view sep = " ");

// Canonical text form used for span matching and value comparison:
// Join(Tokenize(text)).
std::string NormalizeText(std::string_view text);

// Parses the whole (trimmed) string as a real number. Accepts thousands
// separators ("1,234") and a leading '+'/'-'.
std::optional<double> ParseReal(std::string_view text);

// Shortest round-trip decimal form; whole numbers print without a fraction.
std::string FormatReal(double value);

}  // namespace zsql

#endif  // ZSQL_TEXT_H_
