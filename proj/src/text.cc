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

#include "zsql/text.h"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace zsql {
namespace {

bool IsSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

bool IsSeparatedPunct(char c) {
  switch (c) {
    case ',': case '?': case '!': case ';': case ':': case '"':
    case '(': case ')': case '[': case ']': case '{': case '}':
      return true;
    default:
      return false;
  }
}

char Lower(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

void Flush(std::string& current, std::vector<std::string>& out) {
  if (current.empty()) return;
  // Split a trailing period unless the token is an abbreviation like "u.s."
  if (current.size() > 1 && current.back() == '.' &&
      current.find('.') == current.size() - 1) {
    current.pop_back();
    out.push_back(std::move(current));
    out.emplace_back(".");
  } else {
    out.push_back(std::move(current));
  }
  current.clear();
}

}  // namespace

std::vector<std::string> Tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  for (char raw : text) {
    const char c = Lower(raw);
    if (IsSpace(c)) {
      Flush(current, out);
    } else if (IsSeparatedPunct(c)) {
      Flush(current, out);
      out.emplace_back(1, c);
    } else {
      current.push_back(c);
    }
  }
  Flush(current, out);
  return out;
}

std::string Join(std::span<const std::string> tokens, std::string_view sep) {
  std::string out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out.append(sep);
    out.append(tokens[i]);
  }
  return out;
}

std::string NormalizeText(std::string_view text) {
  const auto tokens = Tokenize(text);
  return Join(tokens);
}

std::optional<double> ParseReal(std::string_view text) {
  while (!text.empty() && IsSpace(text.front())) text.remove_prefix(1);
  while (!text.empty() && IsSpace(text.back())) text.remove_suffix(1);
  if (text.empty()) return std::nullopt;
  std::string cleaned;
  cleaned.reserve(text.size());
  for (size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == ',') {
      // Only digit,digit counts as a thousands separator.
      if (i == 0 || i + 1 == text.size() || !std::isdigit(static_cast<unsigned char>(text[i - 1])) ||
          !std::isdigit(static_cast<unsigned char>(text[i + 1]))) {
        return std::nullopt;
      }
      continue;
    }
    cleaned.push_back(c);
  }
  const char* begin = cleaned.data();
  const char* end = cleaned.data() + cleaned.size();
  if (*begin == '+') ++begin;
  if (begin == end) return std::nullopt;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(begin, end, value, std::chars_format::fixed);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

std::string FormatReal(double value) {
  if (std::isfinite(value) && value == std::floor(value) &&
      std::fabs(value) < 1e15) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(value));
    return buf;
  }
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

}  // namespace zsql
