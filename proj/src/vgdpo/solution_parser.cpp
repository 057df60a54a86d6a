// Copyright 2026 The vgdpo Authors
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

#include "vgdpo/solution_parser.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace vgdpo {
namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool is_all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), is_digit);
}

bool iequals_prefix(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(s[i])) != prefix[i]) return false;
  }
  return true;
}

// Length of a leading list marker ("Step 3:", "3.", "3)") including the
// whitespace after it, or 0.
std::size_t list_marker_length(std::string_view s) {
  std::size_t i = 0;
  bool step_word = false;
  if (iequals_prefix(s, "step")) {
    step_word = true;
    i = 4;
    while (i < s.size() && is_space(s[i])) ++i;
  }
  std::size_t digits_start = i;
  while (i < s.size() && is_digit(s[i])) ++i;
  if (i == digits_start) return 0;
  if (i < s.size() && (s[i] == ':' || s[i] == '.' || s[i] == ')')) {
    ++i;
  } else if (!step_word) {
    return 0;
  }
  if (i < s.size() && !is_space(s[i])) return 0;
  while (i < s.size() && is_space(s[i])) ++i;
  return i;
}

// True when `s` (already trimmed) is nothing but a list marker awaiting its
// terminating punctuation, e.g. "3" or "Step 3".
bool is_bare_marker(std::string_view s) {
  if (is_all_digits(s)) return true;
  if (!iequals_prefix(s, "step")) return false;
  s.remove_prefix(4);
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  return is_all_digits(s);
}

void push_segment(std::string_view text, std::size_t begin, std::size_t end,
                  StepList& out) {
  while (begin < end && is_space(text[begin])) ++begin;
  while (end > begin && is_space(text[end - 1])) --end;
  std::size_t marker = list_marker_length(text.substr(begin, end - begin));
  begin += marker;
  while (begin < end && is_space(text[begin])) ++begin;
  if (begin == end) return;
  out.steps.emplace_back(text.substr(begin, end - begin));
  out.spans.push_back({begin, end - begin});
}

std::string to_lower_ascii(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

// `\text{X}` -> `X` for the given command, when the braces balance.
void unwrap_command(std::string& s, std::string_view command) {
  std::string pattern = std::string(command) + "{";
  std::size_t pos = 0;
  while ((pos = s.find(pattern, pos)) != std::string::npos) {
    std::size_t open = pos + pattern.size() - 1;
    int depth = 0;
    std::size_t close = std::string::npos;
    for (std::size_t i = open; i < s.size(); ++i) {
      if (s[i] == '{') ++depth;
      if (s[i] == '}' && --depth == 0) {
        close = i;
        break;
      }
    }
    if (close == std::string::npos) return;
    s = s.substr(0, pos) + s.substr(open + 1, close - open - 1) + s.substr(close + 1);
  }
}

std::string remove_thousands_commas(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == ',' && i > 0 && is_digit(s[i - 1]) && i + 3 < s.size() &&
        is_digit(s[i + 1]) && is_digit(s[i + 2]) && is_digit(s[i + 3]) &&
        (i + 4 >= s.size() || !is_digit(s[i + 4]))) {
      continue;
    }
    out += s[i];
  }
  return out;
}

std::string normalize_once(std::string s, std::span<const std::string> extra_units) {
  replace_all(s, "\\dfrac", "\\frac");
  replace_all(s, "\\tfrac", "\\frac");
  unwrap_command(s, "\\text");
  unwrap_command(s, "\\mbox");
  unwrap_command(s, "\\mathrm");
  replace_all(s, "\\%", "%");
  replace_all(s, "\\$", "$");
  replace_all(s, "\\!", "");
  replace_all(s, "\\,", "");
  replace_all(s, "\\;", "");
  replace_all(s, "^{\\circ}", "degrees");
  replace_all(s, "^\\circ", "degrees");

  s = to_lower_ascii(std::move(s));
  std::erase_if(s, is_space);
  s = remove_thousands_commas(s);

  if (s.size() > 1 && s.front() == '$') s.erase(0, 1);
  if (s.size() > 1 && s.back() == '.') s.pop_back();

  std::vector<std::string> units(std::begin(kDefaultUnitTokens),
                                 std::end(kDefaultUnitTokens));
  for (const auto& u : extra_units) units.push_back(to_lower_ascii(u));
  std::stable_sort(units.begin(), units.end(),
                   [](const std::string& a, const std::string& b) {
                     return a.size() > b.size();
                   });
  for (const auto& unit : units) {
    if (unit.empty() || s.size() <= unit.size()) continue;
    if (s.compare(s.size() - unit.size(), unit.size(), unit) != 0) continue;
    char before = s[s.size() - unit.size() - 1];
    if (is_digit(before) || before == '}') {
      s.erase(s.size() - unit.size());
      break;
    }
  }

  if (auto value = parse_number(s)) return format_rational(*value);
  return s;
}

std::optional<Integer> parse_integer(std::string_view s) {
  if (!is_all_digits(s)) return std::nullopt;
  // Boost reads a leading 0 as an octal prefix.
  auto nz = s.find_first_not_of('0');
  if (nz == std::string_view::npos) return Integer(0);
  return Integer(std::string(s.substr(nz)));
}

std::optional<Rational> parse_unsigned(std::string_view s) {
  if (s.empty()) return std::nullopt;

  if (s.starts_with("\\frac{")) {
    auto close1 = s.find('}', 6);
    if (close1 == std::string_view::npos || close1 + 1 >= s.size() ||
        s[close1 + 1] != '{' || s.back() != '}') {
      return std::nullopt;
    }
    auto num = s.substr(6, close1 - 6);
    auto den = s.substr(close1 + 2, s.size() - close1 - 3);
    bool neg = false;
    if (!num.empty() && num.front() == '-') {
      neg = true;
      num.remove_prefix(1);
    }
    auto a = parse_integer(num);
    auto b = parse_integer(den);
    if (!a || !b || b->is_zero()) return std::nullopt;
    Rational r(*a, *b);
    return neg ? Rational(-r) : r;
  }

  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    auto a = parse_integer(s.substr(0, slash));
    auto b = parse_integer(s.substr(slash + 1));
    if (!a || !b || b->is_zero()) return std::nullopt;
    return Rational(*a, *b);
  }

  auto dot = s.find('.');
  auto int_part = s.substr(0, dot);
  if (dot == std::string_view::npos) {
    auto a = parse_integer(int_part);
    if (!a) return std::nullopt;
    return Rational(*a);
  }
  auto frac_part = s.substr(dot + 1);
  if (!is_all_digits(frac_part)) return std::nullopt;
  if (!int_part.empty() && !is_all_digits(int_part)) return std::nullopt;
  Integer whole = int_part.empty() ? Integer(0) : *parse_integer(int_part);
  Integer scale = boost::multiprecision::pow(Integer(10), static_cast<unsigned>(frac_part.size()));
  Integer frac = *parse_integer(frac_part);
  return Rational(whole * scale + frac, scale);
}

}  // namespace

StepList segment_steps(std::string_view text) {
  StepList out;
  std::size_t seg_start = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (c == '\n') {
      push_segment(text, seg_start, i, out);
      seg_start = ++i;
      continue;
    }
    if ((c == '.' || c == '!' || c == '?') && i + 1 < text.size() &&
        is_space(text[i + 1])) {
      std::string_view so_far = text.substr(seg_start, i - seg_start);
      while (!so_far.empty() && is_space(so_far.front())) so_far.remove_prefix(1);
      while (!so_far.empty() && is_space(so_far.back())) so_far.remove_suffix(1);
      if (c == '.' && is_bare_marker(so_far)) {
        ++i;
        continue;
      }
      push_segment(text, seg_start, i + 1, out);
      seg_start = ++i;
      continue;
    }
    ++i;
  }
  push_segment(text, seg_start, text.size(), out);
  return out;
}

ExtractedAnswer extract_boxed_answer(std::string_view text) {
  ExtractedAnswer out;

  constexpr std::string_view kBox = "\\boxed";
  std::size_t last_open = std::string_view::npos;
  for (std::size_t pos = text.find(kBox); pos != std::string_view::npos;
       pos = text.find(kBox, pos + 1)) {
    std::size_t j = pos + kBox.size();
    while (j < text.size() && is_space(text[j])) ++j;
    if (j < text.size() && text[j] == '{') last_open = j;
  }

  if (last_open != std::string_view::npos) {
    int depth = 0;
    for (std::size_t i = last_open; i < text.size(); ++i) {
      if (text[i] == '{') ++depth;
      if (text[i] == '}' && --depth == 0) {
        std::size_t begin = last_open + 1;
        std::size_t end = i;
        while (begin < end && is_space(text[begin])) ++begin;
        while (end > begin && is_space(text[end - 1])) --end;
        out.answer = std::string(text.substr(begin, end - begin));
        out.offset = begin;
        out.from_box = true;
        return out;
      }
    }
    out.diagnostics.emplace_back("unbalanced \\boxed braces");
  }

  // Fallback: last number on the final non-empty line.
  std::size_t line_end = text.size();
  std::size_t line_begin = 0;
  while (line_end > 0) {
    std::size_t nl = text.rfind('\n', line_end - 1);
    line_begin = nl == std::string_view::npos ? 0 : nl + 1;
    std::string_view line = text.substr(line_begin, line_end - line_begin);
    if (std::any_of(line.begin(), line.end(), [](char c) { return !is_space(c); })) break;
    if (nl == std::string_view::npos) {
      line_end = 0;
      break;
    }
    line_end = nl;
  }
  std::string_view line = text.substr(line_begin, line_end - line_begin);

  std::optional<std::pair<std::size_t, std::size_t>> best;
  std::size_t i = 0;
  while (i < line.size()) {
    if (!is_digit(line[i])) {
      ++i;
      continue;
    }
    std::size_t begin = i;
    if (begin > 0 && line[begin - 1] == '-' &&
        (begin == 1 || !std::isalnum(static_cast<unsigned char>(line[begin - 2])))) {
      --begin;
    }
    while (i < line.size() &&
           (is_digit(line[i]) ||
            (line[i] == ',' && i + 1 < line.size() && is_digit(line[i + 1])))) {
      ++i;
    }
    if (i + 1 < line.size() && line[i] == '.' && is_digit(line[i + 1])) {
      ++i;
      while (i < line.size() && is_digit(line[i])) ++i;
    } else if (i + 1 < line.size() && line[i] == '/' && is_digit(line[i + 1])) {
      ++i;
      while (i < line.size() && is_digit(line[i])) ++i;
    }
    best = std::make_pair(begin, i - begin);
  }

  if (best) {
    out.answer = std::string(line.substr(best->first, best->second));
    out.offset = line_begin + best->first;
  } else {
    out.diagnostics.emplace_back("no answer found");
  }
  return out;
}

std::optional<Rational> parse_number(std::string_view s) {
  bool negative = false;
  if (!s.empty() && (s.front() == '+' || s.front() == '-')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  auto value = parse_unsigned(s);
  if (!value) return std::nullopt;
  return negative ? Rational(-*value) : *value;
}

std::string format_rational(const Rational& value) {
  Integer num = boost::multiprecision::numerator(value);
  Integer den = boost::multiprecision::denominator(value);
  if (den == 1) return num.str();

  // Terminating decimal when the denominator is 2^a * 5^b.
  Integer d = den;
  unsigned twos = 0, fives = 0;
  while (d % 2 == 0) { d /= 2; ++twos; }
  while (d % 5 == 0) { d /= 5; ++fives; }
  if (d != 1) return num.str() + "/" + den.str();

  unsigned digits = std::max(twos, fives);
  Integer scaled = num * boost::multiprecision::pow(Integer(10), digits) / den;
  bool negative = scaled < 0;
  std::string mag = (negative ? Integer(-scaled) : scaled).str();
  if (mag.size() <= digits) mag.insert(0, digits - mag.size() + 1, '0');
  mag.insert(mag.size() - digits, ".");
  return negative ? "-" + mag : mag;
}

NormalizedAnswer normalize_answer(std::string_view raw,
                                  std::span<const std::string> extra_units) {
  NormalizedAnswer out;
  out.raw = std::string(raw);
  std::string current(raw);
  for (int iter = 0; iter < 16; ++iter) {
    std::string next = normalize_once(current, extra_units);
    if (next == current) break;
    current = std::move(next);
  }
  out.canonical = current;
  out.numeric = parse_number(current);
  return out;
}

bool relaxed_equal(const Rational& a, const Rational& b) {
  double x = a.convert_to<double>();
  double y = b.convert_to<double>();
  double scale = std::max({1.0, std::abs(x), std::abs(y)});
  return std::abs(x - y) <= kRelaxedTolerance * scale;
}

bool answers_match(const NormalizedAnswer& pred, const NormalizedAnswer& gold) {
  if (pred.canonical == gold.canonical) return true;
  if (pred.numeric && gold.numeric) {
    return *pred.numeric == *gold.numeric || relaxed_equal(*pred.numeric, *gold.numeric);
  }
  return false;
}

}  // namespace vgdpo
