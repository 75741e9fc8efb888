// Copyright 2026 The IKS Simulator Authors
//
// Licensed under the Apache License, Version 2.0 (the "License"); you may not use this file except in compliance
// with the License. You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software distributed under the License
// is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express
// or implied. See the License for the specific language governing permissions and limitations under the License.

#include "iks/toml.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace iks::toml {

namespace {

struct Cursor {
  const std::string& text;
  std::size_t pos = 0;
  int line = 1;

  bool done() const { return pos >= text.size(); }
  char peek() const { return text[pos]; }
  char take() {
    char c = text[pos++];
    if (c == '\n') ++line;
    return c;
  }
  void skip_ws() {
    while (!done() && (peek() == ' ' || peek() == '\t')) ++pos;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw ValidationError("toml parse error at line " + std::to_string(line) +
                          ": " + what);
  }
};

void skip_to_eol(Cursor& c) {
  while (!c.done() && c.peek() != '\n') c.take();
  if (!c.done()) c.take();
}

Value parse_value(Cursor& c);

Value parse_array(Cursor& c) {
  c.take();  // '['
  Array arr;
  for (;;) {
    c.skip_ws();
    while (!c.done() && (c.peek() == '\n' || c.peek() == '#')) {
      if (c.peek() == '#') skip_to_eol(c); else c.take();
      c.skip_ws();
    }
    if (c.done()) c.fail("unterminated array");
    if (c.peek() == ']') {
      c.take();
      break;
    }
    arr.push_back(parse_value(c));
    c.skip_ws();
    while (!c.done() && (c.peek() == '\n' || c.peek() == '#')) {
      if (c.peek() == '#') skip_to_eol(c); else c.take();
      c.skip_ws();
    }
    if (!c.done() && c.peek() == ',') c.take();
  }
  return Value{std::move(arr)};
}

Value parse_value(Cursor& c) {
  c.skip_ws();
  if (c.done()) c.fail("expected value");
  const char ch = c.peek();
  if (ch == '[') return parse_array(c);
  if (ch == '"') {
    c.take();
    std::string s;
    while (!c.done() && c.peek() != '"') {
      char x = c.take();
      if (x == '\\' && !c.done()) {
        char esc = c.take();
        switch (esc) {
          case 'n': s += '\n'; break;
          case 't': s += '\t'; break;
          default: s += esc; break;
        }
      } else {
        s += x;
      }
    }
    if (c.done()) c.fail("unterminated string");
    c.take();
    return Value{std::move(s)};
  }
  // bare token: bool or number
  std::string tok;
  while (!c.done() && c.peek() != '\n' && c.peek() != '#' && c.peek() != ',' &&
         c.peek() != ']' && c.peek() != ' ' && c.peek() != '\t')
    tok += c.take();
  if (tok == "true") return Value{true};
  if (tok == "false") return Value{false};
  // allow TOML-style numeric underscores
  std::string digits;
  for (char x : tok)
    if (x != '_') digits += x;
  try {
    std::size_t used = 0;
    double d = std::stod(digits, &used);
    if (used != digits.size()) c.fail("bad number '" + tok + "'");
    return Value{d};
  } catch (const std::exception&) {
    c.fail("bad value '" + tok + "'");
  }
}

}  // namespace

Table parse(const std::string& text) {
  Table out;
  Cursor c{text};
  std::string prefix;
  while (!c.done()) {
    c.skip_ws();
    if (c.done()) break;
    const char ch = c.peek();
    if (ch == '\n' || ch == '#') {
      skip_to_eol(c);
      continue;
    }
    if (ch == '[') {
      c.take();
      std::string name;
      while (!c.done() && c.peek() != ']') name += c.take();
      if (c.done()) c.fail("unterminated section header");
      c.take();
      prefix = name.empty() ? "" : name + ".";
      skip_to_eol(c);
      continue;
    }
    std::string key;
    while (!c.done() && c.peek() != '=' && c.peek() != '\n') key += c.take();
    while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
    if (c.done() || c.peek() != '=') c.fail("expected '=' after key '" + key + "'");
    c.take();
    Value v = parse_value(c);
    out[prefix + key] = std::move(v);
    c.skip_ws();
    if (!c.done() && c.peek() == '#') skip_to_eol(c);
    else if (!c.done() && c.peek() == '\n') c.take();
    else if (!c.done()) c.fail("trailing characters after value for '" + key + "'");
  }
  return out;
}

Table parse_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open scenario file: " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse(ss.str());
}

}  // namespace iks::toml
