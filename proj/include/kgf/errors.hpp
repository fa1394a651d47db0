// Copyright 2026 The kgf Authors
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

#include <stdexcept>
#include <string>

namespace kgf {

// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad or missing configuration (unknown provider, missing key, absent file
// named in the config). Maps to CLI exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed input text. Carries an optional line/column position.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& msg, long line = -1, long col = -1)
      : Error(format(msg, line, col)), line_(line), col_(col) {}

  long line() const { return line_; }
  long col() const { return col_; }

 private:
  static std::string format(const std::string& msg, long line, long col) {
    if (line < 0) return msg;
    std::string out = msg + " (line " + std::to_string(line);
    if (col >= 0) out += ", col " + std::to_string(col);
    return out + ")";
  }
  long line_;
  long col_;
};

// Transient transport failure talking to a remote provider; retryable.
class TransportError : public Error {
 public:
  using Error::Error;
};

// Non-retryable provider failure: refusal, malformed request, or a response
// that cannot be interpreted.
class ContentError : public Error {
 public:
  using Error::Error;
};

// Argument outside a function's numeric or structural domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Filesystem failure (unreadable/unwritable path).
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace kgf
