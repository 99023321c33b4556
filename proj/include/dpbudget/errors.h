// Copyright 2026 The dpbudget Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DPBUDGET_ERRORS_H_
#define DPBUDGET_ERRORS_H_

#include <stdexcept>
#include <string>

namespace dpbudget {

// Error categories. Each maps to a process exit code in the CLI:
// usage/config/domain/parse -> 2, precondition -> 3, numerical -> 4.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const { return 2; }
};

// An argument lies outside the mathematical domain of the operation
// (non-positive sigma, delta outside (0,1), ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// The operation was invoked on an object in the wrong state
// (mode mismatch, empty ledger, empty list).
class UsageError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// A stated precondition of a privacy bound does not hold, e.g. q > 1/(16 sigma)
// for subsampled accounting.
class PreconditionError : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return 3; }
};

class NumericalError : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return 4; }
};

}  // namespace dpbudget

#endif  // DPBUDGET_ERRORS_H_
