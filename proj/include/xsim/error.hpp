// Copyright 2026 The xsim Authors. All Rights Reserved.
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

namespace xsim {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input data, malformed files or invalid arguments. The CLI maps these
// to exit code 2.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Missing files, unreadable or unwritable paths. Exit code 1.
class IoError : public Error {
 public:
  using Error::Error;
};

// Diagnostics produced by the binary container readers.
enum class FormatDiag {
  kBadMagic,
  kUnsupportedVersion,
  kUnsupportedDtype,
  kTruncatedHeader,
  kTruncatedData,
  kTrailingBytes,
  kBadDimensions,
  kEmpty,
  kBadOffsets,
  kNonFinite,
  kBadPooling,
  kBadReserved,
};

const char* to_string(FormatDiag diag);

class FormatError : public ValidationError {
 public:
  FormatError(FormatDiag diag, const std::string& what)
      : ValidationError(what), diag_(diag) {}

  FormatDiag diag() const noexcept { return diag_; }

 private:
  FormatDiag diag_;
};

}  // namespace xsim
