// Copyright 2026 The flsim Authors. All Rights Reserved.
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

namespace flsim {

enum class ErrorKind {
  kRuntime,     // numeric failure, I/O failure during a run
  kValidation,  // bad configuration, bad arguments, malformed input files
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error runtime_error(const std::string& what) { return Error(ErrorKind::kRuntime, what); }
inline Error validation_error(const std::string& what) { return Error(ErrorKind::kValidation, what); }

}  // namespace flsim
