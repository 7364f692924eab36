// Copyright 2026 The clickloop Authors
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

namespace clickloop {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two grids that must share dimensions do not.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A configuration value is outside its legal range.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Caller-supplied data is malformed (out-of-bounds click, empty mask, ...).
class InputError : public Error {
 public:
  using Error::Error;
};

/// An operation was called in a state that violates its precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// An external plug-in (subprocess segmenter, file on disk) failed.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace clickloop
