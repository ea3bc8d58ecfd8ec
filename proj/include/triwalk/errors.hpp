// Copyright 2026 The triwalk Authors
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

namespace triwalk {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter is out of its valid domain (non-positive mass, Ts <= 0, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Problem data is structurally unusable (non-PD Hessian, inverted bounds,
/// undetectable observer model).
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// Footstep or path planning failed.
class PlanningError : public Error {
 public:
  using Error::Error;
};

/// A trajectory was sampled outside its domain.
class QueryError : public Error {
 public:
  using Error::Error;
};

/// The MPC could not produce a command even after softening its outputs.
class ControllerFault : public Error {
 public:
  using Error::Error;
};

/// Bisection bracket does not straddle the survive/fall boundary.
class BracketError : public Error {
 public:
  using Error::Error;
};

}  // namespace triwalk
