/*=========================================================================
 *
 *  Copyright The ictmsav Authors
 *
 *  Licensed under the Apache License, Version 2.0 (the "License");
 *  you may not use this file except in compliance with the License.
 *  You may obtain a copy of the License at
 *
 *         http://www.apache.org/licenses/LICENSE-2.0.txt
 *
 *  Unless required by applicable law or agreed to in writing, software
 *  distributed under the License is distributed on an "AS IS" BASIS,
 *  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *  See the License for the specific language governing permissions and
 *  limitations under the License.
 *
 *=========================================================================*/
#pragma once

#include <stdexcept>
#include <string>

namespace ictmsav {

/// Base of every error raised by the engine. The C API maps each subclass
/// onto one status code.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A tunable or argument outside its admissible range.
class ParameterError : public Error {
public:
  using Error::Error;
};

/// An input violating a documented precondition (dimension mismatch,
/// non-binary mask, g below its floor, ...).
class ContractViolation : public Error {
public:
  using Error::Error;
};

/// Inputs for which the model is undefined, e.g. an all-zero image.
class DegenerateInput : public Error {
public:
  using Error::Error;
};

/// A non-finite intermediate or an impossible branch inside a solver.
class NumericalFailure : public Error {
public:
  NumericalFailure(const std::string &what, int iteration = -1)
      : Error(iteration >= 0 ? what + " (iteration " + std::to_string(iteration) + ")" : what),
        iteration_(iteration) {}

  int iteration() const noexcept { return iteration_; }

private:
  int iteration_;
};

class IoError : public Error {
public:
  using Error::Error;
};

/// Malformed or unknown configuration entries.
class ConfigError : public Error {
public:
  using Error::Error;
};

} // namespace ictmsav
