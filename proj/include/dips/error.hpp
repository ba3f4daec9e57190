//
// Copyright 2026 The DIPS Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
#pragma once

#include <stdexcept>
#include <string>

namespace dips {

// Base of every error raised by the library. Callers that only care about
// "something in dips failed" catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A function argument is outside its documented domain (non-positive epsilon,
// empty weight list, lo >= hi, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Distribution parameters outside their support.
class ParameterDomain : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

// A charge would push the effective spend of a ledger past its total.
class BudgetExhausted : public Error {
 public:
  using Error::Error;
};

// Iterative procedure (redraw loop, Newton solver) gave up.
class NonConvergence : public Error {
 public:
  using Error::Error;
};

// A data value lies outside the declared domain of its column or axis.
class OutOfDomain : public Error {
 public:
  using Error::Error;
};

// Every sanitized histogram cell was legitimized to zero; nothing to sample.
class AllCellsZero : public Error {
 public:
  using Error::Error;
};

// Sanitized statistics leave a posterior improper.
class PosteriorDegenerate : public Error {
 public:
  using Error::Error;
};

// An estimator is undefined for the given data (constant column, n too
// small).
class Degenerate : public Error {
 public:
  using Error::Error;
};

class RankDeficient : public Error {
 public:
  using Error::Error;
};

// Invalid study configuration or CLI input.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace dips
