/*
 * Copyright 2026 The WLab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace wlab {

// Base of every error the library throws. The CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid configuration: bad hyperparameters, inconsistent model shapes, unknown keys.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Tensor shape or index contract violated.
class ShapeError : public Error {
public:
    using Error::Error;
};

// Non-finite values where finite ones are required.
class NumericError : public Error {
public:
    using Error::Error;
};

// Malformed input data (JSON lines, vocab files, labels).
class DataError : public Error {
public:
    using Error::Error;
};

// On-disk artifact is corrupt, truncated, or from an incompatible version.
class FormatError : public Error {
public:
    using Error::Error;
};

// Optimizer refused to take a step.
class TrainingAbort : public Error {
public:
    using Error::Error;
};

}  // namespace wlab
