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

#include <exception>
#include <iosfwd>
#include <string>

namespace wlab::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,
    kExitConfig = 2,
    kExitTrainingAbort = 3,
    kExitData = 4,
    kExitArtifact = 5,
};

// Exit code for an exception escaping a command.
int exit_code_for(const std::exception& e);

std::string version_string();

// Full command-line entry point. Reads "-" inputs from `in`, writes "-"
// outputs to `out` and diagnostics to `err`.
int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace wlab::cli
