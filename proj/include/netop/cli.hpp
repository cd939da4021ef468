// Copyright 2026 The netop Authors.
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

// The netop command line: generate, oracle-check, train, evaluate, inspect,
// report and vocab.

#ifndef NETOP_CLI_HPP_
#define NETOP_CLI_HPP_

#include <ostream>
#include <string>
#include <vector>

namespace netop::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,          // oracle or evaluation failure
  kConfigError = 2,      // bad flags, config or unwritable path
  kNotConverged = 3,
  kCheckpointError = 4,
};

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace netop::cli

#endif  // NETOP_CLI_HPP_
