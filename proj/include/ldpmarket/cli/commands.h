// Copyright 2026 The ldpmarket Authors
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

#ifndef LDPMARKET_CLI_COMMANDS_H_
#define LDPMARKET_CLI_COMMANDS_H_

#include <ostream>
#include <string>
#include <vector>

namespace ldpmarket::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// Entry point shared by the binary and the tests. `args` excludes argv[0].
// Subcommands: simulate, demo, inspect-ledger, estimate.
int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err);

}  // namespace ldpmarket::cli

#endif  // LDPMARKET_CLI_COMMANDS_H_
