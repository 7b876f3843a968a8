/*
 * Copyright 2026 The FedSim Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef FEDSIM_TOOLS_COMMANDS_H_
#define FEDSIM_TOOLS_COMMANDS_H_

#include <ostream>
#include <string>
#include <vector>

namespace fedsim::cli {

// Entry point shared by main() and the tests. `args` excludes the program
// name. Data goes to `out`, diagnostics to `err`; returns the exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Worker count from FEDSIM_WORKERS, or 1 when unset.
int default_workers();

}  // namespace fedsim::cli

#endif  // FEDSIM_TOOLS_COMMANDS_H_
