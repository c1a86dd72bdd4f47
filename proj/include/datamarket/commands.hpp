// Copyright 2026 The datamarket Authors
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

#include <iosfwd>
#include <string>

#include "datamarket/config.hpp"

namespace datamarket {

// Batch commands behind the CLI. Each writes its reports under out_dir and
// returns a process exit status; verify and sweep return nonzero when any
// check fails. All output is a pure function of (config, seed).
int cmd_baseline(const RunConfig& config, const std::string& out_dir,
                 std::ostream& log);
int cmd_price(const RunConfig& config, const std::string& out_dir,
              std::ostream& log);
int cmd_run(const RunConfig& config, const std::string& out_dir,
            std::ostream& log);
int cmd_verify(const RunConfig& config, const std::string& out_dir,
               std::ostream& log, double d_tamper = 1.0);
int cmd_sweep(const RunConfig& config, const std::string& out_dir,
              std::ostream& log, double d_tamper = 1.0);

}  // namespace datamarket
