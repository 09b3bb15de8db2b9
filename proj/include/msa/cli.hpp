// Copyright 2026 The msa Authors.
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

// Command-line front end. Subcommands: synth, extract, train, eval, cross, viz.
//
// Every subcommand takes an optional JSON config (--config), dotted-path
// overrides (--set experiment.svm.c=0.5), or a previous run record
// (--from-record). Exit status: 0 ok, 1 validation error, 2 data error,
// 3 internal invariant violation; failures print one diagnostic line:
//   msa-error code=<n> kind=<validation|data|invariant> message=<text>

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

namespace msa::cli {

// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Sets `path` ("a.b.c") in `config`; the value is parsed as JSON when it
// parses, otherwise taken as a string.
void apply_override(nlohmann::json& config, const std::string& assignment);

}  // namespace msa::cli
