// Copyright 2026 The prspider Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace prspider {

enum class VerifySuite { finite, online, baselines, all };

std::string_view to_string(VerifySuite suite) noexcept;
/// Accepts finite, online, baselines, all. Throws std::invalid_argument.
VerifySuite parse_verify_suite(std::string_view name);

struct PropertyResult {
  std::string suite;
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct VerifyOptions {
  /// Test hook: runs PR-SPIDER without the epoch-end gradient restart.
  bool skip_epoch_restart = false;
  /// Monte-Carlo restarts for the restart-variance bound.
  std::size_t restarts = 500;
};

std::vector<PropertyResult> run_verification(VerifySuite suite, const VerifyOptions& options = {});

inline constexpr std::string_view kVerifyCsvHeader =
    "suite,property,status,measured,tolerance,detail";

void write_verify_csv(std::ostream& out, const std::vector<PropertyResult>& results);

/// `verify [--suite <name>]`. Prints the CSV report; returns 4 when any
/// property fails.
int cmd_verify(std::string_view suite, bool skip_epoch_restart, std::ostream& out,
               std::ostream& err);

}  // namespace prspider
