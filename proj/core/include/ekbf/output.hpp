// Copyright 2026 The ekbf Authors
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

#include <filesystem>
#include <initializer_list>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ekbf/dynamics.hpp"
#include "ekbf/estimators.hpp"

namespace ekbf {

// Shortest round-trip text for a double (17 significant digits, '.' decimal).
std::string format_double(double v);

void write_events_csv(std::ostream& out, const EventResult& r);
void write_moments_csv(std::ostream& out, const MomentResult& r);
void write_laplace_csv(std::ostream& out, const LaplaceResult& r);
void write_forgetting_csv(std::ostream& out, const ForgettingResult& r);
void write_trace_csv(std::ostream& out, const TraceResult& r);
void write_gronwall_csv(std::ostream& out, const GronwallResult& r);
void write_trajectory_csv(std::ostream& out, const TrialRecord& rec);

// One check inside a scenario summary.
struct SummaryDetail {
    std::string check;
    bool pass = false;
    std::string ref;  // the inequality being tested
    nlohmann::json data;
};

struct Summary {
    std::string scenario;
    std::vector<SummaryDetail> details;
    bool pass() const;
};

// {scenario, pass, details[], refs[]}
nlohmann::json to_json(const Summary& s);

// Creates missing parent directories and overwrites the file.
void write_file(const std::filesystem::path& path, const std::string& text);

} // namespace ekbf
