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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ekbf/dynamics.hpp"
#include "ekbf/models.hpp"

namespace ekbf {

enum class Scenario {
    SignalVsFlow,
    EkfVsSignal,
    CoupledForgetting,
    TraceBound,
    GronwallTest,
    Chi2Laplace,
};

std::string_view to_string(Scenario s);
Scenario parse_scenario(std::string_view name);

// Scalar test process dY = (-a Y + u) dt + sqrt(v Y + w Y^2) dB, Y = ||X||^2.
struct GronwallParams {
    double a = 1.0;
    double w = 0.5;
    double u = 0.0;
    double v = 0.0;
    double x0_sq = 1.0;
    std::vector<int> n_orders{2};
    std::size_t n_paths = 10000;
    double dt = 1e-3;
};

struct ExperimentConfig {
    ExperimentConfig(SignalModel m, ObservationModel o, Vec start, std::vector<FilterState> filters)
        : model(std::move(m)), obs(std::move(o)), x0(std::move(start)), inits(std::move(filters))
    {
    }

    SignalModel model;
    ObservationModel obs;
    Vec x0;
    std::vector<FilterState> inits;
    double dt = 1e-3;
    double T = 10.0;
    std::size_t n_trials = 1000;
    std::uint64_t seed = 1;
    std::size_t record_stride = 10;
    Scenario scenario = Scenario::SignalVsFlow;
    std::vector<double> delta_grid{0.5, 1.0, 2.0, 4.0};
    std::vector<int> n_orders{1, 2};
    std::vector<double> checkpoints{1.0, 5.0, 10.0};
    double alpha = 1.1;
    double epsilon = 0.5;
    double burn_in_fraction = 0.2;
    double stationary_from = 0.5;  // window [stationary_from * T, T]
    std::size_t bootstrap_resamples = 200;
    GronwallParams gronwall;

    std::size_t steps() const;
};

// Throws Error(Errc::ConfigError) on missing or malformed keys.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

} // namespace ekbf
