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

#include "ekbf/config.hpp"

#include <cmath>
#include <fstream>
#include <memory>

#include <nlohmann/json.hpp>

#include "ekbf/error.hpp"

namespace ekbf {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg)
{
    throw Error(Errc::ConfigError, msg);
}

const json& require(const json& j, const char* key, const std::string& where)
{
    if (!j.is_object() || !j.contains(key)) {
        fail("missing key " + where + "." + key);
    }
    return j.at(key);
}

double to_double(const json& j, const std::string& what)
{
    if (!j.is_number()) {
        fail(what + " must be a number");
    }
    return j.get<double>();
}

Mat to_mat(const json& j, const std::string& what)
{
    if (j.is_number()) {
        return Mat{{j.get<double>()}};
    }
    if (!j.is_array() || j.empty()) {
        fail(what + " must be a number or a non-empty array of rows");
    }
    const std::size_t rows = j.size();
    std::size_t cols = 0;
    for (const auto& row : j) {
        if (!row.is_array()) {
            fail(what + " rows must be arrays");
        }
        cols = std::max(cols, row.size());
    }
    Mat m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        if (j[i].size() != cols) {
            fail(what + " is ragged");
        }
        for (std::size_t k = 0; k < cols; ++k) {
            m(i, k) = to_double(j[i][k], what);
        }
    }
    return m;
}

SymMat to_sym(const json& j, const std::string& what)
{
    const Mat m = to_mat(j, what);
    if (!m.is_square()) {
        fail(what + " must be square");
    }
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t k = i + 1; k < m.cols(); ++k) {
            if (std::abs(m(i, k) - m(k, i)) > 1e-12 * (1.0 + std::abs(m(i, k)))) {
                fail(what + " must be symmetric");
            }
        }
    }
    return SymMat(m);
}

Vec to_vec(const json& j, const std::string& what)
{
    if (j.is_number()) {
        return Vec{j.get<double>()};
    }
    if (!j.is_array()) {
        fail(what + " must be a number or an array");
    }
    Vec v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        v[i] = to_double(j[i], what);
    }
    return v;
}

template <class T>
T value_or(const json& j, const char* key, T fallback)
{
    if (!j.is_object() || !j.contains(key)) {
        return fallback;
    }
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        fail(std::string("bad value for ") + key + ": " + e.what());
    }
}

SymMat noise_matrix(const json& m, std::size_t dim)
{
    if (m.contains("R1")) {
        return to_sym(m.at("R1"), "model.R1");
    }
    if (m.contains("R1_scale")) {
        return to_double(m.at("R1_scale"), "model.R1_scale") * SymMat::identity(dim);
    }
    fail("model needs R1 or R1_scale");
}

SignalModel build_model(const json& m, const std::string& where);

std::size_t model_dim(const json& m, const std::string& where)
{
    const auto variant = value_or<std::string>(m, "variant", "");
    if (variant == "linear") {
        return to_mat(require(m, "A", where), where + ".A").rows();
    }
    if (variant == "quadratic_cubic") {
        return to_mat(require(m, "Q1", where), where + ".Q1").rows();
    }
    if (variant == "interacting") {
        return value_or<std::size_t>(m, "dim", 0);
    }
    if (variant == "conjugated") {
        return to_mat(require(m, "T", where), where + ".T").rows();
    }
    fail(where + ".variant must be linear, quadratic_cubic, interacting or conjugated");
}

SignalModel build_model(const json& m, const std::string& where)
{
    const std::size_t dim = model_dim(m, where);
    if (dim == 0) {
        fail(where + " has zero dimension");
    }
    const auto variant = m.at("variant").get<std::string>();
    const SymMat R1 = noise_matrix(m, dim);
    if (variant == "linear") {
        return SignalModel::linear(to_mat(m.at("A"), where + ".A"), R1);
    }
    if (variant == "quadratic_cubic") {
        return SignalModel::quadratic_cubic(to_sym(m.at("Q1"), where + ".Q1"),
                                            to_vec(require(m, "q", where), where + ".q"),
                                            to_sym(require(m, "Q2", where), where + ".Q2"),
                                            value_or(m, "beta", 1.0), R1);
    }
    if (variant == "interacting") {
        auto drift = pairwise_cubic_interaction(
            to_double(require(m, "u1", where), where + ".u1"),
            to_double(require(m, "u2", where), where + ".u2"), value_or(m, "kappa1", 0.0),
            value_or(m, "kappa2", 0.0), value_or(m, "beta", 1.0));
        return SignalModel::interacting(dim, std::move(drift), R1);
    }
    auto base = std::make_shared<const SignalModel>(
        build_model(require(m, "base", where), where + ".base"));
    return SignalModel::conjugated(std::move(base), to_mat(m.at("T"), where + ".T"), R1);
}

FilterState build_filter(const json& f, std::size_t dim, const std::string& where)
{
    FilterState s{Vec(dim), SymMat::identity(dim), 0.0};
    if (f.contains("xhat0")) {
        s.mean = to_vec(f.at("xhat0"), where + ".xhat0");
    }
    if (f.contains("P0")) {
        s.P = to_sym(f.at("P0"), where + ".P0");
    }
    if (s.mean.size() != dim || s.P.dim() != dim) {
        fail(where + " has the wrong dimension");
    }
    if (!is_psd(s.P)) {
        fail(where + ".P0 must be positive semidefinite");
    }
    return s;
}

ExperimentConfig parse_impl(const json& j)
{
    const json empty = json::object();
    const json& m = require(j, "model", "config");
    SignalModel model = build_model(m, "model");
    const std::size_t dim = model.dim();

    const json& o = require(j, "obs", "config");
    ObservationModel obs(to_mat(require(o, "B", "obs"), "obs.B"),
                         to_sym(require(o, "R2", "obs"), "obs.R2"));
    if (obs.signal_dim() != dim) {
        fail("obs.B column count must equal the signal dimension");
    }

    const json& sim = j.contains("sim") ? j.at("sim") : empty;
    Vec x0 = sim.contains("x0") ? to_vec(sim.at("x0"), "sim.x0") : Vec(dim);
    if (x0.size() != dim) {
        fail("sim.x0 has the wrong dimension");
    }

    std::vector<FilterState> inits;
    const json& f = j.contains("filter") ? j.at("filter") : empty;
    if (f.contains("inits")) {
        if (!f.at("inits").is_array() || f.at("inits").empty()) {
            fail("filter.inits must be a non-empty array");
        }
        for (std::size_t i = 0; i < f.at("inits").size(); ++i) {
            inits.push_back(build_filter(f.at("inits")[i], dim, "filter.inits"));
        }
    } else {
        inits.push_back(build_filter(f, dim, "filter"));
    }

    ExperimentConfig cfg(std::move(model), std::move(obs), std::move(x0), std::move(inits));
    cfg.dt = value_or(sim, "dt", cfg.dt);
    cfg.T = value_or(sim, "T", cfg.T);
    cfg.n_trials = value_or(sim, "n_trials", cfg.n_trials);
    cfg.seed = value_or(sim, "seed", cfg.seed);
    cfg.record_stride = value_or(sim, "record_stride", cfg.record_stride);
    if (!(cfg.dt > 0.0) || !(cfg.T > 0.0)) {
        fail("sim.dt and sim.T must be positive");
    }
    if (cfg.n_trials < 1) {
        fail("sim.n_trials must be at least 1");
    }
    if (cfg.record_stride < 1) {
        fail("sim.record_stride must be at least 1");
    }

    const json& t = j.contains("test") ? j.at("test") : empty;
    if (t.contains("scenario")) {
        cfg.scenario = parse_scenario(t.at("scenario").get<std::string>());
    }
    cfg.delta_grid = value_or(t, "delta_grid", cfg.delta_grid);
    cfg.n_orders = value_or(t, "n_orders", cfg.n_orders);
    if (t.contains("checkpoints")) {
        cfg.checkpoints = t.at("checkpoints").get<std::vector<double>>();
    } else {
        std::erase_if(cfg.checkpoints, [&](double c) { return c > cfg.T; });
        if (cfg.checkpoints.empty()) {
            cfg.checkpoints.push_back(cfg.T);
        }
    }
    cfg.alpha = value_or(t, "alpha", cfg.alpha);
    cfg.epsilon = value_or(t, "epsilon", cfg.epsilon);
    cfg.burn_in_fraction = value_or(t, "burn_in_fraction", cfg.burn_in_fraction);
    cfg.stationary_from = value_or(t, "stationary_from", cfg.stationary_from);
    cfg.bootstrap_resamples = value_or(t, "bootstrap_resamples", cfg.bootstrap_resamples);
    for (double d : cfg.delta_grid) {
        if (!(d >= 0.0)) {
            fail("test.delta_grid entries must be nonnegative");
        }
    }
    for (int n : cfg.n_orders) {
        if (n < 1 || n > 4) {
            fail("test.n_orders entries must lie in 1..4");
        }
    }
    for (double c : cfg.checkpoints) {
        if (!(c >= 0.0) || c > cfg.T * (1.0 + 1e-12)) {
            fail("test.checkpoints must lie in [0, sim.T]");
        }
    }
    if (!(cfg.epsilon > 0.0 && cfg.epsilon <= 1.0)) {
        fail("test.epsilon must lie in (0, 1]");
    }
    if (!(cfg.burn_in_fraction >= 0.0 && cfg.burn_in_fraction < 1.0) ||
        !(cfg.stationary_from >= 0.0 && cfg.stationary_from < 1.0)) {
        fail("test.burn_in_fraction and test.stationary_from must lie in [0, 1)");
    }

    if (t.contains("gronwall")) {
        const json& g = t.at("gronwall");
        GronwallParams& p = cfg.gronwall;
        p.a = value_or(g, "a", p.a);
        p.w = value_or(g, "w", p.w);
        p.u = value_or(g, "u", p.u);
        p.v = value_or(g, "v", p.v);
        p.x0_sq = value_or(g, "x0_sq", p.x0_sq);
        p.n_orders = value_or(g, "n_orders", p.n_orders);
        p.n_paths = value_or(g, "n_paths", p.n_paths);
        p.dt = value_or(g, "dt", p.dt);
        if (p.w < 0.0 || p.u < 0.0 || p.v < 0.0 || p.x0_sq < 0.0 || !(p.dt > 0.0) ||
            p.n_paths < 1) {
            fail("test.gronwall needs w, u, v, x0_sq >= 0, dt > 0 and n_paths >= 1");
        }
    }
    return cfg;
}

} // namespace

std::string_view to_string(Scenario s)
{
    switch (s) {
    case Scenario::SignalVsFlow:
        return "signal-vs-flow";
    case Scenario::EkfVsSignal:
        return "ekf-vs-signal";
    case Scenario::CoupledForgetting:
        return "coupled-forgetting";
    case Scenario::TraceBound:
        return "trace-bound";
    case Scenario::GronwallTest:
        return "gronwall-test";
    case Scenario::Chi2Laplace:
        return "chi2-laplace";
    }
    return "unknown";
}

Scenario parse_scenario(std::string_view name)
{
    for (Scenario s : {Scenario::SignalVsFlow, Scenario::EkfVsSignal, Scenario::CoupledForgetting,
                       Scenario::TraceBound, Scenario::GronwallTest, Scenario::Chi2Laplace}) {
        if (to_string(s) == name) {
            return s;
        }
    }
    throw Error(Errc::ConfigError, "unknown scenario '" + std::string(name) + "'");
}

std::size_t ExperimentConfig::steps() const
{
    return static_cast<std::size_t>(std::llround(T / dt));
}

ExperimentConfig parse_config(const nlohmann::json& j)
{
    try {
        return parse_impl(j);
    } catch (const Error& e) {
        if (e.code() == Errc::ConfigError) {
            throw;
        }
        throw Error(Errc::ConfigError, e.what());
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::ConfigError, e.what());
    }
}

ExperimentConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error(Errc::ConfigError, "cannot open config " + path.string());
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::ConfigError, "cannot parse " + path.string() + ": " + e.what());
    }
    return parse_config(j);
}

} // namespace ekbf
