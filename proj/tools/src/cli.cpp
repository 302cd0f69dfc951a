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

#include "ekbf/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ekbf/bounds.hpp"
#include "ekbf/config.hpp"
#include "ekbf/error.hpp"
#include "ekbf/estimators.hpp"
#include "ekbf/output.hpp"

namespace ekbf {

namespace {

namespace fs = std::filesystem;

constexpr const char* kRefTrace = "tr(P_t) <= exp(-lambda_dA t) tr(P_0) + tr(R1) / lambda_dA";
constexpr const char* kRefSignalEvent =
    "P(||X_t - x_t||^2 <= varpi(delta) tr(R1) / lambda_A) >= 1 - exp(-delta)";
constexpr const char* kRefFilterEvent =
    "P(||X_t - Xhat_t||^2 <= 4 varpi(delta) tr(R1) sigma^2 / lambda_A + initial terms) >= "
    "1 - exp(-delta)";
constexpr const char* kRefSignalMoment = "E(||X_t - x_t||^{2n})^{1/n} <= (n - 1/2) tr(R1) / lambda_A";
constexpr const char* kRefFilterMoment =
    "E(||X_t - Xhat_t||^m)^{2/m} <= (2m - 1) {tr(R1) sigma^2 / (2 lambda_A) + ramp rho(S) tr(P_0)^2}";
constexpr const char* kRefStationary = "stationary E||X_t - x_t||^2 = tr(R1) / (2 lambda_A)";
constexpr const char* kRefChi2 = "E exp(||X_0 - Xhat_0||^2 / (4 r1 rho(P_0))) <= e";
constexpr const char* kRefSignalLaplace =
    "sup_t E exp((1 - eps) lambda_A ||X_t - x_t||^2 / (4 e tr(R1))) <= "
    "exp((1 - eps) / (4 e)) / 2 + e / (2 sqrt(2 eps))";
constexpr const char* kRefFilterLaplace =
    "E exp((1 - eps) lambda_A ||X_t - Xhat_t||^2 / (4 e sigma^2 tr(R1))) <= "
    "exp((1 - eps) / (4 e)) / 2 + e / (2 sqrt(2 eps)) for t >= t_0";
constexpr const char* kRefForgetting =
    "E(Delta_t^{delta/2})^{2/delta} decays at rate >= (1 - eps) Lambda";
constexpr const char* kRefUniform = "sup_t E(Delta_t^n) < infinity";
constexpr const char* kRefGronwall =
    "E||X_t||^n <= exp(n int rho(A) + n (n - 1) / 2 int W)^{1/2} ||X_0||^n";
constexpr const char* kRefGronwallSourced =
    "E(||X_t||^n)^{2/n} <= int_0^t exp(-[int_s^t lambda_n + (n - 1) / 2 int_0^s w]) "
    "[u + (n - 1) / 2 v] ds";

struct Options {
    std::string config;
    std::string scenario;
    std::string out_dir = "ekbf-out";
    std::optional<std::size_t> trials;
    std::optional<std::uint64_t> seed;
    std::size_t trial_index = 0;
};

ExperimentConfig load(const Options& o)
{
    ExperimentConfig cfg = load_config(o.config);
    if (!o.scenario.empty()) {
        cfg.scenario = parse_scenario(o.scenario);
    }
    if (o.trials) {
        if (*o.trials < 1) {
            throw Error(Errc::ConfigError, "--trials must be at least 1");
        }
        cfg.n_trials = *o.trials;
        cfg.gronwall.n_paths = *o.trials;
    }
    if (o.seed) {
        cfg.seed = *o.seed;
    }
    return cfg;
}

template <class Writer, class Result>
void write_csv(const fs::path& path, Writer writer, const Result& r)
{
    std::ostringstream s;
    writer(s, r);
    write_file(path, s.str());
}

Summary run_scenario(const ExperimentConfig& cfg, const fs::path& dir)
{
    Summary summary;
    summary.scenario = std::string(to_string(cfg.scenario));
    switch (cfg.scenario) {
    case Scenario::SignalVsFlow:
    case Scenario::EkfVsSignal: {
        const bool filter = cfg.scenario == Scenario::EkfVsSignal;
        const ErrorSamples events = collect_errors(cfg, cfg.scenario, cfg.x0);
        const EventResult ev = estimate_event_probability(cfg, events);
        write_csv(dir / "events.csv", write_events_csv, ev);
        summary.details.push_back({"events", ev.pass, filter ? kRefFilterEvent : kRefSignalEvent, ev});

        const Vec start = filter ? cfg.inits.front().mean : cfg.x0;
        const ErrorSamples moments =
            start == cfg.x0 ? events : collect_errors(cfg, cfg.scenario, start);
        const MomentResult mo = estimate_moments(cfg, moments);
        write_csv(dir / "moments.csv", write_moments_csv, mo);
        const bool rows_pass = std::all_of(mo.rows.begin(), mo.rows.end(),
                                           [](const MomentRow& r) { return r.pass; }) &&
                               mo.n_diverged == 0;
        summary.details.push_back(
            {"moments", rows_pass, filter ? kRefFilterMoment : kRefSignalMoment, mo});
        if (mo.stationary) {
            summary.details.push_back({"stationary", mo.stationary->pass, kRefStationary,
                                       nlohmann::json(mo)["stationary"]});
        }
        const LaplaceResult la = estimate_laplace(cfg, moments);
        write_csv(dir / "laplace.csv", write_laplace_csv, la);
        summary.details.push_back(
            {"laplace", la.pass, filter ? kRefFilterLaplace : kRefSignalLaplace, la});
        break;
    }
    case Scenario::TraceBound: {
        const TraceResult tr = verify_trace_bound(cfg);
        write_csv(dir / "trace.csv", write_trace_csv, tr);
        summary.details.push_back({"trace", tr.pass, kRefTrace, tr});
        break;
    }
    case Scenario::Chi2Laplace: {
        const LaplaceResult la = estimate_laplace(cfg);
        write_csv(dir / "laplace.csv", write_laplace_csv, la);
        summary.details.push_back({"chi2-laplace", la.pass, kRefChi2, la});
        break;
    }
    case Scenario::CoupledForgetting: {
        const ForgettingResult fr = estimate_forgetting_rate(cfg);
        write_csv(dir / "forgetting.csv", write_forgetting_csv, fr);
        const bool decided = fr.status == ForgettingStatus::Pass ||
                             fr.status == ForgettingStatus::Fail;
        const bool rate_ok =
            decided && fr.fitted_rate + 0.5 * (fr.rate_ci_high - fr.rate_ci_low) >= fr.required_rate;
        summary.details.push_back({"forgetting-rate", rate_ok, kRefForgetting, fr});
        summary.details.push_back({"uniform-moments",
                                   decided && !fr.trend[0].increasing && !fr.trend[1].increasing,
                                   kRefUniform,
                                   {{"trend_n1", nlohmann::json(fr)["trend_n1"]},
                                    {"trend_n2", nlohmann::json(fr)["trend_n2"]}}});
        break;
    }
    case Scenario::GronwallTest: {
        const GronwallResult gr = gronwall_test_process(cfg);
        write_csv(dir / "gronwall.csv", write_gronwall_csv, gr);
        summary.details.push_back(
            {"gronwall", gr.pass, gr.with_sources ? kRefGronwallSourced : kRefGronwall, gr});
        break;
    }
    }
    return summary;
}

int verify(const ExperimentConfig& cfg, const Options& o, std::ostream& out)
{
    const fs::path dir = fs::path(o.out_dir) / std::string(to_string(cfg.scenario));
    const Summary summary = run_scenario(cfg, dir);
    const nlohmann::json j = to_json(summary);
    write_file(dir / "summary.json", j.dump(2) + "\n");
    for (const auto& d : summary.details) {
        out << (d.pass ? "PASS " : "FAIL ") << summary.scenario << ' ' << d.check << '\n';
    }
    out << "wrote " << dir.string() << '\n';
    return summary.pass() ? 0 : 1;
}

int check(const ExperimentConfig& cfg, const Options& o, std::ostream& out)
{
    const ProblemConstants c = ProblemConstants::from(cfg.model, cfg.obs, cfg.inits.front().P);
    const double dist2 = squared_norm(cfg.x0 - cfg.inits.front().mean);
    const BoundsReport report = make_bounds_report(c, cfg.alpha, cfg.checkpoints, cfg.delta_grid, dist2);
    nlohmann::json j = report;
    j["constants"] = c;
    const std::string text = j.dump(2) + "\n";
    write_file(fs::path(o.out_dir) / "check.json", text);
    out << text;
    return 0;
}

int simulate(const ExperimentConfig& cfg, const Options& o, std::ostream& out)
{
    const PathBundle bundle = PathBundle::generate(cfg.dt, cfg.steps(), cfg.model.dim(),
                                                   cfg.obs.obs_dim(), cfg.seed, o.trial_index);
    const TrialRecord rec = simulate_coupled(cfg.model, cfg.obs, cfg.x0, cfg.inits, bundle,
                                             RecordOptions{cfg.record_stride, {}});
    std::ostringstream s;
    write_trajectory_csv(s, rec);
    const fs::path path = fs::path(o.out_dir) / "trajectory.csv";
    write_file(path, s.str());
    out << "wrote " << path.string() << " (" << rec.times.size() << " rows";
    if (rec.diverged) {
        out << ", diverged at step " << rec.diverged_step;
    }
    out << ")\n";
    return rec.diverged ? 1 : 0;
}

int report(const Options& o, std::ostream& out, std::ostream& err)
{
    const fs::path root(o.out_dir);
    std::vector<fs::path> found;
    if (fs::is_directory(root)) {
        for (const auto& entry : fs::directory_iterator(root)) {
            if (fs::is_regular_file(entry.path() / "summary.json")) {
                found.push_back(entry.path() / "summary.json");
            }
        }
    }
    if (found.empty()) {
        err << "no summaries under " << root.string() << '\n';
        return 2;
    }
    std::sort(found.begin(), found.end());
    bool all = true;
    for (const auto& path : found) {
        std::ifstream in(path);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            err << "cannot parse " << path.string() << ": " << e.what() << '\n';
            return 2;
        }
        const bool pass = j.value("pass", false);
        all = all && pass;
        out << (pass ? "PASS " : "FAIL ") << j.value("scenario", std::string("?")) << '\n';
        for (const auto& d : j.value("details", nlohmann::json::array())) {
            out << "  " << (d.value("pass", false) ? "pass " : "FAIL ")
                << d.value("check", std::string()) << "  [" << d.value("ref", std::string())
                << "]\n";
        }
    }
    return all ? 0 : 1;
}

} // namespace

int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Extended Kalman-Bucy filter stability checks", "ekbf"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&](CLI::App* sub, bool needs_config) {
        auto* opt = sub->add_option("--config", o.config, "JSON experiment config");
        if (needs_config) {
            opt->required();
        }
        sub->add_option("--out", o.out_dir, "output directory")->capture_default_str();
        sub->add_option("--trials", o.trials, "override sim.n_trials (and gronwall paths)");
        sub->add_option("--seed", o.seed, "override sim.seed");
    };
    auto* sim = app.add_subcommand("simulate", "write one coupled trajectory as CSV");
    add_common(sim, true);
    sim->add_option("--trial", o.trial_index, "trial index (selects the random stream)");
    auto* chk = app.add_subcommand("check", "print closed-form bounds and conditions as JSON");
    add_common(chk, true);
    auto* ver = app.add_subcommand("verify", "run the Monte Carlo checks of a scenario");
    add_common(ver, true);
    ver->add_option("--scenario", o.scenario, "override test.scenario");
    auto* fgt = app.add_subcommand("forgetting", "coupled-filter forgetting experiment");
    add_common(fgt, true);
    auto* gro = app.add_subcommand("gronwall", "stochastic Gronwall test process");
    add_common(gro, true);
    auto* rep = app.add_subcommand("report", "summarize every scenario under --out");
    add_common(rep, false);

    std::vector<std::string> reversed(args.begin(), args.end());
    std::reverse(reversed.begin(), reversed.end());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << e.what() << '\n';
        return 2;
    }

    try {
        if (rep->parsed()) {
            return report(o, out, err);
        }
        if (fgt->parsed()) {
            o.scenario = "coupled-forgetting";
        } else if (gro->parsed()) {
            o.scenario = "gronwall-test";
        }
        const ExperimentConfig cfg = load(o);
        if (sim->parsed()) {
            return simulate(cfg, o, out);
        }
        if (chk->parsed()) {
            return check(cfg, o, out);
        }
        return verify(cfg, o, out);
    } catch (const Error& e) {
        err << e.what() << '\n';
        return e.code() == Errc::ConfigError ? 2 : 1;
    } catch (const std::exception& e) {
        err << e.what() << '\n';
        return 1;
    }
}

int run_cli(int argc, const char* const* argv)
{
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) {
        args.emplace_back(argv[i]);
    }
    return run_cli(args, std::cout, std::cerr);
}

} // namespace ekbf
