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

#include "ekbf/output.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ekbf/error.hpp"

namespace ekbf {

namespace {

class CsvWriter {
public:
    CsvWriter(std::ostream& out, std::initializer_list<const char*> header) : out_(out)
    {
        bool first = true;
        for (const char* h : header) {
            out_ << (first ? "" : ",") << h;
            first = false;
        }
        out_ << '\n';
    }

    CsvWriter& operator<<(double v)
    {
        return cell(format_double(v));
    }
    CsvWriter& operator<<(int v)
    {
        return cell(std::to_string(v));
    }
    CsvWriter& operator<<(std::size_t v)
    {
        return cell(std::to_string(v));
    }
    CsvWriter& operator<<(bool v)
    {
        return cell(v ? "true" : "false");
    }
    void end()
    {
        out_ << '\n';
        first_ = true;
    }

private:
    CsvWriter& cell(const std::string& s)
    {
        out_ << (first_ ? "" : ",") << s;
        first_ = false;
        return *this;
    }

    std::ostream& out_;
    bool first_ = true;
};

} // namespace

std::string format_double(double v)
{
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_events_csv(std::ostream& out, const EventResult& r)
{
    CsvWriter csv(out, {"t", "delta", "frequency", "ci_low", "ci_high", "threshold", "pass"});
    for (const auto& row : r.rows) {
        csv << row.t << row.delta << row.frequency.point << row.frequency.ci_low
            << row.frequency.ci_high << row.threshold << row.pass;
        csv.end();
    }
}

void write_moments_csv(std::ostream& out, const MomentResult& r)
{
    CsvWriter csv(out, {"t", "n", "value", "ci_low", "ci_high", "bound", "pass"});
    for (const auto& row : r.rows) {
        csv << row.t << row.n << row.value.point << row.value.ci_low << row.value.ci_high
            << row.bound << row.pass;
        csv.end();
    }
}

void write_laplace_csv(std::ostream& out, const LaplaceResult& r)
{
    CsvWriter csv(out,
                  {"t", "coefficient", "value", "ci_low", "ci_high", "bound", "overflowed", "pass"});
    for (const auto& row : r.rows) {
        csv << row.t << row.coefficient << row.value.point << row.value.ci_low
            << row.value.ci_high << row.bound << row.overflowed << row.pass;
        csv.end();
    }
}

void write_forgetting_csv(std::ostream& out, const ForgettingResult& r)
{
    CsvWriter csv(out, {"t", "mean_delta_pow", "mean_delta", "mean_delta_sq"});
    for (std::size_t j = 0; j < r.times.size(); ++j) {
        csv << r.times[j] << r.mean_delta_pow[j] << r.mean_delta[j] << r.mean_delta_sq[j];
        csv.end();
    }
}

void write_trace_csv(std::ostream& out, const TraceResult& r)
{
    CsvWriter csv(out, {"max_violation", "tolerance", "n_trials", "n_diverged", "pass"});
    csv << r.max_violation << r.tolerance << r.n_trials << r.n_diverged << r.pass;
    csv.end();
}

void write_gronwall_csv(std::ostream& out, const GronwallResult& r)
{
    CsvWriter csv(out, {"t", "n", "value", "ci_low", "ci_high", "bound", "oracle", "pass"});
    for (const auto& row : r.rows) {
        csv << row.t << row.n << row.value.point << row.value.ci_low << row.value.ci_high
            << row.bound << row.oracle << row.pass;
        csv.end();
    }
}

void write_trajectory_csv(std::ostream& out, const TrialRecord& rec)
{
    if (rec.times.empty()) {
        return;
    }
    const std::size_t dim = rec.signal.front().size();
    const std::size_t n_filters = rec.filters.front().size();
    out << 't';
    for (std::size_t i = 0; i < dim; ++i) {
        out << ",x" << i;
    }
    for (std::size_t f = 0; f < n_filters; ++f) {
        for (std::size_t i = 0; i < dim; ++i) {
            out << ",xhat" << f << '_' << i;
        }
        out << ",trP" << f;
    }
    if (!rec.delta.empty()) {
        out << ",delta";
    }
    out << '\n';
    for (std::size_t j = 0; j < rec.times.size(); ++j) {
        out << format_double(rec.times[j]);
        for (double x : rec.signal[j]) {
            out << ',' << format_double(x);
        }
        for (std::size_t f = 0; f < n_filters; ++f) {
            for (double x : rec.filters[j][f].mean) {
                out << ',' << format_double(x);
            }
            out << ',' << format_double(rec.trace[j][f]);
        }
        if (!rec.delta.empty()) {
            out << ',' << format_double(rec.delta[j]);
        }
        out << '\n';
    }
}

bool Summary::pass() const
{
    for (const auto& d : details) {
        if (!d.pass) {
            return false;
        }
    }
    return !details.empty();
}

nlohmann::json to_json(const Summary& s)
{
    nlohmann::json j = {{"scenario", s.scenario},
                        {"pass", s.pass()},
                        {"details", nlohmann::json::array()},
                        {"refs", nlohmann::json::array()}};
    for (const auto& d : s.details) {
        j["details"].push_back(
            {{"check", d.check}, {"pass", d.pass}, {"ref", d.ref}, {"data", d.data}});
        j["refs"].push_back(d.ref);
    }
    return j;
}

void write_file(const std::filesystem::path& path, const std::string& text)
{
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(Errc::InvalidArgument, "cannot write " + path.string());
    }
    out << text;
}

} // namespace ekbf
