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


#include <benchmark/benchmark.h>

#include "ekbf/dynamics.hpp"
#include "ekbf/linalg.hpp"
#include "ekbf/models.hpp"
#include "ekbf/rng.hpp"

namespace {

using namespace ekbf;

SymMat random_sym(std::size_t n, Rng& rng)
{
    std::normal_distribution<double> gauss;
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            m(i, j) = gauss(rng);
        }
    }
    return symmetrize(m);
}

SignalModel model_for(std::size_t dim)
{
    return SignalModel::quadratic_cubic(SymMat::identity(dim), Vec(dim, 0.1),
                                        0.5 * SymMat::identity(dim), 1.0, SymMat::identity(dim));
}

void BM_JacobiEigen(benchmark::State& state)
{
    Rng rng = make_stream(1, 0);
    const SymMat m = random_sym(static_cast<std::size_t>(state.range(0)), rng);
    for (auto _ : state) {
        benchmark::DoNotOptimize(jacobi_eigen(m));
    }
}
BENCHMARK(BM_JacobiEigen)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->Arg(16);

void BM_StepEkf(benchmark::State& state)
{
    const auto dim = static_cast<std::size_t>(state.range(0));
    const SignalModel model = model_for(dim);
    const ObservationModel obs(Mat::identity(dim), SymMat::identity(dim));
    FilterState s{Vec(dim, 0.5), SymMat::identity(dim), 0.0};
    const Vec dY(dim, 1e-3);
    for (auto _ : state) {
        s = step_ekf(s, model, obs, dY, 1e-3);
        benchmark::DoNotOptimize(s);
    }
}
BENCHMARK(BM_StepEkf)->Arg(1)->Arg(2)->Arg(4);

void BM_CoupledTrial(benchmark::State& state)
{
    const std::size_t dim = 2;
    const auto steps = static_cast<std::size_t>(state.range(0));
    const SignalModel model = model_for(dim);
    const ObservationModel obs(Mat::identity(dim), SymMat::identity(dim));
    const std::vector<FilterState> inits{FilterState{Vec(dim, 0.0), SymMat::identity(dim), 0.0},
                                         FilterState{Vec(dim, 1.0), SymMat::identity(dim), 0.0}};
    std::uint64_t trial = 0;
    for (auto _ : state) {
        const PathBundle bundle = PathBundle::generate(1e-3, steps, dim, dim, 5, trial++);
        benchmark::DoNotOptimize(
            simulate_coupled(model, obs, Vec{1.0, -1.0}, inits, bundle, RecordOptions{100, {}}));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(steps));
}
BENCHMARK(BM_CoupledTrial)->Arg(1000)->Arg(10000);

} // namespace

BENCHMARK_MAIN();
