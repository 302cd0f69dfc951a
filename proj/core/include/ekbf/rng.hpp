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
#include <random>

namespace ekbf {

using Rng = std::mt19937_64;

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Independent generator for trial `stream` under a master seed. The result
// depends only on (seed, stream), never on which worker runs the trial.
inline Rng make_stream(std::uint64_t seed, std::uint64_t stream)
{
    std::seed_seq seq{static_cast<std::uint32_t>(mix64(seed)),
                      static_cast<std::uint32_t>(mix64(seed) >> 32),
                      static_cast<std::uint32_t>(mix64(stream ^ 0xa5a5a5a5a5a5a5a5ULL)),
                      static_cast<std::uint32_t>(mix64(stream ^ 0xa5a5a5a5a5a5a5a5ULL) >> 32)};
    return Rng(seq);
}

} // namespace ekbf
