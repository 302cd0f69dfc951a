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

#include "ekbf/error.hpp"

namespace ekbf {

std::string_view to_string(Errc code) noexcept
{
    switch (code) {
    case Errc::InvalidMatrix: return "InvalidMatrix";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::NotPSD: return "NotPSD";
    case Errc::NotPD: return "NotPD";
    case Errc::SingularMatrix: return "SingularMatrix";
    case Errc::ModelNotContractive: return "ModelNotContractive";
    case Errc::NotReducible: return "NotReducible";
    case Errc::UnstableStep: return "UnstableStep";
    case Errc::DivergedFilter: return "DivergedFilter";
    case Errc::NoFixedPoint: return "NoFixedPoint";
    case Errc::NotStable: return "NotStable";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

} // namespace ekbf
