// SPDX-License-Identifier: Apache-2.0
//
// mpcal - in-situ multiport VNA calibration for microwave imaging systems
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "mpcal/errors.hpp"

namespace mpcal
{

std::string_view errc_name(Errc code) noexcept
{
    switch (code)
    {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::GridMismatch: return "GridMismatch";
    case Errc::ImpedanceMismatch: return "ImpedanceMismatch";
    case Errc::ZeroTransmission: return "ZeroTransmission";
    case Errc::SingularT: return "SingularT";
    case Errc::SingularReduction: return "SingularReduction";
    case Errc::ModelPole: return "ModelPole";
    case Errc::DegenerateStandards: return "DegenerateStandards";
    case Errc::ZeroTracking: return "ZeroTracking";
    case Errc::InsufficientSignal: return "InsufficientSignal";
    case Errc::PhaseTrackingAmbiguous: return "PhaseTrackingAmbiguous";
    case Errc::IncompleteDataset: return "IncompleteDataset";
    case Errc::MissingPair: return "MissingPair";
    case Errc::SyntaxError: return "SyntaxError";
    case Errc::NonMonotonicFrequency: return "NonMonotonicFrequency";
    case Errc::CountMismatch: return "CountMismatch";
    case Errc::UnsupportedParameter: return "UnsupportedParameter";
    case Errc::FormatVersionMismatch: return "FormatVersionMismatch";
    case Errc::ChecksumMismatch: return "ChecksumMismatch";
    case Errc::ConfigInvalid: return "ConfigInvalid";
    case Errc::IoError: return "IoError";
    }
    return "Unknown";
}

} // namespace mpcal
