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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mpcal
{

enum class Errc
{
    InvalidArgument,
    GridMismatch,
    ImpedanceMismatch,
    ZeroTransmission,
    SingularT,
    SingularReduction,
    ModelPole,
    DegenerateStandards,
    ZeroTracking,
    InsufficientSignal,
    PhaseTrackingAmbiguous,
    IncompleteDataset,
    MissingPair,
    SyntaxError,
    NonMonotonicFrequency,
    CountMismatch,
    UnsupportedParameter,
    FormatVersionMismatch,
    ChecksumMismatch,
    ConfigInvalid,
    IoError,
};

std::string_view errc_name(Errc code) noexcept;

// Single exception type used by the library; callers dispatch on code().
class Error : public std::runtime_error
{
  public:
    Error(Errc code, const std::string &message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code), message_(message)
    {
    }

    Errc code() const noexcept { return code_; }

    /// Message without the error-code prefix.
    const std::string &message() const noexcept { return message_; }

  private:
    Errc code_;
    std::string message_;
};

} // namespace mpcal
