# SPDX-License-Identifier: Apache-2.0
#
# mpcal - in-situ multiport VNA calibration for microwave imaging systems
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
# http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
# ------------------------------------------------------------------------

"""In-situ multiport VNA calibration for microwave imaging systems."""

from ._mpcal import (
    MpcalError,
    correct_reflection,
    embed_reflection,
    parse_touchstone,
    reduce_ports,
    run_cli,
    s_to_t,
    t_to_s,
    write_touchstone,
)

__version__ = "0.1.0"

__all__ = [
    "MpcalError",
    "correct_reflection",
    "embed_reflection",
    "parse_touchstone",
    "reduce_ports",
    "run_cli",
    "s_to_t",
    "t_to_s",
    "write_touchstone",
]
