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

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace mpcal
{

/// Worker count from MPCAL_THREADS (0 or unset = hardware concurrency).
inline std::size_t threads_from_env()
{
    std::size_t n = 0;
    if (const char *env = std::getenv("MPCAL_THREADS"))
    {
        try
        {
            n = static_cast<std::size_t>(std::stoul(env));
        }
        catch (const std::exception &)
        {
            n = 0;
        }
    }
    if (n == 0)
        n = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    return n;
}

/// Runs fn(0..count-1) on up to `threads` workers (0 = threads_from_env()). If tasks throw,
/// the exception of the lowest failing index is rethrown so results do not depend on timing.
template <typename Fn>
void parallel_for(std::size_t count, Fn &&fn, std::size_t threads = 0)
{
    if (threads == 0)
        threads = threads_from_env();
    threads = std::min(threads, count);
    std::vector<std::exception_ptr> errors(count);
    if (threads <= 1)
    {
        for (std::size_t i = 0; i < count; ++i)
        {
            try
            {
                fn(i);
            }
            catch (...)
            {
                errors[i] = std::current_exception();
            }
        }
    }
    else
    {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (std::size_t w = 0; w < threads; ++w)
        {
            pool.emplace_back([&, w] {
                for (std::size_t i = w; i < count; i += threads)
                {
                    try
                    {
                        fn(i);
                    }
                    catch (...)
                    {
                        errors[i] = std::current_exception();
                    }
                }
            });
        }
        for (auto &t : pool)
            t.join();
    }
    for (auto &e : errors)
        if (e)
            std::rethrow_exception(e);
}

} // namespace mpcal
