// Copyright 2026 The kacsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace kac {

/*!
 * Run fn(block, begin, end) over fixed-size blocks of [0, n_items).
 *
 * Block boundaries depend only on n_items and block_size, so callers that
 * store one partial result per block and reduce them in block order get
 * the same answer for any worker count. Exceptions from workers are
 * rethrown on the calling thread.
 */
template <class Fn>
void parallel_blocks(std::size_t n_items, std::size_t block_size, std::size_t workers, Fn&& fn)
{
    if (n_items == 0)
        return;
    block_size = std::max<std::size_t>(block_size, 1);
    std::size_t const n_blocks = (n_items + block_size - 1) / block_size;
    workers = std::clamp<std::size_t>(workers, 1, n_blocks);

    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto body = [&] {
        for (;;)
        {
            std::size_t const b = next.fetch_add(1);
            if (b >= n_blocks)
                return;
            try
            {
                std::size_t const begin = b * block_size;
                fn(b, begin, std::min(begin + block_size, n_items));
            }
            catch (...)
            {
                std::lock_guard lock(error_mutex);
                if (!error)
                    error = std::current_exception();
                next.store(n_blocks);
                return;
            }
        }
    };

    if (workers == 1)
    {
        body();
    }
    else
    {
        std::vector<std::thread> pool;
        pool.reserve(workers - 1);
        for (std::size_t w = 1; w < workers; ++w)
            pool.emplace_back(body);
        body();
        for (auto& t : pool)
            t.join();
    }
    if (error)
        std::rethrow_exception(error);
}

inline std::size_t block_count(std::size_t n_items, std::size_t block_size)
{
    return (n_items + block_size - 1) / block_size;
}

} // namespace kac
