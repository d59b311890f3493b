#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

namespace drift {

// Applies fn to every item with at most `workers` threads; results keep input order.
// The first exception thrown by any call is rethrown after all workers join.
template <typename T, typename Fn>
auto parallel_map(const std::vector<T>& items, std::size_t workers, Fn fn)
    -> std::vector<decltype(fn(items.front()))> {
    using R = decltype(fn(items.front()));
    std::vector<R> results;
    results.reserve(items.size());
    workers = std::max<std::size_t>(1, std::min(workers, items.size()));
    if (workers == 1) {
        for (const auto& item : items)
            results.push_back(fn(item));
        return results;
    }

    std::vector<std::optional<R>> slots(items.size());

    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < items.size(); i = next++) {
                try {
                    slots[i].emplace(fn(items[i]));
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!first_error)
                        first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool)
        t.join();
    if (first_error)
        std::rethrow_exception(first_error);
    for (auto& s : slots)
        results.push_back(std::move(*s));
    return results;
}

} // namespace drift
