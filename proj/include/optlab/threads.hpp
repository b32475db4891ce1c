#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace optlab {

// Worker budget: OPTLAB_THREADS caps it, hardware concurrency is the default.
inline unsigned thread_count() {
    static const unsigned cached = [] {
        unsigned hw = std::max(1u, std::thread::hardware_concurrency());
        if (const char* env = std::getenv("OPTLAB_THREADS")) {
            const long v = std::strtol(env, nullptr, 10);
            if (v >= 1) return std::min<unsigned>(hw * 4, static_cast<unsigned>(v));
        }
        return hw;
    }();
    return cached;
}

// Static chunking over [0, n). Each index is processed exactly once and the
// caller writes to disjoint slots, so results do not depend on thread count.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    const unsigned workers = std::min<std::size_t>(thread_count(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += workers) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace optlab
