#ifndef FREDHIER_PARALLEL_HPP
#define FREDHIER_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace fredhier {

// FREDHIER_THREADS caps the pool; unset or invalid means hardware concurrency.
inline int worker_count() {
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw <= 0) hw = 1;
    if (const char* env = std::getenv("FREDHIER_THREADS")) {
        try {
            const int v = std::stoi(env);
            if (v > 0) return v;
        } catch (...) {
        }
    }
    return hw;
}

// out[i] = fn(i) for i < n. Results land by index, so ordering never depends
// on completion order. The first exception thrown by any task is rethrown.
template <class R, class Fn>
std::vector<R> parallel_map(std::size_t n, Fn&& fn, int threads = worker_count()) {
    std::vector<R> out(n);
    const int nt = std::max(1, std::min<int>(threads, static_cast<int>(n)));
    if (nt == 1) {
        for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex m;
    auto work = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) {
            try {
                out[i] = fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lk(m);
                if (!err) err = std::current_exception();
                next = n;
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < nt; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
    return out;
}

}  // namespace fredhier

#endif
