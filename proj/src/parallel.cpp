#include "ggd/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace ggd {

namespace {
std::atomic<std::size_t> g_workers{1};
constexpr std::size_t kMinRowsPerWorker = 64;
}  // namespace

void set_num_workers(std::size_t n) { g_workers.store(std::max<std::size_t>(1, n)); }

std::size_t num_workers() { return g_workers.load(); }

void parallel_rows(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
    const std::size_t workers = std::min(num_workers(), std::max<std::size_t>(1, n / kMinRowsPerWorker));
    if (workers <= 1) {
        fn(0, n);
        return;
    }
    const std::size_t chunk = (n + workers - 1) / workers;
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) {
        const std::size_t begin = std::min(n, w * chunk);
        const std::size_t end = std::min(n, begin + chunk);
        if (begin < end) pool.emplace_back(fn, begin, end);
    }
    fn(0, std::min(n, chunk));
    for (auto& t : pool) t.join();
}

}  // namespace ggd
