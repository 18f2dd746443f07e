#include "kolmo/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace kolmo {

int thread_count() {
    if (const char* env = std::getenv("KOLMO_THREADS")) {
        try {
            int n = std::stoi(env);
            if (n > 0) return n;
        } catch (const std::exception&) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(int n, const std::function<void(int, int)>& body) {
    if (n <= 0) return;
    int workers = std::min(thread_count(), n);
    if (workers == 1) {
        body(0, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    int chunk = (n + workers - 1) / workers;
    for (int w = 1; w < workers; ++w) {
        int begin = w * chunk;
        int end = std::min(n, begin + chunk);
        if (begin < end) pool.emplace_back(body, begin, end);
    }
    body(0, std::min(n, chunk));
    for (auto& th : pool) th.join();
}

}  // namespace kolmo
