#pragma once

#include <atomic>
#include <condition_variable>
#include <cstddef>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace openturb {

// Worker count: OPENTURB_THREADS if set (clamped to >= 1), otherwise
// hardware_concurrency(), never 0.
unsigned thread_budget();

// Persistent pool of `workers - 1` helper threads; the calling thread works
// too. run(n, fn) invokes fn(i) exactly once for every i in [0, n) and
// returns after all calls finish. Indices are claimed in chunks through an
// atomic cursor, so fn must not depend on which thread runs which index.
class ThreadPool {
public:
    explicit ThreadPool(unsigned workers);
    ~ThreadPool();

    ThreadPool(const ThreadPool&) = delete;
    ThreadPool& operator=(const ThreadPool&) = delete;

    void run(std::size_t n, const std::function<void(std::size_t)>& fn);
    unsigned workers() const { return static_cast<unsigned>(threads_.size()) + 1; }

private:
    void worker_loop();
    void work();

    std::vector<std::thread> threads_;
    std::mutex mutex_;
    std::condition_variable start_cv_;
    std::condition_variable done_cv_;
    const std::function<void(std::size_t)>* job_ = nullptr;
    std::size_t job_n_ = 0;
    std::size_t job_chunk_ = 1;
    std::uint64_t generation_ = 0;
    unsigned active_ = 0;
    bool stop_ = false;
    std::atomic<std::size_t> cursor_{0};
};

}  // namespace openturb
