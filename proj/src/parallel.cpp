#include "openturb/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

namespace openturb {

unsigned thread_budget() {
    unsigned n = std::thread::hardware_concurrency();
    if (n == 0) n = 1;
    if (const char* env = std::getenv("OPENTURB_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v >= 1) n = static_cast<unsigned>(v);
        } catch (...) {
            // unparsable value: keep the hardware default
        }
    }
    return n;
}

ThreadPool::ThreadPool(unsigned workers) {
    if (workers == 0) workers = 1;
    threads_.reserve(workers - 1);
    for (unsigned i = 0; i + 1 < workers; ++i)
        threads_.emplace_back([this] { worker_loop(); });
}

ThreadPool::~ThreadPool() {
    {
        std::lock_guard lock(mutex_);
        stop_ = true;
    }
    start_cv_.notify_all();
    for (auto& t : threads_) t.join();
}

void ThreadPool::work() {
    const std::size_t n = job_n_;
    const std::size_t chunk = job_chunk_;
    const auto& fn = *job_;
    for (;;) {
        const std::size_t begin = cursor_.fetch_add(chunk);
        if (begin >= n) break;
        const std::size_t end = std::min(begin + chunk, n);
        for (std::size_t i = begin; i < end; ++i) fn(i);
    }
}

void ThreadPool::worker_loop() {
    std::uint64_t seen = 0;
    for (;;) {
        {
            std::unique_lock lock(mutex_);
            start_cv_.wait(lock, [&] { return stop_ || generation_ != seen; });
            if (stop_) return;
            seen = generation_;
        }
        work();
        {
            std::lock_guard lock(mutex_);
            if (--active_ == 0) done_cv_.notify_all();
        }
    }
}

void ThreadPool::run(std::size_t n, const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    if (threads_.empty()) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    {
        std::lock_guard lock(mutex_);
        job_ = &fn;
        job_n_ = n;
        job_chunk_ = std::max<std::size_t>(1, n / (8 * workers()));
        cursor_.store(0);
        active_ = static_cast<unsigned>(threads_.size());
        ++generation_;
    }
    start_cv_.notify_all();
    work();
    std::unique_lock lock(mutex_);
    done_cv_.wait(lock, [&] { return active_ == 0; });
    job_ = nullptr;
}

}  // namespace openturb
