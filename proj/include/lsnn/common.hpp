#pragma once

#include <atomic>
#include <cmath>
#include <condition_variable>
#include <cstdint>
#include <cstdlib>
#include <mutex>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace lsnn {

/// 2-D point / vector with value semantics.
struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
    friend bool operator==(Vec2 a, Vec2 b) { return a.x == b.x && a.y == b.y; }
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

/// Invalid run or problem configuration (bad mesh size, rho >= h, unknown id, ...).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// NaN/Inf or other numerical breakdown during evaluation.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Galerkin basis is (near-)linearly dependent; factorization cannot proceed.
class DegenerateBasisError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parameter/architecture shape mismatch.
class ShapeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Seeded generator with a platform-independent uniform mapping.
/// All randomness in the library flows through this type so that
/// (seed, config) -> results is reproducible.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    /// Uniform double in [lo, hi) using the top 53 bits of the engine.
    double uniform(double lo, double hi) {
        const double u = static_cast<double>(eng_() >> 11) * 0x1.0p-53;
        return lo + u * (hi - lo);
    }

private:
    std::mt19937_64 eng_;
};

/// Number of worker threads: LSNN_THREADS if set, else hardware concurrency.
inline int worker_count() {
    if (const char* env = std::getenv("LSNN_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

namespace detail {

/// Persistent worker pool for the quadrature loops. Threads are started once
/// and parked between jobs; blocks are claimed off a shared atomic counter.
/// The schedule never influences results because callers index every output
/// by block.
class BlockPool {
public:
    static BlockPool& instance() {
        static BlockPool pool;
        return pool;
    }

    void run(std::size_t nblocks, void (*thunk)(void*, std::size_t), void* ctx) {
        if (workers_.empty() || nblocks < 2 || inside_worker()) {
            for (std::size_t b = 0; b < nblocks; ++b) thunk(ctx, b);
            return;
        }
        {
            std::lock_guard<std::mutex> lock(mu_);
            thunk_ = thunk;
            ctx_ = ctx;
            nblocks_ = nblocks;
            next_.store(0, std::memory_order_relaxed);
            active_ = static_cast<int>(workers_.size());
            ++generation_;
        }
        start_cv_.notify_all();
        drain();
        std::unique_lock<std::mutex> lock(mu_);
        done_cv_.wait(lock, [&] { return active_ == 0; });
    }

private:
    BlockPool() {
        const int n = worker_count() - 1;
        for (int i = 0; i < n; ++i) workers_.emplace_back([this] { worker_loop(); });
    }
    ~BlockPool() {
        {
            std::lock_guard<std::mutex> lock(mu_);
            stop_ = true;
            ++generation_;
        }
        start_cv_.notify_all();
        for (auto& t : workers_) t.join();
    }

    static bool& inside_worker() {
        thread_local bool flag = false;
        return flag;
    }

    void drain() {
        for (;;) {
            const std::size_t b = next_.fetch_add(1, std::memory_order_relaxed);
            if (b >= nblocks_) return;
            thunk_(ctx_, b);
        }
    }

    void worker_loop() {
        inside_worker() = true;
        std::uint64_t seen = 0;
        for (;;) {
            {
                std::unique_lock<std::mutex> lock(mu_);
                start_cv_.wait(lock, [&] { return generation_ != seen; });
                seen = generation_;
                if (stop_) return;
            }
            drain();
            {
                std::lock_guard<std::mutex> lock(mu_);
                if (--active_ == 0) done_cv_.notify_one();
            }
        }
    }

    std::vector<std::thread> workers_;
    std::mutex mu_;
    std::condition_variable start_cv_, done_cv_;
    std::uint64_t generation_ = 0;
    int active_ = 0;
    bool stop_ = false;
    void (*thunk_)(void*, std::size_t) = nullptr;
    void* ctx_ = nullptr;
    std::size_t nblocks_ = 0;
    std::atomic<std::size_t> next_{0};
};

}  // namespace detail

/// Runs fn(block) for block = 0..nblocks-1 across the worker pool.
/// Callers must make block outputs independent (indexed by block).
template <class Fn>
void for_each_block(std::size_t nblocks, const Fn& fn) {
    auto thunk = [](void* ctx, std::size_t b) { (*static_cast<const Fn*>(ctx))(b); };
    detail::BlockPool::instance().run(nblocks, thunk, const_cast<Fn*>(&fn));
}

/// Fixed block width used by every deterministic quadrature reduction.
/// Independent of the worker count, so sums are bit-reproducible.
inline constexpr std::size_t kReductionBlock = 2048;

inline std::size_t block_count(std::size_t n) {
    return n == 0 ? 0 : (n + kReductionBlock - 1) / kReductionBlock;
}

}  // namespace lsnn
