#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

namespace qfid {

// Neumaier variant of Kahan summation.
class CompensatedSum {
public:
    void add(double x) noexcept {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    CompensatedSum& operator+=(double x) noexcept {
        add(x);
        return *this;
    }
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

// Fixed-shape pairwise tree; result depends only on the order of xs.
inline double pairwise_sum(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    if (xs.size() <= 8) {
        CompensatedSum s;
        for (double x : xs) s.add(x);
        return s.value();
    }
    const std::size_t h = xs.size() / 2;
    CompensatedSum s;
    s.add(pairwise_sum(xs.subspan(0, h)));
    s.add(pairwise_sum(xs.subspan(h)));
    return s.value();
}

// Evaluates fn(i) for i in [0,n) on up to `threads` workers and returns the
// results in index order. Work distribution does not affect the values, so any
// reduction over the returned vector is bit-stable for every thread count.
template <class T, class Fn>
std::vector<T> map_indexed(std::size_t n, int threads, Fn&& fn) {
    std::vector<T> out(n);
    const std::size_t workers =
        std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    auto work = [&] {
        try {
            for (std::size_t i = next++; i < n; i = next++) out[i] = fn(i);
        } catch (...) {
            std::lock_guard lk(err_mu);
            if (!err) err = std::current_exception();
            next = n;
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
    return out;
}

} // namespace qfid
