#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

#include "plurispec/errors.hpp"

namespace plurispec {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

// log Gamma for positive arguments. All Gamma ratios in the library go through
// differences of this to stay finite for weights and degrees up to a few hundred.
inline double log_gamma(double x) {
    if (!(x > 0.0))
        throw numeric_error("log_gamma: argument must be positive, got " + std::to_string(x));
    return std::lgamma(x);
}

// exp(lg_num_1 + lg_num_2 - lg_den_1 - lg_den_2) with everything in log space.
inline double gamma_ratio(std::initializer_list<double> num, std::initializer_list<double> den) {
    double s = 0.0;
    for (double x : num) s += log_gamma(x);
    for (double x : den) s -= log_gamma(x);
    return std::exp(s);
}

// Deterministic pairwise reduction. Fixed association order regardless of the
// caller's threading, so repeated runs produce identical bits.
template <typename T>
T pairwise_sum(const std::vector<T>& v, std::size_t lo, std::size_t hi) {
    const std::size_t n = hi - lo;
    if (n == 0) return T{};
    if (n <= 8) {
        T s = v[lo];
        for (std::size_t i = lo + 1; i < hi; ++i) s += v[i];
        return s;
    }
    const std::size_t mid = lo + n / 2;
    return pairwise_sum(v, lo, mid) + pairwise_sum(v, mid, hi);
}

template <typename T>
T pairwise_sum(const std::vector<T>& v) {
    return pairwise_sum(v, 0, v.size());
}

// Chunked parallel loop over [0, n). Work items must be independent and write
// only to disjoint, preallocated slots; then the result does not depend on the
// number of jobs.
inline void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& body) {
    if (n == 0) return;
    if (jobs <= 1 || n == 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    const std::size_t nthreads = std::min<std::size_t>(static_cast<std::size_t>(jobs), n);
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    std::exception_ptr first_error;
    std::mutex err_mutex;
    for (std::size_t t = 0; t < nthreads; ++t) {
        pool.emplace_back([&, t]() {
            try {
                for (std::size_t i = t; i < n; i += nthreads) body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

inline bool is_finite(cplx v) {
    return std::isfinite(v.real()) && std::isfinite(v.imag());
}

} // namespace plurispec
