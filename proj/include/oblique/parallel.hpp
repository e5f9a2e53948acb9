#ifndef OBLIQUE_PARALLEL_HPP
#define OBLIQUE_PARALLEL_HPP

#include <cstddef>
#include <exception>
#include <utility>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace oblique::par {

// Data-parallel drivers for sweeps over independent points (quadrature nodes,
// verification points, dt-sweep members). The OpenMP path fills a
// preallocated buffer and reductions run serially in index order, so results
// are bit-identical to the serial path.

enum class Execution { serial, openmp };

inline int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

template <class T, class F>
std::vector<T> map(std::size_t n, F&& f, Execution ex = Execution::serial) {
    std::vector<T> out(n);
    if (ex == Execution::openmp) {
#ifdef _OPENMP
        std::exception_ptr err;
#pragma omp parallel for schedule(static)
        for (long long i = 0; i < static_cast<long long>(n); ++i) {
            try {
                out[static_cast<std::size_t>(i)] = f(static_cast<std::size_t>(i));
            } catch (...) {
#pragma omp critical
                if (!err) err = std::current_exception();
            }
        }
        if (err) std::rethrow_exception(err);
        return out;
#endif
    }
    for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
    return out;
}

template <class T, class F>
T map_sum(std::size_t n, F&& f, Execution ex = Execution::serial, T init = T{}) {
    auto values = map<T>(n, std::forward<F>(f), ex);
    T acc = std::move(init);
    for (auto& v : values) acc += v;
    return acc;
}

}  // namespace oblique::par

#endif
