#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <numbers>
#include <thread>
#include <vector>

#include "feynprop/parallel.hpp"

namespace feynprop::detail {

namespace {

thread_local bool t_inside_worker = false;

template <class T>
T pairwise_sum_impl(std::span<const T> v)
{
    constexpr std::size_t kLeaf = 16;
    if (v.size() <= kLeaf) {
        T acc{};
        for (const auto& x : v) acc += x;
        return acc;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum_impl(v.first(half)) + pairwise_sum_impl(v.subspan(half));
}

}  // namespace

void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& fn)
{
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (hw == 1 || n < 64 || t_inside_worker) {
        for (std::int64_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const std::int64_t workers = std::min<std::int64_t>(hw, n);
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    {
        std::vector<std::jthread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (std::int64_t w = 0; w < workers; ++w) {
            const std::int64_t lo = n * w / workers;
            const std::int64_t hi = n * (w + 1) / workers;
            pool.emplace_back([lo, hi, &fn, err = &errors[static_cast<std::size_t>(w)]] {
                t_inside_worker = true;
                try {
                    for (std::int64_t i = lo; i < hi; ++i) fn(i);
                } catch (...) {
                    *err = std::current_exception();
                }
            });
        }
    }
    // lowest chunk wins, so the reported failure does not depend on timing
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

std::complex<double> pairwise_sum(std::span<const std::complex<double>> v)
{
    return pairwise_sum_impl(v);
}

double pairwise_sum(std::span<const double> v) { return pairwise_sum_impl(v); }

double CounterRng::normal(std::uint64_t counter) const
{
    const double u1 = uniform(2 * counter);
    const double u2 = uniform(2 * counter + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace feynprop::detail
