#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <span>

namespace feynprop::detail {

// Calls fn(i) for i in [0, n). Work is split into contiguous chunks over
// hardware threads; nested calls from inside a worker run serially, so
// only the outermost loop fans out.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& fn);

// Pairwise (tree) summation in a fixed order, independent of how the
// values were produced.
std::complex<double> pairwise_sum(std::span<const std::complex<double>> v);
double pairwise_sum(std::span<const double> v);

//---------------------------------------------------------------------------//
// Counter-based random numbers
//---------------------------------------------------------------------------//

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z)
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Stream key for one (seed, n, k, assignment) configuration.
constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t n, std::uint64_t k,
                                   std::uint64_t index)
{
    std::uint64_t h = mix64(seed);
    h = mix64(h ^ (n + 0x632be59bd9b4e019ULL));
    h = mix64(h ^ (k + 0x8cb92ba72f3d8dd7ULL));
    h = mix64(h ^ (index + 0xa0761d6478bd642fULL));
    return h;
}

// Stateless generator: the value at a counter depends only on (key, counter).
class CounterRng {
  public:
    explicit constexpr CounterRng(std::uint64_t key) : key_(key) {}

    constexpr std::uint64_t bits(std::uint64_t counter) const
    {
        return mix64(key_ ^ mix64(counter));
    }

    // Uniform on (0, 1): never returns 0, so log() is safe.
    constexpr double uniform(std::uint64_t counter) const
    {
        return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
    }

    // Standard normal from two counters (Box-Muller, cosine branch).
    double normal(std::uint64_t counter) const;

  private:
    std::uint64_t key_;
};

}  // namespace feynprop::detail
