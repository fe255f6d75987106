#include "eslope/random.hpp"

#include <algorithm>
#include <numeric>

#include "eslope/errors.hpp"

namespace eslope {

std::vector<std::size_t> Rng::sample_without_replacement(std::size_t population, std::size_t count)
{
    if (count > population) {
        throw DomainError("sample_without_replacement: count exceeds population");
    }
    // Partial Fisher-Yates over an index table.
    std::vector<std::size_t> pool(population);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < count; ++i) {
        const auto j = i + static_cast<std::size_t>(below(population - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(count);
    std::sort(pool.begin(), pool.end());
    return pool;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream)
{
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace eslope
