#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "espc/key_array.hpp"

namespace espc::testing {

/// Random sorted integer keys. With `dup_heavy` the values come from a tiny
/// alphabet so long runs of equal keys are guaranteed.
inline KeyArray<std::uint64_t> random_u64_keys(std::mt19937_64& rng, std::size_t n, bool dup_heavy) {
    const std::uint64_t hi = dup_heavy ? std::max<std::uint64_t>(1, n / 8) : 1'000'000;
    std::uniform_int_distribution<std::uint64_t> d(0, hi);
    std::vector<std::uint64_t> xs(n);
    for (auto& x : xs) x = d(rng);
    return validate_key_array(std::move(xs));
}

/// Random sorted doubles; mixes a uniform block with a clustered block so
/// intervals have very uneven occupancy.
inline KeyArray<double> random_f64_keys(std::mt19937_64& rng, std::size_t n, bool dup_heavy) {
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    std::normal_distribution<double> cluster(10.0, 0.01);
    std::vector<double> xs(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = (i % 3 == 0) ? cluster(rng) : u(rng);
    }
    if (dup_heavy) {
        for (auto& x : xs) x = std::round(x / 8.0) * 8.0;
    }
    return validate_key_array(std::move(xs));
}

} // namespace espc::testing
