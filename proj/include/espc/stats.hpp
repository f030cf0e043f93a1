#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "espc/error.hpp"
#include "espc/key_array.hpp"

namespace espc {

/// Probabilities of K equal-length intervals J_1..J_K covering [a, b].
struct PartitionProfile {
    double a = 0.0;
    double b = 1.0;
    std::vector<double> p;

    std::size_t intervals() const noexcept { return p.size(); }

    /// Collision probability sum_k p_k^2.
    double collision() const noexcept {
        double s = 0.0;
        for (double v : p) {
            s += v * v;
        }
        return s;
    }
};

/// Uniform profile p_k = 1/K over [a, b].
inline PartitionProfile uniform_profile(std::size_t k, double a = 0.0, double b = 1.0) {
    if (k < 1) {
        throw Error(ErrorCode::InvalidK, "K must be at least 1");
    }
    return PartitionProfile{a, b, std::vector<double>(k, 1.0 / static_cast<double>(k))};
}

/// Empirical p_k = (keys in J_k) / n over K equal intervals of [a, b], with
/// the same clamped-ceiling assignment the index uses.
template <KeyType Key>
PartitionProfile partition_probabilities(const KeyArray<Key>& keys, double a, double b, std::size_t k) {
    if (k < 1) {
        throw Error(ErrorCode::InvalidK, "K must be at least 1");
    }
    if (!(a < b) || static_cast<double>(keys.front()) < a || static_cast<double>(keys.back()) > b) {
        throw Error(ErrorCode::SupportViolation, "keys must lie inside [a, b] with a < b");
    }
    const double width = (b - a) / static_cast<double>(k);
    std::vector<std::size_t> counts(k, 0);
    for (Key x : keys) {
        const double raw = std::ceil((static_cast<double>(x) - a) / width);
        std::size_t j = 1;
        if (raw >= static_cast<double>(k)) {
            j = k;
        } else if (raw >= 1.0) {
            j = static_cast<std::size_t>(raw);
        }
        ++counts[j - 1];
    }
    PartitionProfile profile{a, b, std::vector<double>(k)};
    const double n = static_cast<double>(keys.size());
    for (std::size_t j = 0; j < k; ++j) {
        profile.p[j] = static_cast<double>(counts[j]) / n;
    }
    return profile;
}

enum class LogBase { natural, base2 };

inline double log_in(double x, LogBase base) noexcept {
    return base == LogBase::natural ? std::log(x) : std::log2(x);
}

/// Renyi entropy of order 2, H2 = -log sum p_k^2. Maximal (log K) for the
/// uniform profile, zero for a point mass.
inline double renyi_entropy_2(const PartitionProfile& profile, LogBase base = LogBase::natural) {
    const double h = -log_in(profile.collision(), base);
    return h == 0.0 ? 0.0 : h; // no -0.0
}

/// E[eps] <= (3n/2) sum p_k^2.
inline double error_bound_partition(std::size_t n, const PartitionProfile& profile) noexcept {
    return 1.5 * static_cast<double>(n) * profile.collision();
}

/// E[eps] <= (3(b-a)/2) rho n / K.
inline double error_bound_rho(std::size_t n, std::size_t k, double a, double b, double rho) {
    if (k < 1 || !(b > a) || !(rho >= 0.0)) {
        throw Error(ErrorCode::InvalidParams, "error_bound_rho needs K >= 1, b > a, rho >= 0");
    }
    return 1.5 * (b - a) * rho * static_cast<double>(n) / static_cast<double>(k);
}

/// Queries drawn from g instead of f: rho is replaced by sqrt(rho_f rho_g).
inline double error_bound_query_dist(std::size_t n, std::size_t k, double a, double b, double rho_f,
                                     double rho_g) {
    if (!(rho_f >= 0.0) || !(rho_g >= 0.0)) {
        throw Error(ErrorCode::InvalidParams, "density norms must be non-negative");
    }
    return error_bound_rho(n, k, a, b, std::sqrt(rho_f * rho_g));
}

/// E[log eps] <= log(3n/2) - H2(P), in the chosen base.
inline double log_error_entropy_bound(std::size_t n, const PartitionProfile& profile,
                                      LogBase base = LogBase::natural) {
    return log_in(1.5 * static_cast<double>(n), base) - renyi_entropy_2(profile, base);
}

} // namespace espc
