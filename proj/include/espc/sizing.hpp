#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "espc/error.hpp"

namespace espc {

/// How many intervals to give an index of n keys.
///
///  - linear:         K = n                 (O(1) expected time, bounded support)
///  - sublinear:      K = ceil(n / log2 n)  (O(log log n) expected time)
///  - chebyshev:      K = ceil(n sqrt(n ln n)), finite mean and variance only
///  - subexponential: K = ceil(n ln n), subexponential tails
///
/// The distribution parameters do not enter K; they are carried so that a
/// policy documents the assumption it was chosen under, and are validated.
struct SizingPolicy {
    enum class Kind { linear, sublinear, chebyshev, subexponential };

    Kind kind = Kind::linear;
    std::optional<double> mean;     // chebyshev
    std::optional<double> stddev;   // chebyshev
    std::optional<double> tail_rate; // subexponential, the C in 2 exp(-C x)
};

inline std::string_view to_string(SizingPolicy::Kind kind) noexcept {
    switch (kind) {
    case SizingPolicy::Kind::linear: return "linear";
    case SizingPolicy::Kind::sublinear: return "sublinear";
    case SizingPolicy::Kind::chebyshev: return "chebyshev";
    case SizingPolicy::Kind::subexponential: return "subexponential";
    }
    return "linear";
}

inline SizingPolicy::Kind parse_policy_kind(std::string_view name) {
    if (name == "linear") return SizingPolicy::Kind::linear;
    if (name == "sublinear") return SizingPolicy::Kind::sublinear;
    if (name == "chebyshev") return SizingPolicy::Kind::chebyshev;
    if (name == "subexponential") return SizingPolicy::Kind::subexponential;
    throw Error(ErrorCode::InvalidPolicyParams, "unknown sizing policy '" + std::string(name) + "'");
}

inline std::size_t choose_k(const SizingPolicy& policy, std::size_t n) {
    if (n < 2) {
        throw Error(ErrorCode::InvalidPolicyParams, "sizing policies need n >= 2");
    }
    // The mean is a location parameter and may have any sign.
    if (policy.stddev && !(*policy.stddev > 0.0)) {
        throw Error(ErrorCode::InvalidPolicyParams, "standard deviation must be positive");
    }
    if (policy.mean && !std::isfinite(*policy.mean)) {
        throw Error(ErrorCode::InvalidPolicyParams, "mean must be finite");
    }
    if (policy.tail_rate && !(*policy.tail_rate > 0.0)) {
        throw Error(ErrorCode::InvalidPolicyParams, "tail rate C must be positive");
    }
    const double nd = static_cast<double>(n);
    double k = nd;
    switch (policy.kind) {
    case SizingPolicy::Kind::linear:
        return n;
    case SizingPolicy::Kind::sublinear:
        k = std::ceil(nd / std::log2(nd));
        break;
    case SizingPolicy::Kind::chebyshev:
        k = std::ceil(nd * std::sqrt(nd * std::log(nd)));
        break;
    case SizingPolicy::Kind::subexponential:
        k = std::ceil(nd * std::log(nd));
        break;
    }
    return k < 1.0 ? 1 : static_cast<std::size_t>(k);
}

} // namespace espc
