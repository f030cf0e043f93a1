#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "espc/error.hpp"
#include "espc/key_array.hpp"

namespace espc {

/// Sample quantile with linear interpolation between order statistics
/// (Hyndman-Fan type 7, the R and NumPy default).
inline double quantile_type7(std::span<const double> sorted, double prob) {
    if (sorted.empty()) {
        throw Error(ErrorCode::EmptyInput, "quantile of an empty sample");
    }
    const double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= sorted.size()) {
        return sorted.back();
    }
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

template <KeyType Key>
std::vector<double> as_doubles(const KeyArray<Key>& keys) {
    return std::vector<double>(keys.begin(), keys.end());
}

struct BinWidth {
    double width = 0.0;
    /// Set when the IQR was zero and the (b - a) / ceil(sqrt n) fallback was used.
    bool degenerate_iqr = false;
};

/// Freedman-Diaconis width 2 IQR / n^(1/3).
template <KeyType Key>
BinWidth fd_bin_width(const KeyArray<Key>& keys) {
    const std::size_t n = keys.size();
    if (n < 4) {
        throw Error(ErrorCode::InsufficientData, "Freedman-Diaconis width needs at least 4 keys");
    }
    const std::vector<double> xs = as_doubles(keys);
    const double iqr = quantile_type7(xs, 0.75) - quantile_type7(xs, 0.25);
    if (iqr > 0.0) {
        return {2.0 * iqr / std::cbrt(static_cast<double>(n)), false};
    }
    const double span = xs.back() - xs.front();
    const double bins = std::ceil(std::sqrt(static_cast<double>(n)));
    // All keys equal: any positive width gives a single bin.
    return {span > 0.0 ? span / bins : 1.0, true};
}

/// Piecewise-constant density on [origin, origin + bins * width).
class HistogramDensity {
public:
    HistogramDensity(double origin, double width, std::vector<double> heights)
        : origin_(origin), width_(width), heights_(std::move(heights)) {}

    double origin() const noexcept { return origin_; }
    double width() const noexcept { return width_; }
    double upper() const noexcept { return origin_ + width_ * static_cast<double>(heights_.size()); }
    const std::vector<double>& heights() const noexcept { return heights_; }

    double operator()(double x) const noexcept {
        if (x < origin_) {
            return 0.0;
        }
        const double pos = std::floor((x - origin_) / width_);
        if (pos >= static_cast<double>(heights_.size())) {
            return 0.0;
        }
        return heights_[static_cast<std::size_t>(pos)];
    }

    double integral() const noexcept {
        double s = 0.0;
        for (double h : heights_) {
            s += h * width_;
        }
        return s;
    }

private:
    double origin_;
    double width_;
    std::vector<double> heights_;
};

/// Histogram with bins of `width` starting at `origin`; the last bin is padded
/// so that the largest key is covered. Height = count / (n width).
template <KeyType Key>
HistogramDensity histogram_density(const KeyArray<Key>& keys, double width, double origin) {
    if (!(width > 0.0) || !std::isfinite(width)) {
        throw Error(ErrorCode::InvalidWidth, "bin width must be positive and finite");
    }
    if (origin > static_cast<double>(keys.front())) {
        throw Error(ErrorCode::SupportViolation, "histogram origin lies above the smallest key");
    }
    const double span = static_cast<double>(keys.back()) - origin;
    const auto bins = static_cast<std::size_t>(std::max(1.0, std::ceil(span / width)));
    std::vector<double> heights(bins, 0.0);
    for (Key x : keys) {
        const double pos = std::floor((static_cast<double>(x) - origin) / width);
        const std::size_t j = pos >= static_cast<double>(bins) ? bins - 1 : static_cast<std::size_t>(pos);
        heights[j] += 1.0;
    }
    const double scale = 1.0 / (static_cast<double>(keys.size()) * width);
    for (double& h : heights) {
        h *= scale;
    }
    return HistogramDensity(origin, width, std::move(heights));
}

template <KeyType Key>
HistogramDensity histogram_density(const KeyArray<Key>& keys, double width) {
    return histogram_density(keys, width, static_cast<double>(keys.front()));
}

namespace detail {

inline constexpr double kInvSqrt2Pi = 0.3989422804014327;
// Gaussian mass beyond 8 bandwidths is below 1e-15.
inline constexpr double kKernelReach = 8.0;

inline double gaussian(double u) noexcept { return kInvSqrt2Pi * std::exp(-0.5 * u * u); }

} // namespace detail

/// Gaussian kernel density over a sorted sample. Evaluation only visits the
/// sample points within 8 bandwidths of x.
class KernelDensity {
public:
    KernelDensity(std::shared_ptr<const std::vector<double>> sample, double bandwidth)
        : sample_(std::move(sample)), bandwidth_(bandwidth) {}

    double bandwidth() const noexcept { return bandwidth_; }
    const std::vector<double>& sample() const noexcept { return *sample_; }

    double operator()(double x) const noexcept {
        const auto& xs = *sample_;
        const double reach = detail::kKernelReach * bandwidth_;
        auto first = std::lower_bound(xs.begin(), xs.end(), x - reach);
        auto last = std::upper_bound(first, xs.end(), x + reach);
        double s = 0.0;
        for (auto it = first; it != last; ++it) {
            s += detail::gaussian((x - *it) / bandwidth_);
        }
        return s / (static_cast<double>(xs.size()) * bandwidth_);
    }

    /// Average number of sample points one evaluation touches.
    double window_load() const noexcept {
        const auto& xs = *sample_;
        const double span = xs.back() - xs.front();
        if (span <= 0.0) {
            return static_cast<double>(xs.size());
        }
        return static_cast<double>(xs.size()) * std::min(1.0, 2.0 * detail::kKernelReach * bandwidth_ / span);
    }

private:
    std::shared_ptr<const std::vector<double>> sample_;
    double bandwidth_;
};

/// Kernel density precomputed on a regular grid (linear binning of the
/// sample, direct truncated convolution) and linearly interpolated.
/// Used when exact evaluation over a large sample is too slow.
class BinnedKernelDensity {
public:
    BinnedKernelDensity(const KernelDensity& kde, std::size_t max_grid = std::size_t{1} << 20) {
        const auto& xs = kde.sample();
        const double h = kde.bandwidth();
        lo_ = xs.front() - detail::kKernelReach * h;
        const double hi = xs.back() + detail::kKernelReach * h;
        step_ = std::max(h / 8.0, (hi - lo_) / static_cast<double>(max_grid - 1));
        const auto m = static_cast<std::size_t>(std::ceil((hi - lo_) / step_)) + 1;

        std::vector<double> mass(m, 0.0);
        for (double x : xs) {
            const double pos = (x - lo_) / step_;
            auto j = static_cast<std::size_t>(pos);
            if (j >= m - 1) {
                mass[m - 1] += 1.0;
                continue;
            }
            const double frac = pos - static_cast<double>(j);
            mass[j] += 1.0 - frac;
            mass[j + 1] += frac;
        }
        const auto reach = static_cast<std::size_t>(std::ceil(detail::kKernelReach * h / step_));
        std::vector<double> weights(reach + 1);
        for (std::size_t d = 0; d <= reach; ++d) {
            weights[d] = detail::gaussian(static_cast<double>(d) * step_ / h);
        }
        const double norm = 1.0 / (static_cast<double>(xs.size()) * h);
        values_.assign(m, 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            if (mass[i] == 0.0) {
                continue;
            }
            const std::size_t from = i >= reach ? i - reach : 0;
            const std::size_t to = std::min(m - 1, i + reach);
            for (std::size_t j = from; j <= to; ++j) {
                values_[j] += mass[i] * weights[i > j ? i - j : j - i] * norm;
            }
        }
    }

    double operator()(double x) const noexcept {
        const double pos = (x - lo_) / step_;
        if (pos < 0.0 || pos >= static_cast<double>(values_.size() - 1)) {
            return 0.0;
        }
        const auto j = static_cast<std::size_t>(pos);
        const double frac = pos - static_cast<double>(j);
        return values_[j] * (1.0 - frac) + values_[j + 1] * frac;
    }

    double step() const noexcept { return step_; }

private:
    double lo_ = 0.0;
    double step_ = 1.0;
    std::vector<double> values_;
};

/// Silverman's rule of thumb, 1.06 sigma n^(-1/5). A zero-variance sample
/// falls back to bandwidth 1.
inline double silverman_bandwidth(std::span<const double> xs) {
    const double n = static_cast<double>(xs.size());
    double mean = 0.0;
    for (double x : xs) {
        mean += x;
    }
    mean /= n;
    double ss = 0.0;
    for (double x : xs) {
        ss += (x - mean) * (x - mean);
    }
    const double sd = std::sqrt(ss / (n - 1.0));
    return sd > 0.0 ? 1.06 * sd * std::pow(n, -0.2) : 1.0;
}

template <KeyType Key>
KernelDensity kde_density(const KeyArray<Key>& keys, std::optional<double> bandwidth = std::nullopt) {
    if (keys.size() < 2) {
        throw Error(ErrorCode::InsufficientData, "kernel density needs at least 2 keys");
    }
    auto xs = std::make_shared<const std::vector<double>>(as_doubles(keys));
    double h = bandwidth ? *bandwidth : silverman_bandwidth(*xs);
    if (!(h > 0.0) || !std::isfinite(h)) {
        throw Error(ErrorCode::InvalidWidth, "bandwidth must be positive and finite");
    }
    return KernelDensity(std::move(xs), h);
}

enum class DensityMethod { histogram, kernel };

inline std::string_view to_string(DensityMethod m) noexcept {
    return m == DensityMethod::histogram ? "histogram" : "kernel";
}

inline DensityMethod parse_density_method(std::string_view name) {
    if (name == "histogram" || name == "hist") return DensityMethod::histogram;
    if (name == "kernel" || name == "kde") return DensityMethod::kernel;
    throw Error(ErrorCode::InvalidParams, "unknown density method '" + std::string(name) + "'");
}

using DensityEstimate = std::variant<HistogramDensity, KernelDensity>;

inline double evaluate_density(const DensityEstimate& f, double x) {
    return std::visit([x](const auto& d) { return d(x); }, f);
}

/// Monte Carlo estimate of rho_f = int f^2 = E[f(X)].
struct RhoEstimate {
    double value = 0.0;
    std::size_t samples = 0;
    DensityMethod method = DensityMethod::histogram;
    std::uint64_t seed = 0;
    /// Bin width or kernel bandwidth actually used.
    double smoothing = 0.0;
};

struct RhoOptions {
    DensityMethod method = DensityMethod::histogram;
    /// Histogram bin width (Freedman-Diaconis when unset) or kernel bandwidth (Silverman when unset).
    std::optional<double> smoothing;
};

/// Draws J keys uniformly with replacement from A (mt19937_64 seeded with
/// `seed`) and averages the estimated density at those keys. Summation runs in
/// draw order, so the value is bit-stable for a given seed.
template <KeyType Key>
RhoEstimate estimate_rho(const KeyArray<Key>& keys, std::size_t samples, std::uint64_t seed,
                         const RhoOptions& options = {}) {
    if (samples < 1) {
        throw Error(ErrorCode::InvalidParams, "rho estimation needs J >= 1 samples");
    }
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, keys.size() - 1);
    RhoEstimate out;
    out.samples = samples;
    out.method = options.method;
    out.seed = seed;

    auto average = [&](const auto& density) {
        double sum = 0.0;
        for (std::size_t j = 0; j < samples; ++j) {
            sum += density(static_cast<double>(keys[pick(rng)]));
        }
        return sum / static_cast<double>(samples);
    };

    if (options.method == DensityMethod::histogram) {
        const double width = options.smoothing ? *options.smoothing : fd_bin_width(keys).width;
        const HistogramDensity hist = histogram_density(keys, width);
        out.smoothing = width;
        out.value = average(hist);
        return out;
    }
    const KernelDensity kde = kde_density(keys, options.smoothing);
    out.smoothing = kde.bandwidth();
    // Exact evaluation costs about J * window_load kernel terms.
    if (kde.window_load() * static_cast<double>(samples) <= 2e8) {
        out.value = average(kde);
    } else {
        out.value = average(BinnedKernelDensity(kde));
    }
    return out;
}

} // namespace espc
