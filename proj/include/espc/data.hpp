#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <zlib.h>

#include "espc/error.hpp"
#include "espc/key_array.hpp"

namespace espc {

// ---------------------------------------------------------------------------
// Synthetic datasets

enum class DatasetKind { uniform, normal, beta22, lognormal, file };

inline std::string_view to_string(DatasetKind kind) noexcept {
    switch (kind) {
    case DatasetKind::uniform: return "uniform";
    case DatasetKind::normal: return "normal";
    case DatasetKind::beta22: return "beta22";
    case DatasetKind::lognormal: return "lognormal";
    case DatasetKind::file: return "file";
    }
    return "uniform";
}

inline DatasetKind parse_dataset_kind(std::string_view name) {
    if (name == "uniform") return DatasetKind::uniform;
    if (name == "normal") return DatasetKind::normal;
    if (name == "beta22" || name == "beta") return DatasetKind::beta22;
    if (name == "lognormal") return DatasetKind::lognormal;
    if (name == "file") return DatasetKind::file;
    throw Error(ErrorCode::InvalidParams, "unknown dataset kind '" + std::string(name) + "'");
}

/// What to generate (or load). `mu`/`sigma` parameterize normal and
/// lognormal; uniform draws from [0, 1) and beta22 from Beta(2, 2).
struct DatasetSpec {
    DatasetKind kind = DatasetKind::uniform;
    std::size_t n = 1'000'000;
    double mu = 0.5;
    double sigma = 0.1;
    std::uint64_t seed = 1;
    /// Source file for kind == file.
    std::string path;
    /// Payload type of `path`.
    KeyMode mode = KeyMode::u64;

    /// Defaults for the "hard" heavy-tailed stand-in, lognormal(0, 2).
    static DatasetSpec lognormal_default(std::size_t n, std::uint64_t seed) {
        return DatasetSpec{DatasetKind::lognormal, n, 0.0, 2.0, seed, {}, KeyMode::u64};
    }
};

/// n sorted draws; bit-deterministic per (kind, params, seed) for a given
/// standard library. The generator is std::mt19937_64.
inline KeyArray<double> generate(const DatasetSpec& spec) {
    if (spec.n < 1) {
        throw Error(ErrorCode::InvalidParams, "dataset size must be at least 1");
    }
    std::mt19937_64 rng(spec.seed);
    std::vector<double> xs(spec.n);
    switch (spec.kind) {
    case DatasetKind::uniform: {
        std::uniform_real_distribution<double> d(0.0, 1.0);
        for (double& x : xs) x = d(rng);
        break;
    }
    case DatasetKind::normal: {
        if (!(spec.sigma > 0.0)) throw Error(ErrorCode::InvalidParams, "normal needs sigma > 0");
        std::normal_distribution<double> d(spec.mu, spec.sigma);
        for (double& x : xs) x = d(rng);
        break;
    }
    case DatasetKind::beta22: {
        // Beta(2,2) = G1 / (G1 + G2) with G1, G2 ~ Gamma(2, 1).
        std::gamma_distribution<double> g(2.0, 1.0);
        for (double& x : xs) {
            const double a = g(rng);
            const double b = g(rng);
            x = a / (a + b);
        }
        break;
    }
    case DatasetKind::lognormal: {
        if (!(spec.sigma > 0.0)) throw Error(ErrorCode::InvalidParams, "lognormal needs sigma > 0");
        std::lognormal_distribution<double> d(spec.mu, spec.sigma);
        for (double& x : xs) x = d(rng);
        break;
    }
    case DatasetKind::file:
        throw Error(ErrorCode::InvalidParams, "file datasets are loaded with read_sosd, not generated");
    }
    std::sort(xs.begin(), xs.end());
    return validate_key_array(std::move(xs));
}

// ---------------------------------------------------------------------------
// SOSD binary files: u64 count n followed by n 8-byte keys, little-endian.
// The same layout with IEEE double payload is used for rescaled data.
// Paths ending in ".gz" are read and written through zlib.

struct SosdReport {
    /// False when the file was out of order and had to be sorted.
    bool was_sorted = true;
};

namespace detail {

inline bool has_gz_suffix(const std::string& path) {
    return path.size() >= 3 && path.compare(path.size() - 3, 3, ".gz") == 0;
}

inline std::vector<unsigned char> read_all_bytes(const std::string& path) {
    std::vector<unsigned char> bytes;
    if (has_gz_suffix(path)) {
        gzFile f = gzopen(path.c_str(), "rb");
        if (f == nullptr) {
            throw Error(ErrorCode::IoError, "cannot open " + path);
        }
        unsigned char buf[1 << 16];
        int got = 0;
        while ((got = gzread(f, buf, sizeof(buf))) > 0) {
            bytes.insert(bytes.end(), buf, buf + got);
        }
        const bool failed = got < 0;
        gzclose(f);
        if (failed) {
            throw Error(ErrorCode::IoError, "decompression failed for " + path);
        }
        return bytes;
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open " + path);
    }
    bytes.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    if (in.bad()) {
        throw Error(ErrorCode::IoError, "read failed for " + path);
    }
    return bytes;
}

inline void write_all_bytes(const std::string& path, const std::vector<unsigned char>& bytes) {
    if (has_gz_suffix(path)) {
        gzFile f = gzopen(path.c_str(), "wb");
        if (f == nullptr) {
            throw Error(ErrorCode::IoError, "cannot create " + path);
        }
        const int wrote = bytes.empty() ? 0 : gzwrite(f, bytes.data(), static_cast<unsigned>(bytes.size()));
        const int closed = gzclose(f);
        if (wrote != static_cast<int>(bytes.size()) || closed != Z_OK) {
            throw Error(ErrorCode::IoError, "compression failed for " + path);
        }
        return;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot create " + path);
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw Error(ErrorCode::IoError, "write failed for " + path);
    }
}

inline std::uint64_t load_le64(const unsigned char* p) noexcept {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
        v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    }
    return v;
}

inline void store_le64(unsigned char* p, std::uint64_t v) noexcept {
    for (int i = 0; i < 8; ++i) {
        p[i] = static_cast<unsigned char>(v >> (8 * i));
    }
}

} // namespace detail

template <KeyType Key>
KeyArray<Key> read_sosd(const std::string& path, SosdReport* report = nullptr) {
    const std::vector<unsigned char> bytes = detail::read_all_bytes(path);
    if (bytes.size() < 8) {
        throw Error(ErrorCode::TruncatedFile, path + " is shorter than the 8-byte count");
    }
    const std::uint64_t n = detail::load_le64(bytes.data());
    const std::uint64_t payload = bytes.size() - 8;
    if (payload % 8 != 0 || payload / 8 < n) {
        throw Error(ErrorCode::TruncatedFile, path + " declares " + std::to_string(n) + " keys but holds " +
                                                  std::to_string(bytes.size()) + " bytes");
    }
    if (payload / 8 != n) {
        throw Error(ErrorCode::CountMismatch, path + " declares " + std::to_string(n) + " keys but holds " +
                                                  std::to_string(payload / 8));
    }
    std::vector<Key> keys(n);
    for (std::size_t i = 0; i < n; ++i) {
        keys[i] = std::bit_cast<Key>(detail::load_le64(bytes.data() + 8 + 8 * i));
    }
    if (report != nullptr) {
        report->was_sorted = std::is_sorted(keys.begin(), keys.end());
    }
    return validate_key_array(std::move(keys));
}

template <KeyType Key>
void write_sosd(const std::string& path, const KeyArray<Key>& keys) {
    std::vector<unsigned char> bytes(8 + 8 * keys.size());
    detail::store_le64(bytes.data(), keys.size());
    for (std::size_t i = 0; i < keys.size(); ++i) {
        detail::store_le64(bytes.data() + 8 + 8 * i, std::bit_cast<std::uint64_t>(keys[i]));
    }
    detail::write_all_bytes(path, bytes);
}

// ---------------------------------------------------------------------------
// Transformations

/// Affine map onto [0, 1]: x -> (x - x(1)) / (x(n) - x(1)).
template <KeyType Key>
KeyArray<double> rescale_unit(const KeyArray<Key>& keys) {
    if (!(keys.front() < keys.back())) {
        throw Error(ErrorCode::DegenerateRange, "cannot rescale an array whose keys are all equal");
    }
    const Key lo = keys.front();
    const double span = static_cast<double>(keys.back() - lo);
    std::vector<double> xs(keys.size());
    for (std::size_t i = 0; i < keys.size(); ++i) {
        xs[i] = static_cast<double>(keys[i] - lo) / span;
    }
    return validate_key_array(std::move(xs));
}

/// m keys drawn uniformly without replacement (selection sampling, so the
/// output is already in order).
template <KeyType Key>
KeyArray<Key> subsample(const KeyArray<Key>& keys, std::size_t m, std::uint64_t seed) {
    if (m < 1 || m > keys.size()) {
        throw Error(ErrorCode::InvalidM, "subsample size must be in [1, n]");
    }
    if (m == keys.size()) {
        return keys;
    }
    std::vector<Key> out;
    out.reserve(m);
    std::mt19937_64 rng(seed);
    std::sample(keys.begin(), keys.end(), std::back_inserter(out), m, rng);
    return validate_key_array(std::move(out));
}

/// Quantizes non-negative values to integers, x -> round(x * scale).
inline KeyArray<std::uint64_t> quantize(const KeyArray<double>& keys, double scale) {
    if (!(scale > 0.0) || keys.front() < 0.0 || std::round(keys.back() * scale) >= 18446744073709551616.0) {
        throw Error(ErrorCode::InvalidParams, "quantize needs scale > 0 and keys in [0, 2^64 / scale)");
    }
    std::vector<std::uint64_t> out(keys.size());
    for (std::size_t i = 0; i < keys.size(); ++i) {
        out[i] = static_cast<std::uint64_t>(std::round(keys[i] * scale));
    }
    return validate_key_array(std::move(out));
}

} // namespace espc
