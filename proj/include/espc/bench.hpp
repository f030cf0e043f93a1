#pragma once

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "espc/data.hpp"
#include "espc/density.hpp"
#include "espc/error.hpp"
#include "espc/espc_index.hpp"
#include "espc/key_array.hpp"
#include "espc/stats.hpp"

namespace espc {

/// One experiment: a dataset, its subsample size, the K values to sweep and
/// how queries are drawn.
///
/// JSON keys (all optional):
///   dataset      {"kind", "n", "mu", "sigma", "seed", "path", "mode"}
///   label        string, defaults to the dataset kind or file name
///   n_sub        subsample size (0 = keep all keys)
///   k_grid       ascending list of interval counts
///   queries      Q
///   query_dist   "same" or {"kind", "mu", "sigma"} for queries drawn from g != f
///   seeds        list of base seeds; one sweep per seed
///   rho_samples  J for the rho estimate
///   rho_method   "histogram" or "kernel"
///   threads      worker threads for the query loop
///   output       CSV path
struct BenchConfig {
    DatasetSpec dataset{};
    std::string label;
    std::size_t n_sub = 1'000'000;
    std::vector<std::size_t> k_grid{100, 1'000, 10'000, 100'000};
    std::size_t queries = 100'000;
    std::optional<DatasetSpec> query_dist;
    std::vector<std::uint64_t> seeds{1};
    std::size_t rho_samples = 100'000;
    DensityMethod rho_method = DensityMethod::histogram;
    unsigned threads = 1;
    std::string output = "bench.csv";
};

/// Switches to the full-size protocol: n = 10^7, Q = 3 x 10^7, six K values.
inline void apply_paper_scale(BenchConfig& cfg) {
    cfg.n_sub = 10'000'000;
    cfg.queries = 30'000'000;
    cfg.k_grid = {1'000, 5'000, 10'000, 50'000, 100'000, 200'000};
    if (cfg.dataset.kind != DatasetKind::file && cfg.dataset.n < cfg.n_sub) {
        cfg.dataset.n = cfg.n_sub;
    }
}

inline void validate(const BenchConfig& cfg) {
    if (cfg.k_grid.empty() || !std::is_sorted(cfg.k_grid.begin(), cfg.k_grid.end()) || cfg.k_grid.front() < 1) {
        throw Error(ErrorCode::InvalidConfig, "k_grid must be a non-empty ascending list of positive values");
    }
    if (cfg.queries < 1) {
        throw Error(ErrorCode::InvalidConfig, "queries must be at least 1");
    }
    if (cfg.seeds.empty()) {
        throw Error(ErrorCode::InvalidConfig, "at least one seed is required");
    }
    if (cfg.rho_samples < 1) {
        throw Error(ErrorCode::InvalidConfig, "rho_samples must be at least 1");
    }
    if (cfg.dataset.kind == DatasetKind::file && cfg.dataset.path.empty()) {
        throw Error(ErrorCode::InvalidConfig, "file datasets need a path");
    }
}

/// One row of the error-vs-K sweep.
struct BenchRecord {
    std::string dataset;
    std::size_t n = 0;
    std::size_t k = 0;
    double mean_eps = 0.0;
    double bound = 0.0;
    double mean_comparisons = 0.0;
    double p50_comparisons = 0.0;
    double p99_comparisons = 0.0;
    std::size_t space_bytes = 0;
    double build_ms = 0.0;
    double query_ns_per_op = 0.0;
    double rho_hat = 0.0;
    std::uint64_t seed = 0;
    /// Estimated norm of the query density; equals rho_hat when queries follow the keys.
    double rho_query = 0.0;
};

template <KeyType Key>
std::size_t measure_space(const EspcIndex<Key>& idx) noexcept {
    return serialized_size(idx.intervals());
}

// ---------------------------------------------------------------------------

namespace detail {

struct QueryStats {
    std::uint64_t twice_eps_sum = 0; // 2 eps is an integer: estimates are half-integers
    std::vector<std::uint32_t> comparisons;
    double seconds = 0.0;
};

inline QueryStats run_queries(const EspcIndex<double>& idx, const KeyArray<double>& keys,
                              const std::vector<double>& queries, unsigned threads) {
    QueryStats stats;
    stats.comparisons.resize(queries.size());
    std::vector<std::uint64_t> partial(std::max(1u, threads), 0);
    const std::size_t parts = partial.size();
    const std::size_t chunk = (queries.size() + parts - 1) / parts;

    auto work = [&](std::size_t part) {
        const std::size_t from = part * chunk;
        const std::size_t to = std::min(queries.size(), from + chunk);
        std::uint64_t local = 0;
        for (std::size_t i = from; i < to; ++i) {
            const SearchOutcome out = evaluate_rank(idx, keys.span(), queries[i]);
            stats.comparisons[i] = static_cast<std::uint32_t>(out.comparisons);
            const double eps = std::abs(static_cast<double>(out.rank) - predict(idx, queries[i]));
            local += static_cast<std::uint64_t>(std::llround(2.0 * eps));
        }
        partial[part] = local;
    };

    const auto start = std::chrono::steady_clock::now();
    if (parts == 1) {
        work(0);
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t p = 0; p < parts; ++p) {
            pool.emplace_back(work, p);
        }
    }
    stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    for (std::uint64_t v : partial) {
        stats.twice_eps_sum += v;
    }
    return stats;
}

inline double percentile(std::vector<std::uint32_t> values, double prob) {
    if (values.empty()) {
        return 0.0;
    }
    const auto pos = static_cast<std::size_t>(std::ceil(prob * static_cast<double>(values.size()))) - 1;
    const auto nth = values.begin() + static_cast<std::ptrdiff_t>(std::min(pos, values.size() - 1));
    std::nth_element(values.begin(), nth, values.end());
    return *nth;
}

inline std::string default_label(const BenchConfig& cfg) {
    if (!cfg.label.empty()) {
        return cfg.label;
    }
    if (cfg.dataset.kind == DatasetKind::file) {
        const auto slash = cfg.dataset.path.find_last_of('/');
        return slash == std::string::npos ? cfg.dataset.path : cfg.dataset.path.substr(slash + 1);
    }
    return std::string(to_string(cfg.dataset.kind));
}

inline KeyArray<double> load_dataset(const DatasetSpec& spec) {
    if (spec.kind != DatasetKind::file) {
        return generate(spec);
    }
    if (spec.mode == KeyMode::f64) {
        return read_sosd<double>(spec.path);
    }
    // Integer keys are shifted before conversion so large offsets keep their spacing.
    const KeyArray<std::uint64_t> raw = read_sosd<std::uint64_t>(spec.path);
    std::vector<double> xs(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        xs[i] = static_cast<double>(raw[i] - raw.front());
    }
    return validate_key_array(std::move(xs));
}

} // namespace detail

/// Runs the error-vs-K sweep for every seed in the config.
///
/// Per seed: load or generate the keys, subsample to n_sub, rescale to [0, 1]
/// and estimate rho_f. Queries are Q keys drawn from A with replacement, or Q
/// draws of `query_dist` mapped through the same affine rescaling (rho_g is
/// then estimated from that sample). For each K the index is built and every
/// query evaluated; the record holds the mean prediction error next to the
/// bound (3/2) rho n / K (or the sqrt(rho_f rho_g) form).
inline std::vector<BenchRecord> run_error_experiment(const BenchConfig& cfg) {
    validate(cfg);
    std::vector<BenchRecord> records;
    const std::string label = detail::default_label(cfg);

    for (std::uint64_t seed : cfg.seeds) {
        DatasetSpec spec = cfg.dataset;
        spec.seed = seed;
        KeyArray<double> base = detail::load_dataset(spec);
        if (cfg.n_sub > 0 && cfg.n_sub < base.size()) {
            base = subsample(base, cfg.n_sub, seed ^ 0x5bd1e995ULL);
        }
        const double lo = base.front();
        const double span = base.back() - base.front();
        const KeyArray<double> keys = rescale_unit(base);
        const std::size_t n = keys.size();

        RhoOptions rho_opts;
        rho_opts.method = cfg.rho_method;
        const double rho_f = estimate_rho(keys, cfg.rho_samples, seed + 1, rho_opts).value;

        std::vector<double> queries(cfg.queries);
        double rho_g = rho_f;
        std::mt19937_64 qrng(seed + 2);
        if (!cfg.query_dist) {
            std::uniform_int_distribution<std::size_t> pick(0, n - 1);
            for (double& q : queries) {
                q = keys[pick(qrng)];
            }
        } else {
            DatasetSpec qspec = *cfg.query_dist;
            qspec.n = cfg.queries;
            qspec.seed = seed + 3;
            const KeyArray<double> raw = generate(qspec);
            std::vector<double> mapped(raw.size());
            for (std::size_t i = 0; i < raw.size(); ++i) {
                mapped[i] = (raw[i] - lo) / span;
            }
            const KeyArray<double> qkeys = validate_key_array(mapped);
            rho_g = qkeys.size() >= 4 ? estimate_rho(qkeys, cfg.rho_samples, seed + 4, rho_opts).value : 0.0;
            std::shuffle(mapped.begin(), mapped.end(), qrng);
            queries = std::move(mapped);
        }

        for (std::size_t k : cfg.k_grid) {
            const auto t0 = std::chrono::steady_clock::now();
            const EspcIndex<double> idx = build_espc(keys, k);
            const double build_ms =
                std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

            const detail::QueryStats qs = detail::run_queries(idx, keys, queries, cfg.threads);
            BenchRecord rec;
            rec.dataset = label;
            rec.n = n;
            rec.k = k;
            rec.mean_eps = 0.5 * static_cast<double>(qs.twice_eps_sum) / static_cast<double>(queries.size());
            rec.bound = cfg.query_dist ? error_bound_query_dist(n, k, 0.0, 1.0, rho_f, rho_g)
                                       : error_bound_rho(n, k, 0.0, 1.0, rho_f);
            double cmp_sum = 0.0;
            for (std::uint32_t c : qs.comparisons) {
                cmp_sum += c;
            }
            rec.mean_comparisons = cmp_sum / static_cast<double>(queries.size());
            rec.p50_comparisons = detail::percentile(qs.comparisons, 0.50);
            rec.p99_comparisons = detail::percentile(qs.comparisons, 0.99);
            rec.space_bytes = measure_space(idx);
            rec.build_ms = build_ms;
            rec.query_ns_per_op = 1e9 * qs.seconds / static_cast<double>(queries.size());
            rec.rho_hat = rho_f;
            rec.seed = seed;
            rec.rho_query = rho_g;
            records.push_back(std::move(rec));
        }
    }
    return records;
}

/// Records whose measured mean error exceeds their bound.
inline std::vector<BenchRecord> bound_violations(const std::vector<BenchRecord>& records) {
    std::vector<BenchRecord> bad;
    std::copy_if(records.begin(), records.end(), std::back_inserter(bad),
                 [](const BenchRecord& r) { return r.mean_eps > r.bound; });
    return bad;
}

// ---------------------------------------------------------------------------
// CSV (RFC 4180, '.' decimal separator, shortest round-trip doubles)

inline constexpr const char* kCsvHeader =
    "dataset,n,K,mean_eps,bound,mean_comparisons,p50_comparisons,p99_comparisons,"
    "space_bytes,build_ms,query_ns_per_op,rho_hat,seed,rho_query";

namespace detail {

inline std::string csv_quote(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) {
        return field;
    }
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

template <class T>
std::string to_chars_string(T value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

template <class T>
T from_chars_field(const std::string& s) {
    T value{};
    const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw Error(ErrorCode::BadFormat, "malformed CSV number '" + s + "'");
    }
    return value;
}

// Splits one CSV line, honouring quoted fields.
inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                fields.back() += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                fields.back() += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.emplace_back();
        } else {
            fields.back() += c;
        }
    }
    return fields;
}

} // namespace detail

inline std::string format_csv(const std::vector<BenchRecord>& records) {
    using detail::to_chars_string;
    std::string out = kCsvHeader;
    out += "\r\n";
    for (const BenchRecord& r : records) {
        out += detail::csv_quote(r.dataset);
        for (const std::string& f :
             {to_chars_string(r.n), to_chars_string(r.k), to_chars_string(r.mean_eps), to_chars_string(r.bound),
              to_chars_string(r.mean_comparisons), to_chars_string(r.p50_comparisons),
              to_chars_string(r.p99_comparisons), to_chars_string(r.space_bytes), to_chars_string(r.build_ms),
              to_chars_string(r.query_ns_per_op), to_chars_string(r.rho_hat), to_chars_string(r.seed),
              to_chars_string(r.rho_query)}) {
            out += ',';
            out += f;
        }
        out += "\r\n";
    }
    return out;
}

inline void emit_csv(const std::vector<BenchRecord>& records, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot create " + path);
    }
    out << format_csv(records);
    if (!out) {
        throw Error(ErrorCode::IoError, "write failed for " + path);
    }
}

inline std::vector<BenchRecord> parse_csv(const std::string& text) {
    using detail::from_chars_field;
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) {
        throw Error(ErrorCode::BadFormat, "CSV has no header");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kCsvHeader) {
        throw Error(ErrorCode::BadFormat, "unexpected CSV header");
    }
    std::vector<BenchRecord> records;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto f = detail::split_csv_line(line);
        if (f.size() != 14) {
            throw Error(ErrorCode::BadFormat, "CSV row has " + std::to_string(f.size()) + " fields");
        }
        BenchRecord r;
        r.dataset = f[0];
        r.n = from_chars_field<std::size_t>(f[1]);
        r.k = from_chars_field<std::size_t>(f[2]);
        r.mean_eps = from_chars_field<double>(f[3]);
        r.bound = from_chars_field<double>(f[4]);
        r.mean_comparisons = from_chars_field<double>(f[5]);
        r.p50_comparisons = from_chars_field<double>(f[6]);
        r.p99_comparisons = from_chars_field<double>(f[7]);
        r.space_bytes = from_chars_field<std::size_t>(f[8]);
        r.build_ms = from_chars_field<double>(f[9]);
        r.query_ns_per_op = from_chars_field<double>(f[10]);
        r.rho_hat = from_chars_field<double>(f[11]);
        r.seed = from_chars_field<std::uint64_t>(f[12]);
        r.rho_query = from_chars_field<double>(f[13]);
        records.push_back(std::move(r));
    }
    return records;
}

// ---------------------------------------------------------------------------
// JSON config

namespace detail {

inline DatasetSpec dataset_from_json(const nlohmann::json& j, DatasetSpec spec) {
    if (j.contains("kind")) spec.kind = parse_dataset_kind(j.at("kind").get<std::string>());
    if (j.contains("n")) spec.n = j.at("n").get<std::size_t>();
    if (j.contains("mu")) spec.mu = j.at("mu").get<double>();
    if (j.contains("sigma")) spec.sigma = j.at("sigma").get<double>();
    if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("path")) {
        spec.path = j.at("path").get<std::string>();
        if (!j.contains("kind")) spec.kind = DatasetKind::file;
    }
    if (j.contains("mode")) {
        const auto mode = j.at("mode").get<std::string>();
        if (mode != "u64" && mode != "f64") {
            throw Error(ErrorCode::InvalidConfig, "dataset mode must be u64 or f64");
        }
        spec.mode = mode == "f64" ? KeyMode::f64 : KeyMode::u64;
    }
    return spec;
}

} // namespace detail

/// Overlays the keys present in `j` on `cfg`.
inline BenchConfig bench_config_from_json(const nlohmann::json& j, BenchConfig cfg = {}) {
    try {
        if (!j.is_object()) {
            throw Error(ErrorCode::InvalidConfig, "config must be a JSON object");
        }
        if (j.contains("dataset")) cfg.dataset = detail::dataset_from_json(j.at("dataset"), cfg.dataset);
        if (j.contains("label")) cfg.label = j.at("label").get<std::string>();
        if (j.contains("n_sub")) cfg.n_sub = j.at("n_sub").get<std::size_t>();
        if (j.contains("k_grid")) cfg.k_grid = j.at("k_grid").get<std::vector<std::size_t>>();
        if (j.contains("queries")) cfg.queries = j.at("queries").get<std::size_t>();
        if (j.contains("query_dist")) {
            const auto& q = j.at("query_dist");
            if (q.is_string() && q.get<std::string>() == "same") {
                cfg.query_dist.reset();
            } else {
                DatasetSpec base;
                cfg.query_dist = detail::dataset_from_json(q, base);
            }
        }
        if (j.contains("seeds")) cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
        if (j.contains("rho_samples")) cfg.rho_samples = j.at("rho_samples").get<std::size_t>();
        if (j.contains("rho_method")) cfg.rho_method = parse_density_method(j.at("rho_method").get<std::string>());
        if (j.contains("threads")) cfg.threads = j.at("threads").get<unsigned>();
        if (j.contains("output")) cfg.output = j.at("output").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, e.what());
    }
    return cfg;
}

inline BenchConfig load_bench_config(const std::string& path, BenchConfig cfg = {}) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open " + path);
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("bad JSON in ") + path + ": " + e.what());
    }
    return bench_config_from_json(j, std::move(cfg));
}

} // namespace espc
