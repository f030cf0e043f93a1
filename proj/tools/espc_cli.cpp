// espc: command-line front end for the equal-split piecewise-constant index.
//
// Exit codes: 0 success, 1 usage or validation error, 2 bound check failed,
// 3 I/O error.

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "espc/espc.hpp"

namespace {

using namespace espc;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitCheck = 2;
constexpr int kExitIo = 3;

KeyMode parse_mode(const std::string& s) {
    if (s == "u64") return KeyMode::u64;
    if (s == "f64") return KeyMode::f64;
    throw Error(ErrorCode::InvalidParams, "mode must be u64 or f64");
}

template <class F>
decltype(auto) with_mode(KeyMode mode, F&& f) {
    if (mode == KeyMode::u64) {
        return f(std::uint64_t{});
    }
    return f(double{});
}

template <KeyType Key>
Key parse_key(const std::string& text) {
    std::size_t used = 0;
    Key value{};
    try {
        if constexpr (std::is_same_v<Key, double>) {
            value = std::stod(text, &used);
        } else {
            if (!text.empty() && text.front() == '-') throw std::invalid_argument("negative");
            value = std::stoull(text, &used);
        }
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size()) {
        throw Error(ErrorCode::InvalidParams, "cannot parse query '" + text + "' as a key");
    }
    return value;
}

template <KeyType Key>
KeyArray<Key> load_keys(const std::string& path) {
    SosdReport report;
    KeyArray<Key> keys = read_sosd<Key>(path, &report);
    if (!report.was_sorted) {
        std::cerr << "warning: " << path << " was not sorted; keys were sorted on load\n";
    }
    return keys;
}

std::vector<std::byte> read_index_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open " + path);
    }
    std::vector<char> raw{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    std::vector<std::byte> bytes(raw.size());
    std::memcpy(bytes.data(), raw.data(), raw.size());
    return bytes;
}

void write_index_bytes(const std::string& path, const std::vector<std::byte>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot create " + path);
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw Error(ErrorCode::IoError, "write failed for " + path);
    }
}

// ---------------------------------------------------------------------------

struct GenerateArgs {
    std::string kind = "uniform";
    std::size_t n = 1'000'000;
    double mu = 0.5;
    double sigma = 0.1;
    std::uint64_t seed = 1;
    std::string mode = "u64";
    double scale = 4294967296.0;
    std::string out;
};

int run_generate(const GenerateArgs& a, CLI::App& cmd) {
    DatasetSpec spec;
    spec.kind = parse_dataset_kind(a.kind);
    spec.n = a.n;
    spec.seed = a.seed;
    spec.mu = a.mu;
    spec.sigma = a.sigma;
    if (spec.kind == DatasetKind::lognormal) {
        if (cmd.count("--mu") == 0) spec.mu = 0.0;
        if (cmd.count("--sigma") == 0) spec.sigma = 2.0;
    }
    const KeyArray<double> keys = generate(spec);
    if (parse_mode(a.mode) == KeyMode::f64) {
        write_sosd(a.out, keys);
    } else {
        write_sosd(a.out, quantize(keys, a.scale));
    }
    std::cout << "n=" << keys.size() << "\nfile=" << a.out << "\n";
    return kExitOk;
}

struct IngestArgs {
    std::string in;
    std::string out;
    std::string mode = "u64";
    bool rescale = false;
};

int run_ingest(const IngestArgs& a) {
    return with_mode(parse_mode(a.mode), [&](auto tag) {
        using Key = decltype(tag);
        const KeyArray<Key> keys = load_keys<Key>(a.in);
        std::cout << "n=" << keys.size() << "\nmin=" << keys.front() << "\nmax=" << keys.back() << "\n";
        if (a.rescale) {
            write_sosd(a.out, rescale_unit(keys));
            std::cout << "mode=f64\n";
        } else {
            write_sosd(a.out, keys);
            std::cout << "mode=" << a.mode << "\n";
        }
        return kExitOk;
    });
}

struct BuildArgs {
    std::string data;
    std::string mode = "u64";
    std::optional<std::size_t> k;
    std::string policy;
    std::string out;
};

int run_build(const BuildArgs& a) {
    return with_mode(parse_mode(a.mode), [&](auto tag) {
        using Key = decltype(tag);
        if (a.k && *a.k == 0) {
            throw Error(ErrorCode::InvalidK, "K must be at least 1");
        }
        const KeyArray<Key> keys = load_keys<Key>(a.data);
        std::size_t k = 0;
        if (a.k) {
            k = *a.k;
        } else {
            SizingPolicy policy;
            policy.kind = parse_policy_kind(a.policy.empty() ? "linear" : a.policy);
            k = choose_k(policy, keys.size());
        }
        const EspcIndex<Key> idx = build_espc(keys, k);
        const auto bytes = serialize_index(idx);
        write_index_bytes(a.out, bytes);
        std::cout << "n=" << idx.size() << "\nK=" << idx.intervals() << "\ndelta=" << idx.delta()
                  << "\nspace_bytes=" << measure_space(idx) << "\n";
        return kExitOk;
    });
}

struct QueryArgs {
    std::string index;
    std::string data;
    std::string mode = "u64";
    std::vector<std::string> q;
};

int run_query(const QueryArgs& a) {
    return with_mode(parse_mode(a.mode), [&](auto tag) {
        using Key = decltype(tag);
        const KeyArray<Key> keys = load_keys<Key>(a.data);
        const EspcIndex<Key> idx = deserialize_index<Key>(read_index_bytes(a.index));
        for (const std::string& text : a.q) {
            const Key q = parse_key<Key>(text);
            const SearchOutcome out = evaluate_rank(idx, keys, q);
            const double eps = std::abs(static_cast<double>(out.rank) - predict(idx, q));
            std::cout << "q=" << text << " rank=" << out.rank << " predicted=" << predict(idx, q)
                      << " eps=" << eps << " comparisons=" << out.comparisons << "\n";
        }
        return kExitOk;
    });
}

struct RhoArgs {
    std::string data;
    std::string mode = "u64";
    std::string method = "histogram";
    std::size_t samples = 100'000;
    std::uint64_t seed = 1;
    bool raw = false;
    std::optional<double> smoothing;
};

int run_rho(const RhoArgs& a) {
    return with_mode(parse_mode(a.mode), [&](auto tag) {
        using Key = decltype(tag);
        const KeyArray<Key> keys = load_keys<Key>(a.data);
        RhoOptions opts{parse_density_method(a.method), a.smoothing};
        RhoEstimate est;
        bool unit_span = false;
        if (a.raw) {
            est = estimate_rho(keys, a.samples, a.seed, opts);
            unit_span = static_cast<double>(keys.front()) == 0.0 && static_cast<double>(keys.back()) == 1.0;
        } else {
            est = estimate_rho(rescale_unit(keys), a.samples, a.seed, opts);
            unit_span = true;
        }
        std::cout << "rho=" << est.value << "\nmethod=" << to_string(est.method) << "\nsamples=" << est.samples
                  << "\nseed=" << est.seed << "\nsmoothing=" << est.smoothing << "\n";
        if (unit_span && est.value > 0.0) {
            std::cout << "h2=" << -std::log(est.value) << "\n";
        }
        return kExitOk;
    });
}

struct EntropyArgs {
    std::string data;
    std::string mode = "u64";
    std::size_t k = 1000;
    std::optional<double> a;
    std::optional<double> b;
    bool base2 = false;
};

int run_entropy(const EntropyArgs& e) {
    return with_mode(parse_mode(e.mode), [&](auto tag) {
        using Key = decltype(tag);
        const KeyArray<Key> keys = load_keys<Key>(e.data);
        const double lo = e.a.value_or(static_cast<double>(keys.front()));
        const double hi = e.b.value_or(static_cast<double>(keys.back()));
        const PartitionProfile profile = partition_probabilities(keys, lo, hi, e.k);
        const LogBase base = e.base2 ? LogBase::base2 : LogBase::natural;
        std::cout << "n=" << keys.size() << "\nK=" << e.k << "\na=" << lo << "\nb=" << hi
                  << "\nbase=" << (e.base2 ? "2" : "e") << "\nH2=" << renyi_entropy_2(profile, base)
                  << "\nlog_eps_bound=" << log_error_entropy_bound(keys.size(), profile, base)
                  << "\neps_bound=" << error_bound_partition(keys.size(), profile) << "\n";
        return kExitOk;
    });
}

struct BenchArgs {
    std::string config;
    std::string dataset;
    std::string data;
    std::string mode = "u64";
    std::size_t n = 0;
    std::size_t n_sub = 0;
    std::vector<std::size_t> k_grid;
    std::size_t queries = 0;
    std::string query_dist;
    double query_mu = 0.5;
    double query_sigma = 0.1;
    std::vector<std::uint64_t> seeds;
    std::size_t rho_samples = 0;
    std::string rho_method;
    unsigned threads = 1;
    std::string out;
    bool paper_scale = false;
    bool check = false;
};

int run_bench(const BenchArgs& a, CLI::App& cmd) {
    BenchConfig cfg;
    if (!a.config.empty()) {
        cfg = load_bench_config(a.config, cfg);
    }
    if (a.paper_scale) {
        apply_paper_scale(cfg);
    }
    // Explicit flags override the config file.
    if (cmd.count("--dataset")) cfg.dataset.kind = parse_dataset_kind(a.dataset);
    if (cmd.count("--data")) {
        cfg.dataset.kind = DatasetKind::file;
        cfg.dataset.path = a.data;
    }
    if (cmd.count("--mode")) cfg.dataset.mode = parse_mode(a.mode);
    if (cmd.count("--n")) cfg.dataset.n = a.n;
    if (cmd.count("--n-sub")) cfg.n_sub = a.n_sub;
    if (cmd.count("--k-grid")) cfg.k_grid = a.k_grid;
    if (cmd.count("--queries")) cfg.queries = a.queries;
    if (cmd.count("--query-dist")) {
        if (a.query_dist == "same") {
            cfg.query_dist.reset();
        } else {
            DatasetSpec q;
            q.kind = parse_dataset_kind(a.query_dist);
            q.mu = a.query_mu;
            q.sigma = a.query_sigma;
            cfg.query_dist = q;
        }
    }
    if (cmd.count("--seeds")) cfg.seeds = a.seeds;
    if (cmd.count("--rho-samples")) cfg.rho_samples = a.rho_samples;
    if (cmd.count("--rho-method")) cfg.rho_method = parse_density_method(a.rho_method);
    if (cmd.count("--threads")) cfg.threads = a.threads;
    if (cmd.count("--out")) cfg.output = a.out;
    if (cfg.dataset.kind != DatasetKind::file && cfg.dataset.n < cfg.n_sub) {
        cfg.dataset.n = cfg.n_sub;
    }

    const std::vector<BenchRecord> records = run_error_experiment(cfg);
    emit_csv(records, cfg.output);
    for (const BenchRecord& r : records) {
        std::cout << r.dataset << " seed=" << r.seed << " K=" << r.k << " mean_eps=" << r.mean_eps
                  << " bound=" << r.bound << " mean_cmp=" << r.mean_comparisons << " space=" << r.space_bytes
                  << "\n";
    }
    std::cout << "csv=" << cfg.output << "\n";
    const auto bad = bound_violations(records);
    if (a.check && !bad.empty()) {
        for (const BenchRecord& r : bad) {
            std::cerr << "bound violated: " << r.dataset << " K=" << r.k << " mean_eps=" << r.mean_eps
                      << " > bound=" << r.bound << "\n";
        }
        return kExitCheck;
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Equal-split piecewise-constant learned index: build, query, estimate and benchmark"};
    app.require_subcommand(1, 1);
    app.set_help_all_flag("--help-all", "Show help for every command");

    GenerateArgs gen;
    auto* generate_cmd = app.add_subcommand("generate", "Write a seeded synthetic dataset as an SOSD file");
    generate_cmd->add_option("--kind", gen.kind, "uniform | normal | beta22 | lognormal")->capture_default_str();
    generate_cmd->add_option("--n", gen.n, "Number of keys")->capture_default_str();
    generate_cmd->add_option("--mu", gen.mu, "Location (normal, lognormal; lognormal default 0)")->capture_default_str();
    generate_cmd->add_option("--sigma", gen.sigma, "Scale (normal, lognormal; lognormal default 2)")->capture_default_str();
    generate_cmd->add_option("--seed", gen.seed, "PRNG seed (mt19937_64)")->capture_default_str();
    generate_cmd->add_option("--mode", gen.mode, "Payload: u64 (quantized by --scale) or f64")->capture_default_str();
    generate_cmd->add_option("--scale", gen.scale, "u64 mode: key = round(x * scale)")->capture_default_str();
    generate_cmd->add_option("--out", gen.out, "Output path (.gz compresses)")->required();

    IngestArgs ing;
    auto* ingest_cmd = app.add_subcommand("ingest", "Validate an SOSD file, optionally rescaling it to [0,1]");
    ingest_cmd->add_option("--in", ing.in, "Input path")->required();
    ingest_cmd->add_option("--out", ing.out, "Output path")->required();
    ingest_cmd->add_option("--mode", ing.mode, "Input payload: u64 or f64")->capture_default_str();
    ingest_cmd->add_flag("--rescale", ing.rescale, "Map keys to [0,1] and write an f64 file");

    BuildArgs bld;
    auto* build_cmd = app.add_subcommand("build", "Build and serialize an index");
    build_cmd->add_option("--data", bld.data, "SOSD key file")->required();
    build_cmd->add_option("--mode", bld.mode, "Payload: u64 or f64")->capture_default_str();
    auto* k_opt = build_cmd->add_option("--k", bld.k, "Number of intervals");
    build_cmd->add_option("--policy", bld.policy, "linear | sublinear | chebyshev | subexponential")->excludes(k_opt);
    build_cmd->add_option("--out", bld.out, "Index output path")->required();

    QueryArgs qry;
    auto* query_cmd = app.add_subcommand("query", "Exact rank of one or more keys through an index");
    query_cmd->add_option("--index", qry.index, "Serialized index")->required();
    query_cmd->add_option("--data", qry.data, "SOSD key file the index was built from")->required();
    query_cmd->add_option("--mode", qry.mode, "Payload: u64 or f64")->capture_default_str();
    query_cmd->add_option("--q", qry.q, "Query key (repeatable)")->required();

    RhoArgs rho;
    auto* rho_cmd = app.add_subcommand("rho", "Estimate the squared L2 norm of the key density");
    rho_cmd->add_option("--data", rho.data, "SOSD key file")->required();
    rho_cmd->add_option("--mode", rho.mode, "Payload: u64 or f64")->capture_default_str();
    rho_cmd->add_option("--method", rho.method, "histogram | kernel")->capture_default_str();
    rho_cmd->add_option("--samples", rho.samples, "Monte Carlo samples J")->capture_default_str();
    rho_cmd->add_option("--seed", rho.seed, "PRNG seed")->capture_default_str();
    rho_cmd->add_option("--smoothing", rho.smoothing, "Bin width or bandwidth (default: Freedman-Diaconis / Silverman)");
    rho_cmd->add_flag("--raw", rho.raw, "Do not rescale keys to [0,1] first");

    EntropyArgs ent;
    auto* entropy_cmd = app.add_subcommand("entropy", "Order-2 Renyi entropy of K equal intervals and the log-error bound");
    entropy_cmd->add_option("--data", ent.data, "SOSD key file")->required();
    entropy_cmd->add_option("--mode", ent.mode, "Payload: u64 or f64")->capture_default_str();
    entropy_cmd->add_option("--k", ent.k, "Number of intervals")->capture_default_str()->check(CLI::PositiveNumber);
    entropy_cmd->add_option("--a", ent.a, "Support lower bound (default: smallest key)");
    entropy_cmd->add_option("--b", ent.b, "Support upper bound (default: largest key)");
    entropy_cmd->add_flag("--base2", ent.base2, "Report entropies in bits");

    BenchArgs bn;
    auto* bench_cmd = app.add_subcommand("bench", "Error-vs-K sweep written as CSV");
    bench_cmd->add_option("--config", bn.config, "JSON config; explicit flags take precedence");
    bench_cmd->add_option("--dataset", bn.dataset, "uniform | normal | beta22 | lognormal (default uniform)");
    bench_cmd->add_option("--data", bn.data, "SOSD key file instead of a synthetic dataset");
    bench_cmd->add_option("--mode", bn.mode, "Payload of --data: u64 or f64");
    bench_cmd->add_option("--n", bn.n, "Synthetic dataset size (default 10^6)");
    bench_cmd->add_option("--n-sub", bn.n_sub, "Subsample size (default 10^6, 0 keeps all)");
    bench_cmd->add_option("--k-grid", bn.k_grid, "Interval counts (default 100 1000 10000 100000)")->delimiter(',');
    bench_cmd->add_option("--queries", bn.queries, "Queries per K (default 10^5)");
    bench_cmd->add_option("--query-dist", bn.query_dist, "same | uniform | normal | beta22 | lognormal");
    bench_cmd->add_option("--query-mu", bn.query_mu, "Query distribution location")->capture_default_str();
    bench_cmd->add_option("--query-sigma", bn.query_sigma, "Query distribution scale")->capture_default_str();
    bench_cmd->add_option("--seeds", bn.seeds, "Base seeds, one sweep each (default 1)")->delimiter(',');
    bench_cmd->add_option("--rho-samples", bn.rho_samples, "Monte Carlo samples for rho (default 10^5)");
    bench_cmd->add_option("--rho-method", bn.rho_method, "histogram | kernel (default histogram)");
    bench_cmd->add_option("--threads", bn.threads, "Query worker threads (default 1)");
    bench_cmd->add_option("--out", bn.out, "CSV output path (default bench.csv)");
    bench_cmd->add_flag("--paper-scale", bn.paper_scale, "n = 10^7, Q = 3x10^7, K in {1e3,5e3,1e4,5e4,1e5,2e5}");
    bench_cmd->add_flag("--check", bn.check, "Exit 2 if any mean error exceeds its bound");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e, std::cout, std::cerr);
        std::cerr << "\n" << app.help();
        return kExitUsage;
    }

    try {
        if (*generate_cmd) return run_generate(gen, *generate_cmd);
        if (*ingest_cmd) return run_ingest(ing);
        if (*build_cmd) return run_build(bld);
        if (*query_cmd) return run_query(qry);
        if (*rho_cmd) return run_rho(rho);
        if (*entropy_cmd) return run_entropy(ent);
        if (*bench_cmd) return run_bench(bn, *bench_cmd);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.is_io() ? kExitIo : kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
