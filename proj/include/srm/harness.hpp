#pragma once

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "srm/analysis.hpp"
#include "srm/experiments.hpp"
#include "srm/io.hpp"
#include "srm/operator.hpp"
#include "srm/recovery.hpp"
#include "srm/transforms.hpp"

namespace srm {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A fully resolved run: command, validated parameters with defaults
/// filled, and the two fields every command shares.
struct RunConfig {
    std::string command;
    std::map<std::string, std::string> params;
    std::string output_path;
    std::uint64_t master_seed = 0;

    const std::string& str(const std::string& key) const { return params.at(key); }
    int integer(const std::string& key) const { return std::stoi(params.at(key)); }
    double real(const std::string& key) const { return std::stod(params.at(key)); }
    std::uint64_t u64(const std::string& key) const { return std::stoull(params.at(key)); }
    bool flag(const std::string& key) const { return params.at(key) == "true"; }

    std::vector<int> int_list(const std::string& key) const {
        std::vector<int> out;
        std::stringstream ss(params.at(key));
        std::string item;
        while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
        return out;
    }
    std::vector<double> double_list(const std::string& key) const {
        std::vector<double> out;
        std::stringstream ss(params.at(key));
        std::string item;
        while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
        return out;
    }
    std::vector<std::string> str_list(const std::string& key) const {
        std::vector<std::string> out;
        std::stringstream ss(params.at(key));
        std::string item;
        while (std::getline(ss, item, ',')) out.push_back(item);
        return out;
    }

    /// Canonical "command=...;k1=v1;..." form (sorted keys) used for the
    /// config echo and its hash.
    std::string canonical() const {
        std::string s = "command=" + command;
        for (const auto& [k, v] : params) s += ";" + k + "=" + v;
        return s;
    }
};

namespace detail {

enum class ParamType { Int, U64, Real, Bool, Str, IntList, RealList, StrList };

struct ParamSpec {
    const char* key;
    ParamType type;
    bool required;
    const char* def;  // default value (nullptr when required)
};

inline const std::map<std::string, std::vector<ParamSpec>>& command_schemas() {
    using PT = ParamType;
    static const std::map<std::string, std::vector<ParamSpec>> schemas = {
        {"sense",
         {{"n", PT::Int, true, nullptr},
          {"m", PT::Int, true, nullptr},
          {"ensemble", PT::Str, true, nullptr},
          {"in", PT::Str, true, nullptr},
          {"out", PT::Str, true, nullptr},
          {"op-json", PT::Str, false, ""},
          {"seed", PT::U64, false, "1"},
          {"sub-seed", PT::U64, false, "2"},
          {"include-dc", PT::Bool, false, "false"}}},
        {"reconstruct",
         {{"op-json", PT::Str, true, nullptr},
          {"in", PT::Str, true, nullptr},
          {"out", PT::Str, true, nullptr},
          {"psi", PT::Str, false, "identity"},
          {"x-out", PT::Str, false, ""},
          {"result", PT::Str, false, ""},
          {"truth", PT::Str, false, ""},
          {"solver", PT::Str, false, "l1"},
          {"tau", PT::Real, false, "-1"},
          {"tau-rel", PT::Real, false, "1e-4"},
          {"tol", PT::Real, false, "1e-6"},
          {"max-iter", PT::Int, false, "2000"},
          {"k-max", PT::Int, false, "0"},
          {"residual-tol", PT::Real, false, "1e-9"},
          {"seed", PT::U64, false, "1"}}},
        {"coherence",
         {{"n", PT::Int, true, nullptr},
          {"f", PT::Str, true, nullptr},
          {"b", PT::Int, false, "0"},
          {"psi", PT::Str, false, "identity"},
          {"rand", PT::Str, false, "none"},
          {"seed", PT::U64, false, "1"},
          {"support-k", PT::Int, false, "0"},
          {"out", PT::Str, false, ""}}},
        {"qq",
         {{"n", PT::Int, false, "256"},
          {"m", PT::Int, false, "128"},
          {"f", PT::Str, false, "dct"},
          {"b", PT::Int, false, "0"},
          {"psi", PT::Str, false, "db8"},
          {"rand", PT::Str, false, "l"},
          {"seed", PT::U64, false, "1"},
          {"seeds", PT::Int, false, "10"},
          {"out", PT::Str, true, nullptr}}},
        {"phase",
         {{"n", PT::Int, false, "256"},
          {"m", PT::Int, false, "128"},
          {"psi", PT::Str, false, "idct"},
          {"ensemble", PT::Str, true, nullptr},
          {"k", PT::IntList, true, nullptr},
          {"trials", PT::Int, false, "200"},
          {"seed", PT::U64, false, "12345"},
          {"rel-tol", PT::Real, false, "1e-3"},
          {"include-dc", PT::Bool, false, "false"},
          {"threads", PT::Int, false, "0"},
          {"tau-rel", PT::Real, false, "1e-4"},
          {"tol", PT::Real, false, "1e-6"},
          {"max-iter", PT::Int, false, "2000"},
          {"out", PT::Str, true, nullptr}}},
        {"mstar",
         {{"n", PT::Int, false, "256"},
          {"k", PT::IntList, true, nullptr},
          {"pstar", PT::Real, false, "0.9"},
          {"trials", PT::Int, false, "100"},
          {"resolution", PT::Int, false, "4"},
          {"ensemble", PT::Str, true, nullptr},
          {"psi", PT::Str, false, "idct"},
          {"seed", PT::U64, false, "12345"},
          {"threads", PT::Int, false, "0"},
          {"out", PT::Str, true, nullptr}}},
        {"compressible",
         {{"n", PT::Int, false, "4096"},
          {"rates", PT::RealList, false, "0.15,0.25,0.35,0.5"},
          {"ensembles", PT::StrList, false, "dct4096-l,wht32-g"},
          {"decay", PT::Real, false, "1.5"},
          {"tau-rel", PT::Real, false, "1e-6"},
          {"max-iter", PT::Int, false, "3000"},
          {"seed", PT::U64, false, "12345"},
          {"threads", PT::Int, false, "0"},
          {"out", PT::Str, true, nullptr}}},
        {"bench",
         {{"sizes", PT::IntList, false, "1024,2048,4096"},
          {"reps", PT::Int, false, "20"},
          {"seed", PT::U64, false, "1"},
          {"out", PT::Str, true, nullptr}}},
        {"selftest", {{"seed", PT::U64, false, "1"}}},
    };
    return schemas;
}

inline std::string usage_text() {
    return "usage: srm <command> [--key value]... [--config file.json]\n"
           "commands:\n"
           "  sense         apply an SRM operator to an input vector\n"
           "  reconstruct   recover coefficients from measurements (l1 or omp)\n"
           "  coherence     mutual/cumulative coherence report\n"
           "  qq            QQ/KS normality report for Phi*Psi entries\n"
           "  phase         recovery-probability curve over a sparsity grid\n"
           "  mstar         minimal measurement count M*(K) by bisection\n"
           "  compressible  PSNR vs sampling rate for a power-law signal\n"
           "  bench         SRM forward vs dense multiply timing\n"
           "  selftest      run built-in invariant checks\n"
           "Config files are flat JSON objects; command-line flags override them.\n";
}

inline void check_value(const ParamSpec& spec, const std::string& value,
                        const std::string& command) {
    const auto fail = [&](const std::string& why) {
        throw UsageError("invalid value for --" + std::string(spec.key) + " in '" + command +
                         "': " + why);
    };
    const auto check_one = [&](const std::string& v, ParamType t) {
        try {
            std::size_t pos = 0;
            switch (t) {
                case ParamType::Int: (void)std::stoi(v, &pos); break;
                case ParamType::U64: (void)std::stoull(v, &pos); break;
                case ParamType::Real: (void)std::stod(v, &pos); break;
                default: pos = v.size(); break;
            }
            if (pos != v.size()) fail("'" + v + "' is not a number");
        } catch (const std::logic_error&) {
            fail("'" + v + "' is not a number");
        }
    };
    switch (spec.type) {
        case ParamType::Int:
        case ParamType::U64:
        case ParamType::Real:
            check_one(value, spec.type);
            break;
        case ParamType::Bool:
            if (value != "true" && value != "false")
                fail("expected true or false, got '" + value + "'");
            break;
        case ParamType::IntList:
        case ParamType::RealList: {
            if (value.empty()) fail("empty list");
            std::stringstream ss(value);
            std::string item;
            while (std::getline(ss, item, ','))
                check_one(item, spec.type == ParamType::IntList ? ParamType::Int
                                                                : ParamType::Real);
            break;
        }
        case ParamType::Str:
        case ParamType::StrList:
            break;
    }
}

inline TransformKind parse_transform_kind(const std::string& s) {
    if (s == "wht") return TransformKind::WHT;
    if (s == "dct") return TransformKind::DCT;
    if (s == "identity" || s == "id") return TransformKind::Identity;
    if (s == "db8") return TransformKind::Db8Wavelet;
    throw UsageError("unknown transform '" + s + "' (expected wht|dct|identity|db8)");
}

/// Basis names for Psi; "idct"/"dct" both mean columns are cosine basis
/// functions (the synthesis orientation of the DCT).
inline LinearMap parse_basis(const std::string& s, int n) {
    if (s == "identity" || s == "id") return identity_map(n);
    TransformKind kind;
    if (s == "idct" || s == "dct")
        kind = TransformKind::DCT;
    else if (s == "db8")
        kind = TransformKind::Db8Wavelet;
    else if (s == "wht")
        kind = TransformKind::WHT;
    else
        throw UsageError("unknown basis '" + s + "' (expected identity|idct|db8|wht)");
    return make_basis(TransformSpec{kind, 0, n, 0});
}

inline TransformSpec parse_basis_spec(const std::string& s, int n) {
    if (s == "identity" || s == "id") return TransformSpec{TransformKind::Identity, 0, n, 0};
    if (s == "idct" || s == "dct") return TransformSpec{TransformKind::DCT, 0, n, 0};
    if (s == "db8") return TransformSpec{TransformKind::Db8Wavelet, 0, n, 0};
    if (s == "wht") return TransformSpec{TransformKind::WHT, 0, n, 0};
    throw UsageError("unknown basis '" + s + "' (expected identity|idct|db8|wht)");
}

}  // namespace detail

/// Parses argv-style arguments (and an optional flat-JSON config file) into
/// a validated RunConfig. Precedence: defaults < config file < flags.
/// Unknown keys, type mismatches and missing required fields all raise
/// UsageError naming the offending key.
inline RunConfig parse_config(const std::vector<std::string>& args) {
    if (args.empty()) throw UsageError(detail::usage_text());
    RunConfig cfg;
    cfg.command = args[0];
    const auto& schemas = detail::command_schemas();
    const auto schema_it = schemas.find(cfg.command);
    if (schema_it == schemas.end())
        throw UsageError("unknown command '" + cfg.command + "'\n" + detail::usage_text());
    const auto& schema = schema_it->second;

    const auto find_spec = [&](const std::string& key) -> const detail::ParamSpec* {
        for (const auto& s : schema)
            if (key == s.key) return &s;
        return nullptr;
    };

    // collect raw key/value pairs: config file first, flags second
    std::map<std::string, std::string> raw;
    std::string config_path;
    for (std::size_t i = 1; i < args.size(); i += 2) {
        const std::string& key = args[i];
        if (key.size() < 3 || key.rfind("--", 0) != 0)
            throw UsageError("expected --key, got '" + key + "'\n" + detail::usage_text());
        if (i + 1 >= args.size()) throw UsageError("missing value for " + key);
        if (key == "--config") {
            config_path = args[i + 1];
            continue;
        }
        raw[key.substr(2)] = args[i + 1];
    }
    if (!config_path.empty()) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(read_text_file(config_path));
        } catch (const nlohmann::json::exception& e) {
            throw UsageError("config file " + config_path + ": " + e.what());
        }
        if (!j.is_object()) throw UsageError("config file must be a flat JSON object");
        for (const auto& [k, v] : j.items()) {
            if (raw.count(k)) continue;  // CLI flags override file values
            if (v.is_string())
                raw[k] = v.get<std::string>();
            else if (v.is_boolean())
                raw[k] = v.get<bool>() ? "true" : "false";
            else if (v.is_number_integer())
                raw[k] = std::to_string(v.get<long long>());
            else if (v.is_number_unsigned())
                raw[k] = std::to_string(v.get<unsigned long long>());
            else if (v.is_number_float()) {
                raw[k] = format_double(v.get<double>());
            } else
                throw UsageError("config key '" + k + "': unsupported value type (flat "
                                 "strings/numbers/booleans only)");
        }
    }

    for (const auto& [key, value] : raw) {
        const auto* spec = find_spec(key);
        if (!spec)
            throw UsageError("unknown key '--" + key + "' for command '" + cfg.command + "'");
        detail::check_value(*spec, value, cfg.command);
        cfg.params[key] = value;
    }
    for (const auto& spec : schema) {
        if (cfg.params.count(spec.key)) continue;
        if (spec.required)
            throw UsageError("missing required --" + std::string(spec.key) + " for command '" +
                             cfg.command + "'");
        cfg.params[spec.key] = spec.def;
    }

    // cross-field checks
    if (cfg.params.count("n") && cfg.params.count("m")) {
        if (cfg.integer("m") > cfg.integer("n")) throw UsageError("m exceeds n");
        if (cfg.integer("m") < 1) throw UsageError("m must be >= 1");
    }
    if (cfg.params.count("n") && cfg.integer("n") < 1) throw UsageError("n must be >= 1");
    if (cfg.params.count("trials") && cfg.integer("trials") < 1)
        throw UsageError("trials must be >= 1");

    if (cfg.params.count("out")) cfg.output_path = cfg.params["out"];
    if (cfg.params.count("seed")) cfg.master_seed = cfg.u64("seed");
    return cfg;
}

namespace detail {

inline void write_run_header(std::ostream& out, const RunConfig& cfg) {
    const std::string canon = cfg.canonical();
    out << "# srm " << cfg.command << "\n";
    out << "# config: " << canon << "\n";
    out << "# config_hash: " << hex64(fnv1a64(canon)) << "\n";
    out << "# master_seed: " << cfg.master_seed << "\n";
}

inline std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw UsageError("cannot open output file: " + path);
    return out;
}

inline nlohmann::json operator_to_json(const SrmOperator& op) {
    return nlohmann::json{
        {"n", op.n},
        {"m", op.m},
        {"transform", {{"kind", to_string(op.transform.kind)},
                       {"block", op.transform.effective_block()}}},
        {"randomizer", {{"kind", to_string(op.randomizer.kind)}, {"seed", op.randomizer.seed}}},
        {"subsample", {{"seed", op.subsample.seed}, {"include_dc", op.subsample.include_dc}}}};
}

inline SrmOperator operator_from_json(const nlohmann::json& j) {
    const int n = j.at("n").get<int>();
    const int m = j.at("m").get<int>();
    const auto& t = j.at("transform");
    TransformSpec spec{parse_transform_kind(t.at("kind").get<std::string>()),
                       t.at("block").get<int>(), n, 0};
    const auto& r = j.at("randomizer");
    const std::string rk = r.at("kind").get<std::string>();
    if (rk != "local" && rk != "global")
        throw UsageError("operator json: randomizer kind must be local|global");
    RandomizerSpec rspec{rk == "local" ? RandomizerKind::Local : RandomizerKind::Global,
                         r.at("seed").get<std::uint64_t>(), n};
    const auto& d = j.at("subsample");
    return SrmOperator::create(n, m, spec, rspec, d.at("seed").get<std::uint64_t>(),
                               d.at("include_dc").get<bool>());
}

inline RandomizerKind parse_randomizer_kind(const std::string& s) {
    if (s == "l" || s == "local") return RandomizerKind::Local;
    if (s == "g" || s == "global") return RandomizerKind::Global;
    throw UsageError("unknown randomizer '" + s + "' (expected l|g|local|global)");
}

// --- command bodies --------------------------------------------------------

inline int cmd_sense(const RunConfig& cfg, std::ostream& err) {
    const int n = cfg.integer("n");
    const int m = cfg.integer("m");
    const EnsembleSpec ens = parse_ensemble(cfg.str("ensemble"), n);
    if (ens.is_gaussian()) throw UsageError("sense requires an SRM ensemble, not 'gaussian'");
    const Vec x = read_vector_csv(cfg.str("in"));
    if (static_cast<int>(x.size()) != n) {
        err << "input vector has length " << x.size() << ", expected n = " << n << "\n";
        return 1;
    }
    const SrmOperator op = SrmOperator::create(
        n, m, TransformSpec{ens.transform_kind(), ens.block, n, 0},
        RandomizerSpec{ens.randomizer, cfg.u64("seed"), n}, cfg.u64("sub-seed"),
        cfg.flag("include-dc"));
    const Vec y = srm_forward(op, x);
    auto out = open_output(cfg.str("out"));
    write_run_header(out, cfg);
    for (double v : y) out << format_double(v) << "\n";
    if (!cfg.str("op-json").empty()) {
        auto jout = open_output(cfg.str("op-json"));
        jout << operator_to_json(op).dump(2) << "\n";
    }
    return 0;
}

inline int cmd_reconstruct(const RunConfig& cfg, std::ostream& err) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(cfg.str("op-json")));
    } catch (const nlohmann::json::exception& e) {
        throw UsageError(std::string("operator json: ") + e.what());
    }
    const SrmOperator op = operator_from_json(j);
    const Vec y = read_vector_csv(cfg.str("in"));
    if (static_cast<int>(y.size()) != op.m) {
        err << "measurement vector has length " << y.size() << ", expected m = " << op.m << "\n";
        return 1;
    }
    const LinearMap psi = parse_basis(cfg.str("psi"), op.n);
    const ComposedOperator a = compose(op, psi);

    SolveResult res;
    const std::string solver = cfg.str("solver");
    if (solver == "l1") {
        L1Options opts;
        opts.tau = cfg.real("tau");
        opts.tau_rel = cfg.real("tau-rel");
        opts.tol = cfg.real("tol");
        opts.max_iter = cfg.integer("max-iter");
        res = solve_l1(a.map, y, opts);
    } else if (solver == "omp") {
        int k_max = cfg.integer("k-max");
        if (k_max <= 0) k_max = op.m / 2;
        res = solve_omp(a.map, y, k_max, cfg.real("residual-tol"));
    } else {
        throw UsageError("unknown solver '" + solver + "' (expected l1|omp)");
    }

    auto out = open_output(cfg.str("out"));
    write_run_header(out, cfg);
    for (double v : res.alpha_hat) out << format_double(v) << "\n";
    if (!cfg.str("x-out").empty()) {
        const Vec x_hat = psi.apply(res.alpha_hat);
        auto xout = open_output(cfg.str("x-out"));
        write_run_header(xout, cfg);
        for (double v : x_hat) xout << format_double(v) << "\n";
    }
    if (!cfg.str("result").empty()) {
        nlohmann::json rj{{"converged", res.converged},
                          {"iterations", res.iterations},
                          {"residual", res.residual}};
        if (!cfg.str("truth").empty()) {
            const Vec truth = read_vector_csv(cfg.str("truth"));
            if (truth.size() == res.alpha_hat.size()) {
                double e2 = 0.0, t2 = 0.0;
                for (std::size_t i = 0; i < truth.size(); ++i) {
                    const double d = res.alpha_hat[i] - truth[i];
                    e2 += d * d;
                    t2 += truth[i] * truth[i];
                }
                rj["rel_error"] = t2 > 0.0 ? std::sqrt(e2 / t2) : std::sqrt(e2);
            }
        }
        auto rout = open_output(cfg.str("result"));
        rout << rj.dump(2) << "\n";
    }
    return 0;
}

inline int cmd_coherence(const RunConfig& cfg, std::ostream& out_stream) {
    const int n = cfg.integer("n");
    TransformSpec fspec{parse_transform_kind(cfg.str("f")), cfg.integer("b"), n, 0};
    LinearMap a = make_transform(fspec);
    const std::string rand = cfg.str("rand");
    if (rand != "none") {
        RandomizerSpec rs{parse_randomizer_kind(rand), cfg.u64("seed"), n};
        a = compose_maps(a, make_randomizer_map(rs));
    }
    const LinearMap psi = parse_basis(cfg.str("psi"), n);
    const CoherenceReport rep = mutual_coherence(a, psi);

    std::ofstream file;
    std::ostream* os = &out_stream;
    if (!cfg.str("out").empty()) {
        file = open_output(cfg.str("out"));
        os = &file;
    }
    write_run_header(*os, cfg);
    *os << "mu," << format_double(rep.mu) << "\n";
    *os << "mu_n," << format_double(rep.mu_n) << "\n";
    const int support_k = cfg.integer("support-k");
    if (support_k > 0) {
        if (support_k > n) throw UsageError("support-k exceeds n");
        SplitMix64 rng(derive_seed(cfg.master_seed, 0x5u));
        std::vector<std::uint32_t> pool(static_cast<std::size_t>(n));
        for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = static_cast<std::uint32_t>(i);
        for (int i = 0; i < support_k; ++i) {
            const std::size_t j = static_cast<std::size_t>(i) + rng.uniform_below(pool.size() - i);
            std::swap(pool[i], pool[j]);
        }
        std::vector<std::uint32_t> support(pool.begin(), pool.begin() + support_k);
        *os << "mu_c," << format_double(cumulative_coherence(a, psi, support)) << "\n";
    }
    return 0;
}

inline int cmd_qq(const RunConfig& cfg) {
    const int n = cfg.integer("n");
    const int m = cfg.integer("m");
    TransformSpec fspec{parse_transform_kind(cfg.str("f")), cfg.integer("b"), n, 0};
    RandomizerSpec rspec{parse_randomizer_kind(cfg.str("rand")), cfg.u64("seed"), n};
    const SrmOperator op =
        SrmOperator::create(n, m, fspec, rspec, derive_seed(cfg.master_seed, 0xD), false);
    const LinearMap psi = parse_basis(cfg.str("psi"), n);
    const NormalityReport rep = normality_report(op, psi, cfg.integer("seeds"));
    auto out = open_output(cfg.str("out"));
    write_run_header(out, cfg);
    out << "# ks_distance: " << format_double(rep.ks_distance) << "\n";
    out << "# sigma2_hat: " << format_double(rep.sigma2_hat) << "\n";
    out << "theoretical,empirical\n";
    for (const auto& [th, emp] : rep.qq_pairs)
        out << format_double(th) << ',' << format_double(emp) << "\n";
    return 0;
}

inline TrialConfig trial_config_from(const RunConfig& cfg, int n) {
    TrialConfig tc;
    tc.n = n;
    tc.m = cfg.params.count("m") ? cfg.integer("m") : n / 2;
    tc.ensemble = parse_ensemble(cfg.str("ensemble"), n);
    tc.psi = parse_basis_spec(cfg.str("psi"), n);
    tc.master_seed = cfg.master_seed;
    tc.threads = cfg.params.count("threads") ? cfg.integer("threads") : 0;
    if (cfg.params.count("trials")) tc.trials = cfg.integer("trials");
    if (cfg.params.count("rel-tol")) tc.rel_tol = cfg.real("rel-tol");
    if (cfg.params.count("include-dc")) tc.include_dc = cfg.flag("include-dc");
    if (cfg.params.count("tau-rel")) tc.solver.tau_rel = cfg.real("tau-rel");
    if (cfg.params.count("tol")) tc.solver.tol = cfg.real("tol");
    if (cfg.params.count("max-iter")) tc.solver.max_iter = cfg.integer("max-iter");
    return tc;
}

inline int cmd_phase(const RunConfig& cfg) {
    const TrialConfig tc = trial_config_from(cfg, cfg.integer("n"));
    auto out = open_output(cfg.str("out"));
    write_run_header(out, cfg);
    write_phase_header(out);
    run_phase_curve(tc, cfg.int_list("k"), &out);
    return 0;
}

inline int cmd_mstar(const RunConfig& cfg) {
    TrialConfig tc = trial_config_from(cfg, cfg.integer("n"));
    tc.trials = cfg.integer("trials");
    auto out = open_output(cfg.str("out"));
    write_run_header(out, cfg);
    run_measurement_scaling(tc, cfg.int_list("k"), cfg.real("pstar"), cfg.integer("trials"),
                            cfg.integer("resolution"), &out);
    return 0;
}

inline int cmd_compressible(const RunConfig& cfg) {
    CompressibleConfig cc;
    cc.n = cfg.integer("n");
    cc.rates = cfg.double_list("rates");
    cc.ensembles = cfg.str_list("ensembles");
    cc.master_seed = cfg.master_seed;
    cc.decay = cfg.real("decay");
    cc.tau_rel = cfg.real("tau-rel");
    cc.max_iter = cfg.integer("max-iter");
    cc.threads = cfg.integer("threads");
    auto out = open_output(cfg.str("out"));
    write_run_header(out, cfg);
    run_compressible_experiment(cc, &out);
    return 0;
}

inline int cmd_bench(const RunConfig& cfg) {
    auto out = open_output(cfg.str("out"));
    write_run_header(out, cfg);
    bench_sensing(cfg.int_list("sizes"), cfg.integer("reps"), cfg.master_seed, 8192, &out);
    return 0;
}

}  // namespace detail

inline bool selftest(std::ostream& out);

/// Dispatches a validated RunConfig. Returns 0 on success, 1 on usage
/// errors surfaced at run time (bad files, bad field combinations), 2 on
/// numerical failure. Malformed input never escapes as an exception.
inline int run(const RunConfig& cfg, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
    try {
        if (cfg.command == "sense") return detail::cmd_sense(cfg, err);
        if (cfg.command == "reconstruct") return detail::cmd_reconstruct(cfg, err);
        if (cfg.command == "coherence") return detail::cmd_coherence(cfg, out);
        if (cfg.command == "qq") return detail::cmd_qq(cfg);
        if (cfg.command == "phase") return detail::cmd_phase(cfg);
        if (cfg.command == "mstar") return detail::cmd_mstar(cfg);
        if (cfg.command == "compressible") return detail::cmd_compressible(cfg);
        if (cfg.command == "bench") return detail::cmd_bench(cfg);
        if (cfg.command == "selftest") return selftest(out) ? 0 : 2;
        throw UsageError("unknown command '" + cfg.command + "'");
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << "\n";
        return 2;
    }
}

// ---------------------------------------------------------------------------
// Built-in invariant checks (the `selftest` command)
// ---------------------------------------------------------------------------

inline bool selftest(std::ostream& out) {
    int passed = 0, failed = 0;
    const auto check = [&](const char* name, bool ok) {
        out << (ok ? "ok   " : "FAIL ") << name << "\n";
        (ok ? passed : failed) += 1;
    };
    SplitMix64 rng(0xBADC0FFEEULL);
    const auto random_vec = [&rng](int n) {
        Vec v(static_cast<std::size_t>(n));
        for (double& x : v) x = rng.gaussian();
        return v;
    };

    // transforms: orthonormality + adjoint consistency for every kind
    {
        bool ortho = true, adj = true;
        for (TransformKind kind : {TransformKind::WHT, TransformKind::DCT,
                                   TransformKind::Identity, TransformKind::Db8Wavelet}) {
            for (int b : {64, 32}) {
                const TransformSpec spec{kind, b, 64, 0};
                const LinearMap f = make_transform(spec);
                for (int rep = 0; rep < 20; ++rep) {
                    const Vec x = random_vec(64);
                    const Vec y = random_vec(64);
                    const Vec fx = f.apply(x);
                    ortho &= std::abs(norm2(fx) - norm2(x)) <= 1e-10 * norm2(x);
                    adj &= std::abs(dot(fx, y) - dot(x, f.apply_adjoint(y))) <=
                           1e-10 * norm2(x) * norm2(y);
                }
            }
        }
        check("transform orthonormality (all kinds, full and block)", ortho);
        check("transform adjoint consistency", adj);
    }
    // DCT against the brute-force cosine matrix
    {
        bool ok = true;
        const int n = 8;
        const auto rows = materialize(make_transform(TransformSpec{TransformKind::DCT, 0, n, 0}));
        for (int k = 0; k < n && ok; ++k)
            for (int j = 0; j < n; ++j) {
                const double want =
                    (k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n)) *
                    std::cos(std::numbers::pi * k * (2.0 * j + 1.0) / (2.0 * n));
                if (std::abs(rows[k][j] - want) > 1e-12) {
                    ok = false;
                    break;
                }
            }
        check("fast DCT matches cosine matrix (N=8)", ok);
    }
    // WHT involution, wavelet perfect reconstruction
    {
        const Vec x = random_vec(256);
        const Vec y = wht_apply(wht_apply(x));
        bool ok = true;
        for (int i = 0; i < 256; ++i) ok &= std::abs(x[i] - y[i]) <= 1e-12;
        check("WHT involution (N=256)", ok);
        const Vec w = wavelet_synthesis(wavelet_analysis(x, 4), 4);
        ok = true;
        for (int i = 0; i < 256; ++i) ok &= std::abs(x[i] - w[i]) <= 1e-8;
        check("DB8 perfect reconstruction (N=256, 4 levels)", ok);
    }
    // randomizers
    {
        const RandomizerSpec ls{RandomizerKind::Local, 7, 128};
        const RandomizerSpec gs{RandomizerKind::Global, 7, 128};
        const Randomizer l1 = build_randomizer(ls), l2 = build_randomizer(ls);
        const Randomizer g = build_randomizer(gs);
        check("randomizer determinism", l1.signs == l2.signs);
        std::vector<std::uint32_t> sorted = g.perm;
        std::sort(sorted.begin(), sorted.end());
        bool bij = true;
        for (std::uint32_t i = 0; i < 128; ++i) bij &= sorted[i] == i;
        check("global randomizer is a bijection", bij);
        const Vec x = random_vec(128);
        const Vec rx = apply_randomizer(g, x);
        const Vec back = apply_randomizer_adjoint(g, rx);
        check("global adjoint inverts", back == x);
        check("local is an involution",
              apply_randomizer(l1, apply_randomizer(l1, x)) == x);
    }
    // F*R orthonormality, forward vs materialized, adjoint pairing
    {
        bool ok = true;
        for (RandomizerKind rk : {RandomizerKind::Local, RandomizerKind::Global}) {
            const LinearMap a =
                compose_maps(make_transform(TransformSpec{TransformKind::DCT, 0, 32, 0}),
                             make_randomizer_map(RandomizerSpec{rk, 11, 32}));
            const auto rows = materialize(a);
            for (int i = 0; i < 32 && ok; ++i)
                for (int j = 0; j < 32; ++j) {
                    const double want = i == j ? 1.0 : 0.0;
                    double got = 0.0;
                    for (int k = 0; k < 32; ++k) got += rows[k][i] * rows[k][j];
                    if (std::abs(got - want) > 1e-10) {
                        ok = false;
                        break;
                    }
                }
        }
        check("A = F*R has orthonormal columns (N=32, both randomizers)", ok);

        const SrmOperator op = SrmOperator::create(
            32, 8, TransformSpec{TransformKind::WHT, 0, 32, 0},
            RandomizerSpec{RandomizerKind::Local, 3, 32}, 5);
        const auto rows = materialize(make_srm_map(op));
        const Vec x = random_vec(32);
        const Vec y = srm_forward(op, x);
        bool match = true;
        for (int i = 0; i < 8; ++i) match &= std::abs(y[i] - dot(rows[i], x)) <= 1e-12;
        check("srm_forward matches materialized Phi (N=32, M=8)", match);

        const Vec u = random_vec(8);
        check("srm adjoint pairing <Phi x, u> = <x, Phi^T u>",
              std::abs(dot(y, u) - dot(x, srm_adjoint(op, u))) <= 1e-10 * norm2(x) * norm2(u));
    }
    // subsampler
    {
        const SubsampleSet full = make_subsampler(1, 16, 16, false);
        bool ok = full.omega.size() == 16;
        for (std::uint32_t i = 0; i < 16 && ok; ++i) ok &= full.omega[i] == i;
        check("subsampler m = n selects everything", ok);
        const SubsampleSet dc = make_subsampler(9, 16, 1, true);
        check("subsampler include_dc forces row 0", dc.omega == std::vector<std::uint32_t>{0});
    }
    // solvers
    {
        TransformSpec psi{TransformKind::Identity, 0, 64, 0};
        const SparseSignal sig = generate_sparse_signal({64, 4, psi, 2024});
        const SrmOperator op = SrmOperator::create(
            64, 32, TransformSpec{TransformKind::WHT, 0, 64, 0},
            RandomizerSpec{RandomizerKind::Local, 77, 64}, 78);
        const Vec y = srm_forward(op, sig.x);
        const LinearMap a = make_srm_map(op);
        const SolveResult l1 = solve_l1(a, y, {});
        check("l1 solver recovers K=4 from M=32 (N=64)",
              check_exact_recovery(l1.alpha_hat, sig.alpha, 1e-3));
        const SolveResult omp = solve_omp(a, y, 4);
        check("omp recovers the same instance",
              check_exact_recovery(omp.alpha_hat, sig.alpha, 1e-3));
    }
    // coherence oracles
    {
        const LinearMap wht = make_transform(TransformSpec{TransformKind::WHT, 0, 16, 0});
        const CoherenceReport rep = mutual_coherence(wht, identity_map(16));
        check("mu(WHT, I) = 1/sqrt(N)", std::abs(rep.mu - 0.25) <= 1e-12);
        const double mu_c =
            cumulative_coherence(wht, identity_map(16), {1, 5, 9, 13});
        check("mu_c(WHT, I_T) = sqrt(K/N)", std::abs(mu_c - 0.5) <= 1e-12);
        const HeterogeneityReport het = heterogeneity(wht);
        check("rho(WHT) = 1", std::abs(het.rho_psi - 1.0) <= 1e-12);
    }
    // KS statistic sanity on a genuine normal sample
    {
        Vec sample(10000);
        for (double& v : sample) v = rng.gaussian();
        check("KS distance <= 0.02 on N(0,1) sample", ks_distance_normal(sample) <= 0.02);
    }
    // seed fan-out
    {
        std::vector<std::uint64_t> seeds;
        for (int i = 0; i < 10000; ++i) seeds.push_back(derive_seed(42, i));
        std::sort(seeds.begin(), seeds.end());
        check("seed derivation collision-free (10^4)",
              std::adjacent_find(seeds.begin(), seeds.end()) == seeds.end());
    }

    out << passed << " passed, " << failed << " failed\n";
    return failed == 0;
}

}  // namespace srm
