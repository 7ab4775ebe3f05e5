#pragma once

// Scenario-driven Monte Carlo campaigns.
//
// A trial draws one uniform message shared by every receiver, as in a
// multicast, and sends the encoded point through each receiver's own AWGN
// channel. Streams are keyed by (seed, codebook, receiver, trial), so results
// do not depend on the thread count.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sidelattice/channel.hpp"
#include "sidelattice/construction_a.hpp"
#include "sidelattice/errors.hpp"
#include "sidelattice/fp_linalg.hpp"
#include "sidelattice/lattice.hpp"
#include "sidelattice/rng.hpp"
#include "sidelattice/side_info.hpp"
#include "sidelattice/stats.hpp"

namespace sidelattice {

// ---------------------------------------------------------------------------
// Capacity and SNR threshold

/// (1 / (K - M)) * 0.5 * log2(1 + 1/sigma^2), one receiver's share of the capacity.
inline double capacity_term(std::size_t K, std::size_t M, double sigma2) {
    if (M >= K) throw Error("receiver rank must be below K");
    if (!(sigma2 > 0)) throw Error("noise variance must be positive");
    return 0.5 * std::log2(1.0 + 1.0 / sigma2) / static_cast<double>(K - M);
}

struct ReceiverChannel {
    std::size_t rank;  // M
    double sigma2;
};

/// Multicast capacity in bits per dimension: minimum of the per-receiver terms.
inline double capacity(const std::vector<ReceiverChannel>& receivers, std::size_t K) {
    if (receivers.empty()) throw Error("capacity needs at least one receiver");
    double c = std::numeric_limits<double>::infinity();
    for (const auto& r : receivers) c = std::min(c, capacity_term(K, r.rank, r.sigma2));
    return c;
}

struct ThresholdResult {
    bool satisfied;         // 0.5 log2(1 + 1/sigma^2) >= (R + eps)(K - M)
    bool satisfied_sigma_z; // sigma_z^2 <= 2^{-2 (R + eps)(K - M)}
    double snr_term;
    double required;
};

inline ThresholdResult threshold_check(std::size_t M, double sigma2, double R, double epsilon, std::size_t K) {
    if (M >= K) throw Error("receiver rank must be below K");
    constexpr double tol = 1e-12;
    const double load = (R + epsilon) * static_cast<double>(K - M);
    ThresholdResult out{};
    out.snr_term = 0.5 * std::log2(1.0 + 1.0 / sigma2);
    out.required = load;
    out.satisfied = out.snr_term >= load - tol;
    const double sigma_z2 = sigma2 / (1.0 + sigma2);
    out.satisfied_sigma_z = sigma_z2 <= std::exp2(-2.0 * load) * (1.0 + tol) + tol;
    return out;
}

/// sigma^2 that puts a rank-M receiver exactly on the threshold.
inline double threshold_sigma2(std::size_t M, double R, double epsilon, std::size_t K) {
    return 1.0 / (std::exp2(2.0 * (R + epsilon) * static_cast<double>(K - M)) - 1.0);
}

inline double snr_db(double sigma2) { return 10.0 * std::log10(1.0 / sigma2); }
inline double sigma2_from_snr_db(double db) { return std::pow(10.0, -db / 10.0); }

// ---------------------------------------------------------------------------
// Scenario

struct ReceiverConfig {
    std::vector<std::vector<std::int64_t>> S;  // M rows of K entries; empty for M = 0
    double sigma2;
};

struct Scenario {
    std::optional<std::uint64_t> p;  // nullopt: smallest admissible prime
    std::size_t K = 0;
    std::size_t n = 0;
    std::optional<std::size_t> ell;  // nullopt: largest admissible
    double R = 0;
    double epsilon = 0;
    LatticeFamily family = LatticeFamily::ScaledZn;
    std::optional<double> scale;  // nullopt: scale to covering radius sqrt(n)
    std::uint64_t seed = 1;
    std::size_t trials = 1000;
    std::vector<ReceiverConfig> receivers;
    bool network_mode = false;
    std::optional<double> network_sigma2;
    std::size_t enumeration_cap = default_enumeration_cap;
    bool common_random_numbers = false;
};

namespace detail {

inline void reject_unknown(const nlohmann::json& j, const std::set<std::string>& allowed, const std::string& path) {
    for (const auto& item : j.items()) {
        if (!allowed.count(item.key())) {
            throw ConfigError(path.empty() ? item.key() : path + "." + item.key(), "unknown field");
        }
    }
}

inline std::uint64_t read_uint(const nlohmann::json& v, const std::string& path) {
    if (!v.is_number_integer()) throw ConfigError(path, "expected a non-negative integer");
    if (!v.is_number_unsigned() && v.get<std::int64_t>() < 0) throw ConfigError(path, "expected a non-negative integer");
    return v.get<std::uint64_t>();
}

inline double read_positive(const nlohmann::json& v, const std::string& path) {
    if (!v.is_number()) throw ConfigError(path, "expected a number");
    const double d = v.get<double>();
    if (!(d > 0) || !std::isfinite(d)) throw ConfigError(path, "must be positive and finite");
    return d;
}

inline bool read_bool(const nlohmann::json& v, const std::string& path) {
    if (!v.is_boolean()) throw ConfigError(path, "expected true or false");
    return v.get<bool>();
}

}  // namespace detail

inline Scenario parse_scenario(const nlohmann::json& j) {
    using namespace detail;
    if (!j.is_object()) throw ConfigError("", "scenario must be a JSON object");
    reject_unknown(j,
                   {"p", "K", "n", "ell", "R", "epsilon", "lattice", "seed", "trials", "receivers", "network_mode",
                    "network_sigma2", "enumeration_cap", "common_random_numbers"},
                   "");
    Scenario sc;
    for (const char* key : {"K", "n", "R", "epsilon"}) {
        if (!j.contains(key)) throw ConfigError(key, "required field missing");
    }
    sc.K = read_uint(j["K"], "K");
    sc.n = read_uint(j["n"], "n");
    if (sc.K == 0) throw ConfigError("K", "must be at least 1");
    if (sc.n == 0) throw ConfigError("n", "must be at least 1");
    sc.R = read_positive(j["R"], "R");
    sc.epsilon = read_positive(j["epsilon"], "epsilon");

    if (j.contains("p")) {
        const auto& v = j["p"];
        if (v.is_string()) {
            if (v.get<std::string>() != "auto") throw ConfigError("p", "expected a prime or \"auto\"");
        } else {
            const auto p = read_uint(v, "p");
            if (p >= PrimeField::max_modulus || !is_prime(p)) throw ConfigError("p", std::to_string(p) + " is not a prime below 2^31");
            sc.p = p;
        }
    }
    if (j.contains("ell")) {
        const auto& v = j["ell"];
        if (v.is_string()) {
            if (v.get<std::string>() != "auto") throw ConfigError("ell", "expected a positive integer or \"auto\"");
        } else {
            sc.ell = read_uint(v, "ell");
            if (*sc.ell == 0) throw ConfigError("ell", "must be at least 1");
        }
    }
    if (j.contains("lattice")) {
        const auto& lat = j["lattice"];
        if (!lat.is_object()) throw ConfigError("lattice", "expected an object");
        reject_unknown(lat, {"family", "scale"}, "lattice");
        if (lat.contains("family")) {
            if (!lat["family"].is_string()) throw ConfigError("lattice.family", "expected \"Zn\", \"Dn\" or \"E8\"");
            auto fam = parse_family(lat["family"].get<std::string>());
            if (!fam) throw ConfigError("lattice.family", "expected \"Zn\", \"Dn\" or \"E8\"");
            sc.family = *fam;
        }
        if (lat.contains("scale")) {
            const auto& s = lat["scale"];
            if (s.is_string()) {
                if (s.get<std::string>() != "covering") throw ConfigError("lattice.scale", "expected a number or \"covering\"");
            } else {
                sc.scale = read_positive(s, "lattice.scale");
            }
        }
    }
    if (sc.family == LatticeFamily::ScaledE8 && sc.n != 8) throw ConfigError("lattice.family", "E8 requires n = 8");
    if (sc.family == LatticeFamily::ScaledDn && sc.n < 2) throw ConfigError("lattice.family", "Dn requires n >= 2");

    if (j.contains("seed")) sc.seed = read_uint(j["seed"], "seed");
    if (j.contains("trials")) sc.trials = read_uint(j["trials"], "trials");
    if (sc.trials == 0) throw ConfigError("trials", "must be at least 1");
    if (j.contains("enumeration_cap")) sc.enumeration_cap = read_uint(j["enumeration_cap"], "enumeration_cap");
    if (j.contains("network_mode")) sc.network_mode = read_bool(j["network_mode"], "network_mode");
    if (j.contains("common_random_numbers")) {
        sc.common_random_numbers = read_bool(j["common_random_numbers"], "common_random_numbers");
    }
    if (j.contains("network_sigma2")) sc.network_sigma2 = read_positive(j["network_sigma2"], "network_sigma2");

    if (j.contains("receivers")) {
        const auto& rs = j["receivers"];
        if (!rs.is_array()) throw ConfigError("receivers", "expected an array");
        for (std::size_t i = 0; i < rs.size(); ++i) {
            const std::string path = "receivers[" + std::to_string(i) + "]";
            const auto& r = rs[i];
            if (!r.is_object()) throw ConfigError(path, "expected an object");
            reject_unknown(r, {"S", "sigma2", "snr_db"}, path);
            ReceiverConfig rc{};
            if (r.contains("S")) {
                const auto& rows = r["S"];
                if (!rows.is_array()) throw ConfigError(path + ".S", "expected an array of rows");
                for (std::size_t a = 0; a < rows.size(); ++a) {
                    const std::string rp = path + ".S[" + std::to_string(a) + "]";
                    if (!rows[a].is_array()) throw ConfigError(rp, "expected an array of integers");
                    if (rows[a].size() != sc.K) {
                        throw ConfigError(rp, "expected " + std::to_string(sc.K) + " entries, got " +
                                                  std::to_string(rows[a].size()));
                    }
                    std::vector<std::int64_t> row;
                    for (std::size_t b = 0; b < rows[a].size(); ++b) {
                        if (!rows[a][b].is_number_integer()) {
                            throw ConfigError(rp + "[" + std::to_string(b) + "]", "expected an integer");
                        }
                        row.push_back(rows[a][b].get<std::int64_t>());
                    }
                    rc.S.push_back(std::move(row));
                }
            }
            const bool has_sigma = r.contains("sigma2"), has_snr = r.contains("snr_db");
            if (has_sigma == has_snr) throw ConfigError(path, "give exactly one of sigma2 or snr_db");
            if (has_sigma) {
                rc.sigma2 = read_positive(r["sigma2"], path + ".sigma2");
            } else {
                if (!r["snr_db"].is_number()) throw ConfigError(path + ".snr_db", "expected a number");
                rc.sigma2 = sigma2_from_snr_db(r["snr_db"].get<double>());
            }
            sc.receivers.push_back(std::move(rc));
        }
    }
    if (sc.network_mode) {
        if (!sc.network_sigma2) throw ConfigError("network_sigma2", "required when network_mode is true");
    } else if (sc.receivers.empty()) {
        throw ConfigError("receivers", "at least one receiver is required unless network_mode is true");
    }
    return sc;
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open scenario file " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("", std::string("malformed JSON: ") + e.what());
    }
    return parse_scenario(j);
}

// ---------------------------------------------------------------------------
// Code setup

struct CodeSetup {
    CodeParams params;
    LatticeSpec coarse;
    double prime_bound;
    bool prime_meets_bound;
    std::vector<std::string> warnings;
};

inline CodeSetup resolve_code(const Scenario& sc) {
    std::vector<std::string> warnings;
    const double bound = prime_lower_bound(sc.K, sc.R, sc.epsilon);
    std::optional<PrimeField> field;
    if (sc.p) {
        field.emplace(*sc.p);
    } else {
        try {
            field.emplace(choose_prime(sc.K, sc.R, sc.epsilon));
        } catch (const Error& e) {
            throw ConfigError("p", e.what());
        }
    }
    const bool meets = static_cast<double>(field->modulus()) >= bound * (1.0 - 1e-12);
    if (!meets) {
        warnings.push_back("p = " + std::to_string(field->modulus()) + " is below the prime bound " +
                           format_double(bound) + "; the exponential-decay guarantee does not apply");
    }
    std::size_t ell = 0;
    if (sc.ell) {
        ell = *sc.ell;
    } else {
        try {
            ell = choose_ell(sc.n, *field, sc.R, sc.K);
        } catch (const Error& e) {
            throw ConfigError("ell", e.what());
        }
    }
    CodeParams params{sc.K, ell, sc.n, sc.R, sc.epsilon, *field};
    try {
        params.validate();
    } catch (const Error& e) {
        throw ConfigError("ell", e.what());
    }
    std::optional<LatticeSpec> coarse;
    try {
        coarse.emplace(sc.scale ? LatticeSpec(sc.family, sc.n, *sc.scale) : scale_to_covering(sc.family, sc.n));
    } catch (const Error& e) {
        throw ConfigError("lattice", e.what());
    }
    if (sc.scale && coarse->covering_radius() > std::sqrt(static_cast<double>(sc.n)) + geometry_tolerance) {
        warnings.push_back("covering radius exceeds sqrt(n); codewords may violate the power constraint");
    }
    return {params, *coarse, bound, meets, std::move(warnings)};
}

struct ResolvedReceiver {
    SideInfoMatrix S;
    double sigma2;
};

inline std::vector<ResolvedReceiver> resolve_receivers(const Scenario& sc, const PrimeField& field) {
    std::vector<ResolvedReceiver> out;
    if (sc.network_mode) {
        for (auto& s : enumerate_subspaces(field, sc.K)) out.push_back({std::move(s), *sc.network_sigma2});
        return out;
    }
    for (std::size_t i = 0; i < sc.receivers.size(); ++i) {
        const auto& rc = sc.receivers[i];
        const std::string path = "receivers[" + std::to_string(i) + "].S";
        try {
            out.push_back({canonicalize(FpMatrix::from_rows(field, rc.S, sc.K)), rc.sigma2});
        } catch (const FullRankSideInfo& e) {
            throw ConfigError(path, e.what());
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Monte Carlo core

struct ReceiverCounts {
    std::size_t trials = 0;
    std::size_t errors = 0;       // includes rank events
    std::size_t rank_events = 0;  // rank(G A_S) deficient
};

struct CampaignCounts {
    std::size_t trials = 0;
    std::size_t network_errors = 0;  // trials where at least one receiver erred
    std::vector<ReceiverCounts> receivers;
};

namespace detail {

struct PreparedReceiver {
    FpMatrix system;     // S (x) I_ell
    FpMatrix null_basis; // A_S
    FpMatrix sub_generator;
    bool degenerate;
    std::optional<SubcodeLattice> subcode;
    DecoderParams decoder;
    double sigma2;
};

inline std::size_t resolve_threads(std::size_t requested, std::size_t work) {
    std::size_t t = requested == 0 ? std::max<std::size_t>(1, std::thread::hardware_concurrency()) : requested;
    return std::max<std::size_t>(1, std::min(t, work));
}

}  // namespace detail

/// Runs `trials` multicast trials of one code against every receiver.
/// threads = 0 picks the hardware concurrency.
inline CampaignCounts simulate_code(const NestedCode& code, const std::vector<ResolvedReceiver>& receivers,
                                    std::uint64_t seed, std::uint64_t codebook, std::size_t trials,
                                    bool common_random_numbers, std::size_t cap, std::size_t threads = 1) {
    const auto& params = code.params();
    std::vector<detail::PreparedReceiver> prepared;
    prepared.reserve(receivers.size());
    for (const auto& rx : receivers) {
        FpMatrix system = kron_with_identity(rx.S.matrix(), params.ell);
        FpMatrix basis = null_space_basis(system);
        FpMatrix sub = code.generator() * basis;
        const bool degenerate = rank(sub) < basis.cols();
        std::optional<SubcodeLattice> lattice;
        if (!degenerate) lattice.emplace(code, sub, cap);
        prepared.push_back({std::move(system), std::move(basis), std::move(sub), degenerate, std::move(lattice),
                            mmse_params(rx.sigma2, params.epsilon, params.n), rx.sigma2});
    }

    auto run_block = [&](std::size_t begin, std::size_t end, CampaignCounts& out) {
        out.trials = end - begin;
        out.receivers.assign(prepared.size(), ReceiverCounts{});
        std::uniform_int_distribution<Residue> symbol(0, params.field.modulus() - 1);
        for (std::size_t t = begin; t < end; ++t) {
            Engine msg_gen = make_stream(seed, StreamTag::message, {codebook, t});
            FpMatrix w(params.field, params.message_length(), 1);
            for (std::size_t i = 0; i < w.rows(); ++i) w.set(i, 0, symbol(msg_gen));
            const RealVector x = encode(code, w);
            bool any_error = false;
            for (std::size_t r = 0; r < prepared.size(); ++r) {
                auto& pr = prepared[r];
                auto& counts = out.receivers[r];
                ++counts.trials;
                if (pr.degenerate) {
                    ++counts.rank_events;
                    ++counts.errors;
                    any_error = true;
                    continue;
                }
                Engine noise_gen = make_stream(seed, StreamTag::noise, {codebook, common_random_numbers ? 0 : r, t});
                const RealVector y = add_awgn(x, pr.sigma2, noise_gen);
                const FpMatrix u = pr.system * w;
                ExpurgationData exp{pr.null_basis, particular_solution(pr.system, u), pr.sub_generator};
                const DecodeOutcome outcome = decode(code, exp, *pr.subcode, y, pr.decoder);
                if (!(outcome.w_hat == w)) {
                    ++counts.errors;
                    any_error = true;
                }
            }
            if (any_error) ++out.network_errors;
        }
    };

    const std::size_t workers = detail::resolve_threads(threads, trials);
    std::vector<CampaignCounts> parts(workers);
    if (workers == 1) {
        run_block(0, trials, parts[0]);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t k = 0; k < workers; ++k) {
            const std::size_t begin = trials * k / workers, end = trials * (k + 1) / workers;
            pool.emplace_back(run_block, begin, end, std::ref(parts[k]));
        }
        for (auto& th : pool) th.join();
    }
    CampaignCounts total;
    total.receivers.assign(prepared.size(), ReceiverCounts{});
    for (const auto& part : parts) {
        total.trials += part.trials;
        total.network_errors += part.network_errors;
        for (std::size_t r = 0; r < part.receivers.size(); ++r) {
            total.receivers[r].trials += part.receivers[r].trials;
            total.receivers[r].errors += part.receivers[r].errors;
            total.receivers[r].rank_events += part.receivers[r].rank_events;
        }
    }
    return total;
}

// ---------------------------------------------------------------------------
// Summary

struct ReceiverSummary {
    std::size_t receiver_index = 0;
    std::size_t rank_S = 0;
    std::vector<std::vector<std::int64_t>> S;  // canonical rows
    double sigma2 = 0;
    double snr_db = 0;
    std::size_t trials = 0;
    std::size_t errors = 0;
    std::size_t rank_events = 0;
    double error_rate = 0;
    double ci_low = 0;
    double ci_high = 0;
    bool threshold_satisfied = false;
    double capacity_term_bits = 0;

    friend bool operator==(const ReceiverSummary&, const ReceiverSummary&) = default;
};

struct CodeSummary {
    std::uint64_t p = 0;
    std::size_t K = 0;
    std::size_t ell = 0;
    std::size_t n = 0;
    double R = 0;
    double epsilon = 0;
    std::string family;
    double scale = 0;
    double achieved_rate = 0;
    double r_cov = 0;
    double r_eff = 0;
    double cov_eff_ratio = 0;
    double prime_bound = 0;
    bool prime_meets_bound = false;
    std::size_t generator_redraws = 0;

    friend bool operator==(const CodeSummary&, const CodeSummary&) = default;
};

struct NetworkSummary {
    std::size_t trials = 0;
    std::size_t errors = 0;
    double error_rate = 0;
    double ci_low = 0;
    double ci_high = 0;

    friend bool operator==(const NetworkSummary&, const NetworkSummary&) = default;
};

struct SummaryStats {
    CodeSummary code;
    std::uint64_t seed = 0;
    bool network_mode = false;
    double capacity_bits = 0;
    std::vector<ReceiverSummary> receivers;
    NetworkSummary network;
    std::vector<std::string> warnings;

    friend bool operator==(const SummaryStats&, const SummaryStats&) = default;
};

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ReceiverSummary, receiver_index, rank_S, S, sigma2, snr_db, trials, errors,
                                   rank_events, error_rate, ci_low, ci_high, threshold_satisfied, capacity_term_bits)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(CodeSummary, p, K, ell, n, R, epsilon, family, scale, achieved_rate, r_cov, r_eff,
                                   cov_eff_ratio, prime_bound, prime_meets_bound, generator_redraws)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(NetworkSummary, trials, errors, error_rate, ci_low, ci_high)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(SummaryStats, code, seed, network_mode, capacity_bits, receivers, network, warnings)

inline CodeSummary summarize_code(const CodeSetup& setup, std::size_t redraws) {
    const auto geo = geometry(setup.coarse);
    CodeSummary c;
    c.p = setup.params.field.modulus();
    c.K = setup.params.K;
    c.ell = setup.params.ell;
    c.n = setup.params.n;
    c.R = setup.params.R;
    c.epsilon = setup.params.epsilon;
    c.family = std::string(family_name(setup.coarse.family()));
    c.scale = setup.coarse.scale();
    c.achieved_rate = setup.params.achieved_rate();
    c.r_cov = geo.r_cov;
    c.r_eff = geo.r_eff;
    c.cov_eff_ratio = geo.r_cov / geo.r_eff;
    c.prime_bound = setup.prime_bound;
    c.prime_meets_bound = setup.prime_meets_bound;
    c.generator_redraws = redraws;
    return c;
}

inline std::vector<std::vector<std::int64_t>> matrix_rows(const FpMatrix& m) {
    std::vector<std::vector<std::int64_t>> rows(m.rows(), std::vector<std::int64_t>(m.cols()));
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) rows[i][j] = m(i, j);
    return rows;
}

inline DrawnCode draw_scenario_code(const CodeSetup& setup, std::uint64_t seed, std::uint64_t codebook) {
    Engine gen_g = make_stream(seed, StreamTag::generator, {codebook});
    Engine gen_d = make_stream(seed, StreamTag::dither, {codebook});
    return draw_code(setup.params, setup.coarse, gen_g, gen_d);
}

inline SummaryStats summarize(const Scenario& sc, const CodeSetup& setup, std::size_t redraws,
                              const std::vector<ResolvedReceiver>& receivers, const CampaignCounts& counts) {
    SummaryStats s;
    s.code = summarize_code(setup, redraws);
    s.seed = sc.seed;
    s.network_mode = sc.network_mode;
    s.warnings = setup.warnings;
    std::vector<ReceiverChannel> channels;
    for (std::size_t r = 0; r < receivers.size(); ++r) {
        const auto& rx = receivers[r];
        const auto& c = counts.receivers[r];
        ReceiverSummary rs;
        rs.receiver_index = r;
        rs.rank_S = rx.S.rank();
        rs.S = matrix_rows(rx.S.matrix());
        rs.sigma2 = rx.sigma2;
        rs.snr_db = snr_db(rx.sigma2);
        rs.trials = c.trials;
        rs.errors = c.errors;
        rs.rank_events = c.rank_events;
        rs.error_rate = static_cast<double>(c.errors) / static_cast<double>(c.trials);
        const auto ci = wilson_interval(c.errors, c.trials);
        rs.ci_low = ci.low;
        rs.ci_high = ci.high;
        rs.threshold_satisfied = threshold_check(rs.rank_S, rx.sigma2, sc.R, sc.epsilon, sc.K).satisfied;
        rs.capacity_term_bits = capacity_term(sc.K, rs.rank_S, rx.sigma2);
        channels.push_back({rs.rank_S, rx.sigma2});
        s.receivers.push_back(std::move(rs));
    }
    s.capacity_bits = capacity(channels, sc.K);
    s.network.trials = counts.trials;
    s.network.errors = counts.network_errors;
    s.network.error_rate = static_cast<double>(counts.network_errors) / static_cast<double>(counts.trials);
    const auto ci = wilson_interval(counts.network_errors, counts.trials);
    s.network.ci_low = ci.low;
    s.network.ci_high = ci.high;
    return s;
}

/// Builds the code from codebook 0 and simulates every receiver on it.
inline SummaryStats run_scenario(const Scenario& sc, std::size_t threads = 1) {
    if (sc.trials == 0) throw ConfigError("trials", "must be at least 1");
    const CodeSetup setup = resolve_code(sc);
    const auto receivers = resolve_receivers(sc, setup.params.field);
    const DrawnCode drawn = draw_scenario_code(setup, sc.seed, 0);
    const CampaignCounts counts = simulate_code(drawn.code, receivers, sc.seed, 0, sc.trials,
                                                sc.common_random_numbers, sc.enumeration_cap, threads);
    return summarize(sc, setup, drawn.redraws, receivers, counts);
}

inline const char* csv_header() {
    return "receiver_index,rank_S,sigma2,snr_db,trials,errors,error_rate,ci_low,ci_high,threshold_satisfied,"
           "capacity_term_bits";
}

inline std::string to_csv(const SummaryStats& s) {
    std::ostringstream os;
    os << csv_header() << '\n';
    for (const auto& r : s.receivers) {
        os << r.receiver_index << ',' << r.rank_S << ',' << format_double(r.sigma2) << ',' << format_double(r.snr_db)
           << ',' << r.trials << ',' << r.errors << ',' << format_double(r.error_rate) << ','
           << format_double(r.ci_low) << ',' << format_double(r.ci_high) << ','
           << (r.threshold_satisfied ? "true" : "false") << ',' << format_double(r.capacity_term_bits) << '\n';
    }
    return os.str();
}

inline std::string to_json_text(const SummaryStats& s) { return nlohmann::json(s).dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Code ensembles

struct EnsembleResult {
    std::size_t codebooks = 0;
    double threshold = 0;
    std::vector<double> network_error_rates;
    std::vector<std::size_t> redraws;
    double mean_error_rate = 0;
    double fraction_good = 0;
};

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(EnsembleResult, codebooks, threshold, network_error_rates, redraws,
                                   mean_error_rate, fraction_good)

/// Draws independent (G, d) pairs and reports the fraction of codes whose
/// network error rate is at most `threshold`.
inline EnsembleResult ensemble_fraction_good(const Scenario& sc, std::size_t codebooks, double threshold,
                                             std::size_t threads = 1) {
    if (codebooks < 10) throw ConfigError("codebooks", "at least 10 codebooks are required");
    const CodeSetup setup = resolve_code(sc);
    const auto receivers = resolve_receivers(sc, setup.params.field);
    EnsembleResult out;
    out.codebooks = codebooks;
    out.threshold = threshold;
    std::size_t good = 0;
    double sum = 0;
    for (std::size_t c = 0; c < codebooks; ++c) {
        const DrawnCode drawn = draw_scenario_code(setup, sc.seed, c);
        const auto counts = simulate_code(drawn.code, receivers, sc.seed, c, sc.trials, sc.common_random_numbers,
                                          sc.enumeration_cap, threads);
        const double rate = static_cast<double>(counts.network_errors) / static_cast<double>(counts.trials);
        out.network_error_rates.push_back(rate);
        out.redraws.push_back(drawn.redraws);
        sum += rate;
        if (rate <= threshold) ++good;
    }
    out.mean_error_rate = sum / static_cast<double>(codebooks);
    out.fraction_good = static_cast<double>(good) / static_cast<double>(codebooks);
    return out;
}

}  // namespace sidelattice
