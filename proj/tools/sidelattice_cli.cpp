// Command-line front end over the harness.
//
// Exit codes: 0 success, 1 verification failure or runtime error,
// 2 configuration error, 3 enumeration cap exceeded.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sidelattice/harness.hpp"
#include "sidelattice/verify.hpp"

namespace sl = sidelattice;

namespace {

struct CommonOptions {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
    std::string out;
    std::string format = "json";
    std::string threads = "1";
};

void add_common(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--seed", o.seed, "Master seed (overrides the scenario)");
    cmd->add_option("--trials", o.trials, "Trials per receiver (overrides the scenario)");
    cmd->add_option("--out", o.out, "Write results to this file instead of stdout");
    cmd->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--threads", o.threads, "Worker threads: a positive count or 'auto'");
}

std::size_t parse_threads(const std::string& s) {
    if (s == "auto") return 0;
    try {
        std::size_t pos = 0;
        const auto v = std::stoul(s, &pos);
        if (pos == s.size() && v > 0) return v;
    } catch (const std::exception&) {
    }
    throw sl::ConfigError("--threads", "expected a positive integer or 'auto'");
}

void emit(const std::string& text, const std::string& out) {
    if (out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(out, std::ios::binary);
    if (!f) throw sl::ConfigError("--out", "cannot open " + out + " for writing");
    f << text;
}

sl::Scenario load_with_overrides(const std::string& path, const CommonOptions& o) {
    sl::Scenario sc = sl::load_scenario(path);
    if (o.seed) sc.seed = *o.seed;
    if (o.trials) {
        if (*o.trials == 0) throw sl::ConfigError("--trials", "must be at least 1");
        sc.trials = *o.trials;
    }
    return sc;
}

void print_warnings(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lattice codes for Gaussian multicast with coded side information"};
    app.require_subcommand(1);

    // params
    auto* params_cmd = app.add_subcommand("params", "Choose p and ell and report the achieved rate");
    std::size_t pk = 0, pn = 0;
    double pr = 0, peps = 0;
    std::optional<std::uint64_t> pp;
    params_cmd->add_option("--K", pk, "Number of messages")->required();
    params_cmd->add_option("--n", pn, "Code dimension")->required();
    params_cmd->add_option("--R", pr, "Design rate (bits/dim)")->required();
    params_cmd->add_option("--epsilon", peps, "Tolerance epsilon")->required();
    params_cmd->add_option("--p", pp, "Use this prime instead of the smallest admissible one");

    // capacity
    auto* cap_cmd = app.add_subcommand("capacity", "Multicast capacity and per-receiver thresholds");
    std::string cap_scenario;
    std::size_t ck = 0;
    std::vector<std::string> rx_specs;
    cap_cmd->add_option("scenario", cap_scenario, "Scenario file (receivers, K, R, epsilon)");
    cap_cmd->add_option("--K", ck, "Number of messages (when no scenario is given)");
    cap_cmd->add_option("--rx", rx_specs, "Receiver as RANK:SIGMA2 (repeatable)");

    CommonOptions sim_opts, net_opts, ens_opts;
    std::string sim_path, net_path, ens_path;
    auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo run of a scenario");
    sim_cmd->add_option("scenario", sim_path, "Scenario JSON file")->required();
    add_common(sim_cmd, sim_opts);

    auto* net_cmd = app.add_subcommand("network", "Monte Carlo run with one receiver per subspace of F_p^K");
    net_cmd->add_option("scenario", net_path, "Scenario JSON file")->required();
    add_common(net_cmd, net_opts);

    auto* ver_cmd = app.add_subcommand("verify", "Run the built-in verification suite");
    std::string level = "quick";
    std::uint64_t ver_seed = 1;
    std::string ver_out, ver_format = "json";
    ver_cmd->add_option("--level", level, "quick or full")->check(CLI::IsMember({"quick", "full"}));
    ver_cmd->add_option("--seed", ver_seed, "Seed for the randomized checks");
    ver_cmd->add_option("--out", ver_out, "Write the report to this file");
    ver_cmd->add_option("--format", ver_format, "Report format")->check(CLI::IsMember({"csv", "json"}));

    auto* ens_cmd = app.add_subcommand("ensemble", "Fraction of random codes whose network error rate is small");
    std::size_t codebooks = 30;
    std::optional<double> ens_threshold;
    ens_cmd->add_option("scenario", ens_path, "Scenario JSON file")->required();
    ens_cmd->add_option("--codebooks", codebooks, "Number of independent (G, d) draws")->required();
    ens_cmd->add_option("--threshold", ens_threshold,
                        "Error-rate threshold (default: 5 x the ensemble mean)");
    add_common(ens_cmd, ens_opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*params_cmd) {
            sl::Scenario sc;
            sc.K = pk;
            sc.n = pn;
            sc.R = pr;
            sc.epsilon = peps;
            sc.p = pp;
            if (pk == 0 || pn == 0 || !(pr > 0) || !(peps > 0)) {
                throw sl::ConfigError("params", "K, n, R and epsilon must be positive");
            }
            if (pp && !sl::is_prime(*pp)) throw sl::ConfigError("--p", std::to_string(*pp) + " is not prime");
            const auto setup = sl::resolve_code(sc);
            print_warnings(setup.warnings);
            const auto geo = sl::geometry(setup.coarse);
            nlohmann::json j{{"p", setup.params.field.modulus()},
                             {"prime_bound", setup.prime_bound},
                             {"prime_meets_bound", setup.prime_meets_bound},
                             {"ell", setup.params.ell},
                             {"achieved_rate", setup.params.achieved_rate()},
                             {"K", pk},
                             {"n", pn},
                             {"R", pr},
                             {"epsilon", peps},
                             {"coarse_family", std::string(sl::family_name(setup.coarse.family()))},
                             {"coarse_scale", setup.coarse.scale()},
                             {"r_cov", geo.r_cov},
                             {"r_eff", geo.r_eff}};
            std::cout << j.dump(2) << '\n';
            return 0;
        }

        if (*cap_cmd) {
            std::vector<sl::ReceiverChannel> channels;
            std::size_t K = ck;
            double R = 0, eps = 0;
            bool have_rate = false;
            if (!cap_scenario.empty()) {
                const auto sc = sl::load_scenario(cap_scenario);
                K = sc.K;
                R = sc.R;
                eps = sc.epsilon;
                have_rate = true;
                const auto setup = sl::resolve_code(sc);
                for (const auto& rx : sl::resolve_receivers(sc, setup.params.field)) {
                    channels.push_back({rx.S.rank(), rx.sigma2});
                }
            }
            for (const auto& spec : rx_specs) {
                const auto colon = spec.find(':');
                if (colon == std::string::npos) throw sl::ConfigError("--rx", "expected RANK:SIGMA2, got " + spec);
                try {
                    channels.push_back({std::stoul(spec.substr(0, colon)), std::stod(spec.substr(colon + 1))});
                } catch (const std::exception&) {
                    throw sl::ConfigError("--rx", "expected RANK:SIGMA2, got " + spec);
                }
            }
            if (K == 0) throw sl::ConfigError("--K", "K is required without a scenario");
            if (channels.empty()) throw sl::ConfigError("--rx", "at least one receiver is required");
            nlohmann::json rows = nlohmann::json::array();
            for (const auto& c : channels) {
                if (c.rank >= K) throw sl::ConfigError("--rx", "receiver rank must be below K");
                if (!(c.sigma2 > 0)) throw sl::ConfigError("--rx", "sigma2 must be positive");
                nlohmann::json row{{"rank_S", c.rank},
                                   {"sigma2", c.sigma2},
                                   {"snr_db", sl::snr_db(c.sigma2)},
                                   {"capacity_term_bits", sl::capacity_term(K, c.rank, c.sigma2)}};
                if (have_rate) row["threshold_satisfied"] = sl::threshold_check(c.rank, c.sigma2, R, eps, K).satisfied;
                rows.push_back(row);
            }
            nlohmann::json j{{"K", K}, {"capacity_bits", sl::capacity(channels, K)}, {"receivers", rows}};
            std::cout << j.dump(2) << '\n';
            return 0;
        }

        if (*sim_cmd || *net_cmd) {
            const bool network = net_cmd->parsed();
            const CommonOptions& o = network ? net_opts : sim_opts;
            sl::Scenario sc = load_with_overrides(network ? net_path : sim_path, o);
            if (network) {
                sc.network_mode = true;
                if (!sc.network_sigma2) throw sl::ConfigError("network_sigma2", "required for the network command");
            }
            const auto stats = sl::run_scenario(sc, parse_threads(o.threads));
            print_warnings(stats.warnings);
            emit(o.format == "csv" ? sl::to_csv(stats) : sl::to_json_text(stats), o.out);
            return 0;
        }

        if (*ver_cmd) {
            const auto report = sl::verify_suite(level == "full" ? sl::VerifyLevel::full : sl::VerifyLevel::quick, ver_seed);
            std::string text;
            if (ver_format == "csv") {
                std::ostringstream os;
                os << "check,passed\n";
                for (const auto& c : report.checks) os << c.name << ',' << (c.passed ? "true" : "false") << '\n';
                text = os.str();
            } else {
                text = nlohmann::json(report).dump(2) + "\n";
            }
            emit(text, ver_out);
            for (const auto& c : report.checks) {
                std::cerr << (c.passed ? "[PASS] " : "[FAIL] ") << c.name << (c.detail.empty() ? "" : ": " + c.detail)
                          << '\n';
            }
            return report.all_passed() ? 0 : 1;
        }

        if (*ens_cmd) {
            const sl::Scenario sc = load_with_overrides(ens_path, ens_opts);
            const std::size_t threads = parse_threads(ens_opts.threads);
            sl::EnsembleResult res;
            if (ens_threshold) {
                res = sl::ensemble_fraction_good(sc, codebooks, *ens_threshold, threads);
            } else {
                // Rates do not depend on the threshold, so 5 x mean is applied afterwards.
                res = sl::ensemble_fraction_good(sc, codebooks, 1.0, threads);
                const double thr = 5.0 * res.mean_error_rate;
                std::size_t good = 0;
                for (double r : res.network_error_rates) good += r <= thr ? 1 : 0;
                res.threshold = thr;
                res.fraction_good = static_cast<double>(good) / static_cast<double>(codebooks);
            }
            std::string text;
            if (ens_opts.format == "csv") {
                std::ostringstream os;
                os << "codebook,network_error_rate,generator_redraws\n";
                for (std::size_t i = 0; i < res.network_error_rates.size(); ++i) {
                    os << i << ',' << sl::format_double(res.network_error_rates[i]) << ',' << res.redraws[i] << '\n';
                }
                text = os.str();
            } else {
                text = nlohmann::json(res).dump(2) + "\n";
            }
            emit(text, ens_opts.out);
            return 0;
        }
    } catch (const sl::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const sl::EnumerationTooLarge& e) {
        std::cerr << "enumeration cap: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
