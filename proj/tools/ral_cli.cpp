// Command-line front end: distribution generators, EMD computation, the
// robust single-buyer and reserve-price solvers, and oracle cross-checks.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <optional>
#include <random>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "ral/distribution.hpp"
#include "ral/io.hpp"
#include "ral/mechanism.hpp"
#include "ral/oracles.hpp"
#include "ral/robust_multi.hpp"
#include "ral/robust_single.hpp"

namespace {

using namespace ral;

constexpr int kExitOk = 0;
constexpr int kExitParse = 2;
constexpr int kExitInput = 3;
constexpr int kExitPrecondition = 4;
constexpr int kExitResource = 5;

std::string json_array(const std::vector<double>& xs) {
    std::string out = "[";
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ",";
        out += format_double(xs[i]);
    }
    return out + "]";
}

std::string distribution_json_inline(const DiscreteDistribution& f) {
    return "{\"values\":" + json_array(f.values()) +
           ",\"masses\":" + json_array(f.masses()) + "}";
}

void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-")
        std::fputs(text.c_str(), stdout);
    else
        write_file(path, text);
}

SpaInstance load_instance(const std::string& path) {
    nlohmann::json doc = nlohmann::json::parse(read_file(path), nullptr, false);
    if (doc.is_discarded()) throw parse_error("invalid JSON: " + path);
    for (const char* key : {"prior", "m", "eps", "H"})
        if (!doc.contains(key)) throw parse_error(std::string("missing field: ") + key);
    SpaInstance inst;
    inst.prior = distribution_from_json(doc.at("prior").dump());
    if (!doc.at("m").is_number_integer())
        throw parse_error("field m must be an integer");
    inst.m = doc.at("m").get<int>();
    inst.eps = doc.at("eps").get<double>();
    inst.H = doc.at("H").get<double>();
    return inst;
}

int cmd_emd(const std::string& file_f, const std::string& file_g) {
    DiscreteDistribution f = load_distribution(file_f);
    DiscreteDistribution g = load_distribution(file_g);
    std::printf("%.12g\n", emd(f, g));
    return kExitOk;
}

int cmd_gen(const std::string& kind, double h, std::size_t n, double lo, double hi,
            double pad_below, double vmax, std::uint64_t seed, const std::string& out) {
    DiscreteDistribution f;
    if (kind == "equal-revenue") {
        f = equal_revenue(h, n);
    } else if (kind == "uniform") {
        f = uniform_grid(lo, hi, n);
    } else if (kind == "random") {
        std::mt19937_64 rng(seed);
        f = oracles::random_regular(n, vmax, rng);
    } else {
        throw precondition_error("gen: unknown kind (equal-revenue, uniform, random)");
    }
    if (pad_below > 0.0) f = pad_support_below(f, pad_below);
    if (!out.empty() && out != "-")
        save_distribution(out, f);
    else
        std::fputs(distribution_to_json(f).c_str(), stdout);
    return kExitOk;
}

std::string solution_report(const DiscreteDistribution& f, const RobustSolution& sol) {
    std::string out = "{";
    out += "\"value\":" + format_double(sol.value);
    out += ",\"family_tag\":\"" + family_name(sol.family) + "\"";
    out += ",\"lambda\":" + format_double(sol.lambda);
    if (sol.family == MechanismFamily::interval && !sol.intervals) {
        out += ",\"a\":" + format_double(f.value(sol.a));
        out += ",\"b\":" + format_double(f.value(sol.b));
    }
    if (sol.gamma) out += ",\"gamma\":" + format_double(*sol.gamma);
    if (sol.intervals) {
        out += ",\"intervals\":[";
        for (std::size_t i = 0; i < sol.intervals->intervals.size(); ++i) {
            const auto& iv = sol.intervals->intervals[i];
            if (i) out += ",";
            out += "[" + format_double(iv.a) + "," + format_double(iv.b) + "]";
        }
        out += "]";
    }
    out += ",\"mechanism\":{\"values\":" + json_array(f.values()) +
           ",\"allocation\":" + json_array(sol.mechanism.allocation) +
           ",\"payment\":" + json_array(sol.mechanism.payment) + "}";
    out += ",\"worst\":" + distribution_json_inline(sol.worst_distribution);
    out += ",\"certificate\":{\"lambda\":" + format_double(sol.certificate.lambda) +
           ",\"beta\":" + json_array(sol.certificate.beta) +
           ",\"z\":" + json_array(sol.certificate.z) + "}";
    out += "}\n";
    return out;
}

std::string plot_data(const DiscreteDistribution& f, const RobustSolution& sol) {
    RevenueCurve orig = revenue_curve(f);
    RevenueCurve worst = revenue_curve(sol.worst_distribution);
    std::string csv = "quantile,revenue,flattened\n";
    for (const RevenuePoint& p : orig.points) {
        double flat = sol.gamma ? std::min(p.r, *sol.gamma) : worst.eval(p.q);
        csv += format_double(p.q) + "," + format_double(p.r) + "," +
               format_double(flat) + "\n";
    }
    return csv;
}

int cmd_solve_single(const std::string& file_f, double eps, bool irregular,
                     const std::string& out, const std::string& plot) {
    DiscreteDistribution f = load_distribution(file_f);
    RobustSolution sol;
    if (irregular) {
        sol = solve_robust_irregular(f, eps);
    } else {
        if (!is_regular(f))
            throw precondition_error(
                "prior is irregular: rerun with --irregular to use the "
                "flattening solver");
        sol = solve_robust_optimal(f, eps);
    }
    emit(out, solution_report(f, sol));
    if (!plot.empty()) emit(plot, plot_data(f, sol));
    if (!out.empty() && out != "-") {
        std::printf("family      %s\n", family_name(sol.family).c_str());
        std::printf("value       %.12g\n", sol.value);
        std::printf("lambda      %.12g\n", sol.lambda);
        if (sol.intervals) {
            std::printf("intervals  ");
            for (const auto& iv : sol.intervals->intervals)
                std::printf(" [%.6g, %.6g]", iv.a, iv.b);
            std::printf("\n");
        } else if (sol.family == MechanismFamily::interval) {
            std::printf("interval    [%.6g, %.6g]\n", f.value(sol.a), f.value(sol.b));
        }
        std::printf("worst emd   %.12g\n", emd(f, sol.worst_distribution));
    }
    return kExitOk;
}

int cmd_worst_case_spa(const std::string& instance_path, std::optional<double> reserve,
                       double eps2, const std::string& out) {
    SpaInstance inst = load_instance(instance_path);
    WorstCaseSpaResult res;
    if (reserve) {
        FptasGrids grids{0.0, eps2};
        res = worst_case_spa_with_reserve(inst, *reserve, grids);
    } else {
        res = worst_case_spa(inst);
    }
    std::string report = "{\"value\":" + format_double(res.revenue) +
                         ",\"worst\":{\"k\":" + format_double(res.k) +
                         ",\"l\":" + format_double(res.l) +
                         ",\"flat_level\":" + format_double(res.flat_level) +
                         "},\"G\":" + distribution_json_inline(res.G) + "}\n";
    emit(out, report);
    if (!out.empty() && out != "-")
        std::printf("value %.12g  k %.6g  l %.6g  flat %.6g\n", res.revenue, res.k,
                    res.l, res.flat_level);
    return kExitOk;
}

int cmd_solve_reserve(const std::string& instance_path, double eps_prime,
                      const std::string& out) {
    SpaInstance inst = load_instance(instance_path);
    auto t0 = std::chrono::steady_clock::now();
    RobustReserveResult res = robust_reserve_fptas(inst, eps_prime);
    double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::string report = "{\"reserve\":" + format_double(res.reserve) +
                         ",\"value\":" + format_double(res.value) +
                         ",\"worst\":{\"k\":" + format_double(res.worst.k) +
                         ",\"l\":" + format_double(res.worst.l) +
                         ",\"flat_level\":" + format_double(res.worst.flat_level) +
                         "}}\n";
    emit(out, report);
    if (!out.empty() && out != "-")
        std::printf("reserve %.12g  value %.12g\n", res.reserve, res.value);
    std::fprintf(stderr, "runtime %.3fs\n", seconds);
    return kExitOk;
}

struct VerifyRow {
    std::string name;
    double residual;
    double tolerance;
    bool pass;
};

int cmd_verify(const std::string& file_f, double eps, const std::string& level,
               const std::string& mech_path, std::uint64_t seed) {
    DiscreteDistribution f = load_distribution(file_f);
    std::vector<VerifyRow> rows;
    auto add = [&](const std::string& name, double residual, double tol) {
        rows.push_back({name, residual, tol, residual <= tol});
    };
    std::mt19937_64 rng(seed);

    // transfer-cost identity on random feasible plans
    double worst_gap = 0.0;
    for (int i = 0; i < 200; ++i) {
        TransferPlan t = oracles::random_feasible_transfer(f, eps, rng);
        worst_gap =
            std::max(worst_gap, std::abs(emd(f, apply_transfer(f, t)) - t.cost(f)));
    }
    add("emd(apply_transfer) == cost", worst_gap, 1e-12);

    // duality certificates across a sweep of menus
    double dual_gap = 0.0, fast_gap = 0.0, z_mono = 0.0;
    auto probe = [&](const Mechanism& m) {
        WorstCaseRevenue wc = worst_case_revenue(m, f, eps);
        double certified = -wc.certificate.lambda * eps;
        for (std::size_t i = 0; i < f.size(); ++i)
            certified += wc.certificate.z[i] * f.mass(i);
        dual_gap = std::max(dual_gap, std::abs(certified - wc.value));
        fast_gap =
            std::max(fast_gap, std::abs(worst_case_value_fast(m, f, eps) - wc.value));
        for (std::size_t i = 1; i < wc.certificate.z.size(); ++i)
            z_mono = std::max(z_mono, wc.certificate.z[i - 1] - wc.certificate.z[i]);
    };
    for (std::size_t i = 0; i < f.size(); i += std::max<std::size_t>(1, f.size() / 8))
        probe(posted_price(f.values(), f.value(i)));
    probe(candidate_mechanism(f.values(), 0, f.size() - 1));
    add("duality gap", dual_gap, 1e-7);
    add("dual z non-decreasing", z_mono, 1e-9);
    add("parametric dual == LP", fast_gap, 1e-7);

    if (!mech_path.empty()) {
        auto [values, mech] = mechanism_from_json(read_file(mech_path));
        if (values != f.values())
            throw input_error("mechanism support differs from the distribution");
        IcIrReport rep = check_ic_ir(mech, values);
        double viol = 0.0;
        for (const auto& v : rep.violations) viol = std::max(viol, v.amount);
        add("mechanism IC/IR", viol, 1e-9);
        if (!rep.ok) {
            for (const auto& v : rep.violations)
                std::printf("    %s\n", v.describe().c_str());
        } else {
            probe(mech);
        }
    }

    if (level == "full") {
        if (f.size() > 5) {
            std::fprintf(stderr,
                         "full verification needs a support of at most 5 points "
                         "(got %zu); rerun with --level fast\n",
                         f.size());
            return kExitResource;
        }
        double adv_gap = 0.0;
        double step = std::max(eps, 1e-3) / 50.0;
        for (std::size_t i = 0; i < f.size(); ++i) {
            Mechanism m = posted_price(f.values(), f.value(i));
            auto brute = oracles::brute_adversary(m, f, eps, step);
            auto wc = worst_case_revenue(m, f, eps);
            adv_gap = std::max(adv_gap, std::abs(brute.value - wc.value));
        }
        add("brute adversary vs LP", adv_gap, 5.0 * step * f.values().back());

        double maxmin = oracles::brute_maxmin(f, eps);
        double solver = is_regular(f) ? solve_robust_optimal(f, eps).value
                                      : solve_robust_irregular(f, eps).value;
        add("brute max-min vs solver", std::abs(maxmin - solver), 2e-2);
    }

    bool all_pass = true;
    std::printf("%-32s %-14s %-10s %s\n", "check", "residual", "tolerance", "status");
    for (const VerifyRow& row : rows) {
        all_pass = all_pass && row.pass;
        std::printf("%-32s %-14.3g %-10.3g %s\n", row.name.c_str(), row.residual,
                    row.tolerance, row.pass ? "pass" : "FAIL");
    }
    return all_pass ? kExitOk : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"robust auction toolkit"};
    app.require_subcommand(1);
    std::uint64_t seed = 1;
    app.add_option("--seed", seed, "seed for all randomized checks");

    auto* cmd_emd_p = app.add_subcommand("emd", "earth mover's distance between files");
    std::string file_f, file_g;
    cmd_emd_p->add_option("file_f", file_f)->required();
    cmd_emd_p->add_option("file_g", file_g)->required();

    auto* cmd_gen_p = app.add_subcommand("gen", "write a distribution grid");
    std::string gen_kind, gen_out;
    double gen_h = 10.0, gen_lo = 0.0, gen_hi = 1.0, gen_pad = 0.0, gen_vmax = 1.0;
    std::size_t gen_n = 100;
    cmd_gen_p->add_option("kind", gen_kind, "equal-revenue | uniform | random")
        ->required();
    cmd_gen_p->add_option("--top", gen_h, "equal-revenue support top");
    cmd_gen_p->add_option("--n", gen_n, "grid size");
    cmd_gen_p->add_option("--lo", gen_lo, "uniform lower end");
    cmd_gen_p->add_option("--hi", gen_hi, "uniform upper end");
    cmd_gen_p->add_option("--pad-below", gen_pad,
                          "extend the support downward with zero-mass points "
                          "(gives the adversary room below the bottom value)");
    cmd_gen_p->add_option("--vmax", gen_vmax, "random-grid value scale");
    cmd_gen_p->add_option("--out", gen_out, "output path (.json or .csv)");

    auto* cmd_single = app.add_subcommand("solve-single", "max-min menu for one buyer");
    std::string single_file, single_out, single_plot;
    double single_eps = 0.0;
    bool single_irregular = false;
    cmd_single->add_option("file_f", single_file)->required();
    cmd_single->add_option("--eps", single_eps, "earth-mover budget")->required();
    cmd_single->add_flag("--irregular", single_irregular,
                         "use the revenue-curve flattening solver");
    cmd_single->add_option("--out", single_out, "report JSON path");
    cmd_single->add_option("--plot-data", single_plot,
                           "CSV of the revenue curve and its flattening");

    auto* cmd_wcs = app.add_subcommand(
        "worst-case-spa", "revenue-minimizing distribution for a second-price auction");
    std::string wcs_instance, wcs_out;
    double wcs_eps2 = 0.01;
    double wcs_reserve_raw = -1.0;
    cmd_wcs->add_option("instance", wcs_instance, "instance JSON")->required();
    auto* res_opt = cmd_wcs->add_option("--reserve", wcs_reserve_raw, "fixed reserve");
    cmd_wcs->add_option("--eps2", wcs_eps2, "quantile grid parameter");
    cmd_wcs->add_option("--out", wcs_out, "report JSON path");

    auto* cmd_reserve =
        app.add_subcommand("solve-reserve", "approximately optimal robust reserve");
    std::string reserve_instance, reserve_out;
    double eps_prime = 0.05;
    cmd_reserve->add_option("instance", reserve_instance, "instance JSON")->required();
    cmd_reserve->add_option("--eps-prime", eps_prime, "accuracy target")->required();
    cmd_reserve->add_option("--out", reserve_out, "report JSON path");

    auto* cmd_verify_p = app.add_subcommand("verify", "oracle cross-checks");
    std::string verify_file, verify_level = "fast", verify_mech;
    double verify_eps = 0.05;
    cmd_verify_p->add_option("file_f", verify_file)->required();
    cmd_verify_p->add_option("--eps", verify_eps, "earth-mover budget");
    cmd_verify_p->add_option("--level", verify_level, "fast | full")
        ->check(CLI::IsMember({"fast", "full"}));
    cmd_verify_p->add_option("--mechanism", verify_mech,
                             "mechanism JSON to check against the distribution");

    try {
        app.parse(argc, argv);
        if (cmd_emd_p->parsed()) return cmd_emd(file_f, file_g);
        if (cmd_gen_p->parsed())
            return cmd_gen(gen_kind, gen_h, gen_n, gen_lo, gen_hi, gen_pad, gen_vmax,
                           seed, gen_out);
        if (cmd_single->parsed())
            return cmd_solve_single(single_file, single_eps, single_irregular,
                                    single_out, single_plot);
        if (cmd_wcs->parsed()) {
            std::optional<double> reserve;
            if (res_opt->count() > 0) reserve = wcs_reserve_raw;
            return cmd_worst_case_spa(wcs_instance, reserve, wcs_eps2, wcs_out);
        }
        if (cmd_reserve->parsed())
            return cmd_solve_reserve(reserve_instance, eps_prime, reserve_out);
        if (cmd_verify_p->parsed())
            return cmd_verify(verify_file, verify_eps, verify_level, verify_mech, seed);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitParse;
    } catch (const parse_error& e) {
        std::fprintf(stderr, "parse error: %s\n", e.what());
        return kExitParse;
    } catch (const input_error& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return kExitInput;
    } catch (const precondition_error& e) {
        std::fprintf(stderr, "precondition failed: %s\n", e.what());
        return kExitPrecondition;
    } catch (const resource_error& e) {
        std::fprintf(stderr, "refused: %s\n", e.what());
        return kExitResource;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return kExitOk;
}
