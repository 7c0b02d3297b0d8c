#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "rama/arith.hpp"
#include "rama/dirichlet.hpp"
#include "rama/kernels.hpp"
#include "rama/moments.hpp"
#include "rama/multivar_f.hpp"
#include "rama/ramanujan.hpp"
#include "rama/selfcheck.hpp"

using nlohmann::json;

namespace {

struct Global {
    std::string format = "json";
    unsigned workers = 1;
    uint64_t budget = 0; // 0 = keep RAMA_BUDGET / default
    uint64_t max_memory = rama::SieveTables::kDefaultMemoryCeiling;
    std::string simd = "auto";
    uint64_t seed = 1;
};

// Integers ride as JSON numbers only while exactly representable in a double.
json json_int(const rama::BigInt& v) {
    static const rama::BigInt lim = rama::BigInt(1) << 53;
    if (v < lim && v > -lim) return json(static_cast<int64_t>(v.get_si()));
    return json(v.get_str());
}

json json_int64(int64_t v) {
    constexpr int64_t lim = int64_t{1} << 53;
    if (v < lim && v > -lim) return json(v);
    return json(std::to_string(v));
}

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

class Emitter {
public:
    Emitter(const Global& g, std::string command)
        : g_(g), command_(std::move(command)), t0_(std::chrono::steady_clock::now()) {}

    double elapsed_ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                         t0_)
            .count();
    }

    json envelope(const json& params, const json& result) const {
        json env;
        env["command"] = command_;
        env["params"] = params;
        env["result"] = result;
        env["elapsed_ms"] = elapsed_ms();
        return env;
    }

    int finish(const json& params, const json& result, const std::string& text,
               const std::string& csv, int exit_code = 0) const {
        if (g_.format == "json")
            std::cout << envelope(params, result).dump(2) << "\n";
        else if (g_.format == "csv")
            std::cout << csv;
        else
            std::cout << text;
        return exit_code;
    }

    // Verification failure: JSON diagnostic regardless of the format flag.
    int fail(const json& params, const json& result) const {
        std::cout << envelope(params, result).dump(2) << "\n";
        return 1;
    }

private:
    const Global& g_;
    std::string command_;
    std::chrono::steady_clock::time_point t0_;
};

std::string join_u64(const std::vector<uint64_t>& v, char sep) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) s += sep;
        s += std::to_string(v[i]);
    }
    return s;
}

int do_csum(const Global& g, uint64_t q, uint64_t n, uint64_t x) {
    Emitter em(g, "csum");
    require(n >= 1, "csum: --n must be >= 1");
    require((q >= 1) != (x >= 1), "csum: pass exactly one of --q (single sum) or --x (column sum)");
    if (q >= 1) {
        rama::SieveTables tab(q, g.max_memory);
        int64_t v = rama::ramanujan_sum(q, n, tab);
        json params{{"q", q}, {"n", n}};
        json result{{"value", json_int64(v)}};
        return em.finish(params, result, std::to_string(v) + "\n",
                         "q,n,value\n" + std::to_string(q) + "," + std::to_string(n) +
                             "," + std::to_string(v) + "\n");
    }
    rama::SieveTables tab(x, g.max_memory);
    int64_t v = rama::column_sum(x, n, tab);
    json params{{"x", x}, {"n", n}};
    json result{{"value", json_int64(v)}};
    return em.finish(params, result, std::to_string(v) + "\n",
                     "x,n,value\n" + std::to_string(x) + "," + std::to_string(n) + "," +
                         std::to_string(v) + "\n");
}

int do_cohen(const Global& g, uint64_t q, uint64_t n, uint32_t beta) {
    Emitter em(g, "cohen");
    require(q >= 1 && n >= 1, "cohen: --q and --n must be >= 1");
    require(beta >= 1, "cohen: --beta must be >= 1");
    rama::BigInt v = rama::cohen_sum(q, n, beta);
    json params{{"q", q}, {"n", n}, {"beta", beta}};
    json result{{"value", json_int(v)}};
    return em.finish(params, result, v.get_str() + "\n",
                     "q,n,beta,value\n" + std::to_string(q) + "," + std::to_string(n) +
                         "," + std::to_string(beta) + "," + v.get_str() + "\n");
}

int do_f(const Global& g, const std::vector<uint64_t>& tuple, uint32_t beta) {
    Emitter em(g, "f");
    require(!tuple.empty() && tuple.size() <= rama::kMaxTupleArity,
            "f: --tuple needs 1..8 comma-separated entries");
    uint64_t mx = 1;
    for (uint64_t v : tuple) {
        require(v >= 1, "f: tuple entries must be >= 1");
        mx = std::max(mx, v);
    }
    require(beta >= 1, "f: --beta must be >= 1");
    rama::SieveTables tab(mx, g.max_memory);
    rama::BigInt v = rama::f_multiplicative(tuple, beta, tab);
    json params{{"tuple", tuple}, {"beta", beta}};
    json result{{"value", json_int(v)}};
    return em.finish(params, result, v.get_str() + "\n",
                     "tuple,beta,value\n" + join_u64(tuple, ' ') + "," +
                         std::to_string(beta) + "," + v.get_str() + "\n");
}

int do_moment(const Global& g, uint64_t x, uint64_t y, uint32_t k, uint32_t beta,
              const std::string& route) {
    Emitter em(g, "moment");
    require(x >= 1 && y >= 1, "moment: --x and --y must be >= 1");
    require(k >= 1 && k <= 16, "moment: --k must be in 1..16");
    require(beta >= 1, "moment: --beta must be >= 1");
    rama::SieveTables tab(x, g.max_memory);
    rama::MomentResult r = route == "identity"
                               ? rama::moment_via_divisor_identity(x, y, k, beta, tab)
                               : rama::moment_direct(x, y, k, beta, tab, g.workers);
    json params{{"x", x}, {"y", y}, {"k", k}, {"beta", beta}, {"route", route}};
    json result{{"value", json_int(r.value)}};
    return em.finish(params, result, r.value.get_str() + "\n",
                     "x,y,k,beta,route,value\n" + std::to_string(x) + "," +
                         std::to_string(y) + "," + std::to_string(k) + "," +
                         std::to_string(beta) + "," + route + "," + r.value.get_str() +
                         "\n");
}

int do_tavg(const Global& g, uint64_t x, uint32_t k, uint32_t beta) {
    Emitter em(g, "tavg");
    require(x >= 1, "tavg: --x must be >= 1");
    require(k >= 1 && k <= rama::kMaxTupleArity, "tavg: --k must be in 1..8");
    require(beta >= 1, "tavg: --beta must be >= 1");
    rama::SieveTables tab(x, g.max_memory);
    rama::BigInt v = rama::t_average(x, k, beta, tab, g.workers);
    json params{{"x", x}, {"k", k}, {"beta", beta}};
    json result{{"value", json_int(v)}};
    return em.finish(params, result, v.get_str() + "\n",
                     "x,k,beta,value\n" + std::to_string(x) + "," + std::to_string(k) +
                         "," + std::to_string(beta) + "," + v.get_str() + "\n");
}

int do_fit(const Global& g, uint32_t k, uint64_t xmin, uint64_t xmax, int points,
           int degree, const std::string& samples_csv) {
    Emitter em(g, "fit");
    require(k >= 1 && k <= rama::kMaxTupleArity, "fit: --k must be in 1..8");
    require(xmin >= 2 && xmax > xmin, "fit: need 2 <= xmin < xmax");
    require(degree >= 0 && degree <= 6, "fit: --degree must be in 0..6");
    require(points >= degree + 2, "fit: need at least degree+2 points");
    rama::SieveTables tab(xmax, g.max_memory);

    std::vector<std::pair<double, double>> samples;
    uint64_t prev = 0;
    for (int i = 0; i < points; ++i) {
        double t = points == 1 ? 0.0 : static_cast<double>(i) / (points - 1);
        uint64_t x = static_cast<uint64_t>(std::llround(
            xmin * std::pow(static_cast<double>(xmax) / static_cast<double>(xmin), t)));
        if (x <= prev) x = prev + 1;
        prev = x;
        rama::BigInt val = rama::t_average(x, k, 1, tab, g.workers);
        samples.emplace_back(static_cast<double>(x), val.get_d());
    }
    rama::FitReport rep = rama::fit_log_poly(samples, static_cast<int>(k), degree);

    std::string csv = "x,normalized\n";
    char line[80];
    for (const auto& [sx, nv] : rep.sample_points) {
        std::snprintf(line, sizeof line, "%.17g,%.17g\n", sx, nv);
        csv += line;
    }
    if (!samples_csv.empty()) {
        std::ofstream out(samples_csv);
        require(out.good(), "fit: cannot open --samples-csv path");
        out << csv;
    }

    json jsamples = json::array();
    for (const auto& [sx, nv] : rep.sample_points)
        jsamples.push_back(json{{"x", sx}, {"normalized", nv}});
    json params{{"k", k},           {"xmin", xmin},     {"xmax", xmax},
                {"points", points}, {"degree", degree}};
    json result{{"degree", rep.degree},
                {"coefficients", rep.coefficients},
                {"r_squared", rep.r_squared},
                {"residuals", rep.residuals},
                {"samples", jsamples}};

    std::string text = "coefficients (constant first):";
    for (double c : rep.coefficients) {
        std::snprintf(line, sizeof line, " %.12g", c);
        text += line;
    }
    std::snprintf(line, sizeof line, "\nR^2 = %.12g\n", rep.r_squared);
    text += line;
    return em.finish(params, result, text, csv);
}

int do_verify_factorization(const Global& g, uint32_t k, uint32_t bound) {
    Emitter em(g, "verify-factorization");
    require(k >= 1 && k <= rama::kMaxTupleArity, "verify-factorization: --k must be in 1..8");
    require(bound >= 1 && bound <= 255, "verify-factorization: --bound must be in 1..255");
    rama::SieveTables tab(std::max<uint64_t>(bound, 2), g.max_memory);
    rama::VerifyOutcome vo = rama::verify_factorization(k, bound, tab);
    json params{{"k", k}, {"bound", bound}};
    json result{{"ok", vo.ok}, {"detail", vo.detail}};
    if (!vo.ok) return em.fail(params, result);
    return em.finish(params, result, "ok: " + vo.detail + "\n",
                     "k,bound,ok\n" + std::to_string(k) + "," + std::to_string(bound) +
                         ",true\n");
}

int do_verify_local(const Global& g, uint64_t p, uint32_t k, uint32_t degree) {
    Emitter em(g, "verify-local");
    rama::RemarkReport rep = rama::verify_remark_local(p, k, degree);
    json params{{"p", p}, {"k", k}, {"degree", degree}};
    json result{{"ok", rep.ok},
                {"max_abs_discrepancy", rep.max_abs_discrepancy.get_str()}};
    if (!rep.ok) return em.fail(params, result);
    return em.finish(params, result, "ok: max discrepancy 0\n",
                     "p,k,degree,ok\n" + std::to_string(p) + "," + std::to_string(k) +
                         "," + std::to_string(degree) + ",true\n");
}

int do_verify_nonneg(const Global& g, uint32_t k, uint64_t nmax, uint64_t samples) {
    Emitter em(g, "verify-nonneg");
    require(k >= 1 && k <= rama::kMaxTupleArity, "verify-nonneg: --k must be in 1..8");
    require(nmax >= 1, "verify-nonneg: --max must be >= 1");
    rama::SieveTables tab(nmax, g.max_memory);

    uint64_t checked = 0;
    std::vector<uint64_t> violation;
    if (samples == 0) {
        uint64_t cells = 1;
        for (uint32_t i = 0; i < k; ++i) {
            require(cells <= UINT64_MAX / nmax, "verify-nonneg: box too large");
            cells *= nmax;
        }
        rama::check_budget(cells, "verify-nonneg");
        std::vector<uint64_t> n(k, 1);
        while (violation.empty()) {
            if (rama::f_multiplicative(n, 1, tab) < 0) violation = n;
            ++checked;
            uint32_t pos = k;
            while (pos > 0) {
                --pos;
                if (n[pos] < nmax) {
                    ++n[pos];
                    break;
                }
                if (pos == 0) {
                    pos = UINT32_MAX;
                    break;
                }
                n[pos] = 1;
            }
            if (pos == UINT32_MAX) break;
        }
    } else {
        std::mt19937_64 rng(g.seed);
        std::uniform_int_distribution<uint64_t> nd(1, nmax);
        std::vector<uint64_t> n(k);
        for (uint64_t i = 0; i < samples && violation.empty(); ++i) {
            for (auto& v : n) v = nd(rng);
            if (rama::f_multiplicative(n, 1, tab) < 0) violation = n;
            ++checked;
        }
    }
    json params{{"k", k}, {"max", nmax}, {"samples", samples}, {"seed", g.seed}};
    json result{{"ok", violation.empty()},
                {"mode", samples == 0 ? "exhaustive" : "sampled"},
                {"checked", checked}};
    if (!violation.empty()) {
        result["violation"] = violation;
        return em.fail(params, result);
    }
    return em.finish(params, result,
                     "ok: " + std::to_string(checked) + " tuples non-negative\n",
                     "k,max,mode,checked,ok\n" + std::to_string(k) + "," +
                         std::to_string(nmax) + "," +
                         (samples == 0 ? "exhaustive" : "sampled") + "," +
                         std::to_string(checked) + ",true\n");
}

int do_rh_report(const Global& g, uint64_t n, uint64_t xmax, double epsilon) {
    Emitter em(g, "rh-report");
    require(n >= 1 && xmax >= 1, "rh-report: --n and --xmax must be >= 1");
    rama::SieveTables tab(xmax, g.max_memory);
    std::vector<rama::RhRow> rows = rama::rh_growth_report(n, xmax, epsilon, tab);
    std::string csv = "x,sum,normalized\n";
    char line[96];
    for (const auto& r : rows) {
        std::snprintf(line, sizeof line, "%llu,%lld,%.12g\n",
                      static_cast<unsigned long long>(r.x),
                      static_cast<long long>(r.sum), r.normalized);
        csv += line;
    }
    json jrows = json::array();
    for (const auto& r : rows)
        jrows.push_back(json{{"x", r.x}, {"sum", json_int64(r.sum)},
                             {"normalized", r.normalized}});
    json params{{"n", n}, {"xmax", xmax}, {"epsilon", epsilon}};
    json result{{"rows", jrows}};
    return em.finish(params, result, csv, csv);
}

int do_selfcheck(const Global& g) {
    std::vector<rama::CheckResult> results = rama::run_acceptance(true, g.workers);
    bool all = true;
    for (const auto& r : results) {
        std::printf("[%s] %s: %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(),
                    r.detail.c_str());
        all = all && r.passed;
    }
    return all ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    Global g;
    CLI::App app{"ramamoments: Ramanujan and Cohen-Ramanujan sums, the k-variable "
                 "multiplicative f, moment sums by two exact routes, box averages, "
                 "Dirichlet-series verification, and growth reports"};
    app.require_subcommand(1);
    app.add_option("--format", g.format, "output format")
        ->check(CLI::IsMember({"text", "csv", "json"}))
        ->capture_default_str();
    app.add_option("--workers", g.workers, "worker threads for parallel sums")
        ->check(CLI::Range(1u, 1024u))
        ->capture_default_str();
    app.add_option("--budget", g.budget,
                   "enumeration budget override (default: RAMA_BUDGET or 10^8)");
    app.add_option("--max-memory", g.max_memory, "sieve memory ceiling in bytes")
        ->capture_default_str();
    app.add_option("--simd", g.simd, "kernel variant selection")
        ->check(CLI::IsMember({"auto", "scalar", "avx2"}))
        ->capture_default_str();
    app.add_option("--seed", g.seed, "seed for sampled verification")
        ->capture_default_str();

    auto* sc_csum = app.add_subcommand("csum", "Ramanujan sum c_q(n), or the column sum over q <= x");
    uint64_t cs_q = 0, cs_n = 0, cs_x = 0;
    sc_csum->add_option("--q", cs_q, "modulus q");
    sc_csum->add_option("--n", cs_n, "argument n")->required();
    sc_csum->add_option("--x", cs_x, "column-sum bound x");
    sc_csum->fallthrough();

    auto* sc_cohen = app.add_subcommand("cohen", "Cohen-Ramanujan sum c_q^beta(n)");
    uint64_t ch_q = 0, ch_n = 0;
    uint32_t ch_beta = 1;
    sc_cohen->add_option("--q", ch_q, "modulus q")->required();
    sc_cohen->add_option("--n", ch_n, "argument n")->required();
    sc_cohen->add_option("--beta", ch_beta, "power beta")->capture_default_str();
    sc_cohen->fallthrough();

    auto* sc_f = app.add_subcommand("f", "k-variable multiplicative f at a tuple");
    std::vector<uint64_t> f_tuple;
    uint32_t f_beta = 1;
    sc_f->add_option("--tuple", f_tuple, "comma-separated coordinates, e.g. 6,6")
        ->required()
        ->delimiter(',');
    sc_f->add_option("--beta", f_beta, "power beta")->capture_default_str();
    sc_f->fallthrough();

    auto* sc_moment = app.add_subcommand("moment", "moment S_k(x,y) of column sums");
    uint64_t mo_x = 0, mo_y = 0;
    uint32_t mo_k = 0, mo_beta = 1;
    std::string mo_route = "direct";
    sc_moment->add_option("--x", mo_x, "modulus bound x")->required();
    sc_moment->add_option("--y", mo_y, "argument bound y")->required();
    sc_moment->add_option("--k", mo_k, "moment order k")->required();
    sc_moment->add_option("--beta", mo_beta, "power beta")->capture_default_str();
    sc_moment->add_option("--route", mo_route, "computation route")
        ->check(CLI::IsMember({"direct", "identity"}))
        ->capture_default_str();
    sc_moment->fallthrough();

    auto* sc_tavg = app.add_subcommand("tavg", "box average T_k(x) of f");
    uint64_t ta_x = 0;
    uint32_t ta_k = 0, ta_beta = 1;
    sc_tavg->add_option("--x", ta_x, "box side x")->required();
    sc_tavg->add_option("--k", ta_k, "arity k")->required();
    sc_tavg->add_option("--beta", ta_beta, "power beta")->capture_default_str();
    sc_tavg->fallthrough();

    auto* sc_fit = app.add_subcommand("fit", "fit t_average(x,k)/x^k to a log-x polynomial");
    uint32_t ft_k = 3;
    uint64_t ft_xmin = 100, ft_xmax = 600;
    int ft_points = 8, ft_degree = 1;
    std::string ft_samples_csv;
    sc_fit->add_option("--k", ft_k, "arity k")->capture_default_str();
    sc_fit->add_option("--xmin", ft_xmin, "smallest x")->capture_default_str();
    sc_fit->add_option("--xmax", ft_xmax, "largest x")->capture_default_str();
    sc_fit->add_option("--points", ft_points, "geometric sample count")->capture_default_str();
    sc_fit->add_option("--degree", ft_degree, "polynomial degree in log x")->capture_default_str();
    sc_fit->add_option("--samples-csv", ft_samples_csv, "also write samples CSV to this path");
    sc_fit->fallthrough();

    auto* sc_vfact = app.add_subcommand("verify-factorization",
                                        "zeta-factor/E reconstruction check");
    uint32_t vf_k = 2, vf_bound = 64;
    sc_vfact->add_option("--k", vf_k, "dimension k")->capture_default_str();
    sc_vfact->add_option("--bound", vf_bound, "truncation bound N")->capture_default_str();
    sc_vfact->fallthrough();

    auto* sc_vlocal = app.add_subcommand("verify-local", "local Euler-factor identity check");
    uint64_t vl_p = 2;
    uint32_t vl_k = 2, vl_degree = 4;
    sc_vlocal->add_option("--p", vl_p, "prime p")->capture_default_str();
    sc_vlocal->add_option("--k", vl_k, "dimension k")->capture_default_str();
    sc_vlocal->add_option("--degree", vl_degree, "truncation degree D")->capture_default_str();
    sc_vlocal->fallthrough();

    auto* sc_vnonneg = app.add_subcommand("verify-nonneg", "non-negativity of f over a box");
    uint32_t vn_k = 2;
    uint64_t vn_max = 50, vn_samples = 0;
    sc_vnonneg->add_option("--k", vn_k, "arity k")->capture_default_str();
    sc_vnonneg->add_option("--max", vn_max, "coordinate bound")->capture_default_str();
    sc_vnonneg->add_option("--samples", vn_samples, "random tuples (0 = exhaustive)")
        ->capture_default_str();
    sc_vnonneg->fallthrough();

    auto* sc_rh = app.add_subcommand("rh-report", "growth of column sums against x^(1/2+eps)");
    uint64_t rh_n = 0, rh_xmax = 0;
    double rh_eps = 0.05;
    sc_rh->add_option("--n", rh_n, "fixed argument n")->required();
    sc_rh->add_option("--xmax", rh_xmax, "largest x")->required();
    sc_rh->add_option("--epsilon", rh_eps, "exponent offset in (0, 0.5]")->capture_default_str();
    sc_rh->fallthrough();

    auto* sc_self = app.add_subcommand("selfcheck", "run the acceptance suites at reduced scale");
    sc_self->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (g.budget > 0) rama::set_enumeration_budget(g.budget);
        if (g.simd == "scalar")
            rama::kernels::set_variant(rama::kernels::Variant::scalar);
        else if (g.simd == "avx2")
            rama::kernels::set_variant(rama::kernels::Variant::avx2);
        else
            rama::kernels::set_variant(rama::kernels::best_variant());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (*sc_csum) return do_csum(g, cs_q, cs_n, cs_x);
        if (*sc_cohen) return do_cohen(g, ch_q, ch_n, ch_beta);
        if (*sc_f) return do_f(g, f_tuple, f_beta);
        if (*sc_moment) return do_moment(g, mo_x, mo_y, mo_k, mo_beta, mo_route);
        if (*sc_tavg) return do_tavg(g, ta_x, ta_k, ta_beta);
        if (*sc_fit) return do_fit(g, ft_k, ft_xmin, ft_xmax, ft_points, ft_degree, ft_samples_csv);
        if (*sc_vfact) return do_verify_factorization(g, vf_k, vf_bound);
        if (*sc_vlocal) return do_verify_local(g, vl_p, vl_k, vl_degree);
        if (*sc_vnonneg) return do_verify_nonneg(g, vn_k, vn_max, vn_samples);
        if (*sc_rh) return do_rh_report(g, rh_n, rh_xmax, rh_eps);
        if (*sc_self) return do_selfcheck(g);
    } catch (const rama::budget_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::out_of_range& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        json diag{{"error", e.what()}};
        std::cout << diag.dump(2) << "\n";
        return 1;
    }
    std::cerr << "error: no subcommand\n";
    return 2;
}
