// sepmel -- certify nonintegrability of periodically forced planar
// Hamiltonian systems and validate the prediction against direct
// separatrix-splitting measurements.

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "sepmel/format.hpp"
#include "sepmel/melnikov.hpp"
#include "sepmel/strobe.hpp"
#include "sepmel/variational.hpp"

using namespace sepmel;
using ordered_json = nlohmann::ordered_json;

namespace {

struct CommonOpts {
    std::string input;
    std::string preset;
    double beta = 1.0, delta = 0.0, omega = 1.0;
    int branch = +1;
    std::string out;
    std::string format = "json";
    int threads = 0;
    double tol_coeff = 1e-10;
    double tol_cert = 1e-8;
    double tol_simple = 1e-8;
    std::vector<double> saddle_from, saddle_to;
    bool shoot = false;

    int effective_threads() const {
        if (threads > 0) return threads;
        unsigned h = std::thread::hardware_concurrency();
        return h ? (int)h : 1;
    }
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--input", o.input, "system-definition JSON file");
    cmd->add_option("--preset", o.preset, "built-in system (duffing1, duffing2)");
    cmd->add_option("--beta", o.beta, "forcing amplitude (presets)");
    cmd->add_option("--delta", o.delta, "damping coefficient (presets)");
    cmd->add_option("--omega", o.omega, "forcing frequency");
    cmd->add_option("--branch", o.branch, "separatrix branch, +1 or -1");
    cmd->add_option("--out", o.out, "output directory");
    cmd->add_option("--format", o.format, "json|csv")->check(CLI::IsMember({"json", "csv"}));
    cmd->add_option("--threads", o.threads, "worker threads (default: hardware)");
    cmd->add_option("--tol-coeff", o.tol_coeff, "Melnikov coefficient tolerance");
    cmd->add_option("--tol-cert", o.tol_cert, "certificate tolerance");
    cmd->add_option("--tol-simple", o.tol_simple, "simple-zero tolerance");
    cmd->add_option("--saddle-from", o.saddle_from, "saddle guess x1,x2 (custom systems)")
        ->expected(2);
    cmd->add_option("--saddle-to", o.saddle_to, "target saddle guess x1,x2 (custom systems)")
        ->expected(2);
    cmd->add_flag("--shoot", o.shoot, "use the shooting orbit even for presets");
}

PlanarSystem build_system(const CommonOpts& o) {
    if (o.input.empty() == o.preset.empty())
        throw Error(ErrorCode::InvalidConfig, "exactly one of --input / --preset is required");
    if (!o.input.empty()) return parse_system_file(o.input);
    return make_preset(o.preset, {o.beta, o.delta, o.omega});
}

Orbit build_orbit(const CommonOpts& o, const PlanarSystem& sys) {
    if (!o.preset.empty() && !o.shoot) return closed_form_orbit(o.preset, o.branch);
    Vec2 gf, gt;
    if (!o.preset.empty()) {
        Orbit cf = closed_form_orbit(o.preset, o.branch);
        gf = cf.source().x;
        gt = cf.target().x;
    } else {
        if (o.saddle_from.size() != 2 || o.saddle_to.size() != 2)
            throw Error(ErrorCode::InvalidConfig,
                        "custom systems need --saddle-from and --saddle-to guesses");
        gf = {o.saddle_from[0], o.saddle_from[1]};
        gt = {o.saddle_to[0], o.saddle_to[1]};
    }
    Saddle from = refine_saddle(sys, gf);
    Saddle to = refine_saddle(sys, gt);
    ShootOptions so;
    so.branch = o.branch;
    return shoot_separatrix(sys, from, to, so);
}

void write_file(const std::string& dir, const std::string& name, const std::string& content) {
    std::filesystem::create_directories(dir);
    std::ofstream f(std::filesystem::path(dir) / name, std::ios::binary);
    if (!f) throw Error(ErrorCode::InvalidConfig, "cannot write to " + dir);
    f << content;
}

ordered_json system_block(const CommonOpts& o, const PlanarSystem& sys) {
    ordered_json j;
    if (!o.preset.empty()) {
        j["preset"] = o.preset;
        j["beta"] = o.beta;
        j["delta"] = o.delta;
    } else {
        j["input"] = o.input;
    }
    j["omega"] = sys.omega;
    return j;
}

ordered_json series_block(const MelnikovSeries& s) {
    ordered_json arr = ordered_json::array();
    for (int j = -s.N; j <= s.N; ++j) {
        ordered_json c;
        c["j"] = j;
        c["re"] = s.coeff(j).real();
        c["im"] = s.coeff(j).imag();
        c["abs"] = std::abs(s.coeff(j));
        c["err"] = s.coeff_err(j);
        arr.push_back(c);
    }
    return arr;
}

ordered_json zeros_block(const MelnikovSeries& s, double tol_cert, double tol_simple) {
    ordered_json arr = ordered_json::array();
    double osc = 0.0;
    for (int j = 1; j <= s.N; ++j) osc = std::max(osc, std::abs(s.coeff(j)));
    if (osc <= tol_cert) return arr;
    for (const auto& z : simple_zeros(s, tol_simple)) {
        ordered_json e;
        e["theta"] = z.theta;
        e["dM"] = z.dM;
        e["simple"] = z.simple;
        arr.push_back(e);
    }
    return arr;
}

std::string series_csv(const MelnikovSeries& s) {
    std::ostringstream os;
    os << "j,re,im,abs,err\n";
    for (int j = -s.N; j <= s.N; ++j)
        os << j << ',' << format_double(s.coeff(j).real()) << ','
           << format_double(s.coeff(j).imag()) << ',' << format_double(std::abs(s.coeff(j)))
           << ',' << format_double(s.coeff_err(j)) << '\n';
    return os.str();
}

// ---------------- certify ----------------

int cmd_certify(const CommonOpts& o, bool with_monodromy) {
    PlanarSystem sys = build_system(o);
    Orbit orbit = build_orbit(o, sys);
    MelnikovOptions mo;
    mo.tol = o.tol_coeff;
    mo.threads = o.effective_threads();
    MelnikovSeries series = melnikov_series(orbit, sys, mo);
    Certificate cert = certify_nonintegrability(series, o.tol_cert);

    ordered_json rep;
    rep["system"] = system_block(o, sys);
    rep["orbit"] = orbit.id();
    rep["verdict"] = verdict_name(cert.verdict);
    rep["witness_ell"] = cert.witness;
    rep["witness_abs"] = cert.witness_abs;
    rep["margin"] = cert.margin;
    rep["tol_cert"] = cert.tol_cert;
    rep["coefficients"] = series_block(series);
    rep["simple_zeros"] = zeros_block(series, o.tol_cert, o.tol_simple);
    try {
        rep["zero_existence_ratio"] = zero_existence_ratio(series, o.tol_cert);
    } catch (const Error&) {
        rep["zero_existence_ratio"] = nullptr;  // multi-harmonic form
    }

    if (with_monodromy) {
        AsymptoticData ad = make_asymptotic_data(sys, orbit, cert.witness);
        MonodromyPair mp = monodromy_pair(ad);
        Verdict mv = commutator_certificate(mp);
        ordered_json m;
        m["ell"] = ad.ell;
        m["commutator_norm"] = mp.commutator_norm;
        m["verdict"] = verdict_name(mv);
        m["agrees_with_melnikov"] = (mv == cert.verdict);
        rep["monodromy"] = m;
    }

    std::string text = rep.dump(2) + "\n";
    if (o.format == "csv") text = series_csv(series) + "verdict," + verdict_name(cert.verdict) + "\n";
    std::cout << text;
    if (!o.out.empty()) write_file(o.out, "certify." + o.format, text);
    return 0;
}

// ---------------- melnikov ----------------

int cmd_melnikov(const CommonOpts& o, int theta_points) {
    PlanarSystem sys = build_system(o);
    Orbit orbit = build_orbit(o, sys);
    MelnikovOptions mo;
    mo.tol = o.tol_coeff;
    mo.threads = o.effective_threads();
    MelnikovSeries series = melnikov_series(orbit, sys, mo);

    std::ostringstream csv;
    csv << "kind,theta,M,Mprime\n";
    for (int i = 0; i < theta_points; ++i) {
        double th = 2.0 * M_PI * i / theta_points;
        csv << "grid," << format_double(th) << ',' << format_double(eval_melnikov(series, th))
            << ",\n";
    }
    double osc = 0.0;
    for (int j = 1; j <= series.N; ++j) osc = std::max(osc, std::abs(series.coeff(j)));
    if (osc > o.tol_cert) {
        for (const auto& z : simple_zeros(series, o.tol_simple))
            csv << (z.simple ? "zero," : "zero-nonsimple,") << format_double(z.theta) << ",0,"
                << format_double(z.dM) << '\n';
    }

    std::string dir = o.out.empty() ? "." : o.out;
    write_file(dir, "melnikov_series.json", series_to_json(series));
    write_file(dir, "melnikov_theta.csv", csv.str());
    std::cout << "wrote melnikov_series.json and melnikov_theta.csv to " << dir << "\n";
    return 0;
}

// ---------------- monodromy ----------------

int cmd_monodromy(const CommonOpts& o, int ell, bool with_continuation) {
    PlanarSystem sys = build_system(o);
    Orbit orbit = build_orbit(o, sys);
    MelnikovOptions mo;
    mo.tol = o.tol_coeff;
    mo.threads = o.effective_threads();
    int use_ell = ell;
    if (use_ell == 0) {
        MelnikovSeries series = melnikov_series(orbit, sys, mo);
        use_ell = certify_nonintegrability(series, o.tol_cert).witness;
    }
    AsymptoticData ad = make_asymptotic_data(sys, orbit, use_ell);
    MonodromyPair mp = monodromy_pair(ad);
    Verdict v = commutator_certificate(mp);
    std::string rep = monodromy_report_json(ad, mp, v);
    if (with_continuation && orbit.has_complex_eval()) {
        ordered_json j = ordered_json::parse(rep);
        CMat3 cont = monodromy_via_continuation(sys, orbit, use_ell, -1);
        CMat3 res = monodromy_side_resonant(ad, chi_linear_coefficient(orbit, -1), -1);
        CMat3 printed = monodromy_side_closed_form(ad, -1);
        j["continuation_minus"] = {{"vs_resonant_closed_form", (cont - res).frobenius()},
                                   {"vs_plain_closed_form", (cont - printed).frobenius()},
                                   {"corner_re", cont(2, 2).real()}};
        rep = j.dump(2) + "\n";
    }
    std::cout << rep;
    if (!o.out.empty()) write_file(o.out, "monodromy.json", rep);
    return 0;
}

// ---------------- splitting ----------------

int cmd_splitting(const CommonOpts& o, std::vector<double> eps_grid, int theta_points) {
    if (eps_grid.empty()) throw Error(ErrorCode::InvalidConfig, "empty eps grid");
    PlanarSystem sys = build_system(o);
    Orbit orbit = build_orbit(o, sys);
    MelnikovOptions mo;
    mo.tol = o.tol_coeff;
    mo.threads = o.effective_threads();
    MelnikovSeries series = melnikov_series(orbit, sys, mo);

    std::vector<double> grid;
    for (int i = 0; i < theta_points; ++i) grid.push_back(2.0 * M_PI * i / theta_points);

    std::string dir = o.out.empty() ? "." : o.out;
    ordered_json summary;
    summary["system"] = system_block(o, sys);
    summary["eps"] = ordered_json::array();
    std::vector<double> errs;
    for (std::size_t k = 0; k < eps_grid.size(); ++k) {
        SplittingOptions so;
        so.threads = o.effective_threads();
        auto prof = splitting_profile(sys, orbit, eps_grid[k], grid, so);
        std::ostringstream csv;
        csv << "theta,d,d_scaled,M_theta,abs_err\n";
        double max_err = 0.0, max_m = 0.0;
        for (const auto& s : prof) {
            double m = eval_melnikov(series, s.theta);
            double err = std::abs(s.d_scaled - m);
            max_err = std::max(max_err, err);
            max_m = std::max(max_m, std::abs(m));
            csv << format_double(s.theta) << ',' << format_double(s.d) << ','
                << format_double(s.d_scaled) << ',' << format_double(m) << ','
                << format_double(err) << '\n';
        }
        write_file(dir, "splitting_" + std::to_string(k) + ".csv", csv.str());
        ordered_json e;
        e["eps"] = eps_grid[k];
        e["max_abs_err"] = max_err;
        e["max_M"] = max_m;
        e["file"] = "splitting_" + std::to_string(k) + ".csv";
        summary["eps"].push_back(e);
        errs.push_back(max_err);
    }

    // fitted order of the error in eps over the nonzero entries
    {
        std::vector<std::pair<double, double>> pts;
        for (std::size_t k = 0; k < eps_grid.size(); ++k)
            if (eps_grid[k] > 0 && errs[k] > 0) pts.push_back({std::log(eps_grid[k]), std::log(errs[k])});
        if (pts.size() >= 2) {
            double sx = 0, sy = 0, sxx = 0, sxy = 0;
            for (auto [x, y] : pts) {
                sx += x; sy += y; sxx += x * x; sxy += x * y;
            }
            double n = (double)pts.size();
            summary["fitted_order"] = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        }
    }

    std::string text = summary.dump(2) + "\n";
    std::cout << text;
    write_file(dir, "splitting_summary.json", text);
    return 0;
}

// ---------------- sweep ----------------

int cmd_sweep(const CommonOpts& o, std::vector<double> betas, std::vector<double> deltas,
              std::vector<double> omegas) {
    if (o.preset.empty())
        throw Error(ErrorCode::InvalidConfig, "sweep operates on presets (--preset)");
    if (betas.empty() || deltas.empty() || omegas.empty())
        throw Error(ErrorCode::InvalidConfig, "sweep grids must be nonempty");

    struct Row {
        double beta, delta, omega;
        std::string verdict;
        int witness;
        double max_abs;
        double ratio;
        bool zeros_exist;
        double derived_threshold;
        double paper_printed_threshold;
    };
    const std::size_t n = betas.size() * deltas.size() * omegas.size();
    std::vector<Row> rows(n);

    auto run_one = [&](std::size_t idx) {
        std::size_t io = idx % omegas.size();
        std::size_t id = (idx / omegas.size()) % deltas.size();
        std::size_t ib = idx / (omegas.size() * deltas.size());
        Row r;
        r.beta = betas[ib];
        r.delta = deltas[id];
        r.omega = omegas[io];
        PlanarSystem sys = make_preset(o.preset, {r.beta, r.delta, r.omega});
        Orbit orbit = closed_form_orbit(o.preset, o.branch);
        MelnikovSeries s = melnikov_series(orbit, sys, {o.tol_coeff, 1});
        Certificate c = certify_nonintegrability(s, o.tol_cert);
        r.verdict = verdict_name(c.verdict);
        r.witness = c.witness;
        r.max_abs = c.witness_abs;
        r.ratio = zero_existence_ratio(s, o.tol_cert);
        r.zeros_exist = r.ratio < 1.0;
        if (o.preset == "duffing1") {
            r.derived_threshold =
                (2.0 * std::sqrt(2.0) / (3.0 * M_PI * r.omega)) * std::cosh(M_PI * r.omega / 2.0);
            r.paper_printed_threshold = (4.0 / M_PI) * std::cosh(M_PI * r.omega / 2.0);
        } else {
            r.derived_threshold =
                (2.0 / (3.0 * M_PI * r.omega)) * std::sinh(M_PI * r.omega / std::sqrt(2.0));
            r.paper_printed_threshold = r.derived_threshold;
        }
        rows[idx] = r;
    };

    int nthreads = std::min<std::size_t>(o.effective_threads(), n);
    if (nthreads <= 1) {
        for (std::size_t i = 0; i < n; ++i) run_one(i);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errs(nthreads);
        for (int w = 0; w < nthreads; ++w)
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t i = w; i < n; i += nthreads) run_one(i);
                } catch (...) {
                    errs[w] = std::current_exception();
                }
            });
        for (auto& t : pool) t.join();
        for (auto& e : errs)
            if (e) std::rethrow_exception(e);
    }

    std::ostringstream csv;
    csv << "beta,delta,omega,verdict,witness,max_abs_coeff,zero_existence_ratio,zeros_exist,"
           "derived_threshold_beta_over_delta,paper_printed_threshold\n";
    for (const auto& r : rows) {
        csv << format_double(r.beta) << ',' << format_double(r.delta) << ','
            << format_double(r.omega) << ',' << r.verdict << ',' << r.witness << ','
            << format_double(r.max_abs) << ','
            << (std::isinf(r.ratio) ? "inf" : format_double(r.ratio)) << ','
            << (r.zeros_exist ? "true" : "false") << ',' << format_double(r.derived_threshold)
            << ',' << format_double(r.paper_printed_threshold) << '\n';
    }
    std::string dir = o.out.empty() ? "." : o.out;
    write_file(dir, "sweep.csv", csv.str());

    ordered_json summary;
    summary["rows"] = n;
    summary["crossings"] = ordered_json::array();
    for (std::size_t i = 0; i + 1 < n; ++i) {
        bool a = rows[i].ratio < 1.0, b = rows[i + 1].ratio < 1.0;
        if (a != b)
            summary["crossings"].push_back(
                {{"row_a", i}, {"row_b", i + 1}, {"ratio_a", rows[i].ratio},
                 {"ratio_b", rows[i + 1].ratio}});
    }
    std::string text = summary.dump(2) + "\n";
    std::cout << text;
    write_file(dir, "sweep_summary.json", text);
    return 0;
}

// ---------------- orbit-dump ----------------

int cmd_orbit_dump(const CommonOpts& o, double t_min, double t_max, int samples) {
    if (samples < 2 || t_max <= t_min)
        throw Error(ErrorCode::InvalidConfig, "need samples >= 2 and t_max > t_min");
    PlanarSystem sys = build_system(o);
    Orbit orbit = build_orbit(o, sys);
    std::string dir = o.out.empty() ? "." : o.out;
    write_file(dir, "orbit.csv", orbit.to_csv(t_min, t_max, samples));
    std::cout << "wrote orbit.csv (" << orbit.id() << ") to " << dir << "\n";
    return 0;
}

int report_error(const Error& e) {
    ordered_json j;
    j["error"]["code"] = error_code_name(e.code());
    j["error"]["message"] = e.what();
    std::cerr << j.dump() << "\n";
    return is_config_error(e.code()) ? 2 : 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"separatrix Melnikov toolkit"};
    app.require_subcommand(1);

    CommonOpts o;
    bool with_monodromy = false, with_continuation = false;
    int theta_points_mel = 512, theta_points_split = 32;
    int ell = 0;
    std::vector<double> eps_grid{1e-3};
    std::vector<double> beta_grid, delta_grid, omega_grid;
    double t_min = -15.0, t_max = 15.0;
    int samples = 1501;

    CLI::App* certify = app.add_subcommand("certify", "nonintegrability certificate");
    add_common(certify, o);
    certify->add_flag("--monodromy", with_monodromy, "also run the monodromy pipeline");

    CLI::App* melnikov = app.add_subcommand("melnikov", "Melnikov series and M(theta) grid");
    add_common(melnikov, o);
    melnikov->add_option("--theta-points", theta_points_mel, "grid resolution");

    CLI::App* monodromy = app.add_subcommand("monodromy", "monodromy pair report");
    add_common(monodromy, o);
    monodromy->add_option("--ell", ell, "harmonic index (default: certificate witness)");
    monodromy->add_flag("--continuation", with_continuation,
                        "cross-check the minus side by complex-time continuation");

    CLI::App* splitting = app.add_subcommand("splitting", "measured separatrix splitting");
    add_common(splitting, o);
    splitting->add_option("--eps", eps_grid, "perturbation amplitudes");
    splitting->add_option("--theta-points", theta_points_split, "phase grid size");

    CLI::App* sweep = app.add_subcommand("sweep", "parameter sweep of the certificate");
    add_common(sweep, o);
    sweep->add_option("--beta-grid", beta_grid, "beta values");
    sweep->add_option("--delta-grid", delta_grid, "delta values");
    sweep->add_option("--omega-grid", omega_grid, "omega values");

    CLI::App* dump = app.add_subcommand("orbit-dump", "export the separatrix as CSV");
    add_common(dump, o);
    dump->add_option("--t-min", t_min, "start time");
    dump->add_option("--t-max", t_max, "end time");
    dump->add_option("--samples", samples, "row count");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (certify->parsed()) return cmd_certify(o, with_monodromy);
        if (melnikov->parsed()) return cmd_melnikov(o, theta_points_mel);
        if (monodromy->parsed()) return cmd_monodromy(o, ell, with_continuation);
        if (splitting->parsed()) return cmd_splitting(o, eps_grid, theta_points_split);
        if (sweep->parsed()) {
            if (beta_grid.empty()) beta_grid = {o.beta};
            if (delta_grid.empty()) delta_grid = {o.delta};
            if (omega_grid.empty()) omega_grid = {o.omega};
            return cmd_sweep(o, beta_grid, delta_grid, omega_grid);
        }
        if (dump->parsed()) return cmd_orbit_dump(o, t_min, t_max, samples);
    } catch (const Error& e) {
        return report_error(e);
    } catch (const std::exception& e) {
        ordered_json j;
        j["error"]["code"] = "Internal";
        j["error"]["message"] = e.what();
        std::cerr << j.dump() << "\n";
        return 3;
    }
    return 2;
}
