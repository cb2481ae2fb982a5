#include "sepmel/system.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "sepmel/log.hpp"

namespace sepmel {

const char* error_code_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::SchemaViolation: return "SchemaViolation";
        case ErrorCode::UnknownPreset: return "UnknownPreset";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::RealityViolation: return "RealityViolation";
        case ErrorCode::NoConvergence: return "NoConvergence";
        case ErrorCode::NotASaddle: return "NotASaddle";
        case ErrorCode::EnergyMismatch: return "EnergyMismatch";
        case ErrorCode::NoConnection: return "NoConnection";
        case ErrorCode::LostHyperbolicity: return "LostHyperbolicity";
        case ErrorCode::ToleranceNotMet: return "ToleranceNotMet";
        case ErrorCode::MultiHarmonic: return "MultiHarmonic";
        case ErrorCode::DegenerateHessian: return "DegenerateHessian";
        case ErrorCode::PoleCrossing: return "PoleCrossing";
        case ErrorCode::IllConditioned: return "IllConditioned";
        case ErrorCode::PoleOnPath: return "PoleOnPath";
        case ErrorCode::StepFailure: return "StepFailure";
        case ErrorCode::Escape: return "Escape";
        case ErrorCode::FoldTooSharp: return "FoldTooSharp";
    }
    return "Unknown";
}

bool is_config_error(ErrorCode c) {
    switch (c) {
        case ErrorCode::SchemaViolation:
        case ErrorCode::UnknownPreset:
        case ErrorCode::InvalidConfig:
        case ErrorCode::RealityViolation:
            return true;
        default:
            return false;
    }
}

LogLevel log_level() {
    static LogLevel lvl = [] {
        const char* e = std::getenv("SM_LOG");
        if (!e) return LogLevel::warn;
        std::string s(e);
        if (s == "off") return LogLevel::off;
        if (s == "error") return LogLevel::error;
        if (s == "info") return LogLevel::info;
        if (s == "debug") return LogLevel::debug;
        return LogLevel::warn;
    }();
    return lvl;
}

FourierField FourierField::from_real_form(RPolyVec2 a0, std::vector<RPolyVec2> a, std::vector<RPolyVec2> b) {
    if (a.size() != b.size())
        throw Error(ErrorCode::SchemaViolation, "cos/sin harmonic lists differ in length");
    FourierField f;
    f.N_ = static_cast<int>(a.size());
    f.a0_ = std::move(a0);
    f.a_ = std::move(a);
    f.b_ = std::move(b);
    f.hat0_ = {to_complex(f.a0_.c1), to_complex(f.a0_.c2)};
    const cd half(0.5, 0.0), mhalf_i(0.0, -0.5);
    for (int j = 1; j <= f.N_; ++j) {
        // g_hat_j = (a_j - i b_j)/2
        CPolyVec2 h;
        h.c1 = to_complex(f.a_[j - 1].c1) * half + to_complex(f.b_[j - 1].c1) * mhalf_i;
        h.c2 = to_complex(f.a_[j - 1].c2) * half + to_complex(f.b_[j - 1].c2) * mhalf_i;
        f.hat_pos_.push_back(std::move(h));
    }
    return f;
}

FourierField FourierField::from_complex(const std::vector<CPolyVec2>& coeffs, double tol) {
    if (coeffs.size() % 2 == 0)
        throw Error(ErrorCode::SchemaViolation, "coefficient list must cover j = -N..N");
    int N = static_cast<int>(coeffs.size() / 2);
    for (int j = 1; j <= N; ++j) {
        const CPolyVec2& plus = coeffs[N + j];
        const CPolyVec2& minus = coeffs[N - j];
        double d = std::max(coeff_distance(conj_coeffs(plus.c1), minus.c1),
                            coeff_distance(conj_coeffs(plus.c2), minus.c2));
        if (d > tol)
            throw Error(ErrorCode::RealityViolation,
                        "g_hat_{-" + std::to_string(j) + "} != conj(g_hat_" + std::to_string(j) + ")");
    }
    double d0 = std::max(coeff_distance(conj_coeffs(coeffs[N].c1), coeffs[N].c1),
                         coeff_distance(conj_coeffs(coeffs[N].c2), coeffs[N].c2));
    if (d0 > tol) throw Error(ErrorCode::RealityViolation, "g_hat_0 is not real");

    // rebuild through the real form so both representations stay consistent
    RPolyVec2 a0;
    for (const auto& [e, c] : coeffs[N].c1.terms()) a0.c1.add_term(e.first, e.second, c.real());
    for (const auto& [e, c] : coeffs[N].c2.terms()) a0.c2.add_term(e.first, e.second, c.real());
    std::vector<RPolyVec2> a(N), b(N);
    for (int j = 1; j <= N; ++j) {
        CPoly2 aj1 = coeffs[N + j].c1 + coeffs[N - j].c1;
        CPoly2 aj2 = coeffs[N + j].c2 + coeffs[N - j].c2;
        CPoly2 bj1 = (coeffs[N + j].c1 + coeffs[N - j].c1 * cd(-1.0)) * cd(0.0, 1.0);
        CPoly2 bj2 = (coeffs[N + j].c2 + coeffs[N - j].c2 * cd(-1.0)) * cd(0.0, 1.0);
        for (const auto& [e, c] : aj1.terms()) a[j - 1].c1.add_term(e.first, e.second, c.real());
        for (const auto& [e, c] : aj2.terms()) a[j - 1].c2.add_term(e.first, e.second, c.real());
        for (const auto& [e, c] : bj1.terms()) b[j - 1].c1.add_term(e.first, e.second, c.real());
        for (const auto& [e, c] : bj2.terms()) b[j - 1].c2.add_term(e.first, e.second, c.real());
    }
    return from_real_form(std::move(a0), std::move(a), std::move(b));
}

CPolyVec2 FourierField::coeff_hat(int j) const {
    if (std::abs(j) > N_) throw Error(ErrorCode::InvalidConfig, "harmonic index beyond cutoff");
    if (j == 0) return hat0_;
    const CPolyVec2& h = hat_pos_[std::abs(j) - 1];
    if (j > 0) return h;
    return {conj_coeffs(h.c1), conj_coeffs(h.c2)};
}

CVec2 FourierField::coeff_hat_at(int j, Vec2 x) const {
    CPolyVec2 h = coeff_hat(j);
    auto [u, v] = h.eval(cd(x.x, 0.0), cd(x.y, 0.0));
    return {u, v};
}

Vec2 FourierField::eval(Vec2 x, double theta) const {
    Vec2 r{a0_.c1.eval(x.x, x.y), a0_.c2.eval(x.x, x.y)};
    for (int j = 1; j <= N_; ++j) {
        double cj = std::cos(j * theta), sj = std::sin(j * theta);
        r.x += a_[j - 1].c1.eval(x.x, x.y) * cj + b_[j - 1].c1.eval(x.x, x.y) * sj;
        r.y += a_[j - 1].c2.eval(x.x, x.y) * cj + b_[j - 1].c2.eval(x.x, x.y) * sj;
    }
    return r;
}

bool FourierField::zero() const {
    if (!a0_.empty()) return false;
    for (int j = 1; j <= N_; ++j)
        if (!a_[j - 1].empty() || !b_[j - 1].empty()) return false;
    return true;
}

PlanarSystem::PlanarSystem(RPoly2 hamiltonian, FourierField pert, double omega_, std::string name_)
    : H(std::move(hamiltonian)), g(std::move(pert)), omega(omega_), name(std::move(name_)) {
    if (omega <= 0.0) throw Error(ErrorCode::SchemaViolation, "omega must be positive");
    H1 = H.d_x1();
    H2 = H.d_x2();
    H11 = H1.d_x1();
    H12 = H1.d_x2();
    H22 = H2.d_x2();
    H111 = H11.d_x1();
    H112 = H11.d_x2();
    H122 = H12.d_x2();
    H222 = H22.d_x2();
}

Vec2 hamiltonian_field(const PlanarSystem& sys, Vec2 x) {
    Vec2 dh = sys.grad_H(x);
    return {dh.y, -dh.x};
}

Vec2 perturbed_field(const PlanarSystem& sys, Vec2 x, double eps, double psi) {
    Vec2 f = hamiltonian_field(sys, x);
    if (eps != 0.0) {
        Vec2 p = sys.g.eval(x, psi);
        f = f + p * eps;
    }
    return f;
}

Saddle refine_saddle(const PlanarSystem& sys, Vec2 guess, double tol_eq) {
    Vec2 x = guess;
    const int max_iter = 50;
    bool ok = false;
    for (int it = 0; it < max_iter; ++it) {
        Vec2 f = hamiltonian_field(sys, x);
        if (f.norm() <= tol_eq) {
            ok = true;
            break;
        }
        Mat2 jac = sys.jac_field(x);
        if (std::abs(jac.det()) < 1e-300)
            throw Error(ErrorCode::NoConvergence, "singular Jacobian in Newton iteration");
        Vec2 step = solve2(jac, f);
        x = x - step;
        if (!std::isfinite(x.x) || !std::isfinite(x.y))
            throw Error(ErrorCode::NoConvergence, "Newton iterate diverged");
    }
    if (!ok && hamiltonian_field(sys, x).norm() > tol_eq)
        throw Error(ErrorCode::NoConvergence, "Newton did not reach tol_eq in 50 iterations");

    Mat2 hess = sys.hessian_H(x);
    double disc = -hess.det();  // = lambda^2 for the trace-free J D^2H
    if (disc <= 0.0)
        throw Error(ErrorCode::NotASaddle, "det D^2H >= 0 at equilibrium; eigenvalues not a real +/- pair");
    double lambda = std::sqrt(disc);

    // J D^2H = [[p, q], [r, -p]] with p = H12, q = H22, r = -H11
    double p = hess.a12, q = hess.a22, r = -hess.a11;
    auto eigvec = [&](double mu) {
        Vec2 v = (std::abs(q) >= std::abs(r)) ? Vec2{q, mu - p} : Vec2{mu + p, r};
        double n = v.norm();
        v = v * (1.0 / n);
        // deterministic sign: first component of noticeable size positive
        if (v.x < -1e-14 || (std::abs(v.x) <= 1e-14 && v.y < 0.0)) v = -v;
        return v;
    };

    Saddle s;
    s.x = x;
    s.lambda = lambda;
    s.v_u = eigvec(lambda);
    s.v_s = eigvec(-lambda);
    s.hessian = hess;
    return s;
}

PlanarSystem make_preset(const std::string& name, const PresetParams& p) {
    if (p.omega <= 0.0) throw Error(ErrorCode::SchemaViolation, "omega must be positive");
    RPoly2 H;
    if (name == "duffing1") {
        // dx1 = x2, dx2 = x1 - x1^3 + eps (beta cos wt - delta x2)
        H.add_term(0, 2, 0.5);
        H.add_term(2, 0, -0.5);
        H.add_term(4, 0, 0.25);
    } else if (name == "duffing2") {
        // dx1 = x2, dx2 = -x1 + x1^3 + eps (beta cos wt - delta x2)
        H.add_term(0, 2, 0.5);
        H.add_term(2, 0, 0.5);
        H.add_term(4, 0, -0.25);
    } else {
        throw Error(ErrorCode::UnknownPreset, name);
    }
    RPolyVec2 a0;
    a0.c2.add_term(0, 1, -p.delta);
    RPolyVec2 a1, b1;
    a1.c2.add_term(0, 0, p.beta);
    FourierField g = FourierField::from_real_form(a0, {a1}, {b1});
    return PlanarSystem(std::move(H), std::move(g), p.omega, name);
}

namespace {

using nlohmann::json;

RPoly2 parse_monomials(const json& arr, const char* what) {
    if (!arr.is_array()) throw Error(ErrorCode::SchemaViolation, std::string(what) + " must be an array");
    RPoly2 p;
    for (const auto& t : arr) {
        if (!t.is_array() || t.size() != 3 || !t[0].is_number_integer() || !t[1].is_number_integer() ||
            !t[2].is_number())
            throw Error(ErrorCode::SchemaViolation, std::string(what) + " entries must be [i, j, c]");
        int i = t[0].get<int>(), j = t[1].get<int>();
        if (i < 0 || j < 0) throw Error(ErrorCode::SchemaViolation, "negative exponent in " + std::string(what));
        p.add_term(i, j, t[2].get<double>());
    }
    return p;
}

}  // namespace

PlanarSystem parse_system(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const std::exception& e) {
        throw Error(ErrorCode::SchemaViolation, std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw Error(ErrorCode::SchemaViolation, "document must be a JSON object");

    if (doc.contains("preset")) {
        if (!doc["preset"].is_string()) throw Error(ErrorCode::SchemaViolation, "preset must be a string");
        PresetParams p;
        if (doc.contains("params")) {
            const auto& q = doc["params"];
            if (!q.is_object()) throw Error(ErrorCode::SchemaViolation, "params must be an object");
            if (q.contains("beta")) p.beta = q["beta"].get<double>();
            if (q.contains("delta")) p.delta = q["delta"].get<double>();
            if (q.contains("omega")) p.omega = q["omega"].get<double>();
        }
        if (doc.contains("omega")) p.omega = doc["omega"].get<double>();
        return make_preset(doc["preset"].get<std::string>(), p);
    }

    if (!doc.contains("hamiltonian")) throw Error(ErrorCode::SchemaViolation, "missing 'hamiltonian'");
    if (!doc.contains("omega") || !doc["omega"].is_number())
        throw Error(ErrorCode::SchemaViolation, "missing numeric 'omega'");
    double omega = doc["omega"].get<double>();
    if (omega <= 0.0) throw Error(ErrorCode::SchemaViolation, "omega must be positive");

    RPoly2 H = parse_monomials(doc["hamiltonian"], "hamiltonian");

    int N = 0;
    struct Entry {
        int component, harmonic;
        bool is_cos;
        RPoly2 poly;
    };
    std::vector<Entry> entries;
    if (doc.contains("perturbation")) {
        if (!doc["perturbation"].is_array())
            throw Error(ErrorCode::SchemaViolation, "perturbation must be an array");
        for (const auto& e : doc["perturbation"]) {
            Entry en;
            if (!e.is_object() || !e.contains("component") || !e.contains("harmonic") || !e.contains("poly"))
                throw Error(ErrorCode::SchemaViolation, "perturbation entries need component/harmonic/poly");
            en.component = e["component"].get<int>();
            en.harmonic = e["harmonic"].get<int>();
            std::string phase = e.value("phase", std::string("cos"));
            if (phase != "cos" && phase != "sin")
                throw Error(ErrorCode::SchemaViolation, "phase must be \"cos\" or \"sin\"");
            en.is_cos = (phase == "cos");
            if (en.component != 1 && en.component != 2)
                throw Error(ErrorCode::SchemaViolation, "component must be 1 or 2");
            if (en.harmonic < 0) throw Error(ErrorCode::SchemaViolation, "harmonic must be >= 0");
            en.poly = parse_monomials(e["poly"], "perturbation poly");
            N = std::max(N, en.harmonic);
            entries.push_back(std::move(en));
        }
    }

    RPolyVec2 a0;
    std::vector<RPolyVec2> a(N), b(N);
    for (auto& en : entries) {
        RPolyVec2* target = nullptr;
        if (en.harmonic == 0)
            target = &a0;
        else
            target = en.is_cos ? &a[en.harmonic - 1] : &b[en.harmonic - 1];
        RPoly2& slot = (en.component == 1) ? target->c1 : target->c2;
        slot = slot + en.poly;
    }

    return PlanarSystem(std::move(H), FourierField::from_real_form(a0, std::move(a), std::move(b)), omega);
}

PlanarSystem parse_system_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::InvalidConfig, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_system(ss.str());
}

}  // namespace sepmel
