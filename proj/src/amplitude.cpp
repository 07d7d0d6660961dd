#include "opdickman/amplitude.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include "opdickman/quadrature.hpp"
#include "opdickman/special.hpp"

namespace opdickman {

namespace {

double wrap_angle(double a) {
    a = std::fmod(a, kTwoPi);
    return a < 0.0 ? a + kTwoPi : a;
}

// Best-Fisher wrapped-Cauchy rejection sampler for the von Mises law.
double sample_von_mises_angle(Rng& rng, double mu, double kappa) {
    if (kappa < 1e-8) {
        // envelope parameter rho underflows; the law is uniform to ~1e-8 TV
        return wrap_angle(mu + kTwoPi * rng.uniform01());
    }
    double s;
    if (kappa < 1e-5) {
        s = 1.0 / kappa + kappa;
    } else {
        const double r = 1.0 + std::sqrt(1.0 + 4.0 * kappa * kappa);
        const double rho = (r - std::sqrt(2.0 * r)) / (2.0 * kappa);
        s = (1.0 + rho * rho) / (2.0 * rho);
    }
    for (;;) {
        const double z = std::cos(kPi * rng.uniform01());
        const double f = (1.0 + s * z) / (s + z);
        const double c = kappa * (s - f);
        const double u2 = rng.uniform01();
        if (c * (2.0 - c) - u2 > 0.0 || std::log(c / u2) + 1.0 - c >= 0.0) {
            const double side = rng.uniform01() < 0.5 ? -1.0 : 1.0;
            return wrap_angle(mu + side * std::acos(f));
        }
    }
}

bool is_zero(const Vec& z) {
    for (double v : z)
        if (v != 0.0) return false;
    return true;
}

// surface measure fraction of a cap with half-angle phi on S^{d-1}, d >= 2
double sphere_cap_fraction(int d, double phi) {
    if (phi <= 0.0) return 0.0;
    if (phi >= kPi) return 1.0;
    if (d == 2) return phi / kPi;
    auto f = [d](double t) { return std::pow(std::sin(t), d - 2); };
    const double head = integrate_adaptive<double>(f, 0.0, phi, 1e-12).value;
    const double total = integrate_adaptive<double>(f, 0.0, kPi, 1e-12).value;
    return head / total;
}

}  // namespace

double von_mises_density(double kappa, double mu, double x) {
    if (!(kappa > 0.0)) throw std::invalid_argument("von Mises concentration must be positive");
    return std::exp(kappa * std::cos(x - mu)) / (kTwoPi * modified_bessel_I(0, kappa));
}

AmplitudeMeasure AmplitudeMeasure::delta(Vec w) {
    if (w.empty()) throw std::invalid_argument("delta measure needs a non-empty vector");
    if (norm2(w) == 0.0) throw std::invalid_argument("amplitude measure may not charge the origin");
    AmplitudeMeasure m;
    m.kind_ = MeasureKind::delta;
    m.dim_ = static_cast<int>(w.size());
    m.atoms_.push_back({std::move(w), 1.0});
    return m;
}

AmplitudeMeasure AmplitudeMeasure::atoms(std::vector<Atom> atom_list) {
    if (atom_list.empty()) throw std::invalid_argument("atom list may not be empty");
    const std::size_t d = atom_list.front().w.size();
    double total = 0.0;
    for (const auto& a : atom_list) {
        if (a.w.size() != d) throw std::invalid_argument("atoms have mismatched dimensions");
        if (!(a.p > 0.0)) throw std::invalid_argument("atom weights must be positive");
        if (norm2(a.w) == 0.0) throw std::invalid_argument("amplitude measure may not charge the origin");
        total += a.p;
    }
    if (std::fabs(total - 1.0) > 1e-12) throw std::invalid_argument("atom weights must sum to 1");
    for (auto& a : atom_list) a.p /= total;
    AmplitudeMeasure m;
    m.kind_ = MeasureKind::atoms;
    m.dim_ = static_cast<int>(d);
    m.atoms_ = std::move(atom_list);
    return m;
}

AmplitudeMeasure AmplitudeMeasure::uniform_sphere(int dim) {
    if (dim < 1) throw std::invalid_argument("sphere dimension must be >= 1");
    AmplitudeMeasure m;
    m.kind_ = MeasureKind::uniform_sphere;
    m.dim_ = dim;
    return m;
}

AmplitudeMeasure AmplitudeMeasure::von_mises(double mu, double kappa) {
    if (!(kappa > 0.0)) throw std::invalid_argument("von Mises concentration must be positive");
    AmplitudeMeasure m;
    m.kind_ = MeasureKind::von_mises;
    m.dim_ = 2;
    m.mu_ = wrap_angle(mu);
    m.kappa_ = kappa;
    return m;
}

AmplitudeMeasure AmplitudeMeasure::exp_radial(double rate) {
    if (!(rate > 0.0)) throw std::invalid_argument("exponential rate must be positive");
    AmplitudeMeasure m;
    m.kind_ = MeasureKind::exp_radial;
    m.dim_ = 1;
    m.rate_ = rate;
    return m;
}

AmplitudeMeasure AmplitudeMeasure::mixture(std::vector<double> weights,
                                           std::vector<AmplitudeMeasure> parts) {
    if (weights.size() != parts.size() || parts.empty())
        throw std::invalid_argument("mixture needs matching weights and parts");
    double total = 0.0;
    for (double w : weights) {
        if (!(w > 0.0)) throw std::invalid_argument("mixture weights must be positive");
        total += w;
    }
    for (double& w : weights) w /= total;
    const int d = parts.front().dim();
    for (const auto& p : parts)
        if (p.dim() != d) throw std::invalid_argument("mixture parts have mismatched dimensions");
    // collapse to a plain atom list when every part is discrete
    bool all_atomic = true;
    for (const auto& p : parts)
        all_atomic = all_atomic && (p.kind() == MeasureKind::delta || p.kind() == MeasureKind::atoms);
    if (all_atomic) {
        std::vector<Atom> merged;
        for (std::size_t i = 0; i < parts.size(); ++i)
            for (const auto& a : parts[i].atom_list()) merged.push_back({a.w, a.p * weights[i]});
        // combine coincident atoms
        std::vector<Atom> dedup;
        for (auto& a : merged) {
            bool found = false;
            for (auto& b : dedup) {
                Vec diff = a.w;
                for (std::size_t k = 0; k < diff.size(); ++k) diff[k] -= b.w[k];
                if (norm2(diff) <= 1e-12) {
                    b.p += a.p;
                    found = true;
                    break;
                }
            }
            if (!found) dedup.push_back(a);
        }
        return atoms(std::move(dedup));
    }
    AmplitudeMeasure m;
    m.kind_ = MeasureKind::mixture;
    m.dim_ = d;
    m.mix_weights_ = std::move(weights);
    m.mix_parts_ = std::move(parts);
    return m;
}

const std::vector<Atom>& AmplitudeMeasure::atom_list() const {
    if (kind_ != MeasureKind::delta && kind_ != MeasureKind::atoms)
        throw std::logic_error("measure is not discrete");
    return atoms_;
}

Vec AmplitudeMeasure::sample(Rng& rng) const {
    switch (kind_) {
        case MeasureKind::delta:
            return atoms_.front().w;
        case MeasureKind::atoms: {
            const double u = rng.uniform01();
            double acc = 0.0;
            for (const auto& a : atoms_) {
                acc += a.p;
                if (u <= acc) return a.w;
            }
            return atoms_.back().w;
        }
        case MeasureKind::uniform_sphere: {
            Vec v(static_cast<std::size_t>(dim_));
            double nrm = 0.0;
            do {
                for (double& x : v) x = rng.gaussian();
                nrm = norm2(v);
            } while (nrm == 0.0);
            for (double& x : v) x /= nrm;
            return v;
        }
        case MeasureKind::von_mises: {
            const double t = sample_von_mises_angle(rng, mu_, kappa_);
            return {std::cos(t), std::sin(t)};
        }
        case MeasureKind::exp_radial:
            return {-std::log(rng.uniform01()) / rate_};
        case MeasureKind::mixture: {
            const double u = rng.uniform01();
            double acc = 0.0;
            for (std::size_t i = 0; i < mix_weights_.size(); ++i) {
                acc += mix_weights_[i];
                if (u <= acc) return mix_parts_[i].sample(rng);
            }
            return mix_parts_.back().sample(rng);
        }
    }
    throw std::logic_error("unreachable");
}

std::complex<double> AmplitudeMeasure::cf(const Vec& z) const {
    if (static_cast<int>(z.size()) != dim_) throw std::invalid_argument("cf argument has wrong dimension");
    if (is_zero(z)) return {1.0, 0.0};
    switch (kind_) {
        case MeasureKind::delta:
        case MeasureKind::atoms: {
            std::complex<double> s{0.0, 0.0};
            for (const auto& a : atoms_) {
                const double phase = dot(z, a.w);
                s += a.p * std::complex<double>(std::cos(phase), std::sin(phase));
            }
            return s;
        }
        case MeasureKind::uniform_sphere:
            return {spherical_bessel_Y(dim_, norm2(z)), 0.0};
        case MeasureKind::von_mises: {
            const double inv_norm = 1.0 / (kTwoPi * modified_bessel_I(0, kappa_));
            auto f = [&](double t) {
                const double phase = z[0] * std::cos(t) + z[1] * std::sin(t);
                const double dens = std::exp(kappa_ * std::cos(t - mu_)) * inv_norm;
                return std::complex<double>(std::cos(phase), std::sin(phase)) * dens;
            };
            return integrate_adaptive<std::complex<double>>(f, 0.0, kTwoPi, 1e-10).value;
        }
        case MeasureKind::exp_radial:
            return rate_ / std::complex<double>(rate_, -z[0]);
        case MeasureKind::mixture: {
            std::complex<double> s{0.0, 0.0};
            for (std::size_t i = 0; i < mix_parts_.size(); ++i) s += mix_weights_[i] * mix_parts_[i].cf(z);
            return s;
        }
    }
    throw std::logic_error("unreachable");
}

std::optional<Vec> AmplitudeMeasure::mean() const {
    switch (kind_) {
        case MeasureKind::delta:
        case MeasureKind::atoms: {
            Vec m(static_cast<std::size_t>(dim_), 0.0);
            for (const auto& a : atoms_)
                for (std::size_t i = 0; i < m.size(); ++i) m[i] += a.p * a.w[i];
            return m;
        }
        case MeasureKind::uniform_sphere:
            return Vec(static_cast<std::size_t>(dim_), 0.0);
        case MeasureKind::von_mises: {
            const double r1 = modified_bessel_I(1, kappa_) / modified_bessel_I(0, kappa_);
            return Vec{r1 * std::cos(mu_), r1 * std::sin(mu_)};
        }
        case MeasureKind::exp_radial:
            return Vec{1.0 / rate_};
        case MeasureKind::mixture: {
            Vec m(static_cast<std::size_t>(dim_), 0.0);
            for (std::size_t i = 0; i < mix_parts_.size(); ++i) {
                const auto pm = mix_parts_[i].mean();
                if (!pm) return std::nullopt;
                for (std::size_t k = 0; k < m.size(); ++k) m[k] += mix_weights_[i] * (*pm)[k];
            }
            return m;
        }
    }
    return std::nullopt;
}

std::optional<Mat> AmplitudeMeasure::second_moment() const {
    switch (kind_) {
        case MeasureKind::delta:
        case MeasureKind::atoms: {
            Mat m(dim_);
            for (const auto& a : atoms_)
                for (int i = 0; i < dim_; ++i)
                    for (int j = 0; j < dim_; ++j)
                        m(i, j) += a.p * a.w[static_cast<std::size_t>(i)] * a.w[static_cast<std::size_t>(j)];
            return m;
        }
        case MeasureKind::uniform_sphere: {
            Mat m(dim_);
            for (int i = 0; i < dim_; ++i) m(i, i) = 1.0 / dim_;
            return m;
        }
        case MeasureKind::von_mises: {
            // E e^{2i theta} = e^{2i mu} I_2 / I_0
            const double r2 = modified_bessel_I(2, kappa_) / modified_bessel_I(0, kappa_);
            Mat m(2);
            m(0, 0) = 0.5 * (1.0 + std::cos(2.0 * mu_) * r2);
            m(1, 1) = 0.5 * (1.0 - std::cos(2.0 * mu_) * r2);
            m(0, 1) = m(1, 0) = 0.5 * std::sin(2.0 * mu_) * r2;
            return m;
        }
        case MeasureKind::exp_radial: {
            Mat m(1);
            m(0, 0) = 2.0 / (rate_ * rate_);
            return m;
        }
        case MeasureKind::mixture: {
            Mat m(dim_);
            for (std::size_t i = 0; i < mix_parts_.size(); ++i) {
                const auto pm = mix_parts_[i].second_moment();
                if (!pm) return std::nullopt;
                for (std::size_t k = 0; k < m.a.size(); ++k) m.a[k] += mix_weights_[i] * pm->a[k];
            }
            return m;
        }
    }
    return std::nullopt;
}

double AmplitudeMeasure::abs_moment_bound() const {
    switch (kind_) {
        case MeasureKind::delta:
        case MeasureKind::atoms: {
            double s = 0.0;
            for (const auto& a : atoms_) s += a.p * norm2(a.w);
            return s;
        }
        case MeasureKind::uniform_sphere:
        case MeasureKind::von_mises:
            return 1.0;
        case MeasureKind::exp_radial:
            return 1.0 / rate_;
        case MeasureKind::mixture: {
            double s = 0.0;
            for (std::size_t i = 0; i < mix_parts_.size(); ++i) s += mix_weights_[i] * mix_parts_[i].abs_moment_bound();
            return s;
        }
    }
    return 0.0;
}

double AmplitudeMeasure::log_moment_bound() const {
    switch (kind_) {
        case MeasureKind::delta:
        case MeasureKind::atoms: {
            double s = 0.0;
            for (const auto& a : atoms_) s += a.p * std::max(0.0, std::log(norm2(a.w)));
            return s;
        }
        case MeasureKind::uniform_sphere:
        case MeasureKind::von_mises:
            return 0.0;  // |W| = 1 exactly
        case MeasureKind::exp_radial:
            return 1.0 / rate_;  // log+ x <= x
        case MeasureKind::mixture: {
            double s = 0.0;
            for (std::size_t i = 0; i < mix_parts_.size(); ++i) s += mix_weights_[i] * mix_parts_[i].log_moment_bound();
            return s;
        }
    }
    return 0.0;
}

double AmplitudeMeasure::cap_mass(const Vec& axis, double half_angle) const {
    if (static_cast<int>(axis.size()) != dim_) throw std::invalid_argument("cap axis has wrong dimension");
    if (!(half_angle > 0.0) || half_angle > kPi) throw std::invalid_argument("cap half-angle must lie in (0, pi]");
    const double an = norm2(axis);
    if (an == 0.0) throw std::invalid_argument("cap axis may not be zero");
    const double cos_phi = std::cos(half_angle);
    switch (kind_) {
        case MeasureKind::delta:
        case MeasureKind::atoms: {
            double s = 0.0;
            for (const auto& a : atoms_) {
                const double c = dot(a.w, axis) / (norm2(a.w) * an);
                if (c >= cos_phi - 1e-12) s += a.p;
            }
            return s;
        }
        case MeasureKind::uniform_sphere: {
            if (dim_ == 1) {
                double s = 0.0;
                if (axis[0] / an >= cos_phi - 1e-12) s += 0.5;
                if (-axis[0] / an >= cos_phi - 1e-12) s += 0.5;
                return s;
            }
            return sphere_cap_fraction(dim_, half_angle);
        }
        case MeasureKind::von_mises: {
            if (half_angle >= kPi) return 1.0;
            const double psi = std::atan2(axis[1], axis[0]);
            auto f = [&](double t) { return von_mises_density(kappa_, mu_, t); };
            return integrate_adaptive<double>(f, psi - half_angle, psi + half_angle, 1e-10).value;
        }
        case MeasureKind::exp_radial:
            // support is the positive half-line, direction +1
            return (axis[0] / an >= cos_phi - 1e-12) ? 1.0 : 0.0;
        case MeasureKind::mixture: {
            double s = 0.0;
            for (std::size_t i = 0; i < mix_parts_.size(); ++i)
                s += mix_weights_[i] * mix_parts_[i].cap_mass(axis, half_angle);
            return s;
        }
    }
    return 0.0;
}

double AmplitudeMeasure::atom_set_mass(const std::vector<Vec>& dirs, double tol) const {
    if (kind_ == MeasureKind::mixture) {
        double s = 0.0;
        for (std::size_t i = 0; i < mix_parts_.size(); ++i)
            s += mix_weights_[i] * mix_parts_[i].atom_set_mass(dirs, tol);
        return s;
    }
    if (kind_ != MeasureKind::delta && kind_ != MeasureKind::atoms) return 0.0;
    double s = 0.0;
    for (const auto& a : atoms_) {
        for (const auto& d : dirs) {
            if (d.size() != a.w.size()) throw std::invalid_argument("direction has wrong dimension");
            Vec diff = a.w;
            for (std::size_t k = 0; k < diff.size(); ++k) diff[k] -= d[k];
            if (norm2(diff) <= tol) {
                s += a.p;
                break;
            }
        }
    }
    return s;
}

namespace {

Vec parse_vector(const std::string& text) {
    Vec v;
    std::size_t p = 0;
    while (p <= text.size()) {
        const std::size_t comma = std::min(text.find(',', p), text.size());
        const std::string tok = text.substr(p, comma - p);
        char* end = nullptr;
        const double x = std::strtod(tok.c_str(), &end);
        if (tok.empty() || end != tok.c_str() + tok.size())
            throw std::invalid_argument("bad vector entry: '" + tok + "'");
        v.push_back(x);
        if (comma == text.size()) break;
        p = comma + 1;
    }
    return v;
}

double parse_named(const std::string& body, const std::string& key) {
    const std::string want = key + "=";
    std::size_t p = 0;
    while (p < body.size()) {
        const std::size_t comma = std::min(body.find(',', p), body.size());
        const std::string tok = body.substr(p, comma - p);
        if (tok.rfind(want, 0) == 0) {
            const std::string val = tok.substr(want.size());
            char* end = nullptr;
            const double x = std::strtod(val.c_str(), &end);
            if (val.empty() || end != val.c_str() + val.size())
                throw std::invalid_argument("bad value for '" + key + "'");
            return x;
        }
        if (comma == body.size()) break;
        p = comma + 1;
    }
    throw std::invalid_argument("missing parameter '" + key + "'");
}

}  // namespace

AmplitudeMeasure parse_measure_spec(const std::string& spec, int dim_hint) {
    const std::size_t colon = spec.find(':');
    const std::string head = spec.substr(0, colon);
    const std::string body = colon == std::string::npos ? std::string() : spec.substr(colon + 1);
    if (head == "delta") {
        if (body.rfind("w=", 0) != 0) throw std::invalid_argument("delta spec must look like delta:w=1,0");
        return AmplitudeMeasure::delta(parse_vector(body.substr(2)));
    }
    if (head == "atoms") {
        std::vector<Atom> list;
        std::size_t p = 0;
        while (p < body.size()) {
            const std::size_t semi = std::min(body.find(';', p), body.size());
            const std::string tok = body.substr(p, semi - p);
            const std::size_t close = tok.find(')');
            if (tok.empty() || tok.front() != '(' || close == std::string::npos || close + 1 >= tok.size() ||
                tok[close + 1] != '@')
                throw std::invalid_argument("atom spec must look like (1,0)@0.5");
            Atom a;
            a.w = parse_vector(tok.substr(1, close - 1));
            const std::string pv = tok.substr(close + 2);
            char* end = nullptr;
            a.p = std::strtod(pv.c_str(), &end);
            if (pv.empty() || end != pv.c_str() + pv.size()) throw std::invalid_argument("bad atom weight");
            list.push_back(std::move(a));
            if (semi == body.size()) break;
            p = semi + 1;
        }
        return AmplitudeMeasure::atoms(std::move(list));
    }
    if (head == "usphere") {
        if (dim_hint < 1) throw std::invalid_argument("usphere needs an explicit dimension");
        return AmplitudeMeasure::uniform_sphere(dim_hint);
    }
    if (head == "vonmises")
        return AmplitudeMeasure::von_mises(parse_named(body, "mu"), parse_named(body, "kappa"));
    if (head == "exp") return AmplitudeMeasure::exp_radial(parse_named(body, "rate"));
    throw std::invalid_argument("unknown measure kind: '" + head + "'");
}

std::string format_measure_spec(const AmplitudeMeasure& m) {
    switch (m.kind()) {
        case MeasureKind::delta: {
            std::string s = "delta:w=";
            const auto& w = m.atom_list().front().w;
            for (std::size_t i = 0; i < w.size(); ++i) {
                if (i) s += ',';
                s += format_double(w[i]);
            }
            return s;
        }
        case MeasureKind::atoms: {
            std::string s = "atoms:";
            const auto& list = m.atom_list();
            for (std::size_t k = 0; k < list.size(); ++k) {
                if (k) s += ';';
                s += '(';
                for (std::size_t i = 0; i < list[k].w.size(); ++i) {
                    if (i) s += ',';
                    s += format_double(list[k].w[i]);
                }
                s += ")@";
                s += format_double(list[k].p);
            }
            return s;
        }
        case MeasureKind::uniform_sphere:
            return "usphere";
        case MeasureKind::von_mises:
            return "vonmises:mu=" + format_double(m.vm_mu()) + ",kappa=" + format_double(m.vm_kappa());
        case MeasureKind::exp_radial:
            return "exp:rate=" + format_double(m.exp_rate());
        case MeasureKind::mixture:
            throw std::invalid_argument("mixture measures have no spec-string form");
    }
    throw std::logic_error("unreachable");
}

}  // namespace opdickman
