#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "opdickman/matrix.hpp"
#include "opdickman/rng.hpp"

namespace opdickman {

enum class MeasureKind { delta, atoms, uniform_sphere, von_mises, exp_radial, mixture };

struct Atom {
    Vec w;
    double p = 1.0;
};

// Density of the von Mises distribution on [0, 2pi):
// exp(kappa cos(x - mu)) / (2 pi I_0(kappa)). Rejects kappa <= 0.
double von_mises_density(double kappa, double mu, double x);

// A jump-amplitude law with finite logarithmic moment: sampler,
// characteristic function and exact moment metadata for the built-in
// families. The zero atom is excluded by construction.
class AmplitudeMeasure {
public:
    static AmplitudeMeasure delta(Vec w);
    static AmplitudeMeasure atoms(std::vector<Atom> atom_list);
    static AmplitudeMeasure uniform_sphere(int dim);
    static AmplitudeMeasure von_mises(double mu, double kappa);  // on S^1
    static AmplitudeMeasure exp_radial(double rate);             // d = 1
    static AmplitudeMeasure mixture(std::vector<double> weights,
                                    std::vector<AmplitudeMeasure> parts);

    MeasureKind kind() const { return kind_; }
    int dim() const { return dim_; }

    // One draw; deterministic given the generator state.
    Vec sample(Rng& rng) const;

    // Characteristic function; exactly 1 at z = 0, |cf| <= 1.
    std::complex<double> cf(const Vec& z) const;

    std::optional<Vec> mean() const;
    std::optional<Mat> second_moment() const;
    double abs_moment_bound() const;  // E|W|
    double log_moment_bound() const;  // upper estimate of E log+ |W|

    const std::vector<Atom>& atom_list() const;  // delta and atoms kinds
    double vm_mu() const { return mu_; }
    double vm_kappa() const { return kappa_; }
    double exp_rate() const { return rate_; }
    const std::vector<double>& mix_weights() const { return mix_weights_; }
    const std::vector<AmplitudeMeasure>& mix_parts() const { return mix_parts_; }

    // nu-mass of the spherical cap {x : x . axis >= |x| cos(half_angle)}.
    double cap_mass(const Vec& axis, double half_angle) const;
    // nu-mass of a finite direction set, matched within tol.
    double atom_set_mass(const std::vector<Vec>& dirs, double tol = 1e-9) const;

private:
    AmplitudeMeasure() = default;

    MeasureKind kind_ = MeasureKind::delta;
    int dim_ = 0;
    std::vector<Atom> atoms_;
    double mu_ = 0.0, kappa_ = 0.0, rate_ = 0.0;
    std::vector<double> mix_weights_;
    std::vector<AmplitudeMeasure> mix_parts_;
};

// Spec strings: "delta:w=1,0", "atoms:(1,0)@0.5;(0,1)@0.5", "usphere",
// "vonmises:mu=0.5,kappa=2", "exp:rate=1". dim_hint resolves "usphere".
AmplitudeMeasure parse_measure_spec(const std::string& spec, int dim_hint = 0);
std::string format_measure_spec(const AmplitudeMeasure& m);

}  // namespace opdickman
