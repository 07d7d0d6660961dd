#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <utility>
#include <vector>

namespace opdickman {

namespace quad_detail {

// Gauss-Kronrod 15/7 pair on [-1,1]; positive abscissae only.
inline constexpr double kAbscissa[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};

inline constexpr double kWeightK15[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};

// 7-point Gauss weights sit on abscissae 1, 3, 5, 7.
inline constexpr double kWeightG7[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

inline double magnitude(double v) { return std::fabs(v); }
inline double magnitude(const std::complex<double>& v) { return std::abs(v); }

}  // namespace quad_detail

template <class T>
struct QuadResult {
    T value{};
    double error = 0.0;  // sum of panel error estimates
    int panels = 0;
};

// One Gauss-Kronrod 15/7 panel; the error estimate is the raw difference
// between the two embedded rules.
template <class T, class F>
QuadResult<T> gauss_kronrod_panel(F&& f, double a, double b) {
    using namespace quad_detail;
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);

    T k15 = kWeightK15[7] * f(mid);
    T g7 = kWeightG7[3] * f(mid);
    for (int i = 0; i < 7; ++i) {
        const double dx = half * kAbscissa[i];
        const T pair = f(mid - dx) + f(mid + dx);
        k15 = k15 + kWeightK15[i] * pair;
        if (i % 2 == 1) g7 = g7 + kWeightG7[i / 2] * pair;
    }
    QuadResult<T> r;
    r.value = half * k15;
    r.error = magnitude(half * (k15 - g7));
    r.panels = 1;
    return r;
}

// Adaptive bisection: split the worst panel until the summed error
// estimates drop below abs_tol.
template <class T, class F>
QuadResult<T> integrate_adaptive(F&& f, double a, double b, double abs_tol,
                                 int max_panels = 20000) {
    struct Panel {
        double a, b, err;
        T val;
    };
    QuadResult<T> whole = gauss_kronrod_panel<T>(f, a, b);
    if (a == b) return whole;
    std::vector<Panel> panels{{a, b, whole.error, whole.value}};

    double total_err = whole.error;
    while (total_err > abs_tol && static_cast<int>(panels.size()) < max_panels) {
        std::size_t worst = 0;
        for (std::size_t i = 1; i < panels.size(); ++i)
            if (panels[i].err > panels[worst].err) worst = i;
        const Panel p = panels[worst];
        const double m = 0.5 * (p.a + p.b);
        if (m == p.a || m == p.b) break;  // cannot refine further
        QuadResult<T> left = gauss_kronrod_panel<T>(f, p.a, m);
        QuadResult<T> right = gauss_kronrod_panel<T>(f, m, p.b);
        total_err += left.error + right.error - p.err;
        panels[worst] = {p.a, m, left.error, left.value};
        panels.push_back({m, p.b, right.error, right.value});
    }
    if (total_err > abs_tol)
        throw std::runtime_error("adaptive quadrature did not reach the requested tolerance");

    QuadResult<T> out;
    out.value = T{};
    for (const auto& p : panels) {
        out.value = out.value + p.val;
        out.error += p.err;
    }
    out.panels = static_cast<int>(panels.size());
    return out;
}

}  // namespace opdickman
