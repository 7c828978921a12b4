#include "conekit/conormal.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace conekit {

namespace {

constexpr double kPoleTol = 1e-9;

bool is_integral(double v) { return std::abs(v - std::round(v)) < 1e-12; }

// sqrt of the discriminant ((n-1)/2)^2 - lambda, exact when 4*disc is a
// perfect square integer (all built-in cross-sections land here).
double root_offset(int n, double lambda) {
    double disc4 = static_cast<double>(n - 1) * (n - 1) - 4.0 * lambda;
    if (disc4 < 0.0) throw std::invalid_argument("indicial_roots: lambda must be <= 0");
    if (is_integral(disc4)) {
        long long d = std::llround(disc4);
        long long r = std::llround(std::sqrt(static_cast<double>(d)));
        while (r * r > d) --r;
        while ((r + 1) * (r + 1) <= d) ++r;
        if (r * r == d) return static_cast<double>(r) / 2.0;
    }
    return std::sqrt(disc4) / 2.0;
}

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

}  // namespace

IndicialRoots indicial_roots(int n, double lambda, int j) {
    if (lambda > 0.0) throw std::invalid_argument("indicial_roots: lambda must be <= 0");
    double mid = (n - 1) / 2.0;
    double off = root_offset(n, lambda);
    IndicialRoots r;
    r.j = j;
    r.q_minus = mid - off;
    r.q_plus = mid + off;
    r.is_double = (off == 0.0);
    return r;
}

WeightWindow weight_window(int n, double lambda_1) {
    if (!(lambda_1 < 0.0))
        throw std::invalid_argument("weight_window: second eigenvalue must be negative");
    WeightWindow w;
    double mid = (n - 1) / 2.0;
    w.eps_bar = -mid + root_offset(n, lambda_1);  // exact for integer spectra
    w.gamma_min = (n - 3) / 2.0;
    w.gamma_max = std::min(w.gamma_min + w.eps_bar, (n + 1) / 2.0);
    if (!(w.gamma_min < w.gamma_max))
        throw std::invalid_argument("weight_window: empty admissible range");
    return w;
}

PoleProximityError::PoleProximityError(const PoleDatum& p)
    : std::runtime_error("conormal symbol evaluated within 1e-9 of the pole z = " + fmt(p.rho) +
                         " (mode " + std::to_string(p.j) + ", order " + std::to_string(p.order) +
                         ")"),
      pole(p) {}

std::vector<std::complex<double>> conormal_inverse_eval(std::complex<double> z, int n,
                                                        const std::vector<EigenEntry>& modes,
                                                        ConeOperatorKind op) {
    std::vector<std::complex<double>> out;
    out.reserve(modes.size());
    for (const auto& m : modes) {
        IndicialRoots r = indicial_roots(n, m.lambda, m.j);
        std::vector<std::pair<double, bool>> zeros = {{r.q_plus, false}, {r.q_minus, false}};
        if (op == ConeOperatorKind::Bilaplacian) {
            zeros.push_back({r.q_plus - 2.0, true});
            zeros.push_back({r.q_minus - 2.0, true});
        }
        std::complex<double> denom = 1.0;
        for (auto [q, shifted] : zeros) {
            if (std::abs(z - q) < kPoleTol) {
                int order = 0;
                bool first = false, shift = false;
                for (auto [p, sh] : zeros)
                    if (std::abs(p - q) < kPoleTol) {
                        ++order;
                        (sh ? shift : first) = true;
                    }
                PoleDatum pd;
                pd.rho = q;
                pd.order = order;
                pd.j = m.j;
                pd.source = first && shift ? PoleSource::Both
                                           : (first ? PoleSource::FirstFactor
                                                    : PoleSource::ShiftedFactor);
                throw PoleProximityError(pd);
            }
            denom *= (z - q);
        }
        out.push_back(1.0 / denom);
    }
    return out;
}

namespace {

void check_window_preconditions(int n, double gamma, const std::vector<EigenEntry>& modes) {
    if (modes.size() < 2)
        throw std::invalid_argument("need at least two retained eigenvalues");
    WeightWindow w = weight_window(n, modes[1].lambda);
    if (!w.contains(gamma))
        throw std::invalid_argument("gamma " + fmt(gamma) + " outside admissible weight window (" +
                                    fmt(w.gamma_min) + ", " + fmt(w.gamma_max) + ")");
    // invertibility of the conormal symbol on the governing line
    double line = (n + 1) / 2.0 - gamma;
    for (const auto& m : modes) {
        IndicialRoots r = indicial_roots(n, m.lambda, m.j);
        for (double q : {r.q_minus, r.q_plus})
            if (std::abs(q - line) <= kPoleTol)
                throw std::invalid_argument("conormal symbol not invertible on the line Re z = " +
                                            fmt(line) + ": root q = " + fmt(q) + " of mode " +
                                            std::to_string(m.j) + " lies on it");
    }
}

}  // namespace

std::vector<SingularFunction> laplacian_asymptotics(int n, double gamma,
                                                    const std::vector<EigenEntry>& modes) {
    check_window_preconditions(n, gamma, modes);
    double hi = (n + 1) / 2.0 - gamma;
    double lo = hi - 2.0;
    for (const auto& m : modes) {
        IndicialRoots r = indicial_roots(n, m.lambda, m.j);
        for (double q : {r.q_minus, r.q_plus})
            if (std::abs(q - lo) <= kPoleTol)
                throw std::invalid_argument("root q = " + fmt(q) + " of mode " +
                                            std::to_string(m.j) + " lies on the window boundary");
    }
    std::vector<SingularFunction> out;
    for (const auto& m : modes) {
        IndicialRoots r = indicial_roots(n, m.lambda, m.j);
        std::vector<double> qs;
        if (r.is_double)
            qs = {r.q_plus};
        else
            qs = {r.q_minus, r.q_plus};
        for (double q : qs) {
            if (!(lo < q && q < hi)) continue;
            for (int b = 0; b < m.multiplicity; ++b) {
                out.push_back({q, 0, m.j, b});
                if (r.is_double) out.push_back({q, 1, m.j, b});
            }
        }
    }
    std::sort(out.begin(), out.end(), [](const SingularFunction& a, const SingularFunction& b) {
        if (a.rho != b.rho) return a.rho < b.rho;
        if (a.j != b.j) return a.j < b.j;
        if (a.branch != b.branch) return a.branch < b.branch;
        return a.log_power < b.log_power;
    });
    return out;
}

BilaplacianAsymptotics bilaplacian_domain_asymptotics(int n, double gamma,
                                                      const std::vector<EigenEntry>& modes) {
    check_window_preconditions(n, gamma, modes);
    double hi = (n + 1) / 2.0 - gamma - 2.0;
    double lo = hi - 2.0;

    BilaplacianAsymptotics out;
    for (const auto& m : modes) {
        IndicialRoots r = indicial_roots(n, m.lambda, m.j);
        // the four linear factors of the mode-j quartic, tagged by origin
        struct Factor {
            double z;
            bool shifted;
        };
        std::vector<Factor> factors = {{r.q_plus, false},
                                       {r.q_minus, false},
                                       {r.q_plus - 2.0, true},
                                       {r.q_minus - 2.0, true}};
        std::vector<bool> used(factors.size(), false);
        for (size_t a = 0; a < factors.size(); ++a) {
            if (used[a]) continue;
            double z0 = factors[a].z;
            int order = 0;
            bool first = false, shifted = false;
            for (size_t b = 0; b < factors.size(); ++b) {
                if (std::abs(factors[b].z - z0) < kPoleTol) {
                    used[b] = true;
                    ++order;
                    (factors[b].shifted ? shifted : first) = true;
                }
            }
            if (std::abs(z0 - lo) <= kPoleTol || std::abs(z0 - hi) <= kPoleTol)
                throw std::invalid_argument("pole z = " + fmt(z0) + " of mode " +
                                            std::to_string(m.j) +
                                            " lies on the domain window boundary");
            if (!(lo < z0 && z0 < hi)) continue;
            PoleDatum pd;
            pd.rho = z0;
            pd.order = order;
            pd.j = m.j;
            pd.source = first && shifted ? PoleSource::Both
                                         : (first ? PoleSource::FirstFactor : PoleSource::ShiftedFactor);
            out.poles.push_back(pd);
            for (int b = 0; b < m.multiplicity; ++b) {
                out.basis.push_back({z0, 0, m.j, b});
                if (order >= 2) out.basis.push_back({z0, 1, m.j, b});
            }
        }
    }
    auto by_rho = [](const auto& a, const auto& b) {
        if (a.rho != b.rho) return a.rho < b.rho;
        return a.j < b.j;
    };
    std::sort(out.poles.begin(), out.poles.end(), by_rho);
    std::sort(out.basis.begin(), out.basis.end(),
              [](const SingularFunction& a, const SingularFunction& b) {
                  if (a.rho != b.rho) return a.rho < b.rho;
                  if (a.j != b.j) return a.j < b.j;
                  if (a.branch != b.branch) return a.branch < b.branch;
                  return a.log_power < b.log_power;
              });
    return out;
}

DomainSpec domain_spec(ConeOperatorKind op, int s, double gamma, int n,
                       const std::vector<EigenEntry>& modes) {
    check_window_preconditions(n, gamma, modes);
    DomainSpec d;
    d.op = op;
    d.s = s;
    d.gamma = gamma;
    d.include_constants = true;
    if (op == ConeOperatorKind::Laplacian) {
        d.mu = 2;
        // chosen extension: minimal domain plus the constants, no singular part
    } else {
        d.mu = 4;
        d.singular_basis = bilaplacian_domain_asymptotics(n, gamma, modes).basis;
    }
    return d;
}

}  // namespace conekit
