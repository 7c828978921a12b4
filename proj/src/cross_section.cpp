#include "conekit/cross_section.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace conekit {

CrossSectionSpec CrossSectionSpec::circle(int j_max) {
    CrossSectionSpec s;
    s.kind = CrossSectionKind::Circle;
    s.n = 1;
    s.j_max = j_max;
    for (int j = 0; j < j_max; ++j) {
        s.eigenvalues.push_back(-static_cast<double>(j) * j);
        s.multiplicities.push_back(j == 0 ? 1 : 2);
    }
    s.validate();
    return s;
}

CrossSectionSpec CrossSectionSpec::sphere(int j_max) {
    CrossSectionSpec s;
    s.kind = CrossSectionKind::Sphere;
    s.n = 2;
    s.j_max = j_max;
    for (int l = 0; l < j_max; ++l) {
        s.eigenvalues.push_back(-static_cast<double>(l) * (l + 1));
        s.multiplicities.push_back(2 * l + 1);
    }
    s.validate();
    return s;
}

CrossSectionSpec CrossSectionSpec::custom(int n, std::vector<double> eigenvalues,
                                          std::vector<int> multiplicities) {
    CrossSectionSpec s;
    s.kind = CrossSectionKind::Custom;
    s.n = n;
    s.eigenvalues = std::move(eigenvalues);
    s.multiplicities = std::move(multiplicities);
    s.j_max = static_cast<int>(s.eigenvalues.size());
    s.validate();
    return s;
}

void CrossSectionSpec::validate() const {
    if (n < 1) throw std::invalid_argument("cross-section dimension n must be >= 1");
    if (j_max < 1) throw std::invalid_argument("j_max must be >= 1");
    if (static_cast<int>(eigenvalues.size()) != j_max ||
        static_cast<int>(multiplicities.size()) != j_max)
        throw std::invalid_argument("eigenvalue/multiplicity lists must have j_max entries");
    if (eigenvalues[0] != 0.0)
        throw std::invalid_argument("lambda_0 must be 0 at index 0");
    if (multiplicities[0] != 1)
        throw std::invalid_argument("multiplicity of lambda_0 must be 1 at index 0");
    for (int j = 0; j < j_max; ++j) {
        if (eigenvalues[j] > 0.0)
            throw std::invalid_argument("eigenvalue positive at index " + std::to_string(j));
        if (multiplicities[j] < 1)
            throw std::invalid_argument("multiplicity not positive at index " + std::to_string(j));
        if (j > 0 && !(eigenvalues[j] < eigenvalues[j - 1]))
            throw std::invalid_argument("eigenvalues not strictly decreasing at index " +
                                        std::to_string(j));
    }
}

std::vector<EigenEntry> eigen_data(const CrossSectionSpec& spec) {
    spec.validate();
    std::vector<EigenEntry> out;
    out.reserve(spec.j_max);
    for (int j = 0; j < spec.j_max; ++j)
        out.push_back({j, spec.eigenvalues[j], spec.multiplicities[j]});
    return out;
}

WarpProfile WarpProfile::polynomial(std::vector<double> a) {
    WarpProfile p;
    p.coeffs = std::move(a);
    // reject profiles that dip non-positive anywhere on [0,1]
    for (int i = 0; i <= 1000; ++i) {
        double x = i / 1000.0;
        if (p.f(x) <= 0.0)
            throw std::invalid_argument("warp profile not positive at x = " + std::to_string(x));
    }
    return p;
}

double WarpProfile::f(double x) const {
    double acc = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = (acc + *it) * x;
    return 1.0 + acc;
}

double WarpProfile::df(double x) const {
    double acc = 0.0;
    int k = static_cast<int>(coeffs.size());
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it, --k) acc = acc * x + k * (*it);
    return acc;
}

WarpData warp_eval(const WarpProfile& profile, double x, int n) {
    if (!(x > 0.0) || x > 1.0) throw std::domain_error("warp_eval: x must lie in (0,1]");
    WarpData w;
    w.f = profile.f(x);
    if (w.f <= 0.0) throw std::domain_error("warp profile not positive at x = " + std::to_string(x));
    w.df = profile.df(x);
    w.H = n * x * w.df / (2.0 * w.f);
    return w;
}

double ModeTable::basis_norm_sq(int m, CrossSectionKind kind) const {
    if (kind == CrossSectionKind::Circle)
        return branches[m].j == 0 ? 2.0 * std::numbers::pi : std::numbers::pi;
    return 1.0;
}

ModeTable ModeTable::build(const CrossSectionSpec& spec) {
    ModeTable t;
    int id = 0;
    for (int j = 0; j < spec.j_max; ++j)
        for (int b = 0; b < spec.multiplicities[j]; ++b)
            t.branches.push_back({id++, j, b, spec.eigenvalues[j]});
    return t;
}

CircleTransform::CircleTransform(const CrossSectionSpec& spec, int n_theta)
    : n_theta_(n_theta) {
    if (spec.kind != CrossSectionKind::Circle)
        throw std::invalid_argument("pointwise angular transforms are only supported on the circle");
    if (n_theta < 2 * spec.j_max + 1)
        throw std::invalid_argument("angular grid too small: need at least 2*j_max+1 points");
    ModeTable table = ModeTable::build(spec);
    n_modes_ = table.count();
    thetas_.resize(n_theta_);
    for (int k = 0; k < n_theta_; ++k)
        thetas_[k] = 2.0 * std::numbers::pi * k / n_theta_;

    synth_.resize(n_theta_, n_modes_);
    for (int k = 0; k < n_theta_; ++k) {
        for (int m = 0; m < n_modes_; ++m) {
            const ModeBranch& br = table[m];
            if (br.j == 0)
                synth_(k, m) = 1.0;
            else
                synth_(k, m) = br.branch == 0 ? std::cos(br.j * thetas_[k])
                                              : std::sin(br.j * thetas_[k]);
        }
    }
    // exact quadrature on the uniform grid: <u, e_m> / ||e_m||^2
    analyze_.resize(n_modes_, n_theta_);
    for (int m = 0; m < n_modes_; ++m) {
        const ModeBranch& br = table[m];
        double scale = (br.j == 0 ? 1.0 : 2.0) / n_theta_;
        for (int k = 0; k < n_theta_; ++k) analyze_(m, k) = scale * synth_(k, m);
    }
}

Eigen::VectorXd CircleTransform::synthesize(const Eigen::VectorXd& coeffs) const {
    if (coeffs.size() != n_modes_)
        throw std::invalid_argument("synthesize: coefficient count mismatch");
    return synth_ * coeffs;
}

Eigen::VectorXd CircleTransform::analyze(const Eigen::VectorXd& values) const {
    if (values.size() != n_theta_)
        throw std::invalid_argument("analyze: grid size mismatch");
    return analyze_ * values;
}

}  // namespace conekit
