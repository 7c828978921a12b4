#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace conekit {

enum class CrossSectionKind { Circle, Sphere, Custom };

/// Spectral data of the boundary Laplacian on the cross-section.
///
/// The list holds the distinct eigenvalues 0 = lambda_0 > lambda_1 > ...
/// together with their multiplicities; j_max is the number of distinct
/// eigenvalues retained.  Built-in kinds use closed forms:
///   Circle (n=1): lambda_j = -j^2, multiplicity 2 for j >= 1,
///   Sphere (n=2): lambda_l = -l(l+1), multiplicity 2l+1.
struct CrossSectionSpec {
    CrossSectionKind kind = CrossSectionKind::Circle;
    int n = 1;  // dimension of the cross-section; dim of the cone is n+1
    std::vector<double> eigenvalues;
    std::vector<int> multiplicities;
    int j_max = 0;

    static CrossSectionSpec circle(int j_max);
    static CrossSectionSpec sphere(int j_max);
    static CrossSectionSpec custom(int n, std::vector<double> eigenvalues,
                                   std::vector<int> multiplicities);

    /// Throws std::invalid_argument naming the offending index when the
    /// eigenvalue list violates monotonicity, sign or multiplicity rules.
    void validate() const;
};

struct EigenEntry {
    int j = 0;
    double lambda = 0.0;
    int multiplicity = 1;
};

/// Distinct eigenvalues with multiplicities, sorted by index.
std::vector<EigenEntry> eigen_data(const CrossSectionSpec& spec);

/// Conformal warp profile f(x) = 1 + sum_k a_k x^k on [0,1].
/// The cross-section metric is h(x) = f(x) h(0); f == 1 is the straight cone.
struct WarpProfile {
    std::vector<double> coeffs;  // a_1, a_2, ...; empty = straight

    static WarpProfile straight() { return WarpProfile{}; }
    static WarpProfile polynomial(std::vector<double> a);

    bool is_straight() const { return coeffs.empty(); }
    double f(double x) const;
    double df(double x) const;
};

struct WarpData {
    double f = 1.0;
    double df = 0.0;
    double H = 0.0;  // x d/dx log sqrt(det h(x)) = n x f'(x) / (2 f(x))
};

/// Evaluates (f, f', H) at radius x; throws std::domain_error if f(x) <= 0.
WarpData warp_eval(const WarpProfile& profile, double x, int n);

/// Enumeration of the retained eigenbranches, one entry per eigenfunction.
/// For the circle branch 0 is cos(j theta), branch 1 is sin(j theta).
struct ModeBranch {
    int id = 0;      // stable sequential id used in file formats
    int j = 0;       // index of the distinct eigenvalue
    int branch = 0;  // position within the eigenspace
    double lambda = 0.0;
};

struct ModeTable {
    std::vector<ModeBranch> branches;

    int count() const { return static_cast<int>(branches.size()); }
    const ModeBranch& operator[](int m) const { return branches[m]; }

    /// L^2(cross-section) norm squared of the basis function of branch m.
    /// Circle uses the plain trigonometric basis (1, cos, sin); custom and
    /// sphere modes are taken orthonormal.
    double basis_norm_sq(int m, CrossSectionKind kind) const;

    static ModeTable build(const CrossSectionSpec& spec);
};

/// Pointwise angular transforms for the circle.
///
/// synthesize maps plain-basis coefficients (1, cos j.theta, sin j.theta)
/// to values on a uniform theta grid; analyze inverts it exactly for
/// band-limited data (grid size >= 2 j_max + 1).
class CircleTransform {
public:
    CircleTransform(const CrossSectionSpec& spec, int n_theta);

    int n_theta() const { return n_theta_; }
    int n_modes() const { return n_modes_; }
    const std::vector<double>& thetas() const { return thetas_; }

    Eigen::VectorXd synthesize(const Eigen::VectorXd& coeffs) const;
    Eigen::VectorXd analyze(const Eigen::VectorXd& values) const;

    /// Analyze onto a wider band (for products); extra modes beyond the
    /// table of the owning spec are simply truncated by the caller.
    const Eigen::MatrixXd& synth_matrix() const { return synth_; }
    const Eigen::MatrixXd& analyze_matrix() const { return analyze_; }

private:
    int n_theta_;
    int n_modes_;
    std::vector<double> thetas_;
    Eigen::MatrixXd synth_;    // n_theta x n_modes
    Eigen::MatrixXd analyze_;  // n_modes x n_theta
};

}  // namespace conekit
