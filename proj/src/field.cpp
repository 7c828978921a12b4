#include "conekit/field.hpp"

#include <cmath>
#include <stdexcept>

namespace conekit {

Field::Field(const RadialGrid& g, const CrossSectionSpec& s)
    : grid(g), spec(s), modes(ModeTable::build(s)) {
    values = Eigen::MatrixXd::Zero(g.nodes(), modes.count());
}

Field& Field::operator+=(const Field& other) {
    values += other.values;
    return *this;
}

Field& Field::operator-=(const Field& other) {
    values -= other.values;
    return *this;
}

Field& Field::operator*=(double c) {
    values *= c;
    return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double c, Field a) { return a *= c; }

Eigen::VectorXd sample_singular(const SingularFunction& s, const RadialGrid& grid,
                                const CutoffOmega& omega) {
    Eigen::VectorXd v(grid.nodes());
    for (int i = 0; i < grid.nodes(); ++i) {
        double x = grid.x[i];
        double lg = std::log(x);
        double val = std::pow(x, -s.rho);
        if (s.log_power == 1) val *= lg;
        v[i] = val * omega(x);
    }
    return v;
}

Field AugmentedField::total() const {
    Field out = minimal;
    for (int i = 0; i < out.grid.nodes(); ++i) out.values(i, 0) += constant;
    for (size_t k = 0; k < basis.size(); ++k) {
        const SingularFunction& s = basis[k];
        // locate the branch column for (j, branch)
        int col = -1;
        for (int m = 0; m < out.n_modes(); ++m)
            if (out.modes[m].j == s.j && out.modes[m].branch == s.branch) {
                col = m;
                break;
            }
        if (col < 0) throw std::invalid_argument("singular basis entry outside retained modes");
        out.values.col(col) += coeffs[static_cast<int>(k)] * sample_singular(s, out.grid, omega);
    }
    return out;
}

}  // namespace conekit
