#include "conekit/fit.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace conekit {

void FitWindow::validate(const RadialGrid& grid) const {
    if (!(x_lo > grid.x_min))
        throw std::invalid_argument("fit window must start above the grid truncation");
    CutoffOmega omega;
    if (!(x_hi <= omega.r1))
        throw std::invalid_argument("fit window must stay inside the omega == 1 region");
    if (!(std::log(x_hi / x_lo) >= 1.0))
        throw std::invalid_argument("fit window needs a log-spread of at least one e-fold");
    if (static_cast<int>(nodes(grid).size()) < min_nodes)
        throw std::invalid_argument("fit window holds fewer than " + std::to_string(min_nodes) +
                                    " grid nodes");
}

std::vector<int> FitWindow::nodes(const RadialGrid& grid) const {
    std::vector<int> out;
    for (int i = 0; i < grid.nodes(); ++i)
        if (grid.x[i] >= x_lo && grid.x[i] <= x_hi) out.push_back(i);
    return out;
}

ExponentFit fit_exponent(const RadialGrid& grid, const Eigen::VectorXd& profile,
                         const FitWindow& window, std::optional<double> subtract_constant) {
    auto idx = window.nodes(grid);
    if (static_cast<int>(idx.size()) < window.min_nodes)
        throw std::invalid_argument("fit window holds fewer than " +
                                    std::to_string(window.min_nodes) + " grid nodes");
    std::vector<double> lx, ly;
    for (int i : idx) {
        double v = profile[i] - subtract_constant.value_or(0.0);
        if (std::abs(v) <= 1e-13) continue;
        lx.push_back(std::log(grid.x[i]));
        ly.push_back(std::log(std::abs(v)));
    }
    ExponentFit fit;
    if (static_cast<int>(lx.size()) < std::max(3, window.min_nodes / 2)) return fit;  // no signal
    int n = static_cast<int>(lx.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int k = 0; k < n; ++k) {
        sx += lx[k];
        sy += ly[k];
        sxx += lx[k] * lx[k];
        sxy += lx[k] * ly[k];
    }
    double denom = n * sxx - sx * sx;
    double slope = (n * sxy - sx * sy) / denom;
    double intercept = (sy - slope * sx) / n;
    double ss_res = 0;
    for (int k = 0; k < n; ++k) {
        double r = ly[k] - (intercept + slope * lx[k]);
        ss_res += r * r;
    }
    fit.exponent = slope;
    fit.std_error = n > 2 ? std::sqrt(ss_res / (n - 2) / (sxx - sx * sx / n)) : 0.0;
    fit.has_signal = true;
    return fit;
}

double match_tolerance(double predicted_exponent) {
    return std::abs(predicted_exponent) <= 1.5 ? 0.05 : 0.1;
}

namespace {

struct BranchDesign {
    std::vector<SingularFunction> basis;  // predicted entries of this branch
    bool constant = false;
};

std::string describe_column(const SingularFunction& s) {
    std::ostringstream os;
    os << "x^" << -s.rho << (s.log_power == 1 ? " log x" : "");
    return os.str();
}

}  // namespace

FitReport fit_expansion(const Field& field, const std::vector<SingularFunction>& predicted,
                        bool include_constant, const FitWindow& window) {
    window.validate(field.grid);
    if (predicted.empty() && !include_constant)
        throw std::invalid_argument("fit_expansion needs a nonempty predicted basis");
    auto idx = window.nodes(field.grid);

    FitReport report;
    for (int m = 0; m < field.n_modes(); ++m) {
        const ModeBranch& br = field.modes[m];
        BranchDesign design;
        design.constant = include_constant && br.j == 0 && br.branch == 0;
        for (const auto& s : predicted)
            if (s.j == br.j && s.branch == br.branch) design.basis.push_back(s);
        if (design.basis.empty() && !design.constant) continue;

        ModeFitRow row;
        row.j = br.j;
        row.branch = br.branch;

        // design matrix on the window (omega == 1 there, so sampling the
        // bare powers is exact)
        int cols = static_cast<int>(design.basis.size()) + (design.constant ? 1 : 0);
        Eigen::MatrixXd a(idx.size(), cols);
        Eigen::VectorXd b(idx.size());
        for (size_t r = 0; r < idx.size(); ++r) {
            double x = field.grid.x[idx[r]];
            int c = 0;
            if (design.constant) a(r, c++) = 1.0;
            for (const auto& s : design.basis) {
                double v = std::pow(x, -s.rho);
                if (s.log_power == 1) v *= std::log(x);
                a(r, c++) = v;
            }
            b[r] = field.values(idx[r], m);
        }

        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
        qr.setThreshold(1e-10);
        if (qr.rank() < cols) {
            // name the most collinear pair of design columns
            int ca = 0, cb = 1;
            double best = -1.0;
            for (int i = 0; i < cols; ++i)
                for (int k = i + 1; k < cols; ++k) {
                    double corr = std::abs(a.col(i).normalized().dot(a.col(k).normalized()));
                    if (corr > best) {
                        best = corr;
                        ca = i;
                        cb = k;
                    }
                }
            auto name = [&](int c) {
                if (design.constant) {
                    if (c == 0) return std::string("1");
                    return describe_column(design.basis[c - 1]);
                }
                return describe_column(design.basis[c]);
            };
            throw std::invalid_argument("rank-deficient fit design on the window: columns " +
                                        name(ca) + " and " + name(cb) + " are collinear");
        }
        Eigen::VectorXd coef = qr.solve(b);
        double signal = b.norm();
        double residual = (a * coef - b).norm();
        row.coefficients.assign(coef.data(), coef.data() + coef.size());
        row.residual_ratio = signal > 0.0 ? residual / signal : 0.0;

        // log detection: refit without the log columns and compare residuals
        std::vector<int> keep;
        bool have_log = false;
        int offset = design.constant ? 1 : 0;
        if (design.constant) keep.push_back(0);
        for (size_t k = 0; k < design.basis.size(); ++k) {
            if (design.basis[k].log_power == 1)
                have_log = true;
            else
                keep.push_back(static_cast<int>(k) + offset);
        }
        if (have_log && !keep.empty()) {
            Eigen::MatrixXd a0(a.rows(), keep.size());
            for (size_t k = 0; k < keep.size(); ++k) a0.col(k) = a.col(keep[k]);
            double res0 = (a0 * a0.colPivHouseholderQr().solve(b) - b).norm();
            row.log_detected = residual > 0.0 && res0 / residual >= 10.0;
            for (size_t k = 0; k < design.basis.size(); ++k)
                if (design.basis[k].log_power == 1)
                    row.log_coefficient = coef[static_cast<int>(k) + offset];
        }

        // exponent extraction and match flag against the leading prediction.
        // The constant branch is offset by the tip value first: the grid
        // truncation sits well below the window, so u(x_min) estimates the
        // constant without absorbing contamination from the window edge the
        // way the joint least-squares coefficient does.
        std::optional<double> subtract;
        if (design.constant) subtract = field.values(field.grid.n, m);
        row.fitted = fit_exponent(field.grid, field.values.col(m), window, subtract);
        if (!design.basis.empty()) {
            double lead = 1e300;
            for (const auto& s : design.basis) lead = std::min(lead, s.exponent());
            row.predicted_exponent = lead;
            row.has_prediction = true;
            row.tolerance = match_tolerance(lead);
            row.match = row.fitted.has_signal &&
                        std::abs(row.fitted.exponent - lead) <= row.tolerance;
        }
        report.rows.push_back(row);
    }
    return report;
}

std::vector<FitReport> compare(const SolveResult& result, const Geometry& geo,
                               const std::vector<double>& times, const FitWindow& window) {
    auto predicted =
        bilaplacian_domain_asymptotics(geo.spec.n, geo.gamma, eigen_data(geo.spec)).basis;
    std::vector<FitReport> reports;
    for (double t : times) {
        const Snapshot* found = nullptr;
        for (const auto& snap : result.snapshots)
            if (std::abs(snap.time - t) <= 1e-9) found = &snap;
        if (!found) {
            std::ostringstream os;
            os << "no snapshot at t = " << t << "; available times:";
            for (const auto& snap : result.snapshots) os << " " << snap.time;
            throw std::invalid_argument(os.str());
        }
        FitReport rep = fit_expansion(found->field, predicted, true, window);
        rep.time = found->time;
        reports.push_back(rep);
    }
    return reports;
}

}  // namespace conekit
