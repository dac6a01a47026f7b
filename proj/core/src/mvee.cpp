#include <algorithm>
#include <cmath>
#include <limits>

#include "polymesh/error.hpp"
#include "polymesh/geometry.hpp"

namespace polymesh::geometry {

// Khachiyan's barycentric coordinate ascent with Todd-Yildirim away steps.
// Works on the lifted points q_j = (p_j, 1) in R^{d+1}; the stopping rule is
// the usual (1 + tol) optimality gap on the weighted Mahalanobis norms.
EnclosingEllipsoid minimum_volume_ellipsoid(const PointCloud& points, double tol, int max_iterations) {
    const int d = points.dim();
    const auto n = static_cast<Eigen::Index>(points.size());
    if (n < d + 1) throw FlatnessError("too few points for an enclosing ellipsoid");

    Mat Q(d + 1, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        Q.block(0, j, d, 1) = points.point(static_cast<std::size_t>(j));
        Q(d, j) = 1.0;
    }
    Vec u = Vec::Constant(n, 1.0 / static_cast<double>(n));
    const double dd = d + 1.0;

    int it = 0;
    Vec M(n);
    for (; it < max_iterations; ++it) {
        const Mat X = Q * u.asDiagonal() * Q.transpose();
        Eigen::LDLT<Mat> ldlt(X);
        if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > 1e-14 * ldlt.vectorD().maxCoeff()))
            throw FlatnessError("support sample spans a lower-dimensional set");
        const Mat S = ldlt.solve(Q);
        M = (Q.array() * S.array()).colwise().sum().transpose();

        Eigen::Index jmax = 0;
        const double mmax = M.maxCoeff(&jmax);
        Eigen::Index jmin = -1;
        double mmin = std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < n; ++j) {
            if (u[j] > 0.0 && M[j] < mmin) {
                mmin = M[j];
                jmin = j;
            }
        }
        const double eps_plus = mmax / dd - 1.0;
        const double eps_minus = jmin >= 0 ? 1.0 - mmin / dd : 0.0;
        if (std::max(eps_plus, eps_minus) <= tol) break;

        if (eps_plus >= eps_minus) {
            const double step = (mmax - dd) / (dd * (mmax - 1.0));
            u *= (1.0 - step);
            u[jmax] += step;
        } else {
            double step = (dd - mmin) / (dd * (mmin - 1.0));
            step = std::min(step, u[jmin] / (1.0 - u[jmin]));
            u *= (1.0 + step);
            u[jmin] -= step;
            if (u[jmin] < 0.0) u[jmin] = 0.0;
        }
    }

    const Mat P = Q.topRows(d);
    const Vec c = P * u;
    const Mat cov = P * u.asDiagonal() * P.transpose() - c * c.transpose();
    Mat A = cov.fullPivLu().inverse() / static_cast<double>(d);
    A = 0.5 * (A + A.transpose());

    // Inflate slightly so every sample point is enclosed.
    double worst = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        const Vec w = P.col(j) - c;
        worst = std::max(worst, w.dot(A * w));
    }
    if (worst > 1.0) A /= worst;
    return {c, A, it};
}

}  // namespace polymesh::geometry
