#include "polymesh/lp.hpp"

#include <cmath>
#include <limits>

namespace polymesh::lp {
namespace {

constexpr double kEps = 1e-11;

// Tableau layout follows the classic dictionary form: rows 0..m-1 are
// constraints, row m is the objective, row m+1 the phase-one objective.
// Column n holds the auxiliary variable, column n+1 the right-hand side.
class Tableau {
  public:
    Tableau(const Mat& A, const Vec& b, const Vec& c)
        : m_(static_cast<int>(b.size())), n_(static_cast<int>(c.size())),
          basis_(m_), nonbasis_(n_ + 1), d_(m_ + 2, n_ + 2) {
        d_.setZero();
        d_.topLeftCorner(m_, n_) = A;
        for (int i = 0; i < m_; ++i) {
            basis_[i] = n_ + i;
            d_(i, n_) = -1.0;
            d_(i, n_ + 1) = b[i];
        }
        for (int j = 0; j < n_; ++j) {
            nonbasis_[j] = j;
            d_(m_, j) = -c[j];
        }
        nonbasis_[n_] = -1;
        d_(m_ + 1, n_) = 1.0;
    }

    Result solve() {
        Result res;
        int r = 0;
        for (int i = 1; i < m_; ++i)
            if (d_(i, n_ + 1) < d_(r, n_ + 1)) r = i;
        if (m_ > 0 && d_(r, n_ + 1) < -kEps) {
            pivot(r, n_);
            if (!run(1) || d_(m_ + 1, n_ + 1) < -1e-9) {
                res.status = Status::Infeasible;
                return res;
            }
            for (int i = 0; i < m_; ++i) {
                if (basis_[i] == -1) {
                    int s = -1;
                    for (int j = 0; j <= n_; ++j)
                        if (s == -1 || d_(i, j) < d_(i, s) || (d_(i, j) == d_(i, s) && nonbasis_[j] < nonbasis_[s]))
                            s = j;
                    pivot(i, s);
                }
            }
        }
        if (!run(2)) {
            res.status = Status::Unbounded;
            res.objective = std::numeric_limits<double>::infinity();
            return res;
        }
        res.status = Status::Optimal;
        res.x = Vec::Zero(n_);
        for (int i = 0; i < m_; ++i)
            if (basis_[i] >= 0 && basis_[i] < n_) res.x[basis_[i]] = d_(i, n_ + 1);
        res.objective = d_(m_, n_ + 1);
        return res;
    }

  private:
    void pivot(int r, int s) {
        const double inv = 1.0 / d_(r, s);
        for (int i = 0; i < m_ + 2; ++i) {
            if (i == r) continue;
            const double f = d_(i, s) * inv;
            if (f == 0.0) continue;
            for (int j = 0; j < n_ + 2; ++j)
                if (j != s) d_(i, j) -= d_(r, j) * f;
            d_(i, s) = -f;
        }
        for (int j = 0; j < n_ + 2; ++j)
            if (j != s) d_(r, j) *= inv;
        d_(r, s) = inv;
        std::swap(basis_[r], nonbasis_[s]);
    }

    bool run(int phase) {
        const int x = phase == 1 ? m_ + 1 : m_;
        for (int guard = 0; guard < 100000; ++guard) {
            int s = -1;
            for (int j = 0; j <= n_; ++j) {
                if (phase == 2 && nonbasis_[j] == -1) continue;
                if (s == -1 || d_(x, j) < d_(x, s) || (d_(x, j) == d_(x, s) && nonbasis_[j] < nonbasis_[s])) s = j;
            }
            if (d_(x, s) > -kEps) return true;
            int r = -1;
            for (int i = 0; i < m_; ++i) {
                if (d_(i, s) < kEps) continue;
                if (r == -1) {
                    r = i;
                    continue;
                }
                const double lhs = d_(i, n_ + 1) / d_(i, s);
                const double rhs = d_(r, n_ + 1) / d_(r, s);
                if (lhs < rhs || (lhs == rhs && basis_[i] < basis_[r])) r = i;
            }
            if (r == -1) return false;
            pivot(r, s);
        }
        return true;
    }

    int m_, n_;
    std::vector<int> basis_, nonbasis_;
    Mat d_;
};

}  // namespace

Result maximize(const Mat& A, const Vec& b, const Vec& c) {
    Tableau t(A, b, c);
    return t.solve();
}

Result maximize_free(const Mat& A, const Vec& b, const Vec& c) {
    const Eigen::Index n = c.size();
    Mat split(A.rows(), 2 * n);
    split << A, -A;
    Vec c2(2 * n);
    c2 << c, -c;
    Result r = maximize(split, b, c2);
    if (r.status == Status::Optimal) r.x = (r.x.head(n) - r.x.tail(n)).eval();
    return r;
}

}  // namespace polymesh::lp
