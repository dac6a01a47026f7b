#pragma once

#include <vector>

#include "polymesh/types.hpp"

namespace polymesh::lp {

enum class Status { Optimal, Infeasible, Unbounded };

struct Result {
    Status status = Status::Infeasible;
    double objective = 0.0;
    Vec x;
};

// Dense two-phase simplex with Bland's rule for
//
//     maximize c.x  subject to  A x <= b,  x >= 0.
//
// Problems here are tiny (a few dozen rows), so a dense tableau is fine.
Result maximize(const Mat& A, const Vec& b, const Vec& c);

// Same, but with free (sign-unrestricted) variables.
Result maximize_free(const Mat& A, const Vec& b, const Vec& c);

}  // namespace polymesh::lp
