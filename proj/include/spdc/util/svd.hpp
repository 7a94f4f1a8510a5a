#pragma once

#include <Eigen/Dense>
#include <vector>

namespace spdc::util {

// Singular values only (descending), via LAPACK divide-and-conquer. Input is
// taken by value because the backend overwrites it.
std::vector<double> singular_values(Eigen::MatrixXcd a);
std::vector<double> singular_values(Eigen::MatrixXd a);

}  // namespace spdc::util
