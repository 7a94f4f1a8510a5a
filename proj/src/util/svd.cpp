#include "spdc/util/svd.hpp"

#include <complex>
#include <stdexcept>

#define LAPACK_COMPLEX_CPP
#include <lapacke.h>

namespace spdc::util {

std::vector<double> singular_values(Eigen::MatrixXcd a) {
  const lapack_int m = lapack_int(a.rows()), n = lapack_int(a.cols());
  std::vector<double> s(size_t(std::min(m, n)));
  lapack_int info = LAPACKE_zgesdd(
      LAPACK_COL_MAJOR, 'N', m, n,
      reinterpret_cast<lapack_complex_double*>(a.data()), m, s.data(), nullptr, 1, nullptr, 1);
  if (info != 0)
    throw std::runtime_error("zgesdd failed with info = " + std::to_string(info));
  return s;
}

std::vector<double> singular_values(Eigen::MatrixXd a) {
  const lapack_int m = lapack_int(a.rows()), n = lapack_int(a.cols());
  std::vector<double> s(size_t(std::min(m, n)));
  lapack_int info =
      LAPACKE_dgesdd(LAPACK_COL_MAJOR, 'N', m, n, a.data(), m, s.data(), nullptr, 1, nullptr, 1);
  if (info != 0)
    throw std::runtime_error("dgesdd failed with info = " + std::to_string(info));
  return s;
}

}  // namespace spdc::util
