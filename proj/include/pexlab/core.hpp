#ifndef PEXLAB_CORE_HPP
#define PEXLAB_CORE_HPP

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace pexlab {

using cplx = std::complex<double>;
using Vec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;
using Mat = Eigen::MatrixXcd;
using RMat = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<cplx>;

inline constexpr cplx iu{0.0, 1.0};

// max |entry|, the norm used by residual gates throughout
inline double max_abs(const Mat& a) { return a.cwiseAbs().maxCoeff(); }
inline double max_abs(const Vec& a) { return a.size() ? a.cwiseAbs().maxCoeff() : 0.0; }

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace pexlab

#endif
