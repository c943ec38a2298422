#include "osmosis/expm.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace osmosis {
namespace {

using Eigen::MatrixXd;

// Diagonal Pade numerator coefficients and the matching 1-norm switch
// points of the scaling-and-squaring method (Higham 2005). The denominator
// reuses the same coefficients with alternating signs, so only the even/odd
// split below is needed.
constexpr double kTheta3 = 1.495585217958292e-2;
constexpr double kTheta5 = 2.539398330063230e-1;
constexpr double kTheta7 = 9.504178996162932e-1;
constexpr double kTheta9 = 2.097847961257068e0;
constexpr double kTheta13 = 5.371920351148152e0;

MatrixXd pade_low(const MatrixXd& a, const std::vector<double>& b) {
  // U = A * (sum over odd k of b[k] A^{k-1}), V = sum over even k.
  const auto n = a.rows();
  const MatrixXd id = MatrixXd::Identity(n, n);
  const MatrixXd a2 = a * a;
  MatrixXd u_poly = b[1] * id;
  MatrixXd v = b[0] * id;
  MatrixXd power = id;
  for (std::size_t k = 2; k < b.size(); k += 2) {
    power = power * a2;  // A^{k}
    v += b[k] * power;
    u_poly += b[k + 1] * power;
  }
  const MatrixXd u = a * u_poly;
  return (v - u).partialPivLu().solve(v + u);
}

MatrixXd pade13(const MatrixXd& a) {
  static const double b[] = {64764752532480000.0,
                             32382376266240000.0,
                             7771770303897600.0,
                             1187353796428800.0,
                             129060195264000.0,
                             10559470521600.0,
                             670442572800.0,
                             33522128640.0,
                             1323241920.0,
                             40840800.0,
                             960960.0,
                             16380.0,
                             182.0,
                             1.0};
  const auto n = a.rows();
  const MatrixXd id = MatrixXd::Identity(n, n);
  const MatrixXd a2 = a * a;
  const MatrixXd a4 = a2 * a2;
  const MatrixXd a6 = a2 * a4;
  const MatrixXd u =
      a * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 +
           b[3] * a2 + b[1] * id);
  const MatrixXd v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 +
                     b[4] * a4 + b[2] * a2 + b[0] * id;
  return (v - u).partialPivLu().solve(v + u);
}

}  // namespace

MatrixXd dense_operator(const DirectionalOperator& a1,
                        const DirectionalOperator& a2) {
  if (a1.dir != Direction::X || a2.dir != Direction::Y ||
      a1.nx != a2.nx || a1.ny != a2.ny)
    throw std::invalid_argument("dense_operator: need matching X and Y parts");
  const std::size_t nx = a1.nx, n = a1.size();
  MatrixXd a = MatrixXd::Zero(static_cast<Eigen::Index>(n),
                              static_cast<Eigen::Index>(n));
  for (std::size_t l = 0; l < n; ++l) {
    const auto r = static_cast<Eigen::Index>(l);
    a(r, r) = a1.di[l] + a2.di[l];
    if (a1.lo[l] != 0.0) a(r, r - 1) = a1.lo[l];
    if (a1.hi[l] != 0.0) a(r, r + 1) = a1.hi[l];
    if (a2.lo[l] != 0.0) a(r, r - static_cast<Eigen::Index>(nx)) = a2.lo[l];
    if (a2.hi[l] != 0.0) a(r, r + static_cast<Eigen::Index>(nx)) = a2.hi[l];
  }
  return a;
}

MatrixXd dense_expm(const MatrixXd& a) {
  if (a.rows() != a.cols())
    throw std::invalid_argument("dense_expm: matrix must be square");
  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();

  if (norm1 <= kTheta13) {
    static const std::vector<double> b3 = {120.0, 60.0, 12.0, 1.0};
    static const std::vector<double> b5 = {30240.0, 15120.0, 3360.0,
                                           420.0,   30.0,    1.0};
    static const std::vector<double> b7 = {17297280.0, 8648640.0, 1995840.0,
                                           277200.0,   25200.0,   1512.0,
                                           56.0,       1.0};
    static const std::vector<double> b9 = {
        17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
        2162160.0,     110880.0,     3960.0,       90.0,        1.0};
    if (norm1 <= kTheta3) return pade_low(a, b3);
    if (norm1 <= kTheta5) return pade_low(a, b5);
    if (norm1 <= kTheta7) return pade_low(a, b7);
    if (norm1 <= kTheta9) return pade_low(a, b9);
    return pade13(a);
  }

  const int s =
      static_cast<int>(std::ceil(std::log2(norm1 / kTheta13)));
  MatrixXd x = pade13(a / std::pow(2.0, s));
  for (int i = 0; i < s; ++i) x = x * x;
  return x;
}

std::vector<double> dense_expm_apply(const MatrixXd& a,
                                     std::span<const double> f, double T,
                                     std::size_t cap) {
  const std::size_t n = static_cast<std::size_t>(a.rows());
  if (n > cap)
    throw std::runtime_error("dense_expm_apply: N = " + std::to_string(n) +
                             " exceeds the oracle cap " + std::to_string(cap));
  if (f.size() != n)
    throw std::invalid_argument("dense_expm_apply: vector length mismatch");
  const MatrixXd e = dense_expm(T * a);
  Eigen::Map<const Eigen::VectorXd> fv(f.data(),
                                       static_cast<Eigen::Index>(n));
  const Eigen::VectorXd y = e * fv;
  return std::vector<double>(y.data(), y.data() + n);
}

}  // namespace osmosis
