// log(A) b for the 1-D Laplacian tridiag(-1, 2, -1), n = 200, by plain and
// preconditioned Gauss-Legendre, with the adaptive schedule.

#include <cmath>
#include <iostream>
#include <memory>

#include "logmq/logmq.hpp"

int main()
{
  using namespace logmq;

  const Eigen::Index n = 200;
  auto a = std::make_shared<const SpdMatrix>(gen_tridiag(n, -1.0, 2.0, -1.0));
  const ScaledProblem problem = scale(a);
  std::cout << "kappa(A) = " << problem.kappa() << ", c = " << problem.c() << '\n';

  const Target target = Target::action(Vector::Constant(n, 1.0 / std::sqrt(static_cast<double>(n))));
  const Matrix reference = eig_logm(problem.c() * a->to_dense()).value * target.b();

  for (Method m : {Method::GL, Method::PGL})
  {
    const AdaptiveResult ar = adaptive_m(problem, m, 1e-12, target);
    const double err = (ar.result.value - reference).norm();
    const LogmResult unscaled = subtract_scaling(ar.result, problem.c(), target);
    std::cout << to_string(m) << ": " << ar.result.evaluations << " evaluations, |log(A~)b - ref| = " << err
              << ", (log(A) b)_1 = " << unscaled.value(0, 0) << '\n';
  }
}
