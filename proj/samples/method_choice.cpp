#include <iomanip>
#include <iostream>

#include "logmq/logmq.hpp"

int main()
{
  using namespace logmq;
  constexpr double tol = 1e-12;

  const Crossovers x = crossovers(tol);
  std::cout << "GL fastest below kappa ~ " << x.kappa_low << ", DE fastest above kappa ~ " << x.kappa_high
            << ", PGL in between\n\n";

  std::cout << std::setw(10) << "kappa" << std::setw(10) << "GL" << std::setw(10) << "PGL" << std::setw(10)
            << "DE" << std::setw(10) << "PDE" << "   best\n";
  for (double k : {10.0, 50.0, 1e3, 1e4, 1e5, 1e6, 1e8})
  {
    std::cout << std::setw(10) << k;
    for (Method m : {Method::GL, Method::PGL, Method::DE, Method::PDE})
      std::cout << std::setw(10) << std::setprecision(4) << effective_rate(m, k, tol);
    std::cout << "   " << to_string(fastest_method(k, tol)) << '\n';
  }
}
