// Generated by gen_stokes_mms.py; unit box (0,1)^2 x (-1,0).
#pragma once
#include <cmath>

namespace mms {

constexpr double kPi = 3.14159265358979323846;

inline double velocity(int q, double x, double y, double z) {
  if (q == 0) return 6*kPi*pow(z + 1, 2)*pow(sin(kPi*x), 2)*sin(kPi*y)*cos(kPi*y) - 2*(2*z + 2)*pow(sin(kPi*x), 2)*pow(sin(kPi*y), 2);
  if (q == 1) return -6*kPi*pow(z + 1, 2)*sin(kPi*x)*pow(sin(kPi*y), 2)*cos(kPi*x) + (2*z + 2)*pow(sin(kPi*x), 2)*pow(sin(kPi*y), 2);
  if (q == 2) return -2*kPi*pow(z + 1, 2)*pow(sin(kPi*x), 2)*sin(kPi*y)*cos(kPi*y) + 4*kPi*pow(z + 1, 2)*sin(kPi*x)*pow(sin(kPi*y), 2)*cos(kPi*x);
  return 0.0;
}

inline double pressure(double x, double y, double z) { return exp(z)*sin(kPi*y)*cos(kPi*x); }

inline double force(int q, double x, double y, double z, double nu) {
  if (q == 0) return kPi*(4*nu*(2*kPi*(z + 1)*(-3*kPi*z*cos(kPi*y) + 2*sin(kPi*y) - 3*kPi*cos(kPi*y))*sin(kPi*y)*sin(kPi*(x + 1.0/4.0))*cos(kPi*(x + 1.0/4.0)) + 2*kPi*(z + 1)*((3.0/2.0)*kPi*(z + 1)*sin(2*kPi*y) - pow(sin(kPi*y), 2) + pow(cos(kPi*y), 2))*pow(sin(kPi*x), 2) - 3*pow(sin(kPi*x), 2)*sin(kPi*y)*cos(kPi*y)) - exp(z)*sin(kPi*x)*sin(kPi*y));
  if (q == 1) return kPi*(-4*nu*(2*kPi*(z + 1)*(-3*kPi*z*cos(kPi*x) + sin(kPi*x) - 3*kPi*cos(kPi*x))*sin(kPi*x)*sin(kPi*(y + 1.0/4.0))*cos(kPi*(y + 1.0/4.0)) + kPi*(z + 1)*(3*kPi*(z + 1)*sin(2*kPi*x) - pow(sin(kPi*x), 2) + pow(cos(kPi*x), 2))*pow(sin(kPi*y), 2) - 3*sin(kPi*x)*pow(sin(kPi*y), 2)*cos(kPi*x)) + exp(z)*cos(kPi*x)*cos(kPi*y));
  if (q == 2) return 2*kPi*nu*(-pow(kPi, 2)*pow(z + 1, 2)*(3*cos(kPi*(x - 2*y)) + cos(kPi*(x + 2*y)))*sin(kPi*x) + pow(kPi, 2)*pow(z + 1, 2)*(3*cos(kPi*(2*x - y)) - cos(kPi*(2*x + y)))*sin(kPi*y) + (3*sin(kPi*(x - y)) - sin(kPi*(x + y)))*sin(kPi*x)*sin(kPi*y)) + exp(z)*sin(kPi*y)*cos(kPi*x);
  return 0.0;
}

// Fluid stress traction on the plate x3 = 0.
inline double traction(int q, double x, double y, double nu) {
  const double z = 0.0;
  if (q == 0) return nu*(-4*pow(kPi, 2)*pow(z + 1, 2)*pow(sin(kPi*x), 2)*pow(sin(kPi*y), 2) - 4*pow(kPi, 2)*pow(z + 1, 2)*sin(kPi*x)*sin(kPi*y)*cos(kPi*x)*cos(kPi*y) + 4*pow(kPi, 2)*pow(z + 1, 2)*pow(sin(kPi*y), 2)*pow(cos(kPi*x), 2) + 6*kPi*(2*z + 2)*pow(sin(kPi*x), 2)*sin(kPi*y)*cos(kPi*y) - 4*pow(sin(kPi*x), 2)*pow(sin(kPi*y), 2));
  if (q == 1) return nu*(2*pow(kPi, 2)*pow(z + 1, 2)*pow(sin(kPi*x), 2)*pow(sin(kPi*y), 2) - 2*pow(kPi, 2)*pow(z + 1, 2)*pow(sin(kPi*x), 2)*pow(cos(kPi*y), 2) + 8*pow(kPi, 2)*pow(z + 1, 2)*sin(kPi*x)*sin(kPi*y)*cos(kPi*x)*cos(kPi*y) - 6*kPi*(2*z + 2)*sin(kPi*x)*pow(sin(kPi*y), 2)*cos(kPi*x) + 2*pow(sin(kPi*x), 2)*pow(sin(kPi*y), 2));
  if (q == 2) return 2*nu*(-2*kPi*(2*z + 2)*pow(sin(kPi*x), 2)*sin(kPi*y)*cos(kPi*y) + 4*kPi*(2*z + 2)*sin(kPi*x)*pow(sin(kPi*y), 2)*cos(kPi*x)) - exp(z)*sin(kPi*y)*cos(kPi*x);
  return 0.0;
}

}  // namespace mms
