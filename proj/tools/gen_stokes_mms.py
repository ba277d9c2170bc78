"""Writes detail/stokes_mms.hpp: a solenoidal velocity with no-slip side and bottom
walls, a smooth pressure, and the matching volume force for -nu Lap v + grad p.

Run from the repository root:
    python3 tools/gen_stokes_mms.py > include/fsilab/detail/stokes_mms.hpp
"""
import sympy as sp

x, y, z, nu = sp.symbols("x y z nu", real=True)
phi = sp.sin(sp.pi * x) ** 2 * sp.sin(sp.pi * y) ** 2 * (z + 1) ** 2
e = (1, 2, 3)
grad = [sp.diff(phi, s) for s in (x, y, z)]
v = [grad[1] * e[2] - grad[2] * e[1], grad[2] * e[0] - grad[0] * e[2], grad[0] * e[1] - grad[1] * e[0]]
p = sp.cos(sp.pi * x) * sp.sin(sp.pi * y) * sp.exp(z)
assert sp.simplify(sum(sp.diff(v[q], s) for q, s in enumerate((x, y, z)))) == 0
g = [sp.simplify(-nu * sum(sp.diff(v[q], s, 2) for s in (x, y, z)) + sp.diff(p, s)) for q, s in enumerate((x, y, z))]


def cxx(expr):
    return sp.ccode(expr).replace("M_PI", "kPi")


print("// Generated by gen_stokes_mms.py; unit box (0,1)^2 x (-1,0).")
print("#pragma once\n#include <cmath>\n\nnamespace mms {\n")
print("constexpr double kPi = 3.14159265358979323846;\n")
print("inline double velocity(int q, double x, double y, double z) {")
for q in range(3):
    print(f"  if (q == {q}) return {cxx(v[q])};")
print("  return 0.0;\n}\n")
print(f"inline double pressure(double x, double y, double z) {{ return {cxx(p)}; }}\n")
print("inline double force(int q, double x, double y, double z, double nu) {")
for q in range(3):
    print(f"  if (q == {q}) return {cxx(g[q])};")
print("  return 0.0;\n}\n")
T = [nu * (sp.diff(v[0], z) + sp.diff(v[2], x)), nu * (sp.diff(v[1], z) + sp.diff(v[2], y)),
     2 * nu * sp.diff(v[2], z) - p]
print("// Fluid stress traction on the plate x3 = 0.")
print("inline double traction(int q, double x, double y, double nu) {")
print("  const double z = 0.0;")
for q in range(3):
    print(f"  if (q == {q}) return {cxx(T[q])};")
print("  return 0.0;\n}\n")
print("}  // namespace mms")
