// Template visitors over the fluid grid stencils; included by grid.hpp.
#pragma once

namespace fsilab::ops {

template <class F>
void for_each_laplacian_pair(const FluidGrid& g, F&& f) {
  for (int q = 0; q < 3; ++q) {
    const auto& L = g.component(q);
    for (int d = 0; d < 3; ++d) {
      std::array<int, 3> stride{1, L.ext[0], L.ext[0] * L.ext[1]};
      for (int k = 0; k < L.ext[2]; ++k)
        for (int j = 0; j < L.ext[1]; ++j)
          for (int i = 0; i < L.ext[0]; ++i) {
            const std::array<int, 3> idx{i, j, k};
            if (idx[d] + 1 >= L.ext[d]) continue;
            double coef = 1.0 / g.gap(q, d, idx[d]);
            for (int e = 0; e < 3; ++e)
              if (e != d) coef *= g.dual_width(q, e, idx[e]);
            if (coef == 0.0) continue;
            const Index a = L.index(i, j, k);
            f(a, a + stride[d], coef);
          }
    }
  }
}

template <class F>
void for_each_div_entry(const FluidGrid& g, F&& f) {
  const int nx = g.n(0), ny = g.n(1), nz = g.n(2);
  for (int ck = 0; ck < nz; ++ck)
    for (int cj = 0; cj < ny; ++cj)
      for (int ci = 0; ci < nx; ++ci) {
        const Index c = g.cell(ci, cj, ck);
        const auto& u = g.component(0);
        const auto& v = g.component(1);
        const auto& w = g.component(2);
        f(c, u.index(ci + 1, cj + 1, ck + 1), g.area(0));
        f(c, u.index(ci, cj + 1, ck + 1), -g.area(0));
        f(c, v.index(ci + 1, cj + 1, ck + 1), g.area(1));
        f(c, v.index(ci + 1, cj, ck + 1), -g.area(1));
        f(c, w.index(ci + 1, cj + 1, ck + 1), g.area(2));
        f(c, w.index(ci + 1, cj + 1, ck), -g.area(2));
      }
}

}  // namespace fsilab::ops
