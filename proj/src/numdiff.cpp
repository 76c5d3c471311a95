#include "exoticflow/numdiff.hpp"

namespace exoticflow {

Mat fd_jacobian(const VecMap& map, const Vec& point, double step) {
  const int cols = static_cast<int>(point.size());
  Mat J;
  Vec xp = point;
  Vec xm = point;
  for (int j = 0; j < cols; ++j) {
    xp[j] = point[j] + step;
    xm[j] = point[j] - step;
    Vec d = (map(xp) - map(xm)) / (2.0 * step);
    if (j == 0) J.resize(d.size(), cols);
    J.col(j) = d;
    xp[j] = point[j];
    xm[j] = point[j];
  }
  return J;
}

Tensor fd_hessian(const VecMap& map, const Vec& point, double step) {
  const int k = static_cast<int>(point.size());
  const Vec f0 = map(point);
  const int out = static_cast<int>(f0.size());
  Tensor H({out, k, k});
  const double h2 = step * step;
  for (int i = 0; i < k; ++i) {
    for (int j = i; j < k; ++j) {
      Vec val;
      if (i == j) {
        Vec xp = point, xm = point;
        xp[i] += step;
        xm[i] -= step;
        val = (map(xp) - 2.0 * f0 + map(xm)) / h2;
      } else {
        Vec pp = point, pm = point, mp = point, mm = point;
        pp[i] += step; pp[j] += step;
        pm[i] += step; pm[j] -= step;
        mp[i] -= step; mp[j] += step;
        mm[i] -= step; mm[j] -= step;
        val = (map(pp) - map(pm) - map(mp) + map(mm)) / (4.0 * h2);
      }
      for (int o = 0; o < out; ++o) {
        H(o, i, j) = val[o];
        H(o, j, i) = val[o];
      }
    }
  }
  return H;
}

}  // namespace exoticflow
