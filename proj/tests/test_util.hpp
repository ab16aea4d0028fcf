// SPDX-License-Identifier: Apache-2.0
//
// bios-htt: channel estimation and beamforming for bilayer omni-surfaces
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------


// Helpers shared by the unit tests and the acceptance runner.

#pragma once

#include "bios/bios.hpp"

#include <functional>

namespace bios::testing {

/// Central-difference Wirtinger gradient d f / d conj(X) = (df/dRe + j df/dIm) / 2.
inline CMat fd_wirtinger(const std::function<double(const CMat &)> &f, const CMat &x,
                         double h = 1e-6) {
  CMat g(x.rows(), x.cols());
  CMat xp = x;
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const cd orig = x(i, j);
      xp(i, j) = orig + cd{h, 0};
      const double fr_p = f(xp);
      xp(i, j) = orig - cd{h, 0};
      const double fr_m = f(xp);
      xp(i, j) = orig + cd{0, h};
      const double fi_p = f(xp);
      xp(i, j) = orig - cd{0, h};
      const double fi_m = f(xp);
      xp(i, j) = orig;
      g(i, j) = 0.5 * cd{(fr_p - fr_m) / (2 * h), (fi_p - fi_m) / (2 * h)};
    }
  return g;
}

inline double rel_err(const CMat &a, const CMat &b) {
  const double d = std::max(a.norm(), b.norm());
  return d == 0 ? 0.0 : (a - b).norm() / d;
}

inline ArrayGeometry toy_geometry(int n_bs, int n_ue, int m_x, int m_y) {
  ArrayGeometry g;
  g.n_bs = n_bs;
  g.n_ue = n_ue;
  g.m_x = m_x;
  g.m_y = m_y;
  return g;
}

} // namespace bios::testing
