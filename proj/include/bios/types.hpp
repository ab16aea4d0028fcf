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

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace bios {

using cd = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr cd kJ{0.0, 1.0};

/// Which side of the surface a user sits on. Reflection-side users see only
/// the first layer; refraction-side users see both layers and the coupling L.
enum class Side { fle, fra };

inline const char *to_string(Side s) { return s == Side::fle ? "fle" : "fra"; }

/// Sum of |x_ij| over all entries.
inline double l1_norm(const CMat &x) { return x.cwiseAbs().sum(); }

/// Frobenius inner product <A, B> = tr(A^H B).
inline cd frob_inner(const CMat &a, const CMat &b) {
  return (a.array().conjugate() * b.array()).sum();
}

inline void require(bool cond, const std::string &msg) {
  if (!cond) throw std::invalid_argument(msg);
}

inline void require_same_shape(const CMat &a, const CMat &b, const char *what) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument(std::string(what) + ": shape mismatch (" +
                                std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                                " vs " + std::to_string(b.rows()) + "x" +
                                std::to_string(b.cols()) + ")");
}

} // namespace bios
