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


// Umbrella header.

#pragma once

#include "bios/types.hpp"
#include "bios/rng.hpp"
#include "bios/geometry.hpp"
#include "bios/signal.hpp"
#include "bios/manifold.hpp"
#include "bios/estimator.hpp"
#include "bios/beamforming.hpp"
#include "bios/config.hpp"
#include "bios/experiment.hpp"
