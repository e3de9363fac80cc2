/*=========================================================================
 *
 *  Copyright The ictmsav Authors
 *
 *  Licensed under the Apache License, Version 2.0 (the "License");
 *  you may not use this file except in compliance with the License.
 *  You may obtain a copy of the License at
 *
 *         http://www.apache.org/licenses/LICENSE-2.0.txt
 *
 *  Unless required by applicable law or agreed to in writing, software
 *  distributed under the License is distributed on an "AS IS" BASIS,
 *  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *  See the License for the specific language governing permissions and
 *  limitations under the License.
 *
 *=========================================================================*/
#pragma once

#include "ictmsav/field.hpp"
#include "ictmsav/solvers.hpp"

#include <string>

namespace ictmsav {

/// Binary 8-bit PGM (P5). Values are returned as-is (0..maxval).
ScalarField read_pgm(const std::string &path);
/// Writes P5 with maxval 255; values are rounded to nearest and clamped to
/// [0, 255].
void write_pgm(const std::string &path, const ScalarField &field);

/// Float raster: 8-byte magic "ICTMRAS1", uint32 width, uint32 height (both
/// little-endian), then width*height little-endian IEEE-754 doubles,
/// row-major.
inline constexpr char kRasterMagic[8] = {'I', 'C', 'T', 'M', 'R', 'A', 'S', '1'};
ScalarField read_raster(const std::string &path);
void write_raster(const std::string &path, const ScalarField &field);

/// Dispatches on the file's magic bytes (P5 or raster).
ScalarField read_image(const std::string &path);

/// Header of the energy log, in column order.
inline constexpr const char *kEnergyCsvHeader =
    "outer_iter,inner_iter,E_fit,E_len,E_idiv,E_tv,E_total,E_u,z_sq,xi,err1,err2";

/// One row per inner RMSAV step (z_sq, xi, err2) followed by one row per
/// outer iteration (energies, E_u, err1). Fields that do not apply are empty.
std::string energy_csv(const IterationLog &log);
std::string energy_csv(const InnerLog &log);

void write_text(const std::string &path, const std::string &text);
std::string read_text(const std::string &path);

} // namespace ictmsav
