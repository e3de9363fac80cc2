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
#include "ictmsav/io.hpp"

#include "ictmsav/error.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace ictmsav {

namespace {

std::ifstream open_in(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_out(const std::string &path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw IoError("cannot open '" + path + "' for writing");
  return out;
}

// Next whitespace-delimited header token, skipping '#' comments.
std::string pgm_token(std::istream &in, const std::string &path) {
  std::string tok;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n')
        ;
      continue;
    }
    if (std::isspace(ch)) {
      if (!tok.empty())
        return tok;
      continue;
    }
    tok.push_back(static_cast<char>(ch));
  }
  if (tok.empty())
    throw IoError("'" + path + "': truncated PGM header");
  return tok;
}

int parse_header_int(const std::string &tok, const std::string &path, const char *what) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(tok, &used);
    if (used != tok.size())
      throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception &) {
    throw IoError("'" + path + "': bad PGM " + what + " '" + tok + "'");
  }
}

void put_u32le(std::ostream &out, std::uint32_t v) {
  const std::array<char, 4> b{static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                              static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(b.data(), 4);
}

std::uint32_t get_u32le(const unsigned char *p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

} // namespace

ScalarField read_pgm(const std::string &path) {
  auto in = open_in(path);
  if (pgm_token(in, path) != "P5")
    throw IoError("'" + path + "': not a binary PGM (expected magic P5)");
  const int w = parse_header_int(pgm_token(in, path), path, "width");
  const int h = parse_header_int(pgm_token(in, path), path, "height");
  const int maxval = parse_header_int(pgm_token(in, path), path, "maxval");
  if (w < 1 || h < 1)
    throw IoError("'" + path + "': PGM dimensions must be positive");
  if (maxval < 1 || maxval > 255)
    throw IoError("'" + path + "': only 8-bit PGM (maxval <= 255) is supported");
  // pgm_token consumed the single whitespace byte after maxval.
  std::vector<unsigned char> bytes(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
  in.read(reinterpret_cast<char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(bytes.size()))
    throw IoError("'" + path + "': truncated PGM pixel data");
  std::vector<double> values(bytes.begin(), bytes.end());
  return ScalarField(w, h, std::move(values));
}

void write_pgm(const std::string &path, const ScalarField &field) {
  auto out = open_out(path);
  out << "P5\n" << field.width() << " " << field.height() << "\n255\n";
  std::vector<unsigned char> bytes(field.size());
  for (std::size_t i = 0; i < field.size(); ++i) {
    const double v = std::isfinite(field[i]) ? std::clamp(field[i], 0.0, 255.0) : 0.0;
    bytes[i] = static_cast<unsigned char>(std::lround(v));
  }
  out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out)
    throw IoError("failed writing '" + path + "'");
}

ScalarField read_raster(const std::string &path) {
  auto in = open_in(path);
  std::array<unsigned char, 16> header{};
  in.read(reinterpret_cast<char *>(header.data()), 16);
  if (in.gcount() != 16 || std::memcmp(header.data(), kRasterMagic, 8) != 0)
    throw IoError("'" + path + "': not an ictmsav raster");
  const std::uint32_t w = get_u32le(header.data() + 8);
  const std::uint32_t h = get_u32le(header.data() + 12);
  if (w < 1 || h < 1 || w > (1u << 20) || h > (1u << 20))
    throw IoError("'" + path + "': implausible raster dimensions");
  const std::size_t n = static_cast<std::size_t>(w) * h;
  std::vector<unsigned char> raw(n * 8);
  in.read(reinterpret_cast<char *>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size()))
    throw IoError("'" + path + "': truncated raster data");
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t bits = 0;
    for (int k = 7; k >= 0; --k)
      bits = (bits << 8) | raw[i * 8 + static_cast<std::size_t>(k)];
    values[i] = std::bit_cast<double>(bits);
  }
  return ScalarField(static_cast<int>(w), static_cast<int>(h), std::move(values));
}

void write_raster(const std::string &path, const ScalarField &field) {
  auto out = open_out(path);
  out.write(kRasterMagic, 8);
  put_u32le(out, static_cast<std::uint32_t>(field.width()));
  put_u32le(out, static_cast<std::uint32_t>(field.height()));
  std::vector<char> raw(field.size() * 8);
  for (std::size_t i = 0; i < field.size(); ++i) {
    const auto bits = std::bit_cast<std::uint64_t>(field[i]);
    for (int k = 0; k < 8; ++k)
      raw[i * 8 + static_cast<std::size_t>(k)] = static_cast<char>((bits >> (8 * k)) & 0xff);
  }
  out.write(raw.data(), static_cast<std::streamsize>(raw.size()));
  if (!out)
    throw IoError("failed writing '" + path + "'");
}

ScalarField read_image(const std::string &path) {
  char magic[8] = {};
  {
    auto in = open_in(path);
    in.read(magic, 8);
  }
  if (std::memcmp(magic, kRasterMagic, 8) == 0)
    return read_raster(path);
  if (magic[0] == 'P' && magic[1] == '5')
    return read_pgm(path);
  throw IoError("'" + path + "': unrecognized image format (expected binary PGM or ictmsav raster)");
}

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void inner_rows(std::ostringstream &os, const InnerLog &log, const std::string &outer) {
  for (std::size_t j = 0; j < log.steps.size(); ++j) {
    const auto &s = log.steps[j];
    os << outer << ',' << (j + 1) << ",,,,,,," << num(s.z_sq) << ',' << num(s.xi) << ",," << num(s.err2) << '\n';
  }
}

} // namespace

std::string energy_csv(const IterationLog &log) {
  std::ostringstream os;
  os << kEnergyCsvHeader << '\n';
  for (std::size_t k = 0; k < log.outer.size(); ++k) {
    const auto &r = log.outer[k];
    const std::string outer = std::to_string(k + 1);
    inner_rows(os, r.inner, outer);
    os << outer << ",," << num(r.energy.fit) << ',' << num(r.energy.length) << ',' << num(r.energy.idiv) << ','
       << num(r.energy.tv) << ',' << num(r.energy.total) << ',' << num(r.u_energy_after) << ",,," << num(r.err1)
       << ",\n";
  }
  return os.str();
}

std::string energy_csv(const InnerLog &log) {
  std::ostringstream os;
  os << kEnergyCsvHeader << '\n';
  inner_rows(os, log, "1");
  return os.str();
}

void write_text(const std::string &path, const std::string &text) {
  auto out = open_out(path);
  out << text;
  if (!out)
    throw IoError("failed writing '" + path + "'");
}

std::string read_text(const std::string &path) {
  auto in = open_in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

} // namespace ictmsav
