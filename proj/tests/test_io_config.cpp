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

#include "doctest.h"

#include "ictmsav/error.hpp"
#include "ictmsav/experiment.hpp"
#include "ictmsav/io.hpp"

#include "oracles.hpp"

#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

using namespace ictmsav;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("ictmsav_test_" + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const char *name) const { return (path / name).string(); }
};

} // namespace

TEST_CASE("pgm round trip rounds and clamps") {
  TempDir dir;
  const ScalarField f(3, 2, std::vector<double>{0, 12.4, 12.6, 255, 300, -4});
  write_pgm(dir / "a.pgm", f);
  const ScalarField g = read_pgm(dir / "a.pgm");
  CHECK(g == ScalarField(3, 2, std::vector<double>{0, 12, 13, 255, 255, 0}));
  CHECK(read_image(dir / "a.pgm") == g);
}

TEST_CASE("pgm header with comments") {
  TempDir dir;
  {
    std::ofstream out(dir / "c.pgm", std::ios::binary);
    out << "P5\n# made by hand\n2 1\n# another\n255\n";
    out.put(static_cast<char>(7)).put(static_cast<char>(200));
  }
  CHECK(read_pgm(dir / "c.pgm") == ScalarField(2, 1, std::vector<double>{7, 200}));
}

TEST_CASE("raster round trip is lossless") {
  TempDir dir;
  std::mt19937_64 rng(41);
  const ScalarField f = oracle::random_field(rng, 7, 3, -1e6, 1e6);
  write_raster(dir / "f.raster", f);
  CHECK(read_raster(dir / "f.raster") == f);
  CHECK(read_image(dir / "f.raster") == f);
  CHECK(fs::file_size(dir / "f.raster") == 16u + 21u * 8u);
}

TEST_CASE("malformed files") {
  TempDir dir;
  write_text(dir / "bad.pgm", "P2\n1 1\n255\n0\n");
  CHECK_THROWS_AS(read_pgm(dir / "bad.pgm"), IoError);
  write_text(dir / "short.pgm", "P5\n4 4\n255\nab");
  CHECK_THROWS_AS(read_pgm(dir / "short.pgm"), IoError);
  write_text(dir / "deep.pgm", "P5\n1 1\n65535\nab");
  CHECK_THROWS_AS(read_pgm(dir / "deep.pgm"), IoError);
  write_text(dir / "short.raster", std::string(kRasterMagic, 8) + "xx");
  CHECK_THROWS_AS(read_raster(dir / "short.raster"), IoError);
  write_text(dir / "junk", "hello");
  CHECK_THROWS_AS(read_image(dir / "junk"), IoError);
  CHECK_THROWS_AS(read_image(dir / "missing"), IoError);
  CHECK(read_text(dir / "junk") == "hello");
}

TEST_CASE("energy log layout") {
  IterationLog log;
  OuterRecord o;
  o.energy.total = 3.5;
  InnerRecord r;
  r.z_sq = 2.0;
  o.inner.steps = {r, r};
  log.outer = {o};
  const std::string csv = energy_csv(log);
  CHECK(csv.rfind(std::string(kEnergyCsvHeader) + "\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  const std::string line = csv.substr(csv.find('\n') + 1, csv.find('\n', csv.find('\n') + 1) - csv.find('\n') - 1);
  CHECK(std::count(line.begin(), line.end(), ',') == 11);
}

TEST_CASE("regions and init specs") {
  const auto regions = parse_regions("disk:10,12,5,200; rect:1,2,3,4,90,1 ; ring:8,8,2,4,30,0");
  REQUIRE(regions.size() == 3);
  CHECK(regions[0].phase == 0);
  CHECK(regions[1].shape == RegionShape::rect);
  CHECK(regions[1].value == 90);
  CHECK(parse_regions(format_regions(regions)).size() == 3);
  CHECK(format_regions(parse_regions(format_regions(regions))) == format_regions(regions));
  CHECK_THROWS_AS(parse_regions("blob:1,2,3,4"), ConfigError);
  CHECK_THROWS_AS(parse_regions("disk:1,2"), ConfigError);

  CHECK(InitSpec::parse("circle:4,5,3").to_string() == "circle:4,5,3");
  CHECK(InitSpec::parse("mask:/tmp/m.pgm").path == "/tmp/m.pgm");
  CHECK_THROWS_AS(InitSpec::parse("circle:1,2"), ConfigError);
  CHECK_THROWS_AS(InitSpec::parse("oval:1,2,3"), ConfigError);
  CHECK_THROWS_AS(InitSpec::parse("checkerboard:0"), ConfigError);
}

TEST_CASE("initial partitions") {
  ScalarField f(6, 4);
  for (std::size_t i = 0; i < f.size(); ++i)
    f[i] = static_cast<double>(i);
  const IndicatorSet two = make_initial_partition(InitSpec::parse("rect:0,0,2,2"), f, 2);
  CHECK(two.labels() == std::vector<int>{0, 0, 1, 1, 1, 1, 0, 0, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1});
  const IndicatorSet three = make_initial_partition(InitSpec::parse("rect:0,0,2,2"), f, 3);
  CHECK(three.labels()[2] == 1);
  CHECK(three.labels()[23] == 2);
  const IndicatorSet board = make_initial_partition(InitSpec::parse("checkerboard:2"), f, 2);
  CHECK(board.labels()[0] == 0);
  CHECK(board.labels()[2] == 1);

  TempDir dir;
  write_pgm(dir / "m.pgm", ScalarField(6, 4, std::vector<double>(24, 0.0)));
  ScalarField m(6, 4);
  m(5, 3) = 255;
  write_pgm(dir / "m.pgm", m);
  const IndicatorSet masked = make_initial_partition(InitSpec::parse(std::string("mask:") + (dir / "m.pgm")), f, 2);
  CHECK(masked.labels()[23] == 0);
  CHECK(masked.labels()[0] == 1);
  write_pgm(dir / "l.pgm", three.label_field());
  CHECK(make_initial_partition(InitSpec::parse(std::string("labels:") + (dir / "l.pgm")), f, 3) == three);
  write_pgm(dir / "small.pgm", ScalarField(2, 2));
  CHECK_THROWS_AS(make_initial_partition(InitSpec::parse(std::string("mask:") + (dir / "small.pgm")), f, 2),
                  ContractViolation);
}

TEST_CASE("synthetic images") {
  SynthSpec s;
  s.width = 20;
  s.height = 10;
  s.background = 30;
  s.regions = parse_regions("rect:2,2,4,3,180,0");
  s.bias = BiasKind::ramp;
  s.bias_min = 0.5;
  s.bias_max = 1.5;
  const SynthImage img = synth(s);
  CHECK(img.truth[0](2, 2) == 1);
  CHECK(img.truth[0](6, 2) == 0);
  CHECK(img.truth[0].sum() == 12);
  CHECK(img.bias(0, 5) == 0.5);
  CHECK(img.bias(19, 0) == 1.5);
  CHECK(img.clean(3, 3) == doctest::Approx(180 * img.bias(3, 3)));
  CHECK(img.clean(10, 8) == doctest::Approx(30 * img.bias(10, 8)));
  s.bias = BiasKind::bump;
  s.bias_min = 0.6;
  s.bias_max = 1.2;
  const SynthImage bump = synth(s);
  CHECK(bump.bias.max() <= 1.2);
  CHECK(bump.bias.min() >= 0.6);
  CHECK(bump.bias.max() / bump.bias.min() > 1.5);
  s.regions[0].phase = 4;
  CHECK_THROWS_AS(synth(s), ParameterError);
}

TEST_CASE("synthetic disk area and ramp profile") {
  SynthSpec s;
  s.width = 200;
  s.height = 150;
  s.background = 20;
  s.regions = parse_regions("disk:90,70,40,100,0");
  const SynthImage disk = synth(s);
  const double area = disk.truth[0].sum();
  CHECK(std::fabs(area - std::numbers::pi * 1600) < 2 * std::numbers::pi * 40);
  CHECK(synth(s).clean == synth(s).clean);

  s.regions.clear();
  s.bias = BiasKind::ramp;
  s.bias_min = 0.5;
  s.bias_max = 1.5;
  const SynthImage ramp = synth(s);
  for (int x = 0; x < s.width; ++x) {
    double col = 0;
    for (int y = 0; y < s.height; ++y)
      col += ramp.clean(x, y);
    REQUIRE(col / s.height == doctest::Approx(20 * (0.5 + double(x) / (s.width - 1))));
  }
}

TEST_CASE("config parse, get and manifest") {
  const ExperimentConfig cfg = ExperimentConfig::parse("# comment\n"
                                                       "synth.width = 32\n"
                                                       "synth.height=16\n"
                                                       "synth.regions = disk:8,8,4,200\n"
                                                       "noise.kind = gamma\n"
                                                       "noise.looks = 4\n"
                                                       "seed = 12\n"
                                                       "init = circle:8,8,2\n"
                                                       "gamma = 0.01\n"
                                                       "nu = 4\n"
                                                       "dt = 0.1\n"
                                                       "n_phases = 3\n");
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.params.gamma == 0.01);
  CHECK(cfg.params.lambdas.size() == 3);
  CHECK(cfg.get("dt") == "0.1");
  CHECK(cfg.get("synth.height") == "16");
  CHECK(cfg.get("noise.kind") == "gamma");
  const ExperimentConfig again = ExperimentConfig::parse(cfg.manifest());
  CHECK(again.manifest() == cfg.manifest());
  for (const auto &k : ExperimentConfig::keys())
    CHECK(again.get(k) == cfg.get(k));

  const ScalarField a = load_experiment_image(cfg);
  CHECK(a == load_experiment_image(again));
  CHECK(a.max() <= 255.0);
  CHECK(a.width() == 32);
}

TEST_CASE("config errors") {
  ExperimentConfig cfg;
  CHECK_THROWS_AS(cfg.set("colour", "red"), ConfigError);
  CHECK_THROWS_AS(cfg.set("dt", "fast"), ConfigError);
  CHECK_THROWS_AS(cfg.set("max_inner", "2.5"), ConfigError);
  CHECK_THROWS_AS(cfg.set("seed", "-3"), ConfigError);
  CHECK_THROWS_AS(cfg.set("update_bias", "maybe"), ConfigError);
  CHECK_THROWS_AS(cfg.get("colour"), ConfigError);
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.set("input", "x.pgm");
  cfg.set("synth.width", "8");
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::parse("dt 0.1"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::parse("rho = -1\ninput = a.pgm").validate(), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::load("/nonexistent/cfg"), ConfigError);
}
