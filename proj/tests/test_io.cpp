#include <doctest.h>

#include <random>
#include <sstream>

#include "dmcount/io.hpp"
#include "dmcount/random.hpp"

using namespace dmcount;

TEST_CASE("density map text format round-trips exactly") {
  std::mt19937_64 rng(71);
  GridArray<double> g(3, 5);
  for (Eigen::Index i = 0; i < g.size(); ++i)
    g.data()[i] = uniform(rng, 0.0, 100.0) * std::pow(10.0, -int(i % 7));
  const DensityMap m(g);

  std::stringstream ss;
  write_density_map(ss, m);
  std::string first_line;
  std::getline(ss, first_line);
  CHECK(first_line == "P_DENS 3 5");
  ss.seekg(0);
  const auto back = read_density_map(ss);
  CHECK((back.values == m.values).all());
}

TEST_CASE("density map reader rejects malformed input") {
  std::stringstream bad1("DENS 2 2\n1 2 3 4\n");
  CHECK_THROWS_AS(read_density_map(bad1), IoError);
  std::stringstream bad2("P_DENS 2 2\n1 2 3\n");
  CHECK_THROWS_AS(read_density_map(bad2), IoError);
  std::stringstream bad3("P_DENS 2 2\n1 2 3 -4\n");
  CHECK_THROWS_AS(read_density_map(bad3), IoError);
  std::stringstream bad4("P_DENS 0 2\n");
  CHECK_THROWS_AS(read_density_map(bad4), IoError);
}

TEST_CASE("annotation CSV round-trips") {
  const DotAnnotation ann(10, 12, {{0.5, 1.25}, {9.875, 11.0}, {3.0, 3.0}});
  std::stringstream ss;
  write_annotation_csv(ss, ann);
  std::string header;
  std::getline(ss, header);
  CHECK(header == "row,col");
  ss.seekg(0);
  const auto pts = read_annotation_points(ss);
  REQUIRE(pts.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(pts[i] == ann.points[i]);

  std::stringstream bad("lat,lon\n1,2\n");
  CHECK_THROWS_AS(read_annotation_points(bad), IoError);
  std::stringstream bad2("row,col\n1;2\n");
  CHECK_THROWS_AS(read_annotation_points(bad2), IoError);
}

TEST_CASE("pgm output is valid binary P5") {
  GridArray<double> g(2, 3);
  g << 0.0, 1.0, 2.0, 3.0, 4.0, 4.0;
  std::stringstream ss;
  write_pgm(ss, g, 4.0);
  const std::string data = ss.str();
  CHECK(data.rfind("P5\n3 2\n255\n", 0) == 0);
  const std::size_t header = std::string("P5\n3 2\n255\n").size();
  REQUIRE(data.size() == header + 6);
  const auto px = [&](int i) {
    return static_cast<unsigned char>(data[header + i]);
  };
  CHECK(px(0) == 0);
  CHECK(px(1) == 64);   // round(255 / 4)
  CHECK(px(5) == 255);  // value == scale saturates
}

TEST_CASE("format_real markers") {
  CHECK(format_real(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_real(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(format_real(std::numeric_limits<double>::quiet_NaN()) == "excluded");
  CHECK(format_real(0.25) == "0.25");
}
