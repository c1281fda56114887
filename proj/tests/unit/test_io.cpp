#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numbers>
#include <random>

#include "nlfp/error.hpp"
#include "nlfp/io.hpp"

using namespace nlfp;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "nlfp_io_tests";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST(Io, RoundTripRandom1D) {
  const GridSpec g = GridSpec::torus(257, std::numbers::pi);
  Field f(g);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> unif(-1e3, 1e3);
  for (double& v : f.values) v = unif(rng) * std::pow(10.0, static_cast<int>(unif(rng)) % 40);
  enforce_periodicity(f);
  const fs::path p = scratch("f1.csv");
  write_field(f, p);
  const Field g2 = read_field(p);
  EXPECT_EQ(g2.grid, f.grid);
  ASSERT_EQ(g2.values.size(), f.values.size());
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_EQ(std::memcmp(&g2.values[i], &f.values[i], sizeof(double)), 0);
  EXPECT_EQ(slurp(p).substr(0, 4), "x,u\n");
}

TEST(Io, RoundTripTruncatedAxis) {
  const GridSpec g = GridSpec::interval(11, -4.0, 4.0);
  Field f(g, 0.1);
  const fs::path p = scratch("f1t.csv");
  write_field(f, p);
  EXPECT_EQ(read_field(p, Topology::truncated).grid, g);
}

TEST(Io, RoundTrip2DIdenticalBytes) {
  const GridSpec g = GridSpec::torus2d(65, std::numbers::pi);
  Field f(g);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& v : f.values) v = normal(rng);
  const fs::path p = scratch("f2.raw");
  write_field(f, p);
  EXPECT_EQ(fs::file_size(p), 65u * 65u * 8u);
  const Field back = read_field(p);
  EXPECT_EQ(back.grid, g);
  EXPECT_EQ(std::memcmp(back.values.data(), f.values.data(), f.values.size() * sizeof(double)), 0);
  const fs::path q = scratch("f2b.raw");
  write_field(back, q);
  EXPECT_EQ(slurp(p), slurp(q));
  EXPECT_EQ(slurp(sidecar_path(p)), slurp(sidecar_path(q)));
}

TEST(Io, MalformedSidecarNamesKey) {
  const GridSpec g = GridSpec::torus2d(9, std::numbers::pi);
  const fs::path p = scratch("bad.raw");
  write_field(Field(g, 1.0), p);
  std::ofstream(sidecar_path(p)) << R"({"lower":[0,0],"upper":[1,1],"topology":["periodic","periodic"],"axis_order":"x-major","dtype":"<f8"})";
  try {
    read_field(p);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("shape"), std::string::npos) << e.what();
  }
  std::ofstream(sidecar_path(p)) << R"({"shape":[9,8],"lower":[0,0],"upper":[1,1],"topology":["periodic","periodic"],"axis_order":"x-major","dtype":"<f8"})";
  try {
    read_field(p);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("shape"), std::string::npos) << e.what();
  }
}

TEST(Io, MissingFileIsAnError) { EXPECT_THROW(read_field(scratch("absent.csv")), Error); }
