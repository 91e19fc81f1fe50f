#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "phaselab/io.hpp"
#include "phaselab/reproduce.hpp"

using namespace phaselab;
using io::json;

TEST(Io, GridFromPanelsAndFromNodes) {
  const auto g = io::grid_from_json(json::parse(R"({"panels": [[0, 1], [1, 3]], "order": 4})"));
  EXPECT_EQ(g.size(), 8u);
  EXPECT_NEAR(quad::integrate(g, [](double x) { return x * x; }), 9.0, 1e-13);
  EXPECT_EQ(io::grid_from_json(io::to_json(g)), g);
  const auto h = io::grid_from_json(json::parse(R"({"nodes": [0.5, 1.5], "weights": [1, 1]})"));
  EXPECT_EQ(h.size(), 2u);
}

TEST(Io, GriddedMarginalRoundTrip) {
  const auto q = reproduce::smooth_quartet(64);
  const auto back = io::marginal_from_json(io::to_json(q.T));
  EXPECT_EQ(back.plane(), marginal::Plane::PQ);
  EXPECT_EQ(back.density().values, q.T.density().values);
  EXPECT_EQ(back.density().axis1, q.T.density().axis1);
  const auto qb = io::quartet_from_json(io::to_json(q));
  EXPECT_EQ(qb.U.density().values, q.U.density().values);
}

TEST(Io, AtomicQuartetAndCounterexampleParameters) {
  const auto c = io::counterexample_from_json(
      json::parse(R"({"a1": 0.1, "a2": 0.2, "a1p": 0.3, "a2p": 0.4, "b1": 1, "b2": 2, "b1p": 3, "b2p": 4})"));
  EXPECT_EQ(c.b2p, 4.0);
  const auto q = marginal::counterexample_quartet(c);
  const auto back = io::quartet_from_json(io::to_json(q));
  ASSERT_EQ(back.U.atoms().size(), 2u);
  EXPECT_EQ(back.U.atoms()[0].y, c.b2p);
  EXPECT_TRUE(marginal::consistency_check(back, 0.0).pass);
}

TEST(Io, TripletRoundTrip) {
  const auto t = reproduce::rtu_triplet(reproduce::smooth_quartet(64));
  const auto back = io::triplet_from_json(io::to_json(t));
  EXPECT_EQ(back.sigma2.density().values, t.sigma2.density().values);
}

TEST(Io, WitnessWithInfiniteEndpoints) {
  const auto w = io::witness_from_json(json::parse(
      R"({"S1": [[0, null]], "S2": [["-inf", -1], [2, "inf"]], "S1p": [[null, 0]], "S2p": []})"));
  EXPECT_TRUE(w.S1.contains(1e300));
  EXPECT_FALSE(w.S1.contains(-1e-300));
  EXPECT_TRUE(w.S2.contains(-5.0));
  EXPECT_FALSE(w.S2.contains(0.0));
  EXPECT_TRUE(w.S1p.contains(-1e300));
  EXPECT_FALSE(w.S2p.contains(0.0));
  const auto back = io::witness_from_json(io::to_json(w));
  EXPECT_EQ(back.S2, w.S2);
  EXPECT_EQ(back.S1, w.S1);
}

TEST(Io, NonFiniteNumbersAreStrings) {
  EXPECT_EQ(io::number(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(io::number(-std::numeric_limits<double>::infinity()), "-inf");
  EXPECT_EQ(io::number(std::nan("")), "nan");
  EXPECT_EQ(io::number(1.5), 1.5);
}

TEST(Io, Dense4DRoundTrip) {
  const auto g = quad::build_panels(std::vector<double>{0.0, 1.0}, 3);
  reconstruct::Dense4D d({g, g, g, g});
  for (std::size_t c = 0; c < d.values.size(); ++c) d.values[c] = 0.25 * c;
  const auto back = io::dense_from_json(io::to_json(d));
  EXPECT_EQ(back.values, d.values);
  json bad = io::to_json(d);
  bad["values"][1][0].erase(0);
  EXPECT_THROW(io::dense_from_json(bad), InputError);
}

TEST(Io, MalformedInputIsAnInputError) {
  EXPECT_THROW(io::grid_from_json(json::parse(R"({"panels": [[1, 0]], "order": 4})")), InputError);
  EXPECT_THROW(io::grid_from_json(json::parse(R"({"nodes": [0, 1]})")), InputError);
  EXPECT_THROW(io::marginal_from_json(json::parse(R"({"plane": "QX", "atoms": [{"x": 0, "y": 0, "w": 1}]})")),
               InputError);
  EXPECT_THROW(io::marginal_from_json(json::parse(R"({"plane": "QQ", "atoms": [{"x": 0, "w": 1}]})")), InputError);
  EXPECT_THROW(io::region_from_json(json::parse(R"([[0, "big"]])")), InputError);
  EXPECT_THROW(io::region_from_json(json::parse(R"([[0, 2], [1, 3]])")), InputError);
  EXPECT_THROW(io::quartet_from_json(json::parse(R"({"R": {}})")), InputError);
  EXPECT_THROW(io::read_file("/nonexistent/file.json"), InputError);
  const auto path = std::filesystem::temp_directory_path() / "phaselab_bad.json";
  std::ofstream(path) << "{ not json";
  EXPECT_THROW(io::read_file(path.string()), InputError);
  std::filesystem::remove(path);
}
