#include <gtest/gtest.h>

#include <sstream>

#include "bibeta/error.hpp"
#include "bibeta/io.hpp"
#include "bibeta/sampling.hpp"

using namespace bibeta;

TEST(Csv, RoundTripIsExact) {
  const auto s = sample(AlphaParams(2, 7, 3, 1), 200, 11);
  std::stringstream buf;
  io::write_csv(buf, s);
  EXPECT_EQ(buf.str().substr(0, 4), "x,y\n");
  const auto back = io::read_csv(buf);
  ASSERT_EQ(back.size(), s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    EXPECT_EQ(back.x()[i], s.x()[i]);
    EXPECT_EQ(back.y()[i], s.y()[i]);
  }
}

TEST(Csv, HeaderOptionalAndEmptyAllowed) {
  std::istringstream no_header("0.1,0.2\n0.3,0.4\n");
  EXPECT_EQ(io::read_csv(no_header).size(), 2u);
  std::istringstream only_header("x,y\n");
  EXPECT_EQ(io::read_csv(only_header).size(), 0u);
}

void expect_parse_error(const std::string& text, const std::string& fragment) {
  std::istringstream in(text);
  try {
    io::read_csv(in);
    FAIL() << text;
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ParseError);
    EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
  }
}

TEST(Csv, MalformedRowsNameTheRow) {
  expect_parse_error("x,y\n0.1,0.2\n0.5,abc\n", "row 3");
  expect_parse_error("0.5,abc\n", "row 1");
  expect_parse_error("x,y\n0.1\n", "row 2");
  expect_parse_error("x,y\n0.1,1.5\n", "row 2");
  expect_parse_error("x,y\n0,0.5\n", "row 2");
}

TEST(Json, AlphaAndMomentsRoundTrip) {
  const AlphaParams a(0.3, 1.7, 2.25, 9.0);
  const auto j = io::to_json(a);
  EXPECT_EQ(j.at("alpha3").get<double>(), 2.25);
  EXPECT_EQ(io::alpha_from_json(j).values(), a.values());
  EXPECT_EQ(io::alpha_from_json(nlohmann::json::array({0.3, 1.7, 2.25, 9.0})).values(), a.values());
  const MomentSummary m{0.3, 0.4, 0.02, 0.03, -0.2};
  const auto back = io::moments_from_json(io::to_json(m));
  EXPECT_EQ(back.m1, m.m1);
  EXPECT_EQ(back.rho, m.rho);
  EXPECT_EQ(io::to_json(back), io::to_json(m));
}

TEST(Json, PriorRoundTrip) {
  for (const auto& p : {PriorSpec::gamma_iid(1.0, 1.0, 0.5), PriorSpec::uniform_exponential(10.0, 0.9)}) {
    const auto j = io::to_json(p);
    EXPECT_EQ(io::to_json(io::prior_from_json(j)), j);
  }
}

TEST(Json, ExperimentConfig) {
  const auto j = nlohmann::json::parse(R"({
    "generator": {"type": "logit_normal", "mu": [-1, -1], "sigma": [[2.25, -1.2], [-1.2, 1.0]]},
    "n": 50, "reps": 3, "methods": ["mm1", "mm3"], "bootstrap": 0, "seed": 9})");
  const auto spec = io::experiment_from_json(j);
  EXPECT_EQ(spec.n, 50u);
  EXPECT_EQ(spec.reps, 3u);
  ASSERT_EQ(spec.methods.size(), 2u);
  EXPECT_EQ(spec.methods[1], Method::MM3);
  EXPECT_EQ(std::get<LogitNormalParams>(spec.generator).sigma[0][1], -1.2);
  EXPECT_THROW(io::experiment_from_json(nlohmann::json::parse(R"({"n": 5})")), Error);
}

TEST(Json, NanWritesNull) {
  MetricsTable t;
  t.n = 10;
  t.reps = 1;
  MetricCell c;
  c.target = "alpha1";
  c.coverage = std::nan("");
  t.cells.push_back(c);
  const auto j = io::to_json(t);
  EXPECT_TRUE(j.dump().find("null") != std::string::npos);
}
