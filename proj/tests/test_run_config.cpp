#include <sstream>

#include <gtest/gtest.h>

#include "pdiv/commands.hpp"
#include "pdiv/run_config.hpp"

using pdiv::ConfigError;
using pdiv::RunConfig;

namespace {

const char* kBase =
    "# base\n"
    "c = 11\nsigma = 1\nlambda = 10\n"
    "p1 = 0.9\nbeta1 = 1.9\np2 = 0.1   # large claims\nbeta2 = 0.19\n"
    "gamma = 1\ndelta = 0.2\nkappa = 0.2\n";

RunConfig parse(const std::string& text) {
  std::istringstream in(text);
  return pdiv::parse_config(in, "test.cfg");
}

std::string error_of(const std::string& text) {
  try {
    pdiv::validate(parse(text));
  } catch (const ConfigError& e) {
    return e.what();
  } catch (const pdiv::ModelError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(RunConfig, ParsesBase) {
  const auto cfg = parse(kBase);
  EXPECT_EQ(cfg.c, 11.0);
  ASSERT_EQ(cfg.mixture.size(), 2u);
  EXPECT_EQ(cfg.mixture[1].rate, 0.19);
  EXPECT_NO_THROW(pdiv::validate(cfg));
  EXPECT_NEAR(pdiv::moments(cfg.model()).mu, 1.0, 1e-12);
}

TEST(RunConfig, ErrorsNameKeyAndLine) {
  EXPECT_NE(error_of(std::string(kBase) + "kapa = 1\n").find("line 12: unknown key 'kapa'"), std::string::npos);
  EXPECT_NE(error_of(std::string(kBase) + "gamma = 2\n").find("key 'gamma' repeats line 9"), std::string::npos);
  EXPECT_NE(error_of(std::string(kBase) + "dt = abc\n").find("line 12: key 'dt'"), std::string::npos);
  EXPECT_NE(error_of(std::string(kBase) + "oops\n").find("line 12"), std::string::npos);
  EXPECT_NE(error_of("c = 1\nsigma = 1\nlambda = 1\np1 = 1\nbeta1 = 1\ngamma = 1\ndelta = 1\n").find("'kappa'"),
            std::string::npos);
  EXPECT_NE(error_of("c = 1\nsigma = 1\nlambda = 1\np1 = 1\ngamma = 1\ndelta = 1\nkappa = 1\n").find("'beta1'"),
            std::string::npos);
}

TEST(RunConfig, KappaMustBePositive) {
  std::string text = kBase;
  text.replace(text.find("kappa = 0.2"), 11, "kappa = 0");
  EXPECT_EQ(error_of(text), "kappa must be positive");
}

TEST(RunConfig, ModelRulesApply) {
  std::string text = kBase;
  text.replace(text.find("p2 = 0.1"), 8, "p2 = 0.2");
  EXPECT_NE(error_of(text).find("sum to 1"), std::string::npos);
  EXPECT_NE(error_of(std::string(kBase) + "strategy = pair\nb_u = 1\nb_l = 0.9\n").find("b_u - b_l"),
            std::string::npos);
}

TEST(RunConfig, DumpRoundTrips) {
  auto cfg = parse(std::string(kBase) + "x = 0, 0.1, 3.3333333333333335\nrho = 0.1\nseed = 99\nantithetic = 1\n");
  const std::string once = pdiv::dump_config(cfg);
  const std::string twice = pdiv::dump_config(parse(once));
  EXPECT_EQ(once, twice);
  const auto back = parse(once);
  EXPECT_EQ(back.x, cfg.x);
  EXPECT_EQ(back.seed, 99u);
  EXPECT_TRUE(back.antithetic);
}

TEST(Sweep, P1HoldingMeanAndM) {
  const auto cfg = parse(kBase);
  const auto pt = pdiv::sweep_point(cfg, "p1", 0.7);
  const auto mom = pdiv::moments(pt.model());
  EXPECT_NEAR(mom.mu, 1.0, 1e-12);
  EXPECT_NEAR(mom.M, 10.0, 1e-12);
  EXPECT_EQ(pt.mixture[0].weight, 0.7);
}

TEST(Sweep, P1HoldingSmallClaim) {
  auto cfg = parse(kBase);
  cfg.sweep_hold = "small_claim";
  const auto pt = pdiv::sweep_point(cfg, "p1", 0.8);
  EXPECT_NEAR(pdiv::moments(pt.model()).mu, 1.0, 1e-12);
  EXPECT_EQ(pt.mixture[0].rate, 1.9);
  EXPECT_THROW(pdiv::sweep_point(cfg, "p1", 1.2), pdiv::ModelError);
}

TEST(Sweep, MHoldingMeanAndP1) {
  const auto pt = pdiv::sweep_point(parse(kBase), "M", 4.0);
  const auto mom = pdiv::moments(pt.model());
  EXPECT_NEAR(mom.mu, 1.0, 1e-12);
  EXPECT_NEAR(mom.M, 4.0, 1e-12);
  EXPECT_EQ(pt.mixture[0].weight, 0.9);
}

TEST(Sweep, GridAndUnknownParameter) {
  const auto g = pdiv::sweep_grid(0.0, 1.0, 5);
  ASSERT_EQ(g.size(), 5u);
  EXPECT_EQ(g.back(), 1.0);
  EXPECT_EQ(pdiv::sweep_grid(0.3, 9.0, 1), std::vector<double>{0.3});
  EXPECT_THROW(pdiv::sweep_grid(0.0, 1.0, 0), ConfigError);
  EXPECT_THROW(pdiv::sweep_point(parse(kBase), "lambda", 1.0), ConfigError);
}

TEST(Sweep, FailuresGoToErrorColumn) {
  auto cfg = parse(kBase);
  cfg.sweep_param = "sigma";
  cfg.sweep_from = -1.0;
  cfg.sweep_to = 1.0;
  cfg.sweep_steps = 3;
  std::ostringstream out;
  pdiv::cmd_sweep(cfg, out);
  std::istringstream lines(out.str());
  std::string row;
  std::getline(lines, row);
  EXPECT_EQ(row, "param,b_l_star,b_star,b_u_star,mu,varsigma2,liquidation_flag,error");
  int rows = 0, failed = 0;
  while (std::getline(lines, row)) {
    ++rows;
    if (row.back() != ',') ++failed;
  }
  EXPECT_EQ(rows, 3);
  EXPECT_EQ(failed, 1);
}

TEST(ZScore, Conventions) {
  EXPECT_EQ(pdiv::detail::z_score(0.0, 0.0, 0.0), 0.0);
  EXPECT_EQ(pdiv::detail::z_score(1.5, 0.5, 1.0), 1.0);
  EXPECT_TRUE(std::isinf(pdiv::detail::z_score(1.0, 0.0, 0.0)));
}
