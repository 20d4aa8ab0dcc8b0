#include <cmath>
#include <random>
#include <stdexcept>

#include <gtest/gtest.h>

#include "decaycert/discrete.hpp"
#include "decaycert/inequality.hpp"

using namespace decaycert;

namespace
{

DiscreteScheme geometric_scheme(double ratio, std::size_t n, const Nonlinearity& alpha = Nonlinearity::zero())
{
  std::vector<double> mu(n + 1);
  for (std::size_t i = 0; i <= n; ++i)
    mu[i] = std::pow(ratio, static_cast<double>(i));
  return DiscreteScheme(std::vector<double>(n, 0.1), std::vector<double>(n, 0.5), std::vector<double>(n, 0.0),
                        std::move(mu), alpha);
}

} // namespace

TEST(DiscreteScheme, RejectsInvalidSequences)
{
  const auto a = Nonlinearity::zero();
  EXPECT_THROW(DiscreteScheme({}, {}, {}, {1.0}, a), std::invalid_argument);
  EXPECT_THROW(DiscreteScheme({0.1}, {0.5}, {0.0}, {1.0}, a), std::invalid_argument);
  EXPECT_THROW(DiscreteScheme({0.0}, {0.5}, {0.0}, {1.0, 1.0}, a), std::invalid_argument);
  EXPECT_THROW(DiscreteScheme({0.1}, {10.0}, {0.0}, {1.0, 1.0}, a), std::invalid_argument);
  EXPECT_THROW(DiscreteScheme({0.1}, {0.0}, {0.0}, {1.0, 1.0}, a), std::invalid_argument);
  EXPECT_THROW(DiscreteScheme({0.1}, {0.5}, {-1.0}, {1.0, 1.0}, a), std::invalid_argument);
  EXPECT_THROW(DiscreteScheme({0.1}, {0.5}, {0.0}, {1.0, 0.0}, a), std::invalid_argument);
}

TEST(DiscreteCondition, ConstantMajorant)
{
  const auto s = geometric_scheme(1.0, 40);
  const auto c = check_discrete_condition(s, 1.0);
  EXPECT_TRUE(c.feasible);
  EXPECT_TRUE(c.initial_ok);
  for (double v : c.slack)
    EXPECT_DOUBLE_EQ(v, 0.5);
}

TEST(DiscreteCondition, GrowthAtTheLimit)
{
  const auto s = geometric_scheme(1.05, 40);
  const auto c = check_discrete_condition(s, 1.0);
  EXPECT_TRUE(c.feasible);
  for (double v : c.slack)
    EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(DiscreteCondition, GrowthTooFast)
{
  const auto s = geometric_scheme(1.2, 40);
  const auto c = check_discrete_condition(s, 1.0);
  EXPECT_FALSE(c.feasible);
  ASSERT_TRUE(c.first_violation);
  EXPECT_EQ(*c.first_violation, 0u);
  EXPECT_NEAR(s.slack(0), -1.5, 1e-12);
}

TEST(DiscreteCondition, InitialConditionIsNonStrict)
{
  const auto s = geometric_scheme(1.0, 5);
  EXPECT_TRUE(check_discrete_condition(s, 1.0).initial_ok);
  EXPECT_FALSE(check_discrete_condition(s, 1.0 + 1e-9).initial_ok);
}

TEST(Extremal, GeometricDecay)
{
  const auto seq = evolve_extremal(geometric_scheme(1.0, 10), 1.0);
  ASSERT_EQ(seq.g.size(), 11u);
  EXPECT_NEAR(seq.g[10], 0.5987369392383787, 1e-15);
  EXPECT_FALSE(seq.divergence_index);
}

TEST(Extremal, ZeroIsFixed)
{
  const auto seq = evolve_extremal(geometric_scheme(1.0, 50, Nonlinearity::power_law(3.0, 2.0)), 0.0);
  for (double g : seq.g)
    EXPECT_EQ(g, 0.0);
}

TEST(Extremal, OneQuadraticStep)
{
  const auto seq = evolve_extremal(geometric_scheme(1.0, 1, Nonlinearity::power_law(1.0, 2.0)), 0.1);
  EXPECT_NEAR(seq.g[1], 0.096, 1e-16);
}

TEST(Extremal, DivergenceIndex)
{
  const DiscreteScheme s(std::vector<double>(200, 0.5), std::vector<double>(200, 0.1), std::vector<double>(200, 0.0),
                         std::vector<double>(201, 1.0), Nonlinearity::power_law(1.0, 3.0));
  const auto seq = evolve_extremal(s, 2.0);
  ASSERT_TRUE(seq.divergence_index);
  EXPECT_EQ(seq.g.size(), *seq.divergence_index);
}

TEST(DiscreteBound, GeometricExamples)
{
  const auto feasible = verify_discrete_bound(geometric_scheme(1.05, 500), 1.0);
  EXPECT_TRUE(feasible.precondition_met);
  EXPECT_TRUE(feasible.ok);
  EXPECT_FALSE(feasible.engine_bug);
  for (std::size_t n = 0; n < feasible.sequence.g.size(); ++n)
    EXPECT_LE(feasible.sequence.g[n], std::pow(1.0 / 1.05, static_cast<double>(n)));

  const auto flat = verify_discrete_bound(geometric_scheme(1.0, 500), 1.0);
  EXPECT_TRUE(flat.ok);
  EXPECT_LE(flat.max_ratio, 1.0);

  const auto bad_start = verify_discrete_bound(geometric_scheme(1.0, 5), 1.5);
  EXPECT_FALSE(bad_start.precondition_met);
  EXPECT_FALSE(bad_start.ok);
  EXPECT_FALSE(bad_start.engine_bug);
}

TEST(DiscreteProperties, ExtremalDominatesAdmissibleSequences)
{
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial)
  {
    RandomSchemeOptions opts;
    opts.n_max = 500;
    const auto rs = random_feasible_scheme(rng, opts);
    const auto top = evolve_extremal(rs.scheme, rs.g0);
    double g = rs.g0;
    for (std::size_t n = 0; n < rs.scheme.n_max(); ++n)
    {
      g = u(rng) * rs.scheme.step(n, g);
      ASSERT_LE(g, top.g[n + 1]);
    }
  }
}

TEST(DiscreteProperties, RandomSchemesAreFeasibleAndBounded)
{
  std::mt19937_64 rng(23);
  RandomSchemeOptions opts;
  opts.n_max = 2000;
  for (int trial = 0; trial < 200; ++trial)
  {
    const auto rs = random_feasible_scheme(rng, opts);
    const auto& mu = rs.scheme.mu();
    for (double m : mu)
    {
      ASSERT_GE(m, mu.front());
      ASSERT_LE(m, opts.growth_cap * mu.front() * (1.0 + 1e-12));
    }
    const auto rep = verify_discrete_bound(rs.scheme, rs.g0);
    ASSERT_TRUE(rep.precondition_met);
    ASSERT_TRUE(rep.ok) << "trial " << trial;
  }
}

TEST(DiscreteProperties, SlackConvergesToContinuousLinearly)
{
  const auto alpha = Nonlinearity::power_law(1.0, 2.0);
  const auto beta = CoefficientFunction::power_decay(0.01, 1.5);
  const auto gamma = CoefficientFunction::power_decay(1.0, 0.5);
  const auto mu = Majorant::power(2.0, 0.5);
  const double t = 1.0;
  const auto cont = check_majorant_condition(alpha, beta, gamma, mu, 0.0, TimeGrid({0.0, t}));
  const double target = cont.slack.back();

  double prev = 0.0;
  for (double h : {0.1, 0.01, 0.001})
  {
    const auto n = static_cast<std::size_t>(std::lround(t / h));
    const auto s = DiscreteScheme::from_continuous(alpha, beta, gamma, mu, h, n + 1);
    EXPECT_NEAR(s.time(n), t, 1e-12);
    const double diff = std::abs(s.slack(n) - target);
    if (prev > 0.0)
    {
      EXPECT_LT(diff, 0.2 * prev);
      EXPECT_GT(diff, 0.05 * prev);
    }
    prev = diff;
  }
}

TEST(DiscreteScheme, TimeMapAccumulatesSteps)
{
  const DiscreteScheme s({0.5, 0.25, 1.0}, {1.0, 1.0, 0.5}, {0.0, 0.0, 0.0}, {1.0, 1.0, 1.0, 1.0},
                         Nonlinearity::zero(), true);
  EXPECT_DOUBLE_EQ(s.time(0), 0.0);
  EXPECT_DOUBLE_EQ(s.time(2), 0.75);
  EXPECT_DOUBLE_EQ(s.time(3), 1.75);
  const DiscreteScheme plain({0.5, 0.25}, {1.0, 1.0}, {0.0, 0.0}, {1.0, 1.0, 1.0}, Nonlinearity::zero());
  EXPECT_DOUBLE_EQ(plain.time(2), 2.0);
}
