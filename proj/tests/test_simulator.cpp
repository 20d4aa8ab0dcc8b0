#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>

#include <gtest/gtest.h>

#include "decaycert/discrete.hpp"
#include "decaycert/simulator.hpp"
#include "oracles.hpp"

using namespace decaycert;
using cplx = std::complex<double>;

namespace
{

Mat<double> mat2(double a, double b, double c, double d)
{
  Mat<double> m(2, 2);
  m << a, b, c, d;
  return m;
}

Vec<double> vec1(double x)
{
  Vec<double> v(1);
  v << x;
  return v;
}

EvolutionProblem<double> scalar_problem(double k, double c0, double p, double u0)
{
  return EvolutionProblem<double>(ConstantMatrix<double>{Mat<double>::Constant(1, 1, -k)},
                                  NormPower<double>{c0, p, Mat<double>::Identity(1, 1)}, ZeroForcing<double>{},
                                  vec1(u0));
}

} // namespace

TEST(DissipativityMargin, HandExamples)
{
  EXPECT_NEAR(dissipativity_margin<double>(-Mat<double>::Identity(2, 2)), 1.0, 1e-12);
  EXPECT_NEAR(dissipativity_margin<double>(mat2(-1.0, 2.0, 0.0, -1.0)), 0.0, 1e-12);
  for (double omega : {0.0, 1.0, 37.5})
    EXPECT_NEAR(dissipativity_margin<double>(mat2(-0.3, omega, -omega, -0.3)), 0.3, 1e-12);
}

TEST(DissipativityMargin, AgreesWithQuadraticFormula)
{
  std::mt19937_64 rng(47);
  std::normal_distribution<double> n;
  for (int i = 0; i < 500; ++i)
  {
    const double a = n(rng), b = n(rng), c = n(rng), d = n(rng);
    const auto [top, low] = oracle::symmetric_2x2_eigenvalues(a, 0.5 * (b + c), d);
    EXPECT_NEAR(dissipativity_margin<double>(mat2(a, b, c, d)), -top, 1e-12);
  }
}

TEST(DissipativityMargin, ComplexHermitianPart)
{
  Mat<cplx> a(2, 2);
  a << cplx(-1.0, 3.0), cplx(0.0, 2.0), cplx(0.0, 2.0), cplx(-1.0, -1.0);
  // Hermitian part [[-1, 0], [0, -1]]: the i-symmetric off-diagonal is skew-Hermitian.
  EXPECT_NEAR(dissipativity_margin<cplx>(a), 1.0, 1e-12);
}

TEST(DissipativityMargin, RejectsNonSquare)
{
  EXPECT_THROW(dissipativity_margin<double>(Mat<double>::Zero(2, 3)), std::invalid_argument);
}

TEST(LinearOperator, ScaledMargin)
{
  const LinearOperator<double> a(ScaledMatrix<double>{-Mat<double>::Identity(2, 2),
                                                      CoefficientFunction::power_decay(1.0, 1.0)});
  EXPECT_DOUBLE_EQ(a.margin(0.0), 1.0);
  EXPECT_DOUBLE_EQ(a.margin(3.0), 0.25);
}

TEST(Envelope, Examples)
{
  const auto zero = verify_nonlinearity_envelope<double>(ZeroNonlinearity<double>{}, 3, 1.0, 2.0, 200);
  EXPECT_TRUE(zero.ok);
  EXPECT_EQ(zero.max_ratio, 0.0);

  const auto tight = verify_nonlinearity_envelope<double>(NormPower<double>{1.0, 2.0, Mat<double>::Identity(3, 3)}, 3,
                                                          1.0, 2.0, 200);
  EXPECT_TRUE(tight.ok);
  EXPECT_NEAR(tight.max_ratio, 1.0, 1e-12);

  const auto half = verify_nonlinearity_envelope<double>(
      NormPower<double>{1.0, 2.0, 0.5 * Mat<double>::Identity(3, 3)}, 3, 1.0, 2.0, 200);
  EXPECT_NEAR(half.max_ratio, 0.5, 1e-12);

  const auto over = verify_nonlinearity_envelope<double>(
      NormPower<double>{1.0, 2.0, 2.0 * Mat<double>::Identity(3, 3)}, 3, 1.0, 2.0, 50);
  EXPECT_FALSE(over.ok);
  ASSERT_TRUE(over.witness_u);
  EXPECT_NEAR(over.max_ratio, 2.0, 1e-12);
}

TEST(Envelope, ComplexState)
{
  const auto r = verify_nonlinearity_envelope<cplx>(NormPower<cplx>{0.7, 2.5, Mat<cplx>::Identity(2, 2)}, 2, 0.7, 2.5,
                                                    300);
  EXPECT_TRUE(r.ok);
  EXPECT_NEAR(r.max_ratio, 1.0, 1e-12);
}

TEST(EvolutionProblem, Validation)
{
  const LinearOperator<double> a(ConstantMatrix<double>{-Mat<double>::Identity(2, 2)});
  EXPECT_THROW(EvolutionProblem<double>(a, ZeroNonlinearity<double>{}, ZeroForcing<double>{}, vec1(1.0)),
               std::invalid_argument);
  Vec<double> e(2);
  e << 1.0, 1.0;
  EXPECT_THROW(EvolutionProblem<double>(a, ZeroNonlinearity<double>{},
                                        EnvelopeForcing<double>{CoefficientFunction::constant(1.0), e},
                                        Vec<double>::Zero(2)),
               std::invalid_argument);
  EXPECT_THROW(EvolutionProblem<double>(a, NormPower<double>{1.0, 1.0, Mat<double>::Identity(2, 2)},
                                        ZeroForcing<double>{}, Vec<double>::Zero(2)),
               std::invalid_argument);
}

TEST(Integrate, LinearDecay)
{
  Vec<double> u0(2);
  u0 << 1.0, 0.0;
  const EvolutionProblem<double> p(ConstantMatrix<double>{-Mat<double>::Identity(2, 2)}, ZeroNonlinearity<double>{},
                                   ZeroForcing<double>{}, u0);
  const auto grid = TimeGrid::uniform(1.0, 21);
  const auto tr = integrate(p, grid);
  ASSERT_EQ(tr.times.size(), grid.size());
  EXPECT_NEAR(tr.norms.back(), 0.36787944117144233, 1e-8);
  EXPECT_NEAR(tr.states.back()[1], 0.0, 1e-15);
  for (std::size_t i = 0; i < grid.size(); ++i)
    EXPECT_EQ(tr.times[i], grid[i]);
}

TEST(Integrate, ScalarMatchesClosedForm)
{
  const auto grid = TimeGrid::uniform(1.0, 101);
  const auto tr = integrate(scalar_problem(1.0, 0.5, 2.0, 0.5), grid);
  EXPECT_NEAR(tr.norms.back(), 0.2184635451460719, 1e-8);
  const auto oracle = bernoulli_oracle(1.0, 0.5, 2.0, 0.5, 1.0);
  ASSERT_TRUE(oracle.value);
  EXPECT_NEAR(*oracle.value, 0.2184635451460719, 1e-15);
  for (std::size_t i = 0; i < grid.size(); ++i)
    EXPECT_NEAR(tr.norms[i], *bernoulli_oracle(1.0, 0.5, 2.0, 0.5, grid[i]).value, 1e-8);
}

TEST(Integrate, EquilibriumStaysZero)
{
  Vec<double> zero = Vec<double>::Zero(3);
  Mat<double> a = Mat<double>::Random(3, 3);
  const EvolutionProblem<double> p(ConstantMatrix<double>{a}, NormPower<double>{2.0, 3.0, Mat<double>::Identity(3, 3)},
                                   ZeroForcing<double>{}, zero);
  const auto tr = integrate(p, TimeGrid::uniform(5.0, 51));
  for (double g : tr.norms)
    EXPECT_EQ(g, 0.0);
}

TEST(Integrate, ComplexRotationPreservesModulusRate)
{
  Mat<cplx> a(1, 1);
  a << cplx(-0.5, 4.0);
  Vec<cplx> u0(1);
  u0 << cplx(1.0, 0.0);
  const EvolutionProblem<cplx> p(ConstantMatrix<cplx>{a}, ZeroNonlinearity<cplx>{}, ZeroForcing<cplx>{}, u0);
  const auto tr = integrate(p, TimeGrid::uniform(2.0, 81));
  for (std::size_t i = 0; i < tr.times.size(); ++i)
    EXPECT_NEAR(tr.norms[i], std::exp(-0.5 * tr.times[i]), 1e-8);
  EXPECT_NEAR(tr.states.back()[0].real(), std::exp(-1.0) * std::cos(8.0), 1e-8);
}

TEST(Integrate, RotationInvariance)
{
  std::mt19937_64 rng(53);
  std::normal_distribution<double> n;
  Mat<double> a(3, 3);
  for (int i = 0; i < 9; ++i)
    a(i / 3, i % 3) = n(rng);
  a -= 3.0 * Mat<double>::Identity(3, 3);
  Mat<double> raw(3, 3);
  for (int i = 0; i < 9; ++i)
    raw(i / 3, i % 3) = n(rng);
  const Mat<double> q = Eigen::HouseholderQR<Mat<double>>(raw).householderQ();
  Vec<double> u0(3);
  u0 << 0.3, -0.2, 0.1;

  const auto grid = TimeGrid::uniform(4.0, 81);
  const auto f = NormPower<double>{0.5, 2.0, Mat<double>::Identity(3, 3)};
  const EvolutionProblem<double> p(ConstantMatrix<double>{a}, f, ZeroForcing<double>{}, u0);
  const EvolutionProblem<double> r(ConstantMatrix<double>{Mat<double>(q.transpose() * a * q)}, f,
                                   ZeroForcing<double>{}, Vec<double>(q.transpose() * u0));
  const auto t1 = integrate(p, grid);
  const auto t2 = integrate(r, grid);
  for (std::size_t i = 0; i < grid.size(); ++i)
    EXPECT_NEAR(t1.norms[i], t2.norms[i], 1e-10);
}

TEST(Bernoulli, Examples)
{
  for (double t : {0.0, 0.5, 3.0})
    EXPECT_NEAR(*bernoulli_oracle(0.7, 0.0, 2.5, 0.3, t).value, 0.3 * std::exp(-0.7 * t), 1e-15);

  const auto blow = bernoulli_oracle(1.0, 2.0, 2.0, 1.0, 0.1);
  ASSERT_TRUE(blow.blow_up_time);
  EXPECT_NEAR(*blow.blow_up_time, std::log(2.0), 1e-15);
  EXPECT_TRUE(blow.value);
  EXPECT_FALSE(bernoulli_oracle(1.0, 2.0, 2.0, 1.0, 1.0).value);
  EXPECT_FALSE(bernoulli_escape_time(1.0, 0.5, 2.0, 0.5));
}

TEST(Bernoulli, ClosedFormAgreesWithTimeOfFlight)
{
  std::mt19937_64 rng(59);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 20; ++i)
  {
    const double k = 0.5 + u(rng), c0 = 0.1 + u(rng), p = 1.5 + 2.0 * u(rng);
    const double u0 = 0.5 * std::pow(k / c0, 1.0 / (p - 1.0)) * (0.1 + 0.8 * u(rng));
    const double t = 3.0 * u(rng);
    const double value = *bernoulli_oracle(k, c0, p, u0, t).value;
    EXPECT_NEAR(oracle::bernoulli_time_to_reach(k, c0, p, u0, value), t, 1e-8);
  }
}

TEST(SimulatorProperties, OracleAgreementOnLongHorizon)
{
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto grid = TimeGrid::uniform(20.0, 401);
  for (int i = 0; i < 100; ++i)
  {
    const double k = 0.2 + 1.5 * u(rng), c0 = 0.1 + 2.0 * u(rng), p = 1.3 + 2.5 * u(rng);
    const double u0 = std::pow(k / c0, 1.0 / (p - 1.0)) * (0.05 + 0.9 * u(rng));
    const auto tr = integrate(scalar_problem(k, c0, p, u0), grid);
    ASSERT_FALSE(tr.blow_up_time);
    double worst = 0.0;
    for (std::size_t j = 0; j < grid.size(); ++j)
    {
      const double exact = *bernoulli_oracle(k, c0, p, u0, grid[j]).value;
      worst = std::max(worst, std::abs(tr.norms[j] - exact) / exact);
    }
    EXPECT_LE(worst, 1e-6) << "k=" << k << " c0=" << c0 << " p=" << p << " u0=" << u0;
  }
}

TEST(SimulatorProperties, ExtremalRecursionDominatesNorm)
{
  Mat<double> a(2, 2);
  a << -1.0, 0.5, -0.5, -1.2;
  Vec<double> u0(2);
  u0 << 0.08, 0.05;
  const double c0 = 1.0, p = 2.0;
  const EvolutionProblem<double> prob(ConstantMatrix<double>{a}, NormPower<double>{c0, p, Mat<double>::Identity(2, 2)},
                                      ZeroForcing<double>{}, u0);
  const double gamma_est = dissipativity_margin<double>(a);
  const std::size_t n = 50000;
  const auto grid = TimeGrid::uniform(0.5, n + 1);
  const auto tr = integrate(prob, grid);

  const double h = grid[1];
  const DiscreteScheme s(std::vector<double>(n, h), std::vector<double>(n, gamma_est), std::vector<double>(n, 0.0),
                         std::vector<double>(n + 1, 1.0), Nonlinearity::power_law(c0, p), true);
  const auto top = evolve_extremal(s, u0.norm());
  ASSERT_EQ(top.g.size(), tr.norms.size());
  for (std::size_t i = 0; i < top.g.size(); ++i)
    ASSERT_LE(tr.norms[i], top.g[i] + 1e-6) << "i = " << i;
}

TEST(EndToEnd, ExponentialRegime)
{
  ProblemConstants c;
  c.c0 = 1.0;
  c.p = 2.0;
  c.k = 1.0;
  c.epsilon = 0.5;
  const auto grid = TimeGrid::geometric(20.0, 512);
  const auto rep = end_to_end_verify(scalar_problem(1.0, 1.0, 2.0, 0.4), Regime::exponential, c, grid);
  ASSERT_TRUE(rep.pass);
  EXPECT_EQ(rep.stages.size(), 6u);
  for (std::size_t i = 0; i < grid.size(); ++i)
    EXPECT_LE(rep.trajectory->norms[i], 0.5 * std::exp(-0.5 * grid[i]) + 1e-12);
}

TEST(EndToEnd, PowerRegime)
{
  ProblemConstants c;
  c.c0 = 1.0;
  c.p = 3.0;
  c.c1 = 1.0;
  c.q1 = 1.0;
  c.epsilon = 0.5;
  const EvolutionProblem<double> prob(
      ScaledMatrix<double>{-Mat<double>::Identity(1, 1), CoefficientFunction::power_decay(1.0, 1.0)},
      NormPower<double>{1.0, 3.0, Mat<double>::Identity(1, 1)}, ZeroForcing<double>{}, vec1(1.0 / std::sqrt(2.0)));
  const auto grid = TimeGrid::geometric(50.0, 512);
  const auto rep = end_to_end_verify(prob, Regime::power, c, grid);
  ASSERT_TRUE(rep.pass);
  for (std::size_t i = 0; i < grid.size(); ++i)
    EXPECT_LE(rep.trajectory->norms[i], 1.0 / (std::sqrt(2.0) * std::sqrt(1.0 + grid[i])) + 1e-12);
}

TEST(EndToEnd, ForcedRegime)
{
  ProblemConstants c;
  c.c0 = 1.0;
  c.p = 2.0;
  c.c1 = 1.0;
  c.q1 = 0.5;
  c.c2 = 0.04;
  c.q2 = 1.5;
  c.nu = 0.5;
  const EvolutionProblem<double> prob(
      ScaledMatrix<double>{-Mat<double>::Identity(1, 1), CoefficientFunction::power_decay(1.0, 0.5)},
      NormPower<double>{1.0, 2.0, Mat<double>::Identity(1, 1)},
      EnvelopeForcing<double>{CoefficientFunction::power_decay(0.04, 1.5), vec1(1.0)}, vec1(0.2));
  const auto grid = TimeGrid::geometric(50.0, 512);
  const auto rep = end_to_end_verify(prob, Regime::forced, c, grid);
  ASSERT_TRUE(rep.pass);
  for (std::size_t i = 0; i < grid.size(); ++i)
    EXPECT_LE(rep.trajectory->norms[i], 1.0 / (5.0 * std::sqrt(1.0 + grid[i])) + 1e-12);
}

TEST(EndToEnd, StopsAtFirstFailingStage)
{
  ProblemConstants c;
  c.c0 = 1.0;
  c.p = 2.0;
  c.k = 2.0;
  c.epsilon = 0.5;
  const auto rep = end_to_end_verify(scalar_problem(1.0, 1.0, 2.0, 0.4), Regime::exponential, c,
                                     TimeGrid::geometric(10.0, 64));
  EXPECT_FALSE(rep.pass);
  ASSERT_EQ(rep.stages.size(), 1u);
  EXPECT_EQ(rep.stages[0].name, "dissipativity");
  EXPECT_FALSE(rep.trajectory);

  c.k = 1.0;
  const auto big = end_to_end_verify(scalar_problem(1.0, 1.0, 2.0, 0.6), Regime::exponential, c,
                                     TimeGrid::geometric(10.0, 64));
  EXPECT_FALSE(big.pass);
  EXPECT_EQ(big.stages.back().name, "certificate");

  c.c1 = 1.0;
  c.q1 = 0.5;
  c.c2 = 1.0;
  c.q2 = 1.5;
  c.nu = 0.5;
  const EvolutionProblem<double> forced(
      ScaledMatrix<double>{-Mat<double>::Identity(1, 1), CoefficientFunction::power_decay(1.0, 0.5)},
      NormPower<double>{1.0, 2.0, Mat<double>::Identity(1, 1)},
      EnvelopeForcing<double>{CoefficientFunction::power_decay(1.0, 1.5), vec1(1.0)}, vec1(0.2));
  const auto infeasible = end_to_end_verify(forced, Regime::forced, c, TimeGrid::geometric(10.0, 64));
  EXPECT_FALSE(infeasible.pass);
  EXPECT_EQ(infeasible.stages.back().name, "synthesis");
  EXPECT_NE(infeasible.stages.back().detail.find("Eq. (50)"), std::string::npos);
}
