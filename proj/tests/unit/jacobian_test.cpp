#include <gtest/gtest.h>

#include "support.hpp"

using namespace delaystab;

namespace {

std::vector<std::vector<std::string>> text(const SymbolicModel& model, const SymbolicMatrix& m) {
  std::vector<std::vector<std::string>> out(m.dim());
  for (std::size_t i = 0; i < m.dim(); ++i)
    for (std::size_t j = 0; j < m.dim(); ++j) out[i].push_back(model.text(m(i, j)));
  return out;
}

/// J recomputed by differentiating the right-hand side.
SymbolicMatrix jacobian_by_differentiation(const SymbolicModel& model) {
  const std::size_t n = model.network().num_species();
  SymbolicMatrix J(n, model.num_variables());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) J(i, j) = model.rhs()[i].derivative(model.species_variable(j));
  return J;
}

/// k_r x^{y_r} for every reaction.
std::vector<Polynomial> reaction_rates(const SymbolicModel& model) {
  const auto& net = model.network();
  std::vector<Polynomial> out;
  for (std::size_t r = 0; r < net.num_reactions(); ++r) {
    auto p = Polynomial::variable(model.num_variables(), model.rate_variable(r));
    for (auto [s, y] : net.reaction(r).source.coefficients())
      p *= Polynomial::variable(model.num_variables(), model.species_variable(s), y);
    out.push_back(p);
  }
  return out;
}

}  // namespace

TEST(Jacobian, RunningExampleMatchesPublishedMatrices) {
  SymbolicModel model(fixtures::fixture("running_example"));
  using Rows = std::vector<std::vector<std::string>>;
  EXPECT_EQ(text(model, model.jacobian()), (Rows{{"-k1*x2 - k2 - k4", "-k1*x1", "0"},
                                                 {"-k1*x2 + k2", "-k1*x1 - k5", "0"},
                                                 {"k1*x2", "k1*x1", "-k6"}}));
  EXPECT_EQ(text(model, model.modified_jacobian()), (Rows{{"-k1*x2 - k2 - k4", "k1*x1", "0"},
                                                          {"k1*x2 + k2", "-k1*x1 - k5", "0"},
                                                          {"k1*x2", "k1*x1", "-k6"}}));
  EXPECT_EQ(model.variables().names(), (std::vector<std::string>{"k1", "k2", "k3", "k4", "k5", "k6", "x1", "x2", "x3"}));
}

TEST(Jacobian, RightHandSideOfRunningExample) {
  SymbolicModel model(fixtures::fixture("running_example"));
  EXPECT_EQ(model.text(model.rhs()[0]), "-k1*x1*x2 - k2*x1 - k4*x1 + k3");
  EXPECT_EQ(model.text(model.rhs()[1]), "-k1*x1*x2 + k2*x1 - k5*x2");
  EXPECT_EQ(model.text(model.rhs()[2]), "k1*x1*x2 - k6*x3");
}

TEST(Jacobian, EqualsDerivativeOfRightHandSideOnEveryFixture) {
  for (const auto& name : fixtures::all_fixtures()) {
    SymbolicModel model(fixtures::fixture(name));
    EXPECT_EQ(model.jacobian(), jacobian_by_differentiation(model)) << name;
  }
}

TEST(ModifiedJacobian, FlipsOnlyOffDiagonalReactantTerms) {
  for (const auto& name : fixtures::all_fixtures()) {
    SymbolicModel model(fixtures::fixture(name));
    const auto& net = model.network();
    const auto& J = model.jacobian();
    const auto& Jt = model.modified_jacobian();
    auto rates = reaction_rates(model);
    for (std::size_t i = 0; i < net.num_species(); ++i) {
      EXPECT_EQ(Jt(i, i), J(i, i)) << name;
      for (std::size_t j = 0; j < net.num_species(); ++j) {
        if (i == j) continue;
        // J~ - J adds back twice the consumption of species i through x_j.
        Polynomial expected(model.num_variables());
        for (std::size_t r = 0; r < net.num_reactions(); ++r)
          expected += rates[r].derivative(model.species_variable(j)) * Rational(2 * long(net.reaction(r).source[i]));
        EXPECT_EQ(Jt(i, j) - J(i, j), expected) << name << " (" << i << "," << j << ")";
        EXPECT_TRUE(Jt(i, j).is_zero() || Jt(i, j).all_coefficients_positive()) << name;
      }
    }
  }
}

TEST(DelayBlocks, SumToJacobian) {
  for (const auto& name : fixtures::all_fixtures()) {
    SymbolicModel model(fixtures::fixture(name));
    auto sum = model.delay_blocks().undelayed;
    for (const auto& b : model.delay_blocks().delayed) sum += b.coefficients;
    EXPECT_EQ(sum, model.jacobian()) << name;
  }
}

TEST(DelayBlocks, PerProductDelaysGoToTheirOwnBlocks) {
  SymbolicModel model(fixtures::fixture("nitric_oxide"));
  const auto& blocks = model.delay_blocks().delayed;
  ASSERT_EQ(blocks.size(), 2u);
  EXPECT_EQ(blocks[0].symbol, "tau2");
  EXPECT_EQ(blocks[1].symbol, "tau5");
  // A5 -> A2 + A5 (rate k8): the A2 product is delayed by tau2, the A5 product by tau5.
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) {
      EXPECT_EQ(model.text(blocks[0].coefficients(i, j)), i == 1 && j == 4 ? "k8" : "0");
      EXPECT_EQ(model.text(blocks[1].coefficients(i, j)), i == 4 && j == 4 ? "k8" : "0");
    }
  EXPECT_EQ(model.text(model.delay_blocks().undelayed(4, 4)), "-k7 - k8");
}

TEST(DelayBlocks, RunningExampleSeparatesConsumptionAndDelayedProduction) {
  SymbolicModel model(fixtures::fixture("running_example"));
  const auto& d = model.delay_blocks();
  ASSERT_EQ(d.delayed.size(), 2u);
  EXPECT_EQ(model.text(d.delayed[0].coefficients(2, 0)), "k1*x2");
  EXPECT_EQ(model.text(d.delayed[0].coefficients(2, 1)), "k1*x1");
  EXPECT_EQ(model.text(d.delayed[1].coefficients(1, 0)), "k2");
  EXPECT_EQ(model.text(d.undelayed(0, 0)), "-k1*x2 - k2 - k4");
  EXPECT_EQ(model.text(d.undelayed(1, 0)), "-k1*x2");
}

TEST(Characteristic, ZeroDelaysGiveOrdinaryEigenvalues) {
  auto net = fixtures::fixture("running_example");
  SymbolicModel model(net);
  auto params = fixtures::fixture_params(net, "running_example");
  for (auto& [s, v] : params.delays) v = 0;
  std::vector<double> x{0.5, 0.7, 1.3};
  CharacteristicFunction f(model, x, params);
  Eigen::EigenSolver<Eigen::MatrixXd> es(f.jacobian());
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) EXPECT_LT(std::abs(f(es.eigenvalues()(i))), 1e-10 * f.scale(es.eigenvalues()(i)));
  // det(J - lambda I) at a non-root equals the product of (mu - lambda).
  cplx lambda(0.3, 0.4), prod(1.0);
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) prod *= es.eigenvalues()(i) - lambda;
  EXPECT_LT(std::abs(f(lambda) - prod), 1e-12 * std::abs(prod));
}

TEST(ModifiedJacobian, SequestrationChainEntryFollowsTheFormula) {
  // A3 + A4 -> 0 consumes A4 alongside A3, so the flipped entry is +k3*x4.
  SymbolicModel model(fixtures::fixture("kmn_m2"));
  EXPECT_EQ(model.text(model.jacobian()(3, 2)), "-k3*x4");
  EXPECT_EQ(model.text(model.modified_jacobian()(3, 2)), "k3*x4");
}

TEST(ModifiedJacobian, BoundsJacobianEntrywiseAtPositivePoints) {
  std::mt19937_64 rng(7);
  for (const auto& name : fixtures::all_fixtures()) {
    SymbolicModel model(fixtures::fixture(name));
    auto J = model.jacobian(), Jt = model.modified_jacobian();
    for (int trial = 0; trial < 20; ++trial) {
      auto pt = fixtures::random_positive(rng, model.num_variables());
      for (std::size_t i = 0; i < J.dim(); ++i)
        for (std::size_t j = 0; j < J.dim(); ++j) {
          double a = evaluate<double>(J(i, j), pt), b = evaluate<double>(Jt(i, j), pt);
          if (i == j) EXPECT_NEAR(a, b, 1e-12 * (1 + std::abs(a))) << name;
          else EXPECT_LE(std::abs(a), b * (1 + 1e-12) + 1e-300) << name;
        }
    }
  }
}

TEST(DelayBlocks, MixedProductDelaysSplitTheColumn) {
  auto net = parse_network("species A1 A2 A3\nreaction A1 -> 2 A2 + A3 rate k delay { A2: ta, A3: tb }\nreaction A2 -> 0 rate d2\n"
                           "reaction A3 -> 0 rate d3\nreaction 0 -> A1 rate f\n");
  SymbolicModel model(net);
  const auto& d = model.delay_blocks();
  ASSERT_EQ(d.delayed.size(), 2u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(model.text(d.delayed[0].coefficients(i, 0)), i == 1 ? "2*k" : "0");
    EXPECT_EQ(model.text(d.delayed[1].coefficients(i, 0)), i == 2 ? "k" : "0");
  }
  EXPECT_EQ(model.text(d.undelayed(0, 0)), "-k");
}

TEST(Characteristic, ValueAtZeroIsDetJacobianOnEveryFixture) {
  std::mt19937_64 rng(11);
  for (const auto& name : fixtures::all_fixtures()) {
    auto net = fixtures::fixture(name);
    SymbolicModel model(net);
    auto params = fixtures::fixture_params(net, name);
    auto x = fixtures::random_positive(rng, net.num_species());
    CharacteristicFunction f(model, x, params);
    auto pt = model.point(rate_vector(net, params), x);
    double det = evaluate<double>(determinant(model.jacobian()), pt);
    EXPECT_LE(std::abs(f(cplx(0.0)) - det), 1e-12 * f.scale(cplx(0.0))) << name;
  }
}

TEST(Characteristic, RunningExampleMatchesCofactorExpansion) {
  // Column 3 of J_lambda - lambda I has the single entry -k6 - lambda, so
  // char(lambda) = -(k6 + lambda) [(a + lambda)(b + lambda) - k1^2 x1 x2 + k1 k2 x1 e^{-lambda tau2}]
  // with a = k1 x2 + k2 + k4 and b = k1 x1 + k5.
  auto net = fixtures::fixture("running_example");
  SymbolicModel model(net);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    auto k = fixtures::random_positive(rng, 6);
    auto x = fixtures::random_positive(rng, 3);
    const double tau1 = 10 * std::abs(u(rng)), tau2 = 10 * std::abs(u(rng));
    std::map<std::string, Rational> values{{"tau1", exact_rational(tau1)}, {"tau2", exact_rational(tau2)}};
    for (int r = 0; r < 6; ++r) values["k" + std::to_string(r + 1)] = exact_rational(k[r]);
    auto params = bind_parameters(net, values);
    CharacteristicFunction f(model, x, params);
    const cplx lambda(u(rng), 3 * u(rng));
    const double a = k[0] * x[1] + k[1] + k[3], b = k[0] * x[0] + k[4];
    const cplx expected = -(k[5] + lambda) * ((a + lambda) * (b + lambda) - k[0] * k[0] * x[0] * x[1] + k[0] * k[1] * x[0] * std::exp(-lambda * tau2));
    EXPECT_LT(std::abs(f(lambda) - expected), 1e-12 * f.scale(lambda)) << trial;
  }
}
