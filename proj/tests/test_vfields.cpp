#include <doctest.h>

#include <cmath>

#include "mpradon/vfield.hpp"

using namespace mpradon;
using namespace mpradon::vfields;
using mpradon::dilations::DegreeVector;
using mpradon::dilations::ParamLattice;

namespace {

DegreeVector deg2(std::int64_t a, std::int64_t b) {
  DegreeVector d;
  d.components = {Rational(a), Rational(b)};
  return d;
}

DegreeVector deg1(std::int64_t a) {
  DegreeVector d;
  d.components = {Rational(a)};
  return d;
}

// Heisenberg-type frame on R^3: X = d/dx + 2y d/dt, Y = d/dy - 2x d/dt.
VField heis_X() { return VField::parse(3, "[1, 0, 2*x2]"); }
VField heis_Y() { return VField::parse(3, "[0, 1, -2*x1]"); }

}  // namespace

TEST_CASE("bracket: textbook case [d/dx, x d/dy] = d/dy") {
  auto X = VField::parse(2, "[1, 0]");
  auto Y = VField::parse(2, "[0, x1]");
  auto B = bracket(X, Y);
  auto v = B.eval({0.37, -2.0});
  CHECK(v[0] == 0.0);
  CHECK(v[1] == 1.0);
}

TEST_CASE("bracket: Heisenberg frame gives -4 d/dt") {
  auto B = bracket(heis_X(), heis_Y());
  // independent hand expansion: X(Y) - Y(X) = (0,0,-2) - (0,0,2)
  for (auto x : {std::vector<double>{0, 0, 0}, {1.0, -2.0, 0.5}}) {
    auto v = B.eval(x);
    CHECK(v[0] == 0.0);
    CHECK(v[1] == 0.0);
    CHECK(v[2] == -4.0);
  }
}

TEST_CASE("bracket antisymmetry and Jacobi on seeded polynomial fields") {
  Rng rng(11);
  auto random_field = [&](int dim) {
    VField f = VField::zero(dim);
    for (int k = 0; k < dim; ++k) {
      std::vector<Expr> terms;
      for (int m = 0; m < 3; ++m) {
        Expr t = Expr::constant(Rational(static_cast<int>(rng.next_u64() % 7) - 3));
        for (int i = 0; i < dim; ++i) {
          int p = static_cast<int>(rng.next_u64() % 3);
          if (p) t = t * Expr::pow(Expr::var(i), p);
        }
        terms.push_back(t);
      }
      f.coeffs[k] = Expr::add(terms);
    }
    return f;
  };
  for (int trial = 0; trial < 6; ++trial) {
    int dim = 2 + static_cast<int>(trial % 2);
    auto X = random_field(dim), Y = random_field(dim), Z = random_field(dim);

    // [X,X] = 0, exactly
    auto XX = bracket(X, X);
    for (const auto& c : XX.coeffs) {
      auto nf = normalize(c, dim);
      REQUIRE(nf.has_value());
      CHECK(nf->is_zero());
    }
    // [X,Y] + [Y,X] = 0, exactly
    auto AB = bracket(X, Y);
    auto BA = bracket(Y, X);
    for (int k = 0; k < dim; ++k) {
      auto nf = normalize(AB.coeffs[k] + BA.coeffs[k], dim);
      REQUIRE(nf.has_value());
      CHECK(nf->is_zero());
    }
    // Jacobi identity, exactly
    auto J1 = bracket(X, bracket(Y, Z));
    auto J2 = bracket(Y, bracket(Z, X));
    auto J3 = bracket(Z, bracket(X, Y));
    for (int k = 0; k < dim; ++k) {
      auto nf = normalize(J1.coeffs[k] + J2.coeffs[k] + J3.coeffs[k], dim);
      REQUIRE(nf.has_value());
      CHECK(nf->is_zero());
    }
  }
}

TEST_CASE("generate_list: Heisenberg closes at order 2 with the summed degree") {
  std::vector<DegreedField> seeds = {{heis_X(), deg2(1, 0), "X"}, {heis_Y(), deg2(0, 1), "Y"}};
  auto rep = generate_list(seeds, 2, Rng(5));
  REQUIRE(rep.list.size() == 3);
  CHECK(rep.list[2].degree == deg2(1, 1));
  CHECK(rep.closed);
  CHECK(rep.exact);

  // idempotence: regenerating from the closed list adds nothing
  auto rep2 = generate_list(rep.list, 2, Rng(6));
  CHECK(rep2.list.size() == rep.list.size());
  CHECK(rep2.closed);
}

TEST_CASE("generate_list: commuting seeds stay as they are") {
  std::vector<DegreedField> seeds = {{VField::parse(2, "[1, 0]"), deg2(1, 0), "dx"},
                                     {VField::parse(2, "[0, 1]"), deg2(0, 1), "dy"}};
  for (int M : {1, 2, 4}) {
    auto rep = generate_list(seeds, M, Rng(9));
    CHECK(rep.list.size() == 2);
    CHECK(rep.closed);
  }
}

TEST_CASE("generate_list: the flat-coefficient pair never closes") {
  std::vector<DegreedField> seeds = {{VField::parse(2, "[1, 0]"), deg1(1), "dx"},
                                     {VField::parse(2, "[0, flat(x1)]"), deg1(2), "g dy"}};
  auto rep = generate_list(seeds, 6, Rng(17));
  // each bracket order contributes a new derivative of the flat factor
  CHECK(rep.list.size() == 2 + 5);
  CHECK(!rep.closed);
  CHECK(!rep.witness.empty());
}

TEST_CASE("degree additivity along bracket words") {
  std::vector<DegreedField> seeds = {{heis_X(), deg2(1, 0), "X"}, {heis_Y(), deg2(0, 1), "Y"}};
  auto rep = generate_list(seeds, 3, Rng(2));
  for (const auto& df : rep.list) {
    // Heisenberg: the only non-seed member is the commutator with degree (1,1).
    bool is_seed = df.name == "X" || df.name == "Y";
    if (!is_seed) CHECK(df.degree == deg2(1, 1));
  }
}

TEST_CASE("check_D: constant spanning frame passes with zero coefficients") {
  std::vector<DegreedField> list = {{VField::parse(2, "[1, 0]"), deg2(1, 0), "dx"},
                                    {VField::parse(2, "[0, 1]"), deg2(0, 1), "dy"}};
  SamplingPlan plan;
  plan.base_points = {{0.1, -0.2}, {0.5, 0.4}};
  plan.deltas = default_delta_grid(ParamLattice::product(2), 4);
  auto cert = check_D(list, ParamLattice::product(2), plan, 1, 1e-8, 10.0);
  CHECK(cert.status == ControlCertificate::Status::kPass);
  CHECK(cert.max_coef_norm <= 1e-8);
}

TEST_CASE("check_D: Heisenberg triple passes with delta-independent constants") {
  std::vector<DegreedField> list = {{heis_X(), deg2(1, 0), "X"},
                                    {heis_Y(), deg2(0, 1), "Y"},
                                    {bracket(heis_X(), heis_Y()), deg2(1, 1), "T"}};
  SamplingPlan plan;
  plan.base_points = {{0.0, 0.0, 0.0}, {0.3, -0.1, 0.2}};
  plan.deltas = default_delta_grid(ParamLattice::product(2), 6);
  auto cert = check_D(list, ParamLattice::product(2), plan, 1, 1e-7, 10.0);
  CHECK(cert.status == ControlCertificate::Status::kPass);
  // the only nonzero bracket reproduces the third member with unit weight
  CHECK(cert.max_coef_norm == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("check_control: list member as its own target passes with a unit coefficient") {
  std::vector<DegreedField> list = {{heis_X(), deg2(1, 0), "X"},
                                    {heis_Y(), deg2(0, 1), "Y"},
                                    {bracket(heis_X(), heis_Y()), deg2(1, 1), "T"}};
  SamplingPlan plan;
  plan.base_points = {{0.2, 0.1, -0.3}};
  plan.deltas = default_delta_grid(ParamLattice::product(2), 4);
  auto cert = check_control(list, list[1], ParamLattice::product(2), plan, 0, 1e-9, 10.0);
  CHECK(cert.status == ControlCertificate::Status::kPass);
  CHECK(cert.max_coef_norm == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("check_control: d/dt against the Heisenberg triple gives exactly -1/4") {
  std::vector<DegreedField> list = {{heis_X(), deg2(1, 0), "X"},
                                    {heis_Y(), deg2(0, 1), "Y"},
                                    {bracket(heis_X(), heis_Y()), deg2(1, 1), "T"}};
  DegreedField target{VField::parse(3, "[0, 0, 1]"), deg2(1, 1), "dt"};
  SamplingPlan plan;
  plan.base_points = {{0.0, 0.0, 0.0}, {0.4, 0.2, -0.1}};
  plan.deltas = default_delta_grid(ParamLattice::product(2), 6);
  auto cert = check_control(list, target, ParamLattice::product(2), plan, 1, 1e-8, 10.0);
  CHECK(cert.status == ControlCertificate::Status::kPass);
  CHECK(cert.max_coef_norm == doctest::Approx(0.25).epsilon(1e-7));
}

TEST_CASE("check_control monotone in tolerance") {
  std::vector<DegreedField> list = {{heis_X(), deg2(1, 0), "X"},
                                    {heis_Y(), deg2(0, 1), "Y"},
                                    {bracket(heis_X(), heis_Y()), deg2(1, 1), "T"}};
  DegreedField target{VField::parse(3, "[0, 0, 1]"), deg2(1, 1), "dt"};
  SamplingPlan plan;
  plan.base_points = {{0.0, 0.0, 0.0}};
  plan.deltas = default_delta_grid(ParamLattice::product(2), 4);
  auto tight = check_control(list, target, ParamLattice::product(2), plan, 0, 1e-10, 10.0);
  auto loose = check_control(list, target, ParamLattice::product(2), plan, 0, 1e-2, 10.0);
  if (tight.status == ControlCertificate::Status::kPass)
    CHECK(loose.status == ControlCertificate::Status::kPass);
}

TEST_CASE("empty sampling plan comes back uncertified") {
  std::vector<DegreedField> list = {{heis_X(), deg2(1, 0), "X"}};
  SamplingPlan plan;  // no points
  auto cert = check_D(list, ParamLattice::product(2), plan, 0, 1e-8, 10.0);
  CHECK(cert.status == ControlCertificate::Status::kUncertified);
}
