#include "doctest.h"

#include <cmath>

#include "shed/adam.hpp"
#include "shed/errors.hpp"
#include "shed/mlp.hpp"

using namespace shed;

namespace {

// Central differences of upstream . net(input) with respect to every parameter.
Eigen::VectorXd numeric_param_grad(Mlp net, const Eigen::VectorXd& x, const Eigen::VectorXd& up, double h) {
  Eigen::VectorXd g(net.parameter_count());
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const double keep = net.parameters()[i];
    net.parameters()[i] = keep + h;
    const double fp = up.dot(net.forward(x));
    net.parameters()[i] = keep - h;
    const double fm = up.dot(net.forward(x));
    net.parameters()[i] = keep;
    g[i] = (fp - fm) / (2 * h);
  }
  return g;
}

double rel_err(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).norm() / std::max(1e-12, a.norm() + b.norm());
}

// Straightforward per-sample forward pass written independently of Mlp.
double act(Activation a, double z) {
  switch (a) {
    case Activation::identity: return z;
    case Activation::relu: return z > 0 ? z : 0;
    case Activation::tanh: return std::tanh(z);
    case Activation::sigmoid: return 1 / (1 + std::exp(-z));
  }
  return z;
}

}  // namespace

TEST_CASE("forward matches a hand-rolled loop") {
  RandomStream s(1);
  const Mlp net = Mlp::glorot({3, 4, 2}, Activation::tanh, Activation::sigmoid, s);
  const Eigen::VectorXd x = Eigen::Vector3d(0.3, -0.7, 1.1);
  const double* p = net.parameters().data();
  // layer 0: W (4x3 col-major), b
  double h[4];
  for (int r = 0; r < 4; ++r) {
    double z = p[12 + r];
    for (int c = 0; c < 3; ++c) z += p[c * 4 + r] * x[c];
    h[r] = act(Activation::tanh, z);
  }
  const double* q = p + 16;
  const Eigen::VectorXd y = net.forward(x);
  for (int r = 0; r < 2; ++r) {
    double z = q[8 + r];
    for (int c = 0; c < 4; ++c) z += q[c * 2 + r] * h[c];
    CHECK(y[r] == doctest::Approx(act(Activation::sigmoid, z)).epsilon(1e-14));
  }
}

TEST_CASE("batched forward equals per-column forward") {
  RandomStream s(2);
  const Mlp net = Mlp::glorot({5, 7, 7, 3}, Activation::relu, Activation::tanh, s);
  Eigen::MatrixXd X = Eigen::MatrixXd::Random(5, 9);
  const Eigen::MatrixXd Y = net.forward_batch(X);
  for (int j = 0; j < 9; ++j) CHECK((Y.col(j) - net.forward(X.col(j))).norm() < 1e-14);
}

TEST_CASE("glorot bounds and zero biases") {
  RandomStream s(3);
  const Mlp net = Mlp::glorot({10, 20, 4}, Activation::tanh, Activation::identity, s);
  const double b0 = std::sqrt(6.0 / 30), b1 = std::sqrt(6.0 / 24);
  CHECK(net.weight(0).cwiseAbs().maxCoeff() <= b0);
  CHECK(net.weight(1).cwiseAbs().maxCoeff() <= b1);
  CHECK(net.bias(0).isZero());
  CHECK(net.bias(1).isZero());
  CHECK(net.parameter_count() == 10 * 20 + 20 + 20 * 4 + 4);
}

TEST_CASE("parameter and input gradients agree with finite differences") {
  for (auto [hidden, output] : {std::pair{Activation::tanh, Activation::identity},
                                std::pair{Activation::tanh, Activation::sigmoid},
                                std::pair{Activation::tanh, Activation::tanh}}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      RandomStream s(100 + seed);
      Mlp net = Mlp::glorot({4, 6, 5, 3}, hidden, output, s);
      for (Eigen::Index i = 0; i < net.parameter_count(); ++i) net.parameters()[i] += 0.1 * s.gaussian();
      const Eigen::VectorXd x = sample_gaussian(s, 4), up = sample_gaussian(s, 3);
      const MlpGradient g = mlp_grad(net, x, up);
      CHECK(rel_err(g.params, numeric_param_grad(net, x, up, 1e-6)) < 1e-6);
      Eigen::VectorXd gi(4);
      for (int d = 0; d < 4; ++d) {
        Eigen::VectorXd xp = x, xm = x;
        xp[d] += 1e-6;
        xm[d] -= 1e-6;
        gi[d] = (up.dot(net.forward(xp)) - up.dot(net.forward(xm))) / 2e-6;
      }
      CHECK(rel_err(g.input, gi) < 1e-6);
    }
  }
}

TEST_CASE("batched backward sums per-sample gradients") {
  RandomStream s(9);
  const Mlp net = Mlp::glorot({3, 5, 2}, Activation::tanh, Activation::identity, s);
  Eigen::MatrixXd X = Eigen::MatrixXd::Random(3, 4), U = Eigen::MatrixXd::Random(2, 4);
  MlpCache cache;
  net.forward_batch(X, &cache);
  Eigen::MatrixXd in_grad;
  const Eigen::VectorXd g = net.backward(cache, U, &in_grad);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(g.size());
  for (int j = 0; j < 4; ++j) {
    const MlpGradient gj = mlp_grad(net, X.col(j), U.col(j));
    sum += gj.params;
    CHECK((in_grad.col(j) - gj.input).norm() < 1e-12);
  }
  CHECK((g - sum).norm() < 1e-12);
}

TEST_CASE("weight and bias maps alias the flat vector") {
  Mlp net({2, 3, 1}, Activation::tanh, Activation::identity);
  net.weight(0)(1, 0) = 5.0;
  net.bias(1)[0] = -2.0;
  CHECK(net.parameters()[1] == 5.0);
  CHECK(net.parameters()[net.parameter_count() - 1] == -2.0);
}

TEST_CASE("hash tracks parameters") {
  RandomStream s(4);
  Mlp a = Mlp::glorot({2, 3, 1}, Activation::tanh, Activation::identity, s);
  Mlp b = a;
  CHECK(a.parameter_hash() == b.parameter_hash());
  b.parameters()[0] += 1e-12;
  CHECK(a.parameter_hash() != b.parameter_hash());
}

TEST_CASE("shape errors") {
  CHECK_THROWS_AS(Mlp({2}, Activation::tanh, Activation::identity), ConfigError);
  CHECK_THROWS_AS(Mlp({2, 3, 1}, Activation::sigmoid, Activation::identity), ConfigError);
  CHECK_THROWS_AS(Mlp({2, 3, 1}, Activation::tanh, Activation::relu), ConfigError);
  const Mlp net({2, 3, 1}, Activation::tanh, Activation::identity);
  CHECK_THROWS_AS(net.forward(Eigen::VectorXd::Zero(3)), ConfigError);
}

TEST_CASE("adam first step moves each coordinate by about lr against the gradient sign") {
  Eigen::VectorXd p(3), g(3);
  p << 1.0, -2.0, 0.5;
  g << 0.3, -4.0, 1e-3;
  AdamState st(3, {.learning_rate = 0.01});
  REQUIRE(adam_step(p, g, st) == StepStatus::applied);
  // m_hat = g, v_hat = g^2 after one step.
  CHECK(p[0] == doctest::Approx(1.0 - 0.01 * 0.3 / (0.3 + 1e-8)));
  CHECK(p[1] == doctest::Approx(-2.0 + 0.01 * 4.0 / (4.0 + 1e-8)));
  CHECK(p[2] == doctest::Approx(0.5 - 0.01 * 1e-3 / (1e-3 + 1e-8)));
  CHECK(st.step_count == 1);
}

TEST_CASE("adam reference recursion over several steps") {
  Eigen::VectorXd p = Eigen::VectorXd::Constant(1, 2.0);
  AdamState st(1, {.learning_rate = 0.1});
  double x = 2.0, m = 0, v = 0;
  for (int t = 1; t <= 10; ++t) {
    const double grad = 2 * x;
    m = 0.9 * m + 0.1 * grad;
    v = 0.999 * v + 0.001 * grad * grad;
    x -= 0.1 * (m / (1 - std::pow(0.9, t))) / (std::sqrt(v / (1 - std::pow(0.999, t))) + 1e-8);
    REQUIRE(adam_step(p, Eigen::VectorXd::Constant(1, 2 * p[0]), st) == StepStatus::applied);
    CHECK(p[0] == doctest::Approx(x).epsilon(1e-12));
  }
}

TEST_CASE("adam minimizes a quadratic and rejects non-finite gradients") {
  Eigen::VectorXd p = Eigen::VectorXd::Constant(4, 3.0);
  AdamState st(4, {.learning_rate = 0.05});
  for (int i = 0; i < 2000; ++i) (void)adam_step(p, 2 * p, st);
  CHECK(p.norm() < 1e-2);
  const Eigen::VectorXd before = p;
  Eigen::VectorXd bad = p;
  bad[2] = std::nan("");
  CHECK(adam_step(p, bad, st) == StepStatus::rejected_non_finite);
  CHECK(p == before);
  CHECK(st.step_count == 2000);
}
