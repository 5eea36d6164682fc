#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "stlncs/neural.hpp"

using namespace stlncs;

namespace {

// naive per-sample forward used as an independent reference
std::vector<double> reference_forward(const Mlp& net, const std::vector<double>& input) {
  std::vector<double> a = input;
  for (int l = 0; l < net.layer_count(); ++l) {
    const auto& w = net.weights[l];
    std::vector<double> z(w.rows());
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      double acc = net.biases[l](r);
      for (Eigen::Index c = 0; c < w.cols(); ++c) acc += w(r, c) * a[c];
      z[r] = acc;
    }
    if (l + 1 < net.layer_count()) {
      for (auto& v : z) v = std::max(0.0, v);
    } else if (net.output_activation == OutputActivation::Tanh) {
      for (auto& v : z) v = std::tanh(v);
    }
    a = std::move(z);
  }
  return a;
}

double loss_mean_sq(const Mlp& net, const Eigen::MatrixXd& x, const Eigen::MatrixXd& target) {
  const Eigen::MatrixXd y = mlp_forward(net, x);
  return (y - target).squaredNorm() / x.rows();
}

}  // namespace

TEST_SUITE("neural") {

TEST_CASE("parameter count for the paper-sized actor") {
  RngStream rng(1);
  const Mlp net = mlp_init({25, 256, 256, 4}, OutputActivation::Identity, rng);
  CHECK(net.parameter_count() == 25u * 256 + 256 + 256u * 256 + 256 + 256u * 4 + 4);  // 73,476
  for (const auto& b : net.biases) CHECK(b.isZero());
}

TEST_CASE("identical seeds give identical parameters") {
  RngStream a(7), b(7);
  const Mlp na = mlp_init({4, 8, 2}, OutputActivation::Tanh, a);
  const Mlp nb = mlp_init({4, 8, 2}, OutputActivation::Tanh, b);
  for (int l = 0; l < na.layer_count(); ++l) CHECK(na.weights[l] == nb.weights[l]);
}

TEST_CASE("zeroed network maps everything to zero") {
  RngStream rng(2);
  Mlp net = mlp_init({3, 4, 2}, OutputActivation::Identity, rng);
  for (auto& w : net.weights) w.setZero();
  const Eigen::MatrixXd y = mlp_forward(net, Eigen::MatrixXd::Random(5, 3));
  CHECK(y.isZero());
}

TEST_CASE("single identity layer passes the input through") {
  RngStream rng(3);
  Mlp net = mlp_init({3, 3}, OutputActivation::Identity, rng);
  net.weights[0] = Eigen::MatrixXd::Identity(3, 3);
  net.biases[0].setZero();
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(4, 3);
  CHECK((mlp_forward(net, x) - x).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("forward matches an independent implementation") {
  RngStream rng(4);
  for (OutputActivation act : {OutputActivation::Identity, OutputActivation::Tanh}) {
    const Mlp net = mlp_init({6, 11, 9, 3}, act, rng);
    for (int trial = 0; trial < 10; ++trial) {
      Eigen::MatrixXd x(1, 6);
      std::vector<double> xv(6);
      for (int i = 0; i < 6; ++i) {
        xv[i] = rng.uniform(-2, 2);
        x(0, i) = xv[i];
      }
      const Eigen::MatrixXd y = mlp_forward(net, x);
      const auto ref = reference_forward(net, xv);
      for (int i = 0; i < 3; ++i) CHECK(std::abs(y(0, i) - ref[i]) < 1e-12);
    }
  }
}

TEST_CASE("backward matches central finite differences") {
  RngStream rng(5);
  for (OutputActivation act : {OutputActivation::Identity, OutputActivation::Tanh}) {
    Mlp net = mlp_init({4, 7, 5, 2}, act, rng);
    const int batch = 3;
    Eigen::MatrixXd x(batch, 4), target(batch, 2);
    for (int i = 0; i < batch; ++i) {
      for (int j = 0; j < 4; ++j) x(i, j) = rng.uniform(-1, 1);
      for (int j = 0; j < 2; ++j) target(i, j) = rng.uniform(-1, 1);
    }
    ForwardCache cache;
    const Eigen::MatrixXd y = mlp_forward(net, x, &cache);
    MlpGradients grads;
    mlp_backward(net, cache, Eigen::MatrixXd((2.0 / batch) * (y - target)), &grads);

    const double h = 1e-5;
    double max_rel = 0.0;
    for (int l = 0; l < net.layer_count(); ++l) {
      for (int idx = 0; idx < 6; ++idx) {
        const int r = idx % net.weights[l].rows();
        const int c = idx % net.weights[l].cols();
        const double saved = net.weights[l](r, c);
        net.weights[l](r, c) = saved + h;
        const double up = loss_mean_sq(net, x, target);
        net.weights[l](r, c) = saved - h;
        const double dn = loss_mean_sq(net, x, target);
        net.weights[l](r, c) = saved;
        const double numeric = (up - dn) / (2 * h);
        const double analytic = grads.weights[l](r, c);
        const double denom = std::max({std::abs(numeric), std::abs(analytic), 1e-8});
        max_rel = std::max(max_rel, std::abs(numeric - analytic) / denom);
      }
    }
    CHECK(max_rel < 1e-4);
  }
}

TEST_CASE("zero output gradient produces zero parameter gradients") {
  RngStream rng(6);
  const Mlp net = mlp_init({3, 5, 2}, OutputActivation::Identity, rng);
  ForwardCache cache;
  mlp_forward(net, Eigen::MatrixXd::Random(4, 3), &cache);
  MlpGradients grads;
  mlp_backward(net, cache, Eigen::MatrixXd::Zero(4, 2), &grads);
  for (const auto& g : grads.weights) CHECK(g.isZero());
  for (const auto& g : grads.biases) CHECK(g.isZero());
}

TEST_CASE("stale caches are rejected") {
  RngStream rng(7);
  const Mlp small = mlp_init({3, 4, 2}, OutputActivation::Identity, rng);
  const Mlp other = mlp_init({3, 6, 2}, OutputActivation::Identity, rng);
  ForwardCache cache;
  mlp_forward(small, Eigen::MatrixXd::Random(2, 3), &cache);
  MlpGradients grads;
  CHECK_THROWS_AS(mlp_backward(other, cache, Eigen::MatrixXd::Zero(2, 2), &grads), std::logic_error);
}

TEST_CASE("input gradients flow through the first layer") {
  RngStream rng(8);
  const Mlp net = mlp_init({3, 8, 1}, OutputActivation::Identity, rng);
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(1, 3);
  ForwardCache cache;
  mlp_forward(net, x, &cache);
  Eigen::MatrixXd input_grad;
  mlp_backward(net, cache, Eigen::MatrixXd::Ones(1, 1), nullptr, &input_grad);
  const double h = 1e-6;
  for (int j = 0; j < 3; ++j) {
    Eigen::MatrixXd xp = x, xm = x;
    xp(0, j) += h;
    xm(0, j) -= h;
    const double numeric = (mlp_forward(net, xp)(0, 0) - mlp_forward(net, xm)(0, 0)) / (2 * h);
    CHECK(std::abs(numeric - input_grad(0, j)) < 1e-6);
  }
}

TEST_CASE("first adam step moves by roughly the learning rate") {
  RngStream rng(9);
  Mlp net = mlp_init({2, 3, 1}, OutputActivation::Identity, rng);
  const Mlp before = net;
  AdamState opt = adam_init(net, 1e-3);
  MlpGradients grads = zero_gradients(net);
  grads.weights[0](0, 0) = 0.37;
  grads.weights[1](0, 1) = -2.1;
  adam_step(net, grads, opt);
  CHECK(net.weights[0](0, 0) - before.weights[0](0, 0) == doctest::Approx(-1e-3).epsilon(1e-6));
  CHECK(net.weights[1](0, 1) - before.weights[1](0, 1) == doctest::Approx(1e-3).epsilon(1e-6));
  CHECK(net.weights[0](1, 1) == before.weights[0](1, 1));
  CHECK(opt.step == 1);
}

TEST_CASE("zero gradients leave parameters untouched while moments decay") {
  RngStream rng(10);
  Mlp net = mlp_init({2, 3, 1}, OutputActivation::Identity, rng);
  AdamState opt = adam_init(net, 1e-3);
  const MlpGradients zeros = zero_gradients(net);
  const Mlp fresh = net;
  adam_step(net, zeros, opt);
  for (int l = 0; l < net.layer_count(); ++l) CHECK(net.weights[l] == fresh.weights[l]);

  MlpGradients grads = zero_gradients(net);
  grads.weights[0](0, 0) = 1.0;
  adam_step(net, grads, opt);
  const double m_after_one = opt.m_w[0](0, 0);
  adam_step(net, zeros, opt);
  CHECK(opt.m_w[0](0, 0) == doctest::Approx(0.9 * m_after_one).epsilon(1e-12));
}

TEST_CASE("adam updates are deterministic") {
  auto run = [] {
    RngStream rng(11);
    Mlp net = mlp_init({3, 6, 2}, OutputActivation::Identity, rng);
    AdamState opt = adam_init(net, 3e-4);
    Eigen::MatrixXd x = Eigen::MatrixXd::Constant(2, 3, 0.3);
    Eigen::MatrixXd target = Eigen::MatrixXd::Constant(2, 2, -0.7);
    for (int i = 0; i < 100; ++i) {
      ForwardCache cache;
      const Eigen::MatrixXd y = mlp_forward(net, x, &cache);
      MlpGradients grads;
      mlp_backward(net, cache, Eigen::MatrixXd((2.0 / 2) * (y - target)), &grads);
      adam_step(net, grads, opt);
    }
    return net;
  };
  const Mlp a = run();
  const Mlp b = run();
  for (int l = 0; l < a.layer_count(); ++l) {
    CHECK(a.weights[l] == b.weights[l]);
    CHECK(a.biases[l] == b.biases[l]);
  }
  CHECK(all_finite(a));
}

TEST_CASE("checkpoints round-trip exactly") {
  namespace fs = std::filesystem;
  RngStream rng(12);
  Mlp net = mlp_init({5, 9, 3}, OutputActivation::Tanh, rng);
  AdamState opt = adam_init(net, 3e-4);
  MlpGradients grads = zero_gradients(net);
  grads.weights[0].setConstant(0.01);
  adam_step(net, grads, opt);

  const auto dir = fs::temp_directory_path() / "stlncs_neural_test";
  fs::create_directories(dir);
  const std::string net_path = (dir / "net.bin").string();
  const std::string opt_path = (dir / "opt.bin").string();
  save_mlp(net, net_path);
  save_adam(opt, opt_path);
  CHECK(fs::exists(net_path + ".json"));

  const Mlp loaded = load_mlp(net_path);
  CHECK(loaded.output_activation == OutputActivation::Tanh);
  for (int l = 0; l < net.layer_count(); ++l) {
    CHECK(loaded.weights[l] == net.weights[l]);
    CHECK(loaded.biases[l] == net.biases[l]);
  }
  const AdamState opt_loaded = load_adam(opt_path);
  CHECK(opt_loaded.step == opt.step);
  CHECK(opt_loaded.m_w[0] == opt.m_w[0]);
  CHECK(opt_loaded.v_w[1] == opt.v_w[1]);
  fs::remove_all(dir);
}

TEST_CASE("scalar adam mirrors the vector rule") {
  double param = 1.0;
  ScalarAdam opt;
  opt.lr = 1e-2;
  adam_step_scalar(param, 5.0, opt);
  CHECK(param == doctest::Approx(1.0 - 1e-2).epsilon(1e-9));
  for (int i = 0; i < 10000; ++i) adam_step_scalar(param, i % 2 ? 1.0 : -1.0, opt);
  CHECK(std::isfinite(param));
}

}  // TEST_SUITE
