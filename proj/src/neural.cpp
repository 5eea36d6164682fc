#include "stlncs/neural.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace stlncs {

static_assert(std::endian::native == std::endian::little, "checkpoint format assumes a little-endian host");

std::vector<int> Mlp::layer_sizes() const {
  std::vector<int> sizes;
  sizes.push_back(input_dim());
  for (const auto& w : weights) sizes.push_back(static_cast<int>(w.rows()));
  return sizes;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) n += weights[l].size() + biases[l].size();
  return n;
}

Mlp mlp_init(const std::vector<int>& layer_sizes, OutputActivation output_activation, RngStream& rng) {
  if (layer_sizes.size() < 2) throw std::invalid_argument("a network needs at least two layer sizes");
  for (int s : layer_sizes)
    if (s <= 0) throw std::invalid_argument("layer sizes must be positive");
  Mlp net;
  net.output_activation = output_activation;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    const int fan_in = layer_sizes[l];
    const int fan_out = layer_sizes[l + 1];
    const double limit = 1.0 / std::sqrt(static_cast<double>(fan_in));
    Eigen::MatrixXd w(fan_out, fan_in);
    for (int r = 0; r < fan_out; ++r)
      for (int c = 0; c < fan_in; ++c) w(r, c) = rng.uniform(-limit, limit);
    net.weights.push_back(std::move(w));
    net.biases.push_back(Eigen::VectorXd::Zero(fan_out));
  }
  return net;
}

Eigen::MatrixXd mlp_forward(const Mlp& net, const Eigen::MatrixXd& input, ForwardCache* cache) {
  if (input.cols() != net.input_dim()) throw std::invalid_argument("input dimension mismatch");
  if (cache) {
    cache->input = input;
    cache->pre.clear();
    cache->post.clear();
  }
  Eigen::MatrixXd a = input;
  const int L = net.layer_count();
  for (int l = 0; l < L; ++l) {
    Eigen::MatrixXd z = a * net.weights[l].transpose();
    z.rowwise() += net.biases[l].transpose();
    if (l + 1 < L) {
      a = z.array().max(0.0);
    } else if (net.output_activation == OutputActivation::Tanh) {
      a = z.array().tanh();
    } else {
      a = z;
    }
    if (cache) {
      cache->pre.push_back(std::move(z));
      cache->post.push_back(a);
    }
  }
  return a;
}

MlpGradients zero_gradients(const Mlp& net) {
  MlpGradients g;
  for (int l = 0; l < net.layer_count(); ++l) {
    g.weights.emplace_back(Eigen::MatrixXd::Zero(net.weights[l].rows(), net.weights[l].cols()));
    g.biases.emplace_back(Eigen::VectorXd::Zero(net.biases[l].size()));
  }
  return g;
}

void mlp_backward(const Mlp& net, const ForwardCache& cache, const Eigen::MatrixXd& output_grad, MlpGradients* grads,
                  Eigen::MatrixXd* input_grad) {
  const int L = net.layer_count();
  bool cache_ok = static_cast<int>(cache.pre.size()) == L && cache.input.cols() == net.input_dim();
  for (int l = 0; cache_ok && l < L; ++l) cache_ok = cache.pre[l].cols() == net.weights[l].rows();
  if (!cache_ok) throw std::logic_error("forward cache does not match this network");
  if (output_grad.rows() != cache.input.rows() || output_grad.cols() != net.output_dim())
    throw std::invalid_argument("output gradient shape mismatch");
  if (grads) {
    grads->weights.resize(L);
    grads->biases.resize(L);
  }
  Eigen::MatrixXd delta;
  if (net.output_activation == OutputActivation::Tanh) {
    delta = output_grad.array() * (1.0 - cache.post.back().array().square());
  } else {
    delta = output_grad;
  }
  for (int l = L - 1; l >= 0; --l) {
    const Eigen::MatrixXd& below = l == 0 ? cache.input : cache.post[l - 1];
    if (grads) {
      grads->weights[l].noalias() = delta.transpose() * below;
      grads->biases[l] = delta.colwise().sum().transpose();
    }
    if (l == 0) {
      if (input_grad) input_grad->noalias() = delta * net.weights[0];
      break;
    }
    Eigen::MatrixXd next = delta * net.weights[l];
    delta = next.array() * (cache.pre[l - 1].array() > 0.0).cast<double>();
  }
}

AdamState adam_init(const Mlp& net, double lr) {
  AdamState opt;
  opt.lr = lr;
  for (int l = 0; l < net.layer_count(); ++l) {
    opt.m_w.emplace_back(Eigen::MatrixXd::Zero(net.weights[l].rows(), net.weights[l].cols()));
    opt.v_w.emplace_back(Eigen::MatrixXd::Zero(net.weights[l].rows(), net.weights[l].cols()));
    opt.m_b.emplace_back(Eigen::VectorXd::Zero(net.biases[l].size()));
    opt.v_b.emplace_back(Eigen::VectorXd::Zero(net.biases[l].size()));
  }
  return opt;
}

void adam_step(Mlp& net, const MlpGradients& grads, AdamState& opt) {
  const int L = net.layer_count();
  if (static_cast<int>(grads.weights.size()) != L || static_cast<int>(opt.m_w.size()) != L)
    throw std::invalid_argument("gradient or optimizer shape mismatch");
  ++opt.step;
  const double c1 = 1.0 - std::pow(opt.beta1, static_cast<double>(opt.step));
  const double c2 = 1.0 - std::pow(opt.beta2, static_cast<double>(opt.step));
  for (int l = 0; l < L; ++l) {
    if (grads.weights[l].rows() != net.weights[l].rows() || grads.weights[l].cols() != net.weights[l].cols())
      throw std::invalid_argument("gradient shape mismatch at layer " + std::to_string(l));
    opt.m_w[l] = opt.beta1 * opt.m_w[l] + (1.0 - opt.beta1) * grads.weights[l];
    opt.v_w[l] = opt.beta2 * opt.v_w[l] + (1.0 - opt.beta2) * grads.weights[l].array().square().matrix();
    net.weights[l].array() -= opt.lr * (opt.m_w[l].array() / c1) / ((opt.v_w[l].array() / c2).sqrt() + opt.epsilon);
    opt.m_b[l] = opt.beta1 * opt.m_b[l] + (1.0 - opt.beta1) * grads.biases[l];
    opt.v_b[l] = opt.beta2 * opt.v_b[l] + (1.0 - opt.beta2) * grads.biases[l].array().square().matrix();
    net.biases[l].array() -= opt.lr * (opt.m_b[l].array() / c1) / ((opt.v_b[l].array() / c2).sqrt() + opt.epsilon);
  }
}

void adam_step_scalar(double& param, double grad, ScalarAdam& opt) {
  ++opt.step;
  opt.m = opt.beta1 * opt.m + (1.0 - opt.beta1) * grad;
  opt.v = opt.beta2 * opt.v + (1.0 - opt.beta2) * grad * grad;
  const double mhat = opt.m / (1.0 - std::pow(opt.beta1, static_cast<double>(opt.step)));
  const double vhat = opt.v / (1.0 - std::pow(opt.beta2, static_cast<double>(opt.step)));
  param -= opt.lr * mhat / (std::sqrt(vhat) + opt.epsilon);
}

bool all_finite(const Mlp& net) {
  for (const auto& w : net.weights)
    if (!w.allFinite()) return false;
  for (const auto& b : net.biases)
    if (!b.allFinite()) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

constexpr std::uint32_t kMlpMagic = 0x31424c4d;   // "MLB1"
constexpr std::uint32_t kAdamMagic = 0x31424441;  // "ADB1"
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& os, std::uint32_t v) { os.write(reinterpret_cast<const char*>(&v), sizeof v); }
void write_u64(std::ostream& os, std::uint64_t v) { os.write(reinterpret_cast<const char*>(&v), sizeof v); }
void write_f64(std::ostream& os, double v) { os.write(reinterpret_cast<const char*>(&v), sizeof v); }

std::uint32_t read_u32(std::istream& is) {
  std::uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}
std::uint64_t read_u64(std::istream& is) {
  std::uint64_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}
double read_f64(std::istream& is) {
  double v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}

void write_matrix(std::ostream& os, const Eigen::MatrixXd& m) {
  // row-major on disk
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) write_f64(os, m(r, c));
}

void read_matrix(std::istream& is, Eigen::MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = read_f64(is);
}

void write_vector(std::ostream& os, const Eigen::VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) write_f64(os, v(i));
}

void read_vector(std::istream& is, Eigen::VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = read_f64(is);
}

std::vector<std::string> activation_tags(const Mlp& net) {
  std::vector<std::string> tags;
  for (int l = 0; l < net.layer_count(); ++l) {
    if (l + 1 < net.layer_count())
      tags.emplace_back("relu");
    else
      tags.emplace_back(net.output_activation == OutputActivation::Tanh ? "tanh" : "identity");
  }
  return tags;
}

void write_sidecar(const std::string& path, std::uint32_t magic, const std::vector<int>& sizes,
                   const std::vector<std::string>& tags, std::size_t parameter_count) {
  nlohmann::json j;
  j["magic"] = magic;
  j["version"] = kVersion;
  j["layer_sizes"] = sizes;
  j["activations"] = tags;
  j["parameter_count"] = parameter_count;
  std::ofstream os(path + ".json");
  os << j.dump(2) << "\n";
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  return os;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open '" + path + "' for reading");
  return is;
}

}  // namespace

void save_mlp(const Mlp& net, const std::string& path) {
  auto os = open_out(path);
  write_u32(os, kMlpMagic);
  write_u32(os, kVersion);
  const auto sizes = net.layer_sizes();
  write_u32(os, static_cast<std::uint32_t>(net.layer_count()));
  for (int s : sizes) write_u32(os, static_cast<std::uint32_t>(s));
  write_u32(os, net.output_activation == OutputActivation::Tanh ? 1u : 0u);
  for (int l = 0; l < net.layer_count(); ++l) {
    write_matrix(os, net.weights[l]);
    write_vector(os, net.biases[l]);
  }
  if (!os) throw std::runtime_error("failed writing checkpoint '" + path + "'");
  write_sidecar(path, kMlpMagic, sizes, activation_tags(net), net.parameter_count());
}

Mlp load_mlp(const std::string& path) {
  auto is = open_in(path);
  if (read_u32(is) != kMlpMagic) throw std::runtime_error("'" + path + "' is not a network checkpoint");
  if (read_u32(is) != kVersion) throw std::runtime_error("unsupported checkpoint version in '" + path + "'");
  const auto layers = read_u32(is);
  std::vector<int> sizes(layers + 1);
  for (auto& s : sizes) s = static_cast<int>(read_u32(is));
  const auto act = read_u32(is);
  Mlp net;
  net.output_activation = act == 1 ? OutputActivation::Tanh : OutputActivation::Identity;
  for (std::uint32_t l = 0; l < layers; ++l) {
    Eigen::MatrixXd w(sizes[l + 1], sizes[l]);
    Eigen::VectorXd b(sizes[l + 1]);
    read_matrix(is, w);
    read_vector(is, b);
    net.weights.push_back(std::move(w));
    net.biases.push_back(std::move(b));
  }
  if (!is) throw std::runtime_error("truncated checkpoint '" + path + "'");
  return net;
}

void save_adam(const AdamState& opt, const std::string& path) {
  auto os = open_out(path);
  write_u32(os, kAdamMagic);
  write_u32(os, kVersion);
  write_u32(os, static_cast<std::uint32_t>(opt.m_w.size()));
  for (std::size_t l = 0; l < opt.m_w.size(); ++l) {
    write_u32(os, static_cast<std::uint32_t>(opt.m_w[l].rows()));
    write_u32(os, static_cast<std::uint32_t>(opt.m_w[l].cols()));
  }
  write_u64(os, static_cast<std::uint64_t>(opt.step));
  write_f64(os, opt.lr);
  write_f64(os, opt.beta1);
  write_f64(os, opt.beta2);
  write_f64(os, opt.epsilon);
  for (std::size_t l = 0; l < opt.m_w.size(); ++l) {
    write_matrix(os, opt.m_w[l]);
    write_matrix(os, opt.v_w[l]);
    write_vector(os, opt.m_b[l]);
    write_vector(os, opt.v_b[l]);
  }
  if (!os) throw std::runtime_error("failed writing optimizer state '" + path + "'");
}

AdamState load_adam(const std::string& path) {
  auto is = open_in(path);
  if (read_u32(is) != kAdamMagic) throw std::runtime_error("'" + path + "' is not an optimizer checkpoint");
  if (read_u32(is) != kVersion) throw std::runtime_error("unsupported optimizer version in '" + path + "'");
  const auto layers = read_u32(is);
  std::vector<std::pair<int, int>> shapes(layers);
  for (auto& s : shapes) {
    s.first = static_cast<int>(read_u32(is));
    s.second = static_cast<int>(read_u32(is));
  }
  AdamState opt;
  opt.step = static_cast<long>(read_u64(is));
  opt.lr = read_f64(is);
  opt.beta1 = read_f64(is);
  opt.beta2 = read_f64(is);
  opt.epsilon = read_f64(is);
  for (auto [rows, cols] : shapes) {
    opt.m_w.emplace_back(rows, cols);
    opt.v_w.emplace_back(rows, cols);
    opt.m_b.emplace_back(rows);
    opt.v_b.emplace_back(rows);
    read_matrix(is, opt.m_w.back());
    read_matrix(is, opt.v_w.back());
    read_vector(is, opt.m_b.back());
    read_vector(is, opt.v_b.back());
  }
  if (!is) throw std::runtime_error("truncated optimizer state '" + path + "'");
  return opt;
}

}  // namespace stlncs
