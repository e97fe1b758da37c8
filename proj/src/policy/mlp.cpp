#include "accsi/policy/mlp.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace accsi::policy {

namespace {

Eigen::MatrixXd orthogonal(int rows, int cols, double gain, Rng& rng) {
  const int n = std::max(rows, cols);
  Eigen::MatrixXd g(n, std::min(rows, cols));
  for (int i = 0; i < g.rows(); ++i) {
    for (int j = 0; j < g.cols(); ++j) g(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, g.cols());
  // fix signs so the factorization is unique
  Eigen::MatrixXd r = qr.matrixQR().topRows(g.cols()).triangularView<Eigen::Upper>();
  for (int j = 0; j < g.cols(); ++j) {
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  }
  Eigen::MatrixXd out =
      (rows >= cols) ? Eigen::MatrixXd(q.topRows(rows)) : Eigen::MatrixXd(q.transpose());
  return gain * out.topLeftCorner(rows, cols);
}

Mlp random_mlp(Rng& rng) {
  Mlp net;
  net.w1 = orthogonal(kHidden, kObsDim, 1.0, rng);
  net.b1 = Eigen::VectorXd::Zero(kHidden);
  net.w2 = orthogonal(kHidden, kHidden, 1.0, rng);
  net.b2 = Eigen::VectorXd::Zero(kHidden);
  net.w3 = orthogonal(1, kHidden, 0.01, rng);
  net.b3 = Eigen::VectorXd::Zero(1);
  return net;
}

int mlp_size() {
  return kHidden * kObsDim + kHidden + kHidden * kHidden + kHidden + kHidden + 1;
}

void flatten_mlp(const Mlp& net, Eigen::VectorXd& flat, int& pos) {
  auto put = [&](const Eigen::MatrixXd& m) {
    for (int j = 0; j < m.cols(); ++j) {
      for (int i = 0; i < m.rows(); ++i) flat[pos++] = m(i, j);
    }
  };
  put(net.w1);
  put(net.b1);
  put(net.w2);
  put(net.b2);
  put(net.w3);
  put(net.b3);
}

void unflatten_mlp(Mlp& net, const Eigen::VectorXd& flat, int& pos) {
  auto get = [&](Eigen::MatrixXd& m, int rows, int cols) {
    m.resize(rows, cols);
    for (int j = 0; j < cols; ++j) {
      for (int i = 0; i < rows; ++i) m(i, j) = flat[pos++];
    }
  };
  auto getv = [&](Eigen::VectorXd& v, int rows) {
    v.resize(rows);
    for (int i = 0; i < rows; ++i) v[i] = flat[pos++];
  };
  get(net.w1, kHidden, kObsDim);
  getv(net.b1, kHidden);
  get(net.w2, kHidden, kHidden);
  getv(net.b2, kHidden);
  get(net.w3, 1, kHidden);
  getv(net.b3, 1);
}

}  // namespace

PolicyParams PolicyParams::random_init(Rng& rng) {
  PolicyParams p;
  p.actor = random_mlp(rng);
  p.critic = random_mlp(rng);
  p.log_std = -0.7;
  return p;
}

int PolicyParams::num_params() { return 2 * mlp_size() + 1; }

Eigen::VectorXd PolicyParams::to_flat() const {
  Eigen::VectorXd flat(num_params());
  int pos = 0;
  flatten_mlp(actor, flat, pos);
  flatten_mlp(critic, flat, pos);
  flat[pos++] = log_std;
  return flat;
}

void PolicyParams::from_flat(const Eigen::VectorXd& flat) {
  if (flat.size() != num_params()) {
    throw std::invalid_argument("PolicyParams::from_flat: size mismatch");
  }
  int pos = 0;
  unflatten_mlp(actor, flat, pos);
  unflatten_mlp(critic, flat, pos);
  log_std = flat[pos++];
}

double PolicyParams::std() const { return std::exp(log_std); }

Eigen::RowVectorXd mlp_forward_batch(const Mlp& net, const Eigen::MatrixXd& x,
                                     MlpCache* cache) {
  Eigen::MatrixXd z1 = (net.w1 * x).colwise() + net.b1;
  Eigen::MatrixXd h1 = z1.cwiseMax(0.0);
  Eigen::MatrixXd z2 = (net.w2 * h1).colwise() + net.b2;
  Eigen::MatrixXd h2 = z2.cwiseMax(0.0);
  Eigen::RowVectorXd z3 = (net.w3 * h2).colwise() + net.b3;
  if (cache) {
    cache->x = x;
    cache->z1 = std::move(z1);
    cache->h1 = std::move(h1);
    cache->z2 = std::move(z2);
    cache->h2 = std::move(h2);
    cache->z3 = z3;
  }
  return z3;
}

MlpGrads mlp_backward_batch(const Mlp& net, const MlpCache& cache,
                            const Eigen::RowVectorXd& dz3) {
  MlpGrads g;
  g.w3 = dz3 * cache.h2.transpose();
  g.b3 = Eigen::VectorXd::Constant(1, dz3.sum());
  Eigen::MatrixXd dh2 = net.w3.transpose() * dz3;
  Eigen::MatrixXd d2 =
      dh2.cwiseProduct((cache.z2.array() > 0.0).cast<double>().matrix());
  g.w2 = d2 * cache.h1.transpose();
  g.b2 = d2.rowwise().sum();
  Eigen::MatrixXd dh1 = net.w2.transpose() * d2;
  Eigen::MatrixXd d1 =
      dh1.cwiseProduct((cache.z1.array() > 0.0).cast<double>().matrix());
  g.w1 = d1 * cache.x.transpose();
  g.b1 = d1.rowwise().sum();
  return g;
}

Eigen::VectorXd grads_to_flat(const MlpGrads& actor, const MlpGrads& critic,
                              double d_log_std) {
  Eigen::VectorXd flat(PolicyParams::num_params());
  int pos = 0;
  auto put_net = [&](const MlpGrads& g) {
    auto put = [&](const Eigen::MatrixXd& m) {
      for (int j = 0; j < m.cols(); ++j) {
        for (int i = 0; i < m.rows(); ++i) flat[pos++] = m(i, j);
      }
    };
    put(g.w1);
    put(g.b1);
    put(g.w2);
    put(g.b2);
    put(g.w3);
    put(g.b3);
  };
  put_net(actor);
  put_net(critic);
  flat[pos++] = d_log_std;
  return flat;
}

std::pair<double, double> actor_forward(const std::array<double, kObsDim>& obs,
                                        const PolicyParams& params) {
  Eigen::MatrixXd x = Eigen::Map<const Eigen::VectorXd>(obs.data(), kObsDim);
  const double z = mlp_forward_batch(params.actor, x)(0);
  if (!std::isfinite(z)) {
    throw std::runtime_error("actor_forward: non-finite network output");
  }
  return {std::tanh(z), params.std()};
}

double critic_forward(const std::array<double, kObsDim>& obs,
                      const PolicyParams& params) {
  Eigen::MatrixXd x = Eigen::Map<const Eigen::VectorXd>(obs.data(), kObsDim);
  const double v = mlp_forward_batch(params.critic, x)(0);
  if (!std::isfinite(v)) {
    throw std::runtime_error("critic_forward: non-finite network output");
  }
  return v;
}

double gaussian_log_prob(double x, double mean, double std) {
  const double z = (x - mean) / std;
  return -0.5 * z * z - std::log(std) - 0.9189385332046727417803297;
}

ActionSample sample_action(const std::array<double, kObsDim>& obs,
                           const PolicyParams& params, Rng& rng) {
  const auto [mean, std] = actor_forward(obs, params);
  const double raw = mean + std * rng.normal();
  ActionSample s;
  s.mean = mean;
  s.std = std;
  s.raw = raw;
  s.action = std::clamp(raw, -1.0, 1.0);
  s.log_prob = gaussian_log_prob(raw, mean, std);
  return s;
}

sim::PolicyFn deterministic_policy(const PolicyParams& params) {
  return [params](const sim::Observation& raw) {
    return actor_forward(sim::normalize_obs(raw), params).first;
  };
}

namespace {

constexpr char kMagic[8] = {'A', 'C', 'S', 'I', 'P', 'O', 'L', '\1'};
constexpr std::uint32_t kVersion = 1;

struct Reader {
  std::ifstream in;
  std::size_t offset = 0;
  explicit Reader(const std::string& path) : in(path, std::ios::binary) {
    if (!in) throw std::runtime_error("policy load: cannot open " + path);
  }
  void read(void* dst, std::size_t n) {
    in.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n) {
      throw std::runtime_error("policy load: truncated file at byte offset " +
                               std::to_string(offset));
    }
    offset += n;
  }
  template <typename T>
  T get() {
    T v;
    read(&v, sizeof(T));
    return v;
  }
};

void write_matrix(std::ofstream& out, const Eigen::MatrixXd& m) {
  const auto rows = static_cast<std::uint32_t>(m.rows());
  const auto cols = static_cast<std::uint32_t>(m.cols());
  out.write(reinterpret_cast<const char*>(&rows), sizeof(rows));
  out.write(reinterpret_cast<const char*>(&cols), sizeof(cols));
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) {
      const double v = m(i, j);
      out.write(reinterpret_cast<const char*>(&v), sizeof(v));
    }
  }
}

Eigen::MatrixXd read_matrix(Reader& r, int expect_rows, int expect_cols) {
  const auto rows = r.get<std::uint32_t>();
  const auto cols = r.get<std::uint32_t>();
  if (static_cast<int>(rows) != expect_rows || static_cast<int>(cols) != expect_cols) {
    throw std::runtime_error("policy load: unexpected layer shape at byte offset " +
                             std::to_string(r.offset));
  }
  Eigen::MatrixXd m(rows, cols);
  for (std::uint32_t i = 0; i < rows; ++i) {
    for (std::uint32_t j = 0; j < cols; ++j) m(i, j) = r.get<double>();
  }
  return m;
}

}  // namespace

void save(const PolicyParams& params, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("policy save: cannot open " + path);
  out.write(kMagic, sizeof(kMagic));
  out.write(reinterpret_cast<const char*>(&kVersion), sizeof(kVersion));
  const std::uint32_t n_layers = 12;
  out.write(reinterpret_cast<const char*>(&n_layers), sizeof(n_layers));
  for (const Mlp* net : {&params.actor, &params.critic}) {
    write_matrix(out, net->w1);
    write_matrix(out, net->b1);
    write_matrix(out, net->w2);
    write_matrix(out, net->b2);
    write_matrix(out, net->w3);
    write_matrix(out, net->b3);
  }
  out.write(reinterpret_cast<const char*>(&params.log_std), sizeof(double));
  if (!out) throw std::runtime_error("policy save: write failed for " + path);
}

PolicyParams load(const std::string& path) {
  Reader r(path);
  char magic[8];
  r.read(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("policy load: bad magic at byte offset 0");
  }
  const auto version = r.get<std::uint32_t>();
  if (version != kVersion) {
    throw std::runtime_error("policy load: unsupported format version " +
                             std::to_string(version));
  }
  const auto n_layers = r.get<std::uint32_t>();
  if (n_layers != 12) {
    throw std::runtime_error("policy load: unexpected layer count at byte offset " +
                             std::to_string(r.offset));
  }
  PolicyParams p;
  for (Mlp* net : {&p.actor, &p.critic}) {
    net->w1 = read_matrix(r, kHidden, kObsDim);
    net->b1 = read_matrix(r, kHidden, 1);
    net->w2 = read_matrix(r, kHidden, kHidden);
    net->b2 = read_matrix(r, kHidden, 1);
    net->w3 = read_matrix(r, 1, kHidden);
    net->b3 = read_matrix(r, 1, 1);
  }
  p.log_std = r.get<double>();
  return p;
}

}  // namespace accsi::policy
