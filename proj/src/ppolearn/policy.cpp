#include "quietgait/ppolearn/policy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "quietgait/common/error.hpp"

namespace quietgait::ppolearn {

namespace {

constexpr double kHalfLog2Pi = 0.9189385332046727;  // 0.5 * log(2*pi)

MatX orthogonal(int rows, int cols, double gain, Rng& rng) {
  const int n = std::max(rows, cols);
  const int m = std::min(rows, cols);
  MatX g(n, m);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < n; ++i) g(i, j) = rng.normal();
  const Eigen::HouseholderQR<MatX> qr(g);
  MatX q = qr.householderQ() * MatX::Identity(n, m);
  const MatX r = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
  // fix signs so the factorization (and hence the init) is unique
  for (int j = 0; j < m; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  if (rows >= cols) return gain * q;
  return gain * q.transpose();
}

inline double elu(double x) { return x > 0.0 ? x : std::expm1(x); }

void check_layer(const LayerParams& l, int out, int in, const char* net, int idx) {
  if (l.W.rows() != out || l.W.cols() != in || l.b.size() != out)
    throw InvalidInputError(std::string("policy: ") + net + " layer " + std::to_string(idx) +
                            " has shape " + std::to_string(l.W.rows()) + "x" +
                            std::to_string(l.W.cols()) + ", expected " + std::to_string(out) +
                            "x" + std::to_string(in));
  if (!l.W.allFinite() || !l.b.allFinite())
    throw InvalidInputError(std::string("policy: ") + net + " layer " + std::to_string(idx) +
                            " contains non-finite values");
}

}  // namespace

PolicyParams PolicyParams::init(int obs_dim, int act_dim, int hidden_dim, double initial_std,
                                Rng& rng) {
  if (obs_dim < 1 || act_dim < 1 || hidden_dim < 1)
    throw InvalidInputError("policy init: dimensions must be positive");
  if (!(initial_std > 0.0)) throw InvalidInputError("policy init: initial std must be positive");

  PolicyParams p;
  p.obs_dim = obs_dim;
  p.act_dim = act_dim;
  p.hidden_dim = hidden_dim;
  const double gain = std::sqrt(2.0);
  auto build = [&](int out_dim, double final_gain) {
    std::vector<LayerParams> net(4);
    const int dims[5] = {obs_dim, hidden_dim, hidden_dim, hidden_dim, out_dim};
    for (int l = 0; l < 4; ++l) {
      const double g = (l == 3) ? final_gain : gain;
      net[l].W = orthogonal(dims[l + 1], dims[l], g, rng);
      net[l].b = VecX::Zero(dims[l + 1]);
    }
    return net;
  };
  p.actor = build(act_dim, 0.01);
  p.critic = build(1, 1.0);
  const double ls = std::clamp(std::log(initial_std), kLogStdMin, kLogStdMax);
  p.log_std = VecX::Constant(act_dim, ls);
  return p;
}

void PolicyParams::validate() const {
  if (obs_dim < 1 || act_dim < 1 || hidden_dim < 1)
    throw InvalidInputError("policy: dimensions must be positive");
  if (actor.size() != 4 || critic.size() != 4)
    throw InvalidInputError("policy: networks must have exactly four layers");
  const int da[5] = {obs_dim, hidden_dim, hidden_dim, hidden_dim, act_dim};
  const int dc[5] = {obs_dim, hidden_dim, hidden_dim, hidden_dim, 1};
  for (int l = 0; l < 4; ++l) {
    check_layer(actor[l], da[l + 1], da[l], "actor", l);
    check_layer(critic[l], dc[l + 1], dc[l], "critic", l);
  }
  if (log_std.size() != act_dim)
    throw InvalidInputError("policy: log_std length " + std::to_string(log_std.size()) +
                            " does not match action dim " + std::to_string(act_dim));
  for (int i = 0; i < act_dim; ++i) {
    if (!std::isfinite(log_std[i]) || log_std[i] < kLogStdMin - 1e-12 ||
        log_std[i] > kLogStdMax + 1e-12)
      throw InvalidInputError("policy: log_std[" + std::to_string(i) + "] out of bounds");
  }
}

MatX net_forward(const std::vector<LayerParams>& net, const MatX& x, ForwardCache* cache) {
  if (x.rows() != net.front().W.cols())
    throw InvalidInputError("policy forward: observation dim " + std::to_string(x.rows()) +
                            " does not match network input dim " +
                            std::to_string(net.front().W.cols()));
  if (cache != nullptr) {
    cache->act.clear();
    cache->act.reserve(net.size());
    cache->act.push_back(x);
  }
  MatX a = x;
  for (std::size_t l = 0; l < net.size(); ++l) {
    MatX z = net[l].W * a;
    z.colwise() += net[l].b;
    if (l + 1 < net.size()) {
      a = z.unaryExpr([](double v) { return elu(v); });
      if (cache != nullptr) cache->act.push_back(a);
    } else {
      a = std::move(z);
    }
  }
  return a;
}

void net_backward(const std::vector<LayerParams>& net, const ForwardCache& cache,
                  const MatX& d_out, std::vector<MatX>& dW, std::vector<VecX>& db) {
  MatX dz = d_out;
  for (int l = static_cast<int>(net.size()) - 1; l >= 0; --l) {
    dW[l].noalias() += dz * cache.act[l].transpose();
    db[l] += dz.rowwise().sum();
    if (l > 0) {
      MatX da = net[l].W.transpose() * dz;
      // ELU'(z) = 1 for z > 0 and e^z = activation + 1 otherwise
      dz = da.cwiseProduct(cache.act[l].unaryExpr(
          [](double a) { return a > 0.0 ? 1.0 : a + 1.0; }));
    }
  }
}

EvalResult forward(const PolicyParams& params, const MatX& obs) {
  EvalResult out;
  out.mean = net_forward(params.actor, obs, nullptr);
  out.value = net_forward(params.critic, obs, nullptr).row(0).transpose();
  return out;
}

std::pair<VecX, double> forward_one(const PolicyParams& params, const VecX& obs) {
  const EvalResult r = forward(params, obs);
  return {r.mean.col(0), r.value[0]};
}

std::pair<VecX, double> sample_action(const PolicyParams& params, const VecX& mean,
                                      Rng& rng) {
  if (!mean.allFinite()) throw InvalidInputError("sample_action: non-finite mean");
  const int n = params.act_dim;
  VecX action(n);
  double lp = 0.0;
  for (int i = 0; i < n; ++i) {
    const double sigma = std::exp(params.log_std[i]);
    const double eps = rng.normal();
    action[i] = mean[i] + sigma * eps;
    lp += -params.log_std[i] - kHalfLog2Pi - 0.5 * eps * eps;
  }
  return {action, lp};
}

VecX log_prob(const PolicyParams& params, const MatX& mean, const MatX& actions) {
  const int n = params.act_dim;
  const auto batch = mean.cols();
  VecX lp = VecX::Constant(batch, 0.0);
  double base = 0.0;
  for (int i = 0; i < n; ++i) base += -params.log_std[i] - kHalfLog2Pi;
  for (Eigen::Index j = 0; j < batch; ++j) {
    double q = 0.0;
    for (int i = 0; i < n; ++i) {
      const double sigma = std::exp(params.log_std[i]);
      const double d = (actions(i, j) - mean(i, j)) / sigma;
      q += d * d;
    }
    lp[j] = base - 0.5 * q;
  }
  return lp;
}

double entropy(const PolicyParams& params) {
  const double per_dim = 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e);
  double h = 0.0;
  for (int i = 0; i < params.act_dim; ++i) h += params.log_std[i] + per_dim;
  return h;
}

}  // namespace quietgait::ppolearn
