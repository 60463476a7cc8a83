#pragma once

// Actor-critic multilayer perceptron with a diagonal-Gaussian policy head.
// Both networks share the same shape: three ELU hidden layers feeding a linear
// head (action mean for the actor, scalar value for the critic). The action
// log-standard-deviation is a learned state-independent vector.

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "quietgait/common/rng.hpp"

namespace quietgait::ppolearn {

using MatX = Eigen::MatrixXd;
using VecX = Eigen::VectorXd;

inline constexpr double kLogStdMin = -9.210340371976182;  // log(1e-4)
inline constexpr double kLogStdMax = 1.3862943611198906;  // log(4)

struct LayerParams {
  MatX W;  // out x in
  VecX b;  // out
};

struct PolicyParams {
  int obs_dim = 0;
  int act_dim = 0;
  int hidden_dim = 0;
  std::vector<LayerParams> actor;   // obs -> hidden x3 -> act_dim
  std::vector<LayerParams> critic;  // obs -> hidden x3 -> 1
  VecX log_std;                     // act_dim, clamped to [kLogStdMin, kLogStdMax]

  /// Orthogonal initialization: gain sqrt(2) on hidden layers, the final
  /// actor layer scaled by 0.01, all biases zero. The initial action standard
  /// deviation applies uniformly to every action channel.
  static PolicyParams init(int obs_dim, int act_dim, int hidden_dim, double initial_std,
                           Rng& rng);

  /// Throws when shapes are inconsistent, values are non-finite, or log_std
  /// leaves its bounds.
  void validate() const;
};

/// Activations retained by a forward pass for backpropagation. act[0] is the
/// input batch; act[l] for l >= 1 is the post-activation output of layer l-1.
struct ForwardCache {
  std::vector<MatX> act;
};

/// Evaluates one network (columns of x are samples). The cache is optional.
MatX net_forward(const std::vector<LayerParams>& net, const MatX& x, ForwardCache* cache);

/// Backpropagates d_out (gradient w.r.t. the network output batch) through a
/// cached forward pass, accumulating into per-layer gradients and returning
/// nothing; grads must be pre-sized to match the network.
void net_backward(const std::vector<LayerParams>& net, const ForwardCache& cache,
                  const MatX& d_out, std::vector<MatX>& dW, std::vector<VecX>& db);

struct EvalResult {
  MatX mean;   // act_dim x batch
  VecX value;  // batch
};

/// Batched policy evaluation; observation columns are samples.
EvalResult forward(const PolicyParams& params, const MatX& obs);

/// Single-observation convenience wrapper.
std::pair<VecX, double> forward_one(const PolicyParams& params, const VecX& obs);

/// Draws action ~ Normal(mean, diag(exp(log_std))^2) and returns its exact
/// log density.
std::pair<VecX, double> sample_action(const PolicyParams& params, const VecX& mean,
                                      Rng& rng);

/// Exact diagonal-Gaussian log densities for an action batch (columns).
VecX log_prob(const PolicyParams& params, const MatX& mean, const MatX& actions);

/// Closed-form entropy of the Gaussian policy: sum_i(log_std_i + 0.5 log(2 pi e)).
double entropy(const PolicyParams& params);

}  // namespace quietgait::ppolearn
