#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "decoysim/env.hpp"
#include "decoysim/mlp.hpp"
#include "decoysim/rng.hpp"

namespace decoysim {

struct PpoConfig {
  double learning_rate = 2.5e-4;
  bool anneal_lr = true;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  int num_minibatches = 4;
  int update_epochs = 4;
  double clip_coef = 0.2;
  double ent_coef = 0.01;
  double vf_coef = 0.5;
  double max_grad_norm = 0.5;
  bool normalize_advantages = true;
  int rollout_length = 128;
  int num_envs = 4;
  std::int64_t total_timesteps = 500'000;
  std::uint64_t seed = 1;
  std::vector<std::size_t> hidden = {64, 64};

  // Throws Error{kInvalidArgument} on out-of-range values.
  void validate() const;
  int num_updates() const;
  int batch_size() const { return rollout_length * num_envs; }
};

// Linear schedule: lr * (1 - (update - 1) / num_updates), update 1-based.
double annealed_learning_rate(const PpoConfig& cfg, int update);

// --- categorical policy -----------------------------------------------------

Vector log_softmax(const Vector& logits);

struct PolicySample {
  std::size_t action = 0;
  double log_prob = 0.0;
  double entropy = 0.0;
};

// Samples a ~ softmax(logits); also returns log pi(a) and the entropy.
PolicySample sample_categorical(const Vector& logits, Rng& rng);

// Throws Error{kShapeMismatch} if obs does not fit the network.
PolicySample policy_sample(const ActorCritic& net, std::span<const double> obs,
                           Rng& rng);

// --- rollout storage and GAE --------------------------------------------------

// One environment's rollout. dones[t] marks that the episode ended with
// step t, so observation t+1 (if any) starts a new episode.
struct TrajectoryBatch {
  std::vector<std::vector<double>> observations;
  std::vector<std::size_t> actions;
  std::vector<double> log_probs;
  std::vector<double> rewards;
  std::vector<double> values;
  std::vector<std::uint8_t> dones;
  double bootstrap_value = 0.0;

  std::size_t size() const { return rewards.size(); }
  void clear();
};

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

GaeResult compute_gae(const TrajectoryBatch& batch, double gamma, double lambda);

// --- clipped surrogate --------------------------------------------------------

struct SurrogateTerm {
  double value = 0.0;  // min(w A, clip(w) A)
  bool clipped = false;
};

SurrogateTerm clipped_surrogate(double ratio, double advantage, double clip);

struct LossDiagnostics {
  double total = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
};

// Flattened minibatch: observations one per column.
struct LossBatch {
  Matrix observations;
  std::vector<std::size_t> actions;
  std::vector<double> old_log_probs;
  std::vector<double> advantages;
  std::vector<double> returns;
};

struct LossWeights {
  double clip = 0.2;
  double ent_coef = 0.01;
  double vf_coef = 0.5;
  bool normalize_advantages = true;
};

// total = -E[min(wA, clip(w)A)] + vf * E[(V - R)^2] - ent * E[H].
// If `grad` is non-empty it receives d total / d params (overwritten).
// Throws Error{kNonFiniteLoss} when the loss is not finite.
LossDiagnostics ppo_loss(const ActorCritic& net, const LossBatch& batch,
                         const LossWeights& weights, std::span<double> grad = {});

// --- optimizer ------------------------------------------------------------------

class Adam {
 public:
  explicit Adam(std::size_t size, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-5);
  void step(std::span<double> params, std::span<const double> grad, double lr);

 private:
  double beta1_, beta2_, eps_;
  std::vector<double> m_, v_;
  std::int64_t t_ = 0;
};

// Rescales grad in place so its L2 norm is at most max_norm; returns the
// norm before clipping.
double clip_grad_norm(std::span<double> grad, double max_norm);

// --- training --------------------------------------------------------------------

struct UpdateMetrics {
  int update = 0;
  std::int64_t global_step = 0;
  std::optional<double> mean_episodic_return;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
  double learning_rate = 0.0;
};

using EnvFactory = std::function<std::unique_ptr<Environment>(std::size_t)>;

class PpoTrainer {
 public:
  PpoTrainer(EnvFactory factory, PpoConfig config);

  // Runs the full schedule. on_update (optional) sees each update's metrics.
  ActorCritic train(const std::function<void(const UpdateMetrics&)>& on_update = {});

  // One rollout+update cycle, exposed so tests can inspect intermediate
  // parameters. Call begin() first.
  void begin();
  UpdateMetrics update_once(int update, double learning_rate);

  const ActorCritic& model() const { return net_; }
  ActorCritic& model() { return net_; }

 private:
  struct EnvSlot {
    std::unique_ptr<Environment> env;
    std::vector<double> obs;
    std::uint64_t episodes = 0;
    double episode_return = 0.0;
  };

  std::uint64_t episode_seed(std::size_t env_index, std::uint64_t episode) const;

  EnvFactory factory_;
  PpoConfig cfg_;
  ActorCritic net_;
  std::optional<Adam> actor_adam_;
  std::optional<Adam> critic_adam_;
  std::vector<EnvSlot> envs_;
  std::vector<TrajectoryBatch> rollouts_;
  Rng policy_rng_{0};
  Rng shuffle_rng_{0};
  std::int64_t global_step_ = 0;
};

// --- gradient check ---------------------------------------------------------------

struct GradientCheckReport {
  bool passed = false;
  // Set when some sample sits on a clip kink; the check is skipped then.
  bool non_differentiable = false;
  std::size_t checked = 0;
  double worst_relative_error = 0.0;
  std::size_t worst_index = 0;
};

using LossFunction = std::function<double(std::span<const double> params,
                                          std::span<double> grad)>;

// Central differences with step h against the analytic gradient. Relative
// error per element is |a - n| / max(|a|, |n|, floor).
GradientCheckReport gradient_check(std::span<const double> params,
                                   const LossFunction& loss, double tolerance,
                                   double h = 1e-6, double floor = 1e-6);

// Builds a LossFunction over an ActorCritic's parameters for ppo_loss, and
// flags clip kinks (|w - (1 +- clip)| < kink_width) for the check.
struct PpoLossProbe {
  const ActorCritic* net = nullptr;
  const LossBatch* batch = nullptr;
  LossWeights weights;
  double kink_width = 1e-4;

  bool on_clip_boundary(std::span<const double> params) const;
  double operator()(std::span<const double> params, std::span<double> grad) const;
};

// Runs gradient_check on a PpoLossProbe, skipping with non_differentiable
// set when the batch sits on a clip kink. Throws Error{kCheckFailed} naming
// the worst parameter when throw_on_failure is set and the check fails.
GradientCheckReport check_ppo_gradients(const PpoLossProbe& probe,
                                        double tolerance,
                                        bool throw_on_failure = false);

}  // namespace decoysim
