#include "decoysim/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "decoysim/error.hpp"

namespace decoysim {
namespace {

constexpr const char* kModule = "ppo";

[[noreturn]] void bad_config(const std::string& msg) {
  throw Error(ErrorCode::kInvalidArgument, kModule, msg);
}

Matrix column_log_softmax(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index c = 0; c < logits.cols(); ++c) {
    out.col(c) = log_softmax(logits.col(c));
  }
  return out;
}

}  // namespace

void PpoConfig::validate() const {
  if (!(clip_coef > 0.0 && clip_coef < 1.0)) bad_config("clip_coef must be in (0,1)");
  if (!(gamma > 0.0 && gamma <= 1.0)) bad_config("gamma must be in (0,1]");
  if (!(gae_lambda > 0.0 && gae_lambda <= 1.0)) {
    bad_config("gae_lambda must be in (0,1]");
  }
  if (num_minibatches <= 0 || update_epochs <= 0 || rollout_length <= 0 ||
      num_envs <= 0 || total_timesteps <= 0) {
    bad_config("counts must be positive");
  }
  if (batch_size() % num_minibatches != 0) {
    bad_config("rollout_length * num_envs must divide into num_minibatches");
  }
  if (learning_rate < 0.0 || max_grad_norm <= 0.0) {
    bad_config("learning_rate must be >= 0 and max_grad_norm > 0");
  }
  if (hidden.empty()) bad_config("at least one hidden layer is required");
}

int PpoConfig::num_updates() const {
  return static_cast<int>(std::max<std::int64_t>(1, total_timesteps / batch_size()));
}

double annealed_learning_rate(const PpoConfig& cfg, int update) {
  if (!cfg.anneal_lr) return cfg.learning_rate;
  const double frac =
      1.0 - static_cast<double>(update - 1) / static_cast<double>(cfg.num_updates());
  return frac * cfg.learning_rate;
}

// --- categorical policy -------------------------------------------------------

Vector log_softmax(const Vector& logits) {
  const double m = logits.maxCoeff();
  const double lse = m + std::log((logits.array() - m).exp().sum());
  return (logits.array() - lse).matrix();
}

PolicySample sample_categorical(const Vector& logits, Rng& rng) {
  const Vector logp = log_softmax(logits);
  const Vector p = logp.array().exp().matrix();
  PolicySample s;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p(i) > 0.0) s.entropy -= p(i) * logp(i);
  }
  const double u = rng.uniform();
  double acc = 0.0;
  s.action = static_cast<std::size_t>(p.size() - 1);
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    acc += p(i);
    if (u < acc) {
      s.action = static_cast<std::size_t>(i);
      break;
    }
  }
  // Guard against landing on a zero-probability tail through rounding.
  while (p(static_cast<Eigen::Index>(s.action)) == 0.0 && s.action > 0) --s.action;
  s.log_prob = logp(static_cast<Eigen::Index>(s.action));
  return s;
}

PolicySample policy_sample(const ActorCritic& net, std::span<const double> obs,
                           Rng& rng) {
  return sample_categorical(net.logits(obs), rng);
}

// --- GAE ------------------------------------------------------------------------

void TrajectoryBatch::clear() {
  observations.clear();
  actions.clear();
  log_probs.clear();
  rewards.clear();
  values.clear();
  dones.clear();
  bootstrap_value = 0.0;
}

GaeResult compute_gae(const TrajectoryBatch& batch, double gamma, double lambda) {
  const std::size_t n = batch.size();
  GaeResult out;
  out.advantages.assign(n, 0.0);
  out.returns.assign(n, 0.0);
  double next_adv = 0.0;
  for (std::size_t t = n; t-- > 0;) {
    const double next_value = (t + 1 < n) ? batch.values[t + 1] : batch.bootstrap_value;
    const double live = batch.dones[t] ? 0.0 : 1.0;
    const double delta = batch.rewards[t] + gamma * next_value * live - batch.values[t];
    next_adv = delta + gamma * lambda * live * next_adv;
    out.advantages[t] = next_adv;
    out.returns[t] = next_adv + batch.values[t];
  }
  return out;
}

// --- loss -----------------------------------------------------------------------

SurrogateTerm clipped_surrogate(double ratio, double advantage, double clip) {
  const double unclipped = ratio * advantage;
  const double clipped_ratio = std::clamp(ratio, 1.0 - clip, 1.0 + clip);
  const double clipped = clipped_ratio * advantage;
  if (unclipped <= clipped) return {unclipped, false};
  return {clipped, true};
}

LossDiagnostics ppo_loss(const ActorCritic& net, const LossBatch& batch,
                         const LossWeights& w, std::span<double> grad) {
  const auto n = static_cast<Eigen::Index>(batch.actions.size());
  if (n == 0 || batch.observations.cols() != n) {
    throw Error(ErrorCode::kShapeMismatch, kModule, "empty or misaligned batch");
  }
  const double inv_n = 1.0 / static_cast<double>(n);

  std::vector<double> adv = batch.advantages;
  if (w.normalize_advantages && n > 1) {
    const double mean = std::accumulate(adv.begin(), adv.end(), 0.0) * inv_n;
    double var = 0.0;
    for (double a : adv) var += (a - mean) * (a - mean);
    const double sd = std::sqrt(var / static_cast<double>(n - 1));
    for (double& a : adv) a = (a - mean) / (sd + 1e-8);
  }

  MlpLayout::Tape actor_tape, critic_tape;
  const bool want_grad = !grad.empty();
  const Matrix logits = net.logits(batch.observations, want_grad ? &actor_tape : nullptr);
  const Matrix values = net.values(batch.observations, want_grad ? &critic_tape : nullptr);
  const Matrix logp = column_log_softmax(logits);
  const Matrix p = logp.array().exp().matrix();

  LossDiagnostics d;
  Matrix grad_logits = Matrix::Zero(logits.rows(), n);
  Matrix grad_values(1, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto a = static_cast<Eigen::Index>(batch.actions[static_cast<std::size_t>(i)]);
    const double log_ratio = logp(a, i) - batch.old_log_probs[static_cast<std::size_t>(i)];
    const double ratio = std::exp(log_ratio);
    const double advantage = adv[static_cast<std::size_t>(i)];
    const SurrogateTerm s = clipped_surrogate(ratio, advantage, w.clip);
    d.policy_loss -= s.value * inv_n;
    if (std::abs(ratio - 1.0) > w.clip) d.clip_fraction += inv_n;
    d.approx_kl += ((ratio - 1.0) - log_ratio) * inv_n;

    double entropy = 0.0;
    for (Eigen::Index j = 0; j < logits.rows(); ++j) entropy -= p(j, i) * logp(j, i);
    d.entropy += entropy * inv_n;

    const double diff = values(0, i) - batch.returns[static_cast<std::size_t>(i)];
    d.value_loss += diff * diff * inv_n;

    if (want_grad) {
      const double dloss_dlogp = s.clipped ? 0.0 : -advantage * ratio * inv_n;
      for (Eigen::Index j = 0; j < logits.rows(); ++j) {
        const double dlogp = (j == a ? 1.0 : 0.0) - p(j, i);
        const double dentropy = -p(j, i) * (logp(j, i) + entropy);
        grad_logits(j, i) = dloss_dlogp * dlogp - w.ent_coef * inv_n * dentropy;
      }
      grad_values(0, i) = w.vf_coef * 2.0 * diff * inv_n;
    }
  }
  d.total = d.policy_loss + w.vf_coef * d.value_loss - w.ent_coef * d.entropy;
  if (!std::isfinite(d.total)) {
    throw Error(ErrorCode::kNonFiniteLoss, kModule,
                "non-finite loss (policy " + std::to_string(d.policy_loss) +
                    ", value " + std::to_string(d.value_loss) + ", entropy " +
                    std::to_string(d.entropy) + ")");
  }

  if (want_grad) {
    std::fill(grad.begin(), grad.end(), 0.0);
    const std::size_t split = net.actor().parameter_count();
    net.actor().backward(net.actor_parameters(), actor_tape, grad_logits,
                         grad.subspan(0, split));
    net.critic().backward(net.critic_parameters(), critic_tape, grad_values,
                          grad.subspan(split));
  }
  return d;
}

// --- optimizer --------------------------------------------------------------------

Adam::Adam(std::size_t size, double beta1, double beta2, double eps)
    : beta1_(beta1), beta2_(beta2), eps_(eps), m_(size, 0.0), v_(size, 0.0) {}

void Adam::step(std::span<double> params, std::span<const double> grad, double lr) {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  const double step_size = lr / bc1;
  const double bc2_sqrt = std::sqrt(bc2);
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
    const double denom = std::sqrt(v_[i]) / bc2_sqrt + eps_;
    params[i] -= step_size * m_[i] / denom;
  }
}

double clip_grad_norm(std::span<double> grad, double max_norm) {
  double sq = 0.0;
  for (double g : grad) sq += g * g;
  const double norm = std::sqrt(sq);
  const double coef = max_norm / (norm + 1e-6);
  if (coef < 1.0) {
    for (double& g : grad) g *= coef;
  }
  return norm;
}

// --- trainer ----------------------------------------------------------------------

PpoTrainer::PpoTrainer(EnvFactory factory, PpoConfig config)
    : factory_(std::move(factory)), cfg_(std::move(config)) {
  cfg_.validate();
}

std::uint64_t PpoTrainer::episode_seed(std::size_t env_index,
                                       std::uint64_t episode) const {
  const std::uint64_t env_seed =
      derive_seed(cfg_.seed, SeedStream::kEnvironment, env_index);
  return derive_seed(env_seed, SeedStream::kEnvironment, episode);
}

void PpoTrainer::begin() {
  envs_.clear();
  for (int i = 0; i < cfg_.num_envs; ++i) {
    EnvSlot slot;
    slot.env = factory_(static_cast<std::size_t>(i));
    slot.obs = slot.env->reset(episode_seed(static_cast<std::size_t>(i), 0));
    envs_.push_back(std::move(slot));
  }
  const auto& first = *envs_.front().env;
  net_ = ActorCritic(first.observation_size(), first.action_count(), cfg_.hidden);
  Rng init_rng(derive_seed(cfg_.seed, SeedStream::kNetworkInit));
  net_.initialize(init_rng);
  actor_adam_.emplace(net_.actor().parameter_count());
  critic_adam_.emplace(net_.critic().parameter_count());
  policy_rng_ = Rng(derive_seed(cfg_.seed, SeedStream::kPolicySampling));
  shuffle_rng_ = Rng(derive_seed(cfg_.seed, SeedStream::kMinibatchShuffle));
  rollouts_.assign(envs_.size(), TrajectoryBatch{});
  global_step_ = 0;
}

UpdateMetrics PpoTrainer::update_once(int update, double lr) {
  const std::size_t n_envs = envs_.size();
  const auto obs_dim = static_cast<Eigen::Index>(net_.observation_size());
  for (auto& r : rollouts_) r.clear();

  std::vector<double> finished_returns;
  Matrix obs_batch(obs_dim, static_cast<Eigen::Index>(n_envs));
  for (int t = 0; t < cfg_.rollout_length; ++t) {
    for (std::size_t e = 0; e < n_envs; ++e) {
      obs_batch.col(static_cast<Eigen::Index>(e)) =
          Eigen::Map<const Vector>(envs_[e].obs.data(), obs_dim);
    }
    const Matrix logits = net_.logits(obs_batch);
    const Matrix values = net_.values(obs_batch);
    for (std::size_t e = 0; e < n_envs; ++e) {
      EnvSlot& slot = envs_[e];
      const auto col = static_cast<Eigen::Index>(e);
      const PolicySample s = sample_categorical(logits.col(col), policy_rng_);
      Transition tr = slot.env->step(s.action);

      TrajectoryBatch& roll = rollouts_[e];
      roll.observations.push_back(std::move(slot.obs));
      roll.actions.push_back(s.action);
      roll.log_probs.push_back(s.log_prob);
      roll.rewards.push_back(tr.reward);
      roll.values.push_back(values(0, col));
      roll.dones.push_back(tr.done ? 1 : 0);

      slot.episode_return += tr.reward;
      ++global_step_;
      if (tr.done) {
        finished_returns.push_back(slot.episode_return);
        slot.episode_return = 0.0;
        ++slot.episodes;
        slot.obs = slot.env->reset(episode_seed(e, slot.episodes));
      } else {
        slot.obs = std::move(tr.observation);
      }
    }
  }

  // Flatten env-major: index = e * T + t.
  const std::size_t steps = static_cast<std::size_t>(cfg_.rollout_length);
  const std::size_t total = steps * n_envs;
  Matrix all_obs(obs_dim, static_cast<Eigen::Index>(total));
  std::vector<std::size_t> all_actions(total);
  std::vector<double> all_logp(total), all_adv(total), all_ret(total);
  for (std::size_t e = 0; e < n_envs; ++e) {
    TrajectoryBatch& roll = rollouts_[e];
    roll.bootstrap_value = net_.value(envs_[e].obs);
    const GaeResult gae = compute_gae(roll, cfg_.gamma, cfg_.gae_lambda);
    for (std::size_t t = 0; t < steps; ++t) {
      const std::size_t k = e * steps + t;
      all_obs.col(static_cast<Eigen::Index>(k)) =
          Eigen::Map<const Vector>(roll.observations[t].data(), obs_dim);
      all_actions[k] = roll.actions[t];
      all_logp[k] = roll.log_probs[t];
      all_adv[k] = gae.advantages[t];
      all_ret[k] = gae.returns[t];
    }
  }

  const LossWeights weights{cfg_.clip_coef, cfg_.ent_coef, cfg_.vf_coef,
                            cfg_.normalize_advantages};
  const std::size_t mb_size = total / static_cast<std::size_t>(cfg_.num_minibatches);
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> grad(net_.parameters().size());

  UpdateMetrics m;
  m.update = update;
  m.learning_rate = lr;
  int minibatches_run = 0;
  LossBatch mb;
  mb.observations.resize(obs_dim, static_cast<Eigen::Index>(mb_size));
  for (int epoch = 0; epoch < cfg_.update_epochs; ++epoch) {
    for (std::size_t i = total; i > 1; --i) {
      std::swap(order[i - 1], order[shuffle_rng_.below(i)]);
    }
    for (int b = 0; b < cfg_.num_minibatches; ++b) {
      mb.actions.resize(mb_size);
      mb.old_log_probs.resize(mb_size);
      mb.advantages.resize(mb_size);
      mb.returns.resize(mb_size);
      for (std::size_t j = 0; j < mb_size; ++j) {
        const std::size_t k = order[static_cast<std::size_t>(b) * mb_size + j];
        mb.observations.col(static_cast<Eigen::Index>(j)) =
            all_obs.col(static_cast<Eigen::Index>(k));
        mb.actions[j] = all_actions[k];
        mb.old_log_probs[j] = all_logp[k];
        mb.advantages[j] = all_adv[k];
        mb.returns[j] = all_ret[k];
      }
      const LossDiagnostics d = ppo_loss(net_, mb, weights, grad);
      // Separate optimizer and norm clip per network.
      const std::size_t na = net_.actor().parameter_count();
      std::span<double> params(net_.parameters());
      std::span<double> g(grad);
      clip_grad_norm(g.first(na), cfg_.max_grad_norm);
      clip_grad_norm(g.subspan(na), cfg_.max_grad_norm);
      actor_adam_->step(params.first(na), g.first(na), lr);
      critic_adam_->step(params.subspan(na), g.subspan(na), lr);

      m.policy_loss += d.policy_loss;
      m.value_loss += d.value_loss;
      m.entropy += d.entropy;
      m.clip_fraction += d.clip_fraction;
      m.approx_kl += d.approx_kl;
      ++minibatches_run;
    }
  }
  const double inv = 1.0 / static_cast<double>(minibatches_run);
  m.policy_loss *= inv;
  m.value_loss *= inv;
  m.entropy *= inv;
  m.clip_fraction *= inv;
  m.approx_kl *= inv;
  m.global_step = global_step_;
  if (!finished_returns.empty()) {
    m.mean_episodic_return =
        std::accumulate(finished_returns.begin(), finished_returns.end(), 0.0) /
        static_cast<double>(finished_returns.size());
  }
  return m;
}

ActorCritic PpoTrainer::train(
    const std::function<void(const UpdateMetrics&)>& on_update) {
  begin();
  const int updates = cfg_.num_updates();
  for (int u = 1; u <= updates; ++u) {
    const UpdateMetrics m = update_once(u, annealed_learning_rate(cfg_, u));
    if (on_update) on_update(m);
  }
  return net_;
}

// --- gradient check -----------------------------------------------------------------

GradientCheckReport gradient_check(std::span<const double> params,
                                   const LossFunction& loss, double tolerance,
                                   double h, double floor) {
  GradientCheckReport report;
  std::vector<double> p(params.begin(), params.end());
  std::vector<double> analytic(p.size());
  loss(p, analytic);
  std::vector<double> scratch;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double orig = p[i];
    p[i] = orig + h;
    const double up = loss(p, scratch);
    p[i] = orig - h;
    const double down = loss(p, scratch);
    p[i] = orig;
    const double numeric = (up - down) / (2.0 * h);
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), floor});
    const double rel = std::abs(analytic[i] - numeric) / denom;
    if (rel > report.worst_relative_error) {
      report.worst_relative_error = rel;
      report.worst_index = i;
    }
    ++report.checked;
  }
  report.passed = report.worst_relative_error < tolerance;
  return report;
}

bool PpoLossProbe::on_clip_boundary(std::span<const double> params) const {
  ActorCritic probe = *net;
  std::copy(params.begin(), params.end(), probe.parameters().begin());
  const Matrix logp = column_log_softmax(probe.logits(batch->observations));
  for (std::size_t i = 0; i < batch->actions.size(); ++i) {
    const double ratio =
        std::exp(logp(static_cast<Eigen::Index>(batch->actions[i]),
                      static_cast<Eigen::Index>(i)) -
                 batch->old_log_probs[i]);
    if (std::abs(ratio - (1.0 - weights.clip)) < kink_width ||
        std::abs(ratio - (1.0 + weights.clip)) < kink_width) {
      return true;
    }
  }
  return false;
}

double PpoLossProbe::operator()(std::span<const double> params,
                                std::span<double> grad) const {
  ActorCritic probe = *net;
  std::copy(params.begin(), params.end(), probe.parameters().begin());
  return ppo_loss(probe, *batch, weights, grad).total;
}

GradientCheckReport check_ppo_gradients(const PpoLossProbe& probe,
                                        double tolerance, bool throw_on_failure) {
  const auto& params = probe.net->parameters();
  if (probe.on_clip_boundary(params)) {
    GradientCheckReport skipped;
    skipped.non_differentiable = true;
    skipped.passed = true;
    return skipped;
  }
  const GradientCheckReport report = gradient_check(
      params, [&](std::span<const double> p, std::span<double> g) {
        return probe(p, g);
      },
      tolerance);
  if (!report.passed && throw_on_failure) {
    throw Error(ErrorCode::kCheckFailed, kModule,
                "gradient check failed at parameter " +
                    std::to_string(report.worst_index) + " (relative error " +
                    std::to_string(report.worst_relative_error) + ")");
  }
  return report;
}

}  // namespace decoysim
