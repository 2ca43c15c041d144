#include "decoysim/mlp.hpp"

#include <cmath>

#include "decoysim/error.hpp"

namespace decoysim {

MlpLayout::MlpLayout(std::vector<std::size_t> layer_sizes)
    : sizes_(std::move(layer_sizes)) {
  if (sizes_.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "ppo", "MLP needs >= 2 layer sizes");
  }
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    offsets_.push_back(parameter_count_);
    parameter_count_ += sizes_[l + 1] * sizes_[l] + sizes_[l + 1];
  }
}

Matrix MlpLayout::forward(std::span<const double> params, const Matrix& input,
                          Tape* tape) const {
  const std::size_t layers = sizes_.size() - 1;
  if (tape) {
    tape->activations.clear();
    tape->activations.push_back(input);
  }
  Matrix x = input;
  for (std::size_t l = 0; l < layers; ++l) {
    const auto out = static_cast<Eigen::Index>(sizes_[l + 1]);
    const auto in = static_cast<Eigen::Index>(sizes_[l]);
    Eigen::Map<const Matrix> w(params.data() + offsets_[l], out, in);
    Eigen::Map<const Vector> b(params.data() + offsets_[l] + out * in, out);
    Matrix z = w * x;
    z.colwise() += b;
    if (l + 1 < layers) z = z.array().tanh().matrix();
    x = std::move(z);
    if (tape) tape->activations.push_back(x);
  }
  return x;
}

void MlpLayout::backward(std::span<const double> params, const Tape& tape,
                         const Matrix& grad_output,
                         std::span<double> grad) const {
  const std::size_t layers = sizes_.size() - 1;
  Matrix delta = grad_output;
  for (std::size_t l = layers; l-- > 0;) {
    const auto out = static_cast<Eigen::Index>(sizes_[l + 1]);
    const auto in = static_cast<Eigen::Index>(sizes_[l]);
    if (l + 1 < layers) {
      // tanh' = 1 - y^2 on this layer's stored output
      const Matrix& y = tape.activations[l + 1];
      delta = (delta.array() * (1.0 - y.array().square())).matrix();
    }
    const Matrix& x = tape.activations[l];
    Eigen::Map<Matrix> gw(grad.data() + offsets_[l], out, in);
    Eigen::Map<Vector> gb(grad.data() + offsets_[l] + out * in, out);
    gw.noalias() += delta * x.transpose();
    gb += delta.rowwise().sum();
    if (l > 0) {
      Eigen::Map<const Matrix> w(params.data() + offsets_[l], out, in);
      delta = w.transpose() * delta;
    }
  }
}

void MlpLayout::init_orthogonal(std::span<double> params, Rng& rng,
                                double hidden_gain, double output_gain) const {
  const std::size_t layers = sizes_.size() - 1;
  for (std::size_t l = 0; l < layers; ++l) {
    const auto out = static_cast<Eigen::Index>(sizes_[l + 1]);
    const auto in = static_cast<Eigen::Index>(sizes_[l]);
    const Eigen::Index big = std::max(out, in);
    const Eigen::Index small = std::min(out, in);
    Matrix g(big, small);
    for (Eigen::Index j = 0; j < small; ++j) {
      for (Eigen::Index i = 0; i < big; ++i) g(i, j) = rng.normal();
    }
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ() * Matrix::Identity(big, small);
    // Sign fix so Q is uniformly distributed.
    const Matrix r = qr.matrixQR().topRows(small).triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < small; ++j) {
      if (r(j, j) < 0) q.col(j) *= -1.0;
    }
    const double gain = (l + 1 < layers) ? hidden_gain : output_gain;
    Eigen::Map<Matrix> w(params.data() + offsets_[l], out, in);
    if (out >= in) {
      w = gain * q;
    } else {
      w = gain * q.transpose();
    }
    Eigen::Map<Vector>(params.data() + offsets_[l] + out * in, out).setZero();
  }
}

ActorCritic::ActorCritic(std::size_t observation_size, std::size_t action_count,
                         std::vector<std::size_t> hidden)
    : hidden_(std::move(hidden)) {
  std::vector<std::size_t> actor_sizes{observation_size};
  actor_sizes.insert(actor_sizes.end(), hidden_.begin(), hidden_.end());
  std::vector<std::size_t> critic_sizes = actor_sizes;
  actor_sizes.push_back(action_count);
  critic_sizes.push_back(1);
  actor_ = MlpLayout(actor_sizes);
  critic_ = MlpLayout(critic_sizes);
  params_.assign(actor_.parameter_count() + critic_.parameter_count(), 0.0);
}

void ActorCritic::initialize(Rng& rng) {
  std::span<double> all(params_);
  actor_.init_orthogonal(all.subspan(0, actor_.parameter_count()), rng,
                         std::sqrt(2.0), 0.01);
  critic_.init_orthogonal(all.subspan(actor_.parameter_count()), rng,
                          std::sqrt(2.0), 1.0);
}

std::span<const double> ActorCritic::actor_parameters() const {
  return std::span<const double>(params_).subspan(0, actor_.parameter_count());
}

std::span<const double> ActorCritic::critic_parameters() const {
  return std::span<const double>(params_).subspan(actor_.parameter_count());
}

void ActorCritic::check_shape(std::size_t rows) const {
  if (rows != observation_size()) {
    throw Error(ErrorCode::kShapeMismatch, "ppo",
                "observation length " + std::to_string(rows) + " != " +
                    std::to_string(observation_size()));
  }
}

Matrix ActorCritic::logits(const Matrix& obs, MlpLayout::Tape* tape) const {
  check_shape(static_cast<std::size_t>(obs.rows()));
  return actor_.forward(actor_parameters(), obs, tape);
}

Matrix ActorCritic::values(const Matrix& obs, MlpLayout::Tape* tape) const {
  check_shape(static_cast<std::size_t>(obs.rows()));
  return critic_.forward(critic_parameters(), obs, tape);
}

Vector ActorCritic::logits(std::span<const double> obs) const {
  check_shape(obs.size());
  const Eigen::Map<const Matrix> x(obs.data(),
                                   static_cast<Eigen::Index>(obs.size()), 1);
  return actor_.forward(actor_parameters(), x).col(0);
}

double ActorCritic::value(std::span<const double> obs) const {
  check_shape(obs.size());
  const Eigen::Map<const Matrix> x(obs.data(),
                                   static_cast<Eigen::Index>(obs.size()), 1);
  return critic_.forward(critic_parameters(), x)(0, 0);
}

}  // namespace decoysim
