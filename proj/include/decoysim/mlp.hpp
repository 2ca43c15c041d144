#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

#include "decoysim/rng.hpp"

namespace decoysim {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Layout of a tanh multilayer perceptron over a flat parameter buffer.
// Inputs are column-major with one sample per column. Per layer the buffer
// holds W (out x in, column-major) followed by b (out).
class MlpLayout {
 public:
  MlpLayout() = default;
  explicit MlpLayout(std::vector<std::size_t> layer_sizes);

  std::size_t input_size() const { return sizes_.front(); }
  std::size_t output_size() const { return sizes_.back(); }
  std::size_t parameter_count() const { return parameter_count_; }
  const std::vector<std::size_t>& layer_sizes() const { return sizes_; }

  // Activations kept for backprop: inputs, then each layer's output.
  struct Tape {
    std::vector<Matrix> activations;
  };

  Matrix forward(std::span<const double> params, const Matrix& input,
                 Tape* tape = nullptr) const;

  // Accumulates dL/dparams into `grad` given dL/doutput.
  void backward(std::span<const double> params, const Tape& tape,
                const Matrix& grad_output, std::span<double> grad) const;

  // Orthogonal weights (scaled by gain), zero biases.
  void init_orthogonal(std::span<double> params, Rng& rng, double hidden_gain,
                       double output_gain) const;

 private:
  std::size_t weight_offset(std::size_t layer) const { return offsets_[layer]; }

  std::vector<std::size_t> sizes_;
  std::vector<std::size_t> offsets_;
  std::size_t parameter_count_ = 0;
};

// Separate actor (logits) and critic (scalar value) networks sharing one
// flat parameter vector: actor parameters first.
class ActorCritic {
 public:
  ActorCritic() = default;
  ActorCritic(std::size_t observation_size, std::size_t action_count,
              std::vector<std::size_t> hidden = {64, 64});

  void initialize(Rng& rng);

  const MlpLayout& actor() const { return actor_; }
  const MlpLayout& critic() const { return critic_; }
  std::size_t observation_size() const { return actor_.input_size(); }
  std::size_t action_count() const { return actor_.output_size(); }
  const std::vector<std::size_t>& hidden() const { return hidden_; }

  std::vector<double>& parameters() { return params_; }
  const std::vector<double>& parameters() const { return params_; }
  std::span<const double> actor_parameters() const;
  std::span<const double> critic_parameters() const;

  Matrix logits(const Matrix& obs, MlpLayout::Tape* tape = nullptr) const;
  Matrix values(const Matrix& obs, MlpLayout::Tape* tape = nullptr) const;

  // Single-observation conveniences. Throw Error{kShapeMismatch}.
  Vector logits(std::span<const double> obs) const;
  double value(std::span<const double> obs) const;

 private:
  void check_shape(std::size_t rows) const;

  std::vector<std::size_t> hidden_;
  MlpLayout actor_;
  MlpLayout critic_;
  std::vector<double> params_;
};

}  // namespace decoysim
