#pragma once

#include <Eigen/Core>

#include "msort/core/random.hpp"

namespace msort::sysid {

/// Single gated-memory (LSTM) layer. Gate rows are stacked in the order
/// input, forget, candidate, output (4*hidden rows total).
struct LstmCell {
  int input_dim = 0;
  int hidden_dim = 0;
  Eigen::MatrixXd w_x;   // 4H x D
  Eigen::MatrixXd w_h;   // 4H x H
  Eigen::VectorXd bias;  // 4H, forget-gate block initialized to +1

  void init(int input, int hidden, Rng& rng);
};

/// Everything the backward pass needs about one forward step.
struct LstmStepCache {
  Eigen::VectorXd x, h_prev, c_prev;
  Eigen::VectorXd gate_i, gate_f, gate_g, gate_o;
  Eigen::VectorXd c, tanh_c, h;
};

LstmStepCache lstm_forward(const LstmCell& cell, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& h_prev, const Eigen::VectorXd& c_prev);

struct LstmGrads {
  Eigen::MatrixXd dw_x;
  Eigen::MatrixXd dw_h;
  Eigen::VectorXd dbias;

  void init_like(const LstmCell& cell);
  void scale(double s);
  double squared_norm() const;
};

/// Reverse step: dh/dc are the loss gradients w.r.t. this step's h and c
/// outputs. Writes gradients w.r.t. the step inputs; accumulates parameter
/// gradients into `grads` when non-null (policy optimization backpropagates
/// through a frozen cell and passes nullptr).
void lstm_backward(const LstmCell& cell, const LstmStepCache& cache,
                   const Eigen::VectorXd& dh, const Eigen::VectorXd& dc,
                   Eigen::VectorXd& dx, Eigen::VectorXd& dh_prev, Eigen::VectorXd& dc_prev,
                   LstmGrads* grads);

}  // namespace msort::sysid
