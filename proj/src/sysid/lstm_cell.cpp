#include "msort/sysid/lstm_cell.hpp"

#include <cmath>

namespace msort::sysid {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

inline VectorXd sigmoid(const VectorXd& z) {
  return (1.0 + (-z.array()).exp()).inverse().matrix();
}

}  // namespace

void LstmCell::init(int input, int hidden, Rng& rng) {
  input_dim = input;
  hidden_dim = hidden;
  const double scale = 1.0 / std::sqrt(static_cast<double>(hidden));
  w_x = MatrixXd(4 * hidden, input);
  w_h = MatrixXd(4 * hidden, hidden);
  for (int r = 0; r < 4 * hidden; ++r) {
    for (int c = 0; c < input; ++c) w_x(r, c) = rng.uniform(-scale, scale);
    for (int c = 0; c < hidden; ++c) w_h(r, c) = rng.uniform(-scale, scale);
  }
  bias = VectorXd::Zero(4 * hidden);
  bias.segment(hidden, hidden).setOnes();  // open forget gates at start
}

LstmStepCache lstm_forward(const LstmCell& cell, const VectorXd& x, const VectorXd& h_prev,
                           const VectorXd& c_prev) {
  const int H = cell.hidden_dim;
  LstmStepCache s;
  s.x = x;
  s.h_prev = h_prev;
  s.c_prev = c_prev;

  VectorXd z = cell.w_x * x + cell.w_h * h_prev + cell.bias;
  s.gate_i = sigmoid(z.segment(0, H));
  s.gate_f = sigmoid(z.segment(H, H));
  s.gate_g = z.segment(2 * H, H).array().tanh().matrix();
  s.gate_o = sigmoid(z.segment(3 * H, H));

  s.c = s.gate_f.cwiseProduct(c_prev) + s.gate_i.cwiseProduct(s.gate_g);
  s.tanh_c = s.c.array().tanh().matrix();
  s.h = s.gate_o.cwiseProduct(s.tanh_c);
  return s;
}

void LstmGrads::init_like(const LstmCell& cell) {
  dw_x = MatrixXd::Zero(cell.w_x.rows(), cell.w_x.cols());
  dw_h = MatrixXd::Zero(cell.w_h.rows(), cell.w_h.cols());
  dbias = VectorXd::Zero(cell.bias.size());
}

void LstmGrads::scale(double s) {
  dw_x *= s;
  dw_h *= s;
  dbias *= s;
}

double LstmGrads::squared_norm() const {
  return dw_x.squaredNorm() + dw_h.squaredNorm() + dbias.squaredNorm();
}

void lstm_backward(const LstmCell& cell, const LstmStepCache& s, const VectorXd& dh,
                   const VectorXd& dc, VectorXd& dx, VectorXd& dh_prev, VectorXd& dc_prev,
                   LstmGrads* grads) {
  const int H = cell.hidden_dim;

  const VectorXd d_o = dh.cwiseProduct(s.tanh_c);
  const VectorXd dc_total =
      dc + dh.cwiseProduct(s.gate_o)
               .cwiseProduct((1.0 - s.tanh_c.array().square()).matrix());

  const VectorXd d_f = dc_total.cwiseProduct(s.c_prev);
  const VectorXd d_i = dc_total.cwiseProduct(s.gate_g);
  const VectorXd d_g = dc_total.cwiseProduct(s.gate_i);
  dc_prev = dc_total.cwiseProduct(s.gate_f);

  VectorXd dz(4 * H);
  dz.segment(0, H) =
      d_i.cwiseProduct(s.gate_i).cwiseProduct((1.0 - s.gate_i.array()).matrix());
  dz.segment(H, H) =
      d_f.cwiseProduct(s.gate_f).cwiseProduct((1.0 - s.gate_f.array()).matrix());
  dz.segment(2 * H, H) = d_g.cwiseProduct((1.0 - s.gate_g.array().square()).matrix());
  dz.segment(3 * H, H) =
      d_o.cwiseProduct(s.gate_o).cwiseProduct((1.0 - s.gate_o.array()).matrix());

  dx = cell.w_x.transpose() * dz;
  dh_prev = cell.w_h.transpose() * dz;

  if (grads) {
    grads->dw_x += dz * s.x.transpose();
    grads->dw_h += dz * s.h_prev.transpose();
    grads->dbias += dz;
  }
}

}  // namespace msort::sysid
