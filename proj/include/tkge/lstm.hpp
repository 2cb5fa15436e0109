#pragma once
// Single-layer LSTM cell with backpropagation through time.
//
// Gate layout inside the stacked 4d weight matrices, by row block:
//   [0,d)   input gate i (sigmoid)
//   [d,2d)  forget gate f (sigmoid)
//   [2d,3d) cell candidate g (tanh)
//   [3d,4d) output gate o (sigmoid)
// Initial hidden and cell states are zero. No peepholes.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "tkge/tensors.hpp"

namespace tkge {

template <class S>
struct LstmCache {
  std::vector<VecX<S>> inputs;
  std::vector<VecX<S>> gate_i, gate_f, gate_g, gate_o;
  std::vector<VecX<S>> cell, cell_tanh, hidden;

  const VecX<S>& last_hidden() const { return hidden.back(); }
  std::size_t steps() const { return inputs.size(); }
};

namespace detail {

template <class S>
VecX<S> sigmoid(const VecX<S>& x) {
  return (S(1) / (S(1) + (-x.array()).exp())).matrix();
}

}  // namespace detail

template <class S>
LstmCache<S> lstm_forward(const MatX<S>& w_ih, const MatX<S>& w_hh,
                          const MatX<S>& b_ih, const MatX<S>& b_hh,
                          const std::vector<VecX<S>>& inputs) {
  const Eigen::Index d = w_ih.rows() / 4;
  if (w_ih.rows() != 4 * d || w_hh.rows() != 4 * d || w_ih.cols() != d ||
      w_hh.cols() != d || b_ih.rows() != 4 * d || b_hh.rows() != 4 * d) {
    throw std::invalid_argument("lstm_forward: inconsistent weight shapes");
  }
  LstmCache<S> cache;
  cache.inputs = inputs;
  VecX<S> h = VecX<S>::Zero(d);
  VecX<S> c = VecX<S>::Zero(d);
  for (const auto& x : inputs) {
    VecX<S> pre = w_ih * x + b_ih.col(0) + w_hh * h + b_hh.col(0);
    VecX<S> i = detail::sigmoid<S>(pre.segment(0, d));
    VecX<S> f = detail::sigmoid<S>(pre.segment(d, d));
    VecX<S> g = pre.segment(2 * d, d).array().tanh().matrix();
    VecX<S> o = detail::sigmoid<S>(pre.segment(3 * d, d));
    c = (f.array() * c.array() + i.array() * g.array()).matrix();
    VecX<S> ct = c.array().tanh().matrix();
    h = (o.array() * ct.array()).matrix();
    cache.gate_i.push_back(std::move(i));
    cache.gate_f.push_back(std::move(f));
    cache.gate_g.push_back(std::move(g));
    cache.gate_o.push_back(std::move(o));
    cache.cell.push_back(c);
    cache.cell_tanh.push_back(std::move(ct));
    cache.hidden.push_back(h);
  }
  return cache;
}

// Backpropagates a gradient on the last hidden state. Weight gradients are
// accumulated (+=); d_inputs is overwritten with one gradient per step.
template <class S>
void lstm_backward(const MatX<S>& w_ih, const MatX<S>& w_hh,
                   const LstmCache<S>& cache, const VecX<S>& d_last_hidden,
                   MatX<S>& d_w_ih, MatX<S>& d_w_hh, MatX<S>& d_b_ih,
                   MatX<S>& d_b_hh, std::vector<VecX<S>>& d_inputs) {
  const Eigen::Index d = w_ih.rows() / 4;
  const std::size_t n = cache.steps();
  d_inputs.assign(n, VecX<S>::Zero(d));

  VecX<S> dh = d_last_hidden;
  VecX<S> dc = VecX<S>::Zero(d);
  for (std::size_t step = n; step-- > 0;) {
    const auto& i = cache.gate_i[step];
    const auto& f = cache.gate_f[step];
    const auto& g = cache.gate_g[step];
    const auto& o = cache.gate_o[step];
    const auto& ct = cache.cell_tanh[step];
    const VecX<S> c_prev =
        step == 0 ? VecX<S>::Zero(d) : cache.cell[step - 1];
    const VecX<S> h_prev =
        step == 0 ? VecX<S>::Zero(d) : cache.hidden[step - 1];

    dc += (dh.array() * o.array() * (S(1) - ct.array().square())).matrix();
    VecX<S> d_pre(4 * d);
    d_pre.segment(0, d) =
        (dc.array() * g.array() * i.array() * (S(1) - i.array())).matrix();
    d_pre.segment(d, d) =
        (dc.array() * c_prev.array() * f.array() * (S(1) - f.array())).matrix();
    d_pre.segment(2 * d, d) =
        (dc.array() * i.array() * (S(1) - g.array().square())).matrix();
    d_pre.segment(3 * d, d) =
        (dh.array() * ct.array() * o.array() * (S(1) - o.array())).matrix();

    d_w_ih += d_pre * cache.inputs[step].transpose();
    d_w_hh += d_pre * h_prev.transpose();
    d_b_ih.col(0) += d_pre;
    d_b_hh.col(0) += d_pre;
    d_inputs[step] = w_ih.transpose() * d_pre;

    dh = w_hh.transpose() * d_pre;
    dc = (dc.array() * f.array()).matrix();
  }
}

}  // namespace tkge
