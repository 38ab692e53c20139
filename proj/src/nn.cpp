// SPDX-License-Identifier: Apache-2.0
//
// fdran: geolocation-driven CSI prediction and RB allocation simulator
// Copyright (C) 2026 The fdran Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "fdran/nn.hpp"

#include <cmath>
#include <numbers>

namespace fdran::nn {

Param::Param(std::string n, Eigen::Index rows, Eigen::Index cols)
    : name(std::move(n)), value(Mat::Zero(rows, cols)), grad(Mat::Zero(rows, cols)), m1(Mat::Zero(rows, cols)),
      m2(Mat::Zero(rows, cols))
{
}

Linear::Linear(const std::string &name, int in, int out) : w(name + ".w", in, out), b(name + ".b", 1, out) {}

Mat Linear::forward(const Mat &x)
{
    x_ = x;
    Mat y = x * w.value;
    y.rowwise() += b.value.row(0);
    return y;
}

Mat Linear::backward(const Mat &dy)
{
    w.grad.noalias() += x_.transpose() * dy;
    b.grad.row(0) += dy.colwise().sum();
    return dy * w.value.transpose();
}

void Linear::init(Rng &rng)
{
    const double limit = std::sqrt(6.0 / static_cast<double>(w.value.rows() + w.value.cols()));
    for (Eigen::Index j = 0; j < w.value.cols(); ++j)
        for (Eigen::Index i = 0; i < w.value.rows(); ++i)
            w.value(i, j) = rng.uniform(-limit, limit);
    b.value.setZero();
}

void Linear::collect(ParamList &out)
{
    out.push_back(&w);
    out.push_back(&b);
}

LayerNorm::LayerNorm(const std::string &name, int dim) : gamma(name + ".gamma", 1, dim), beta(name + ".beta", 1, dim)
{
    gamma.value.setOnes();
}

Mat LayerNorm::forward(const Mat &x)
{
    const auto n = x.rows();
    const auto d = static_cast<double>(x.cols());
    xhat_.resize(n, x.cols());
    inv_std_.resize(n);
    for (Eigen::Index r = 0; r < n; ++r) {
        const double mean = x.row(r).sum() / d;
        const auto centered = (x.row(r).array() - mean).eval();
        const double var = centered.square().sum() / d;
        inv_std_(r) = 1.0 / std::sqrt(var + kEps);
        xhat_.row(r) = centered * inv_std_(r);
    }
    Mat y = xhat_.array().rowwise() * gamma.value.row(0).array();
    y.rowwise() += beta.value.row(0);
    return y;
}

Mat LayerNorm::backward(const Mat &dy)
{
    gamma.grad.row(0) += (dy.array() * xhat_.array()).colwise().sum().matrix();
    beta.grad.row(0) += dy.colwise().sum();
    const Mat dxhat = dy.array().rowwise() * gamma.value.row(0).array();
    const auto d = static_cast<double>(dy.cols());
    Mat dx(dy.rows(), dy.cols());
    for (Eigen::Index r = 0; r < dy.rows(); ++r) {
        const double mean_d = dxhat.row(r).sum() / d;
        const double mean_dx = dxhat.row(r).dot(xhat_.row(r)) / d;
        dx.row(r) = inv_std_(r) * (dxhat.row(r).array() - mean_d - xhat_.row(r).array() * mean_dx).matrix();
    }
    return dx;
}

void LayerNorm::collect(ParamList &out)
{
    out.push_back(&gamma);
    out.push_back(&beta);
}

namespace {

const double kGeluC = std::sqrt(2.0 / std::numbers::pi);

} // namespace

Mat Gelu::forward(const Mat &x)
{
    x_ = x;
    return x.unaryExpr([](double v) { return 0.5 * v * (1.0 + std::tanh(kGeluC * (v + 0.044715 * v * v * v))); });
}

Mat Gelu::backward(const Mat &dy) const
{
    const Mat deriv = x_.unaryExpr([](double v) {
        const double t = std::tanh(kGeluC * (v + 0.044715 * v * v * v));
        return 0.5 * (1.0 + t) + 0.5 * v * (1.0 - t * t) * kGeluC * (1.0 + 3.0 * 0.044715 * v * v);
    });
    return dy.cwiseProduct(deriv);
}

FeedForward::FeedForward(const std::string &name, int in, int hidden, int out)
    : first(name + ".fc1", in, hidden), second(name + ".fc2", hidden, out)
{
}

Mat FeedForward::forward(const Mat &x) { return second.forward(act_.forward(first.forward(x))); }

Mat FeedForward::backward(const Mat &dy) { return first.backward(act_.backward(second.backward(dy))); }

void FeedForward::init(Rng &rng)
{
    first.init(rng);
    second.init(rng);
}

void FeedForward::collect(ParamList &out)
{
    first.collect(out);
    second.collect(out);
}

MultiHeadAttention::MultiHeadAttention(const std::string &name, int dim, int heads)
    : wq(name + ".q", dim, dim), wk(name + ".k", dim, dim), wv(name + ".v", dim, dim), wo(name + ".o", dim, dim),
      heads_(heads), dim_(dim)
{
}

Mat MultiHeadAttention::forward(const Mat &xq, const Mat &xkv)
{
    q_ = wq.forward(xq);
    k_ = wk.forward(xkv);
    v_ = wv.forward(xkv);
    const int dh = dim_ / heads_;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
    concat_.resize(xq.rows(), dim_);
    attn_.resize(static_cast<std::size_t>(heads_));
    for (int h = 0; h < heads_; ++h) {
        Mat s = scale * (q_.middleCols(h * dh, dh) * k_.middleCols(h * dh, dh).transpose());
        softmax_rows(s);
        concat_.middleCols(h * dh, dh) = s * v_.middleCols(h * dh, dh);
        attn_[static_cast<std::size_t>(h)] = std::move(s);
    }
    return wo.forward(concat_);
}

std::pair<Mat, Mat> MultiHeadAttention::backward(const Mat &dy)
{
    const Mat dconcat = wo.backward(dy);
    const int dh = dim_ / heads_;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
    Mat dq(q_.rows(), dim_), dk(k_.rows(), dim_), dv(v_.rows(), dim_);
    for (int h = 0; h < heads_; ++h) {
        const Mat &a = attn_[static_cast<std::size_t>(h)];
        const auto dout = dconcat.middleCols(h * dh, dh);
        dv.middleCols(h * dh, dh) = a.transpose() * dout;
        const Mat da = dout * v_.middleCols(h * dh, dh).transpose();
        const Eigen::VectorXd row_dot = (da.array() * a.array()).rowwise().sum();
        const Mat ds = scale * (a.array() * (da.array().colwise() - row_dot.array())).matrix();
        dq.middleCols(h * dh, dh) = ds * k_.middleCols(h * dh, dh);
        dk.middleCols(h * dh, dh) = ds.transpose() * q_.middleCols(h * dh, dh);
    }
    Mat dxq = wq.backward(dq);
    Mat dxkv = wk.backward(dk) + wv.backward(dv);
    return {std::move(dxq), std::move(dxkv)};
}

void MultiHeadAttention::init(Rng &rng)
{
    wq.init(rng);
    wk.init(rng);
    wv.init(rng);
    wo.init(rng);
}

void MultiHeadAttention::collect(ParamList &out)
{
    wq.collect(out);
    wk.collect(out);
    wv.collect(out);
    wo.collect(out);
}

void softmax_rows(Mat &m)
{
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        const double mx = m.row(r).maxCoeff();
        m.row(r) = (m.row(r).array() - mx).exp().matrix();
        m.row(r) /= m.row(r).sum();
    }
}

double cross_entropy(const Eigen::Ref<const Eigen::RowVectorXd> &logits, int label,
                     Eigen::Ref<Eigen::RowVectorXd> grad)
{
    const double mx = logits.maxCoeff();
    const Eigen::RowVectorXd e = (logits.array() - mx).exp().matrix();
    const double z = e.sum();
    grad = e / z;
    grad(label) -= 1.0;
    return std::log(z) + mx - logits(label);
}

double cross_entropy(const Eigen::Ref<const Eigen::RowVectorXd> &logits, int label)
{
    const double mx = logits.maxCoeff();
    return std::log((logits.array() - mx).exp().sum()) + mx - logits(label);
}

std::size_t count_parameters(const ParamList &params)
{
    std::size_t n = 0;
    for (const auto *p : params)
        n += static_cast<std::size_t>(p->size());
    return n;
}

} // namespace fdran::nn
