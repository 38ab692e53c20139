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

#ifndef FDRAN_NN_HPP
#define FDRAN_NN_HPP

#include <Eigen/Core>

#include <string>
#include <utility>
#include <vector>

#include "fdran/random.hpp"

namespace fdran::nn {

// Activations are row-major in the token sense: one row per token.
using Mat = Eigen::MatrixXd;

struct Param
{
    std::string name;
    Mat value;
    Mat grad;
    Mat m1; // optimizer moments
    Mat m2;

    Param() = default;
    Param(std::string n, Eigen::Index rows, Eigen::Index cols);
    void zero_grad() { grad.setZero(); }
    Eigen::Index size() const { return value.size(); }
};

using ParamList = std::vector<Param *>;

class Linear
{
  public:
    Linear() = default;
    Linear(const std::string &name, int in, int out);

    Mat forward(const Mat &x);
    Mat backward(const Mat &dy);
    void init(Rng &rng);
    void collect(ParamList &out);

    Param w; // in x out
    Param b; // 1 x out

  private:
    Mat x_;
};

class LayerNorm
{
  public:
    static constexpr double kEps = 1e-5;

    LayerNorm() = default;
    LayerNorm(const std::string &name, int dim);

    Mat forward(const Mat &x);
    Mat backward(const Mat &dy);
    void collect(ParamList &out);

    Param gamma;
    Param beta;

  private:
    Mat xhat_;
    Eigen::VectorXd inv_std_;
};

// tanh approximation
class Gelu
{
  public:
    Mat forward(const Mat &x);
    Mat backward(const Mat &dy) const;

  private:
    Mat x_;
};

class FeedForward
{
  public:
    FeedForward() = default;
    FeedForward(const std::string &name, int in, int hidden, int out);

    Mat forward(const Mat &x);
    Mat backward(const Mat &dy);
    void init(Rng &rng);
    void collect(ParamList &out);

    Linear first;
    Linear second;

  private:
    Gelu act_;
};

class MultiHeadAttention
{
  public:
    MultiHeadAttention() = default;
    MultiHeadAttention(const std::string &name, int dim, int heads);

    // queries n x d, keys/values m x d
    Mat forward(const Mat &xq, const Mat &xkv);
    // Returns (d queries, d keys/values).
    std::pair<Mat, Mat> backward(const Mat &dy);
    void init(Rng &rng);
    void collect(ParamList &out);

    int heads() const { return heads_; }
    // Softmax weights of the last forward call, n x m per head.
    const Mat &attention(int head) const { return attn_.at(static_cast<std::size_t>(head)); }

    Linear wq;
    Linear wk;
    Linear wv;
    Linear wo;

  private:
    int heads_ = 1;
    int dim_ = 0;
    Mat q_, k_, v_, concat_;
    std::vector<Mat> attn_;
};

void softmax_rows(Mat &m);

// Cross-entropy of one logit row against a class label; optionally writes d loss / d logits.
double cross_entropy(const Eigen::Ref<const Eigen::RowVectorXd> &logits, int label,
                     Eigen::Ref<Eigen::RowVectorXd> grad);
double cross_entropy(const Eigen::Ref<const Eigen::RowVectorXd> &logits, int label);

std::size_t count_parameters(const ParamList &params);

} // namespace fdran::nn

#endif
