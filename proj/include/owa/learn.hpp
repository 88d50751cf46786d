// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "owa/core.hpp"

// Feedforward predictor with a shared rectifier trunk and one linear head per
// output row, reverse-mode gradients, an Adam optimizer, and the loss
// functions used for training. Forward passes are deterministic given the
// parameters; training determinism is owned by the caller's seed discipline.

namespace owa {

struct DenseLayer {
    Mat W;
    Vec b;
};

class Predictor {
  public:
    Predictor() = default;

    /// Shared ReLU trunk (widths as given) followed by one linear head per
    /// output row. Weights initialized uniform scaled by 1/sqrt(fan_in).
    static Predictor make(int input_dim, int out_rows, int out_cols, const std::vector<int>& hidden,
                          uint64_t seed);

    /// Default trunk widths: start at 2 * input_dim and halve per layer
    /// (three shared layers, floor clamped at 2).
    static std::vector<int> default_hidden(int input_dim);

    struct Cache {
        Vec input;
        std::vector<Vec> pre;  // trunk pre-activations
        std::vector<Vec> act;  // trunk activations
    };

    Mat forward(const Vec& z, Cache* cache = nullptr) const;
    Vec forward_vec(const Vec& z) const;  // requires out_rows == 1

    /// Accumulates parameter gradients for the cached forward pass given the
    /// output cotangent; returns the input cotangent.
    Vec backward(const Cache& cache, const Mat& d_out, Predictor& grads) const;

    Predictor zeros_like() const;
    Vec flatten_params() const;
    void set_params(const Vec& theta);
    size_t n_params() const;

    int input_dim() const { return in_dim_; }
    int out_rows() const { return rows_; }
    int out_cols() const { return cols_; }
    uint64_t init_seed() const { return seed_; }

    std::vector<DenseLayer> trunk;
    std::vector<DenseLayer> heads;

  private:
    int in_dim_ = 0, rows_ = 0, cols_ = 0;
    uint64_t seed_ = 0;
};

class Adam {
  public:
    Adam(size_t n, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
    void step(Vec& params, const Vec& grad);

  private:
    Vec m_, v_;
    long t_ = 0;
    double lr_, b1_, b2_, eps_;
};

/// Frobenius regression loss ||C_hat - C||^2 and its gradient 2(C_hat - C).
double loss_two_stage(const Mat& C_hat, const Mat& C_true);
Mat loss_two_stage_grad(const Mat& C_hat, const Mat& C_true);

/// Decision quality under the true parameters: owa_value(w, C_true x_star).
/// Cotangent w.r.t. x_star is C_true^T owa_subgradient(w, C_true x_star).
double loss_owa_dq(const OwaWeights& w, const Mat& C_true, const Vec& x_star);
Vec loss_owa_dq_cotangent(const OwaWeights& w, const Mat& C_true, const Vec& x_star);

/// owa_star - loss_owa_dq; nonnegative up to the reference solver tolerance.
double regret(const OwaWeights& w, const Mat& C_true, const Vec& x_star, double owa_star);

/// Fixed random two-layer rectifier map used to synthesize features from
/// problem parameters, plus per-call Gaussian observation noise.
struct RandomFeatureMap {
    Mat W1;
    Vec b1;
    Mat W2;
    Vec b2;
    double noise = 0.0;

    static RandomFeatureMap make(int in_dim, int hidden, int out_dim, uint64_t seed, double noise);
    Vec apply(const Vec& v, Rng& noise_rng) const;
};

/// Flat text checkpoint: header with dims, activation tag and init seed,
/// then row-major weight arrays at full precision.
void save_model(const std::string& path, const Predictor& model);
Predictor load_model(const std::string& path);

}  // namespace owa
