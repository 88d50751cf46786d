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

#include "owa/learn.hpp"

#include <fstream>
#include <sstream>

namespace owa {

namespace {

DenseLayer init_layer(int out, int in, Rng& rng) {
    DenseLayer l;
    l.W = Mat(out, in);
    l.b.assign(out, 0.0);
    const double s = 1.0 / std::sqrt(static_cast<double>(in));
    for (double& v : l.W.a) v = uniform(rng, -s, s);
    for (double& v : l.b) v = uniform(rng, -s, s);
    return l;
}

}  // namespace

std::vector<int> Predictor::default_hidden(int input_dim) {
    std::vector<int> h;
    int width = 2 * input_dim;
    for (int k = 0; k < 3; ++k) {
        h.push_back(std::max(width, 2));
        width /= 2;
    }
    return h;
}

Predictor Predictor::make(int input_dim, int out_rows, int out_cols, const std::vector<int>& hidden,
                          uint64_t seed) {
    if (input_dim < 1 || out_rows < 1 || out_cols < 1) throw std::invalid_argument("Predictor: bad dimensions");
    Predictor p;
    p.in_dim_ = input_dim;
    p.rows_ = out_rows;
    p.cols_ = out_cols;
    p.seed_ = seed;
    Rng rng(seed);
    int in = input_dim;
    for (int h : hidden) {
        p.trunk.push_back(init_layer(h, in, rng));
        in = h;
    }
    for (int r = 0; r < out_rows; ++r) p.heads.push_back(init_layer(out_cols, in, rng));
    return p;
}

Mat Predictor::forward(const Vec& z, Cache* cache) const {
    if (static_cast<int>(z.size()) != in_dim_) throw std::invalid_argument("Predictor::forward: input dimension mismatch");
    Vec a = z;
    if (cache) {
        cache->input = z;
        cache->pre.clear();
        cache->act.clear();
    }
    for (const DenseLayer& l : trunk) {
        Vec pre = matvec(l.W, a);
        for (size_t i = 0; i < pre.size(); ++i) pre[i] += l.b[i];
        if (cache) cache->pre.push_back(pre);
        for (double& v : pre) v = std::max(v, 0.0);
        if (cache) cache->act.push_back(pre);
        a = std::move(pre);
    }
    Mat out(rows_, cols_);
    for (int r = 0; r < rows_; ++r) {
        Vec o = matvec(heads[r].W, a);
        for (int j = 0; j < cols_; ++j) out(r, j) = o[j] + heads[r].b[j];
    }
    return out;
}

Vec Predictor::forward_vec(const Vec& z) const {
    if (rows_ != 1) throw std::invalid_argument("Predictor::forward_vec: not a vector predictor");
    return forward(z).row_vec(0);
}

Vec Predictor::backward(const Cache& cache, const Mat& d_out, Predictor& grads) const {
    if (d_out.rows != rows_ || d_out.cols != cols_) throw std::invalid_argument("Predictor::backward: cotangent shape");
    const Vec& top_act = trunk.empty() ? cache.input : cache.act.back();
    Vec d_a(top_act.size(), 0.0);
    for (int r = 0; r < rows_; ++r) {
        const Vec dr = d_out.row_vec(r);
        // head grads
        for (int j = 0; j < cols_; ++j) {
            grads.heads[r].b[j] += dr[j];
            for (size_t k = 0; k < top_act.size(); ++k) grads.heads[r].W(j, static_cast<int>(k)) += dr[j] * top_act[k];
        }
        axpy(1.0, matTvec(heads[r].W, dr), d_a);
    }
    for (int l = static_cast<int>(trunk.size()) - 1; l >= 0; --l) {
        Vec d_pre = d_a;
        for (size_t i = 0; i < d_pre.size(); ++i)
            if (cache.pre[l][i] <= 0.0) d_pre[i] = 0.0;
        const Vec& below = (l == 0) ? cache.input : cache.act[l - 1];
        for (size_t i = 0; i < d_pre.size(); ++i) {
            grads.trunk[l].b[i] += d_pre[i];
            for (size_t k = 0; k < below.size(); ++k)
                grads.trunk[l].W(static_cast<int>(i), static_cast<int>(k)) += d_pre[i] * below[k];
        }
        d_a = matTvec(trunk[l].W, d_pre);
    }
    return d_a;
}

Predictor Predictor::zeros_like() const {
    Predictor g = *this;
    for (DenseLayer& l : g.trunk) {
        std::fill(l.W.a.begin(), l.W.a.end(), 0.0);
        std::fill(l.b.begin(), l.b.end(), 0.0);
    }
    for (DenseLayer& l : g.heads) {
        std::fill(l.W.a.begin(), l.W.a.end(), 0.0);
        std::fill(l.b.begin(), l.b.end(), 0.0);
    }
    return g;
}

Vec Predictor::flatten_params() const {
    Vec theta;
    theta.reserve(n_params());
    for (const DenseLayer& l : trunk) {
        theta.insert(theta.end(), l.W.a.begin(), l.W.a.end());
        theta.insert(theta.end(), l.b.begin(), l.b.end());
    }
    for (const DenseLayer& l : heads) {
        theta.insert(theta.end(), l.W.a.begin(), l.W.a.end());
        theta.insert(theta.end(), l.b.begin(), l.b.end());
    }
    return theta;
}

void Predictor::set_params(const Vec& theta) {
    size_t k = 0;
    auto take = [&](DenseLayer& l) {
        std::copy(theta.begin() + k, theta.begin() + k + l.W.a.size(), l.W.a.begin());
        k += l.W.a.size();
        std::copy(theta.begin() + k, theta.begin() + k + l.b.size(), l.b.begin());
        k += l.b.size();
    };
    for (DenseLayer& l : trunk) take(l);
    for (DenseLayer& l : heads) take(l);
    if (k != theta.size()) throw std::invalid_argument("Predictor::set_params: size mismatch");
}

size_t Predictor::n_params() const {
    size_t n = 0;
    for (const DenseLayer& l : trunk) n += l.W.a.size() + l.b.size();
    for (const DenseLayer& l : heads) n += l.W.a.size() + l.b.size();
    return n;
}

Adam::Adam(size_t n, double lr, double beta1, double beta2, double eps)
    : m_(n, 0.0), v_(n, 0.0), lr_(lr), b1_(beta1), b2_(beta2), eps_(eps) {}

void Adam::step(Vec& params, const Vec& grad) {
    if (params.size() != m_.size() || grad.size() != m_.size()) throw std::invalid_argument("Adam::step: size mismatch");
    ++t_;
    const double c1 = 1.0 - std::pow(b1_, t_);
    const double c2 = 1.0 - std::pow(b2_, t_);
    for (size_t i = 0; i < params.size(); ++i) {
        m_[i] = b1_ * m_[i] + (1.0 - b1_) * grad[i];
        v_[i] = b2_ * v_[i] + (1.0 - b2_) * grad[i] * grad[i];
        params[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
    }
}

double loss_two_stage(const Mat& C_hat, const Mat& C_true) {
    if (C_hat.rows != C_true.rows || C_hat.cols != C_true.cols)
        throw std::invalid_argument("loss_two_stage: shape mismatch");
    double s = 0.0;
    for (size_t i = 0; i < C_hat.a.size(); ++i) {
        const double d = C_hat.a[i] - C_true.a[i];
        s += d * d;
    }
    return s;
}

Mat loss_two_stage_grad(const Mat& C_hat, const Mat& C_true) {
    Mat g(C_hat.rows, C_hat.cols);
    for (size_t i = 0; i < C_hat.a.size(); ++i) g.a[i] = 2.0 * (C_hat.a[i] - C_true.a[i]);
    return g;
}

double loss_owa_dq(const OwaWeights& w, const Mat& C_true, const Vec& x_star) {
    return owa_of_decision(w, C_true, x_star);
}

Vec loss_owa_dq_cotangent(const OwaWeights& w, const Mat& C_true, const Vec& x_star) {
    return owa_decision_subgradient(w, C_true, x_star);
}

double regret(const OwaWeights& w, const Mat& C_true, const Vec& x_star, double owa_star) {
    return owa_star - loss_owa_dq(w, C_true, x_star);
}

RandomFeatureMap RandomFeatureMap::make(int in_dim, int hidden, int out_dim, uint64_t seed, double noise) {
    Rng rng(seed);
    RandomFeatureMap f;
    f.noise = noise;
    const double s1 = 1.0 / std::sqrt(static_cast<double>(in_dim));
    const double s2 = 1.0 / std::sqrt(static_cast<double>(hidden));
    f.W1 = Mat(hidden, in_dim);
    for (double& v : f.W1.a) v = normal(rng, 0.0, s1);
    f.b1.assign(hidden, 0.0);
    for (double& v : f.b1) v = normal(rng, 0.0, 0.1);
    f.W2 = Mat(out_dim, hidden);
    for (double& v : f.W2.a) v = normal(rng, 0.0, s2);
    f.b2.assign(out_dim, 0.0);
    return f;
}

Vec RandomFeatureMap::apply(const Vec& v, Rng& noise_rng) const {
    Vec h = matvec(W1, v);
    for (size_t i = 0; i < h.size(); ++i) h[i] = std::max(h[i] + b1[i], 0.0);
    Vec z = matvec(W2, h);
    for (size_t i = 0; i < z.size(); ++i) z[i] += b2[i] + (noise > 0.0 ? normal(noise_rng, 0.0, noise) : 0.0);
    return z;
}

namespace {

void write_layer(std::ostream& os, const DenseLayer& l) {
    os << l.W.rows << " " << l.W.cols << "\n";
    os.precision(17);
    for (int i = 0; i < l.W.rows; ++i) {
        for (int j = 0; j < l.W.cols; ++j) os << l.W(i, j) << (j + 1 == l.W.cols ? "" : " ");
        os << "\n";
    }
    for (size_t i = 0; i < l.b.size(); ++i) os << l.b[i] << (i + 1 == l.b.size() ? "" : " ");
    os << "\n";
}

DenseLayer read_layer(std::istream& is) {
    DenseLayer l;
    int r = 0, c = 0;
    if (!(is >> r >> c)) throw std::runtime_error("load_model: truncated layer header");
    l.W = Mat(r, c);
    for (double& v : l.W.a)
        if (!(is >> v)) throw std::runtime_error("load_model: truncated weights");
    l.b.assign(r, 0.0);
    for (double& v : l.b)
        if (!(is >> v)) throw std::runtime_error("load_model: truncated biases");
    return l;
}

}  // namespace

void save_model(const std::string& path, const Predictor& model) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("save_model: cannot open " + path);
    os << "owa-predictor " << kLibraryVersion << "\n";
    os << "activation relu\n";
    os << "seed " << model.init_seed() << "\n";
    os << "dims " << model.input_dim() << " " << model.out_rows() << " " << model.out_cols() << "\n";
    os << "trunk " << model.trunk.size() << "\n";
    for (const DenseLayer& l : model.trunk) write_layer(os, l);
    os << "heads " << model.heads.size() << "\n";
    for (const DenseLayer& l : model.heads) write_layer(os, l);
}

Predictor load_model(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("load_model: cannot open " + path);
    std::string tag, version, word;
    is >> tag >> version;
    if (tag != "owa-predictor") throw std::runtime_error("load_model: bad header");
    std::string act;
    is >> word >> act;
    if (word != "activation" || act != "relu") throw std::runtime_error("load_model: unsupported activation");
    uint64_t seed = 0;
    is >> word >> seed;
    int in = 0, rows = 0, cols = 0;
    is >> word >> in >> rows >> cols;
    size_t n_trunk = 0, n_heads = 0;
    is >> word >> n_trunk;
    std::vector<int> hidden;
    // Layer widths are recovered from the stored shapes; build an empty model
    // then overwrite its parameters.
    std::vector<DenseLayer> trunk, heads;
    for (size_t i = 0; i < n_trunk; ++i) trunk.push_back(read_layer(is));
    is >> word >> n_heads;
    for (size_t i = 0; i < n_heads; ++i) heads.push_back(read_layer(is));
    for (const DenseLayer& l : trunk) hidden.push_back(l.W.rows);
    Predictor model = Predictor::make(in, rows, cols, hidden, seed);
    model.trunk = std::move(trunk);
    model.heads = std::move(heads);
    return model;
}

}  // namespace owa
