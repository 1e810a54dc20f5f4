#include "cyanocast/tensor.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace cyano::nn {

namespace {

void check_same_shape(const TensorPtr& a, const TensorPtr& b,
                      const char* op) {
    if (a->rows != b->rows || a->cols != b->cols)
        throw std::invalid_argument(std::string(op) + ": shape mismatch");
}

TensorPtr node(int rows, int cols, std::vector<TensorPtr> parents) {
    auto t = std::make_shared<Tensor>(rows, cols);
    t->parents = std::move(parents);
    return t;
}

}  // namespace

TensorPtr leaf(int rows, int cols) {
    if (rows <= 0 || cols <= 0)
        throw std::invalid_argument("tensor dimensions must be positive");
    return std::make_shared<Tensor>(rows, cols);
}

TensorPtr leaf_from(int rows, int cols, std::vector<double> values) {
    TensorPtr t = leaf(rows, cols);
    if (values.size() != t->size())
        throw std::invalid_argument("leaf_from: value count mismatch");
    t->value = std::move(values);
    return t;
}

TensorPtr add(const TensorPtr& a, const TensorPtr& b) {
    check_same_shape(a, b, "add");
    TensorPtr out = node(a->rows, a->cols, {a, b});
    for (std::size_t i = 0; i < out->size(); ++i)
        out->value[i] = a->value[i] + b->value[i];
    Tensor* o = out.get();
    out->backprop = [o, a, b] {
        for (std::size_t i = 0; i < o->size(); ++i) {
            a->grad[i] += o->grad[i];
            b->grad[i] += o->grad[i];
        }
    };
    return out;
}

TensorPtr add_rowvec(const TensorPtr& x, const TensorPtr& row) {
    if (row->rows != 1 || row->cols != x->cols)
        throw std::invalid_argument("add_rowvec: need a 1 x cols vector");
    TensorPtr out = node(x->rows, x->cols, {x, row});
    for (int r = 0; r < x->rows; ++r)
        for (int c = 0; c < x->cols; ++c)
            out->at(r, c) = x->at(r, c) + row->value[static_cast<std::size_t>(c)];
    Tensor* o = out.get();
    out->backprop = [o, x, row] {
        for (int r = 0; r < o->rows; ++r)
            for (int c = 0; c < o->cols; ++c) {
                const double g =
                    o->grad[static_cast<std::size_t>(r) * o->cols + c];
                x->grad[static_cast<std::size_t>(r) * o->cols + c] += g;
                row->grad[static_cast<std::size_t>(c)] += g;
            }
    };
    return out;
}

TensorPtr mul(const TensorPtr& a, const TensorPtr& b) {
    check_same_shape(a, b, "mul");
    TensorPtr out = node(a->rows, a->cols, {a, b});
    for (std::size_t i = 0; i < out->size(); ++i)
        out->value[i] = a->value[i] * b->value[i];
    Tensor* o = out.get();
    out->backprop = [o, a, b] {
        for (std::size_t i = 0; i < o->size(); ++i) {
            a->grad[i] += o->grad[i] * b->value[i];
            b->grad[i] += o->grad[i] * a->value[i];
        }
    };
    return out;
}

TensorPtr mul_rowvec(const TensorPtr& x, const TensorPtr& row) {
    if (row->rows != 1 || row->cols != x->cols)
        throw std::invalid_argument("mul_rowvec: need a 1 x cols vector");
    TensorPtr out = node(x->rows, x->cols, {x, row});
    for (int r = 0; r < x->rows; ++r)
        for (int c = 0; c < x->cols; ++c)
            out->at(r, c) = x->at(r, c) * row->value[static_cast<std::size_t>(c)];
    Tensor* o = out.get();
    out->backprop = [o, x, row] {
        for (int r = 0; r < o->rows; ++r)
            for (int c = 0; c < o->cols; ++c) {
                const std::size_t i =
                    static_cast<std::size_t>(r) * o->cols + c;
                x->grad[i] += o->grad[i] * row->value[static_cast<std::size_t>(c)];
                row->grad[static_cast<std::size_t>(c)] +=
                    o->grad[i] * x->value[i];
            }
    };
    return out;
}

TensorPtr affine(const TensorPtr& x, double scale, double shift) {
    TensorPtr out = node(x->rows, x->cols, {x});
    for (std::size_t i = 0; i < out->size(); ++i)
        out->value[i] = scale * x->value[i] + shift;
    Tensor* o = out.get();
    out->backprop = [o, x, scale] {
        for (std::size_t i = 0; i < o->size(); ++i)
            x->grad[i] += scale * o->grad[i];
    };
    return out;
}

TensorPtr matmul(const TensorPtr& a, const TensorPtr& b) {
    if (a->cols != b->rows)
        throw std::invalid_argument("matmul: inner dimensions differ");
    TensorPtr out = node(a->rows, b->cols, {a, b});
    const int R = a->rows, K = a->cols, C = b->cols;
    for (int r = 0; r < R; ++r)
        for (int k = 0; k < K; ++k) {
            const double av = a->at(r, k);
            if (av == 0.0) continue;
            for (int c = 0; c < C; ++c) out->at(r, c) += av * b->at(k, c);
        }
    Tensor* o = out.get();
    out->backprop = [o, a, b, R, K, C] {
        // dA = G * B^T, dB = A^T * G.
        for (int r = 0; r < R; ++r)
            for (int c = 0; c < C; ++c) {
                const double g =
                    o->grad[static_cast<std::size_t>(r) * C + c];
                if (g == 0.0) continue;
                for (int k = 0; k < K; ++k) {
                    a->grad[static_cast<std::size_t>(r) * K + k] +=
                        g * b->value[static_cast<std::size_t>(k) * C + c];
                    b->grad[static_cast<std::size_t>(k) * C + c] +=
                        g * a->value[static_cast<std::size_t>(r) * K + k];
                }
            }
    };
    return out;
}

TensorPtr transpose(const TensorPtr& x) {
    TensorPtr out = node(x->cols, x->rows, {x});
    for (int r = 0; r < x->rows; ++r)
        for (int c = 0; c < x->cols; ++c) out->at(c, r) = x->at(r, c);
    Tensor* o = out.get();
    out->backprop = [o, x] {
        for (int r = 0; r < o->rows; ++r)
            for (int c = 0; c < o->cols; ++c)
                x->grad[static_cast<std::size_t>(c) * x->cols + r] +=
                    o->grad[static_cast<std::size_t>(r) * o->cols + c];
    };
    return out;
}

TensorPtr sigmoid(const TensorPtr& x) {
    TensorPtr out = node(x->rows, x->cols, {x});
    for (std::size_t i = 0; i < out->size(); ++i)
        out->value[i] = 1.0 / (1.0 + std::exp(-x->value[i]));
    Tensor* o = out.get();
    out->backprop = [o, x] {
        for (std::size_t i = 0; i < o->size(); ++i) {
            const double s = o->value[i];
            x->grad[i] += o->grad[i] * s * (1.0 - s);
        }
    };
    return out;
}

TensorPtr tanh_op(const TensorPtr& x) {
    TensorPtr out = node(x->rows, x->cols, {x});
    for (std::size_t i = 0; i < out->size(); ++i)
        out->value[i] = std::tanh(x->value[i]);
    Tensor* o = out.get();
    out->backprop = [o, x] {
        for (std::size_t i = 0; i < o->size(); ++i)
            x->grad[i] += o->grad[i] * (1.0 - o->value[i] * o->value[i]);
    };
    return out;
}

TensorPtr leaky_relu(const TensorPtr& x, double slope) {
    TensorPtr out = node(x->rows, x->cols, {x});
    for (std::size_t i = 0; i < out->size(); ++i)
        out->value[i] =
            x->value[i] > 0.0 ? x->value[i] : slope * x->value[i];
    Tensor* o = out.get();
    out->backprop = [o, x, slope] {
        for (std::size_t i = 0; i < o->size(); ++i)
            x->grad[i] +=
                o->grad[i] * (x->value[i] > 0.0 ? 1.0 : slope);
    };
    return out;
}

TensorPtr log_op(const TensorPtr& x) {
    TensorPtr out = node(x->rows, x->cols, {x});
    for (std::size_t i = 0; i < out->size(); ++i)
        out->value[i] = std::log(x->value[i]);
    Tensor* o = out.get();
    out->backprop = [o, x] {
        for (std::size_t i = 0; i < o->size(); ++i)
            x->grad[i] += o->grad[i] / x->value[i];
    };
    return out;
}

TensorPtr clamp_op(const TensorPtr& x, double lo, double hi) {
    if (!(lo < hi)) throw std::invalid_argument("clamp: lo must be < hi");
    TensorPtr out = node(x->rows, x->cols, {x});
    for (std::size_t i = 0; i < out->size(); ++i) {
        const double v = x->value[i];
        out->value[i] = v < lo ? lo : (v > hi ? hi : v);
    }
    Tensor* o = out.get();
    out->backprop = [o, x, lo, hi] {
        // Gradient passes only where the input was within the interval.
        for (std::size_t i = 0; i < o->size(); ++i)
            if (x->value[i] >= lo && x->value[i] <= hi)
                x->grad[i] += o->grad[i];
    };
    return out;
}

TensorPtr softmax_rows(const TensorPtr& x) {
    TensorPtr out = node(x->rows, x->cols, {x});
    for (int r = 0; r < x->rows; ++r) {
        double mx = x->at(r, 0);
        for (int c = 1; c < x->cols; ++c) mx = std::max(mx, x->at(r, c));
        double sum = 0.0;
        for (int c = 0; c < x->cols; ++c) {
            const double e = std::exp(x->at(r, c) - mx);
            out->at(r, c) = e;
            sum += e;
        }
        for (int c = 0; c < x->cols; ++c) out->at(r, c) /= sum;
    }
    Tensor* o = out.get();
    out->backprop = [o, x] {
        for (int r = 0; r < o->rows; ++r) {
            double dot = 0.0;
            for (int c = 0; c < o->cols; ++c)
                dot += o->grad[static_cast<std::size_t>(r) * o->cols + c] *
                       o->value[static_cast<std::size_t>(r) * o->cols + c];
            for (int c = 0; c < o->cols; ++c) {
                const std::size_t i =
                    static_cast<std::size_t>(r) * o->cols + c;
                x->grad[i] += o->value[i] * (o->grad[i] - dot);
            }
        }
    };
    return out;
}

TensorPtr layer_norm_rows(const TensorPtr& x, double eps) {
    TensorPtr out = node(x->rows, x->cols, {x});
    const int C = x->cols;
    std::vector<double> inv_sigma(static_cast<std::size_t>(x->rows));
    for (int r = 0; r < x->rows; ++r) {
        double mean = 0.0;
        for (int c = 0; c < C; ++c) mean += x->at(r, c);
        mean /= C;
        double var = 0.0;
        for (int c = 0; c < C; ++c) {
            const double d = x->at(r, c) - mean;
            var += d * d;
        }
        var /= C;
        const double inv = 1.0 / std::sqrt(var + eps);
        inv_sigma[static_cast<std::size_t>(r)] = inv;
        for (int c = 0; c < C; ++c) out->at(r, c) = (x->at(r, c) - mean) * inv;
    }
    Tensor* o = out.get();
    out->backprop = [o, x, C, inv_sigma = std::move(inv_sigma)] {
        // dx = inv_sigma * (g - mean(g) - y * mean(g*y)) per row.
        for (int r = 0; r < o->rows; ++r) {
            double gmean = 0.0, gymean = 0.0;
            for (int c = 0; c < C; ++c) {
                const std::size_t i =
                    static_cast<std::size_t>(r) * C + c;
                gmean += o->grad[i];
                gymean += o->grad[i] * o->value[i];
            }
            gmean /= C;
            gymean /= C;
            const double inv = inv_sigma[static_cast<std::size_t>(r)];
            for (int c = 0; c < C; ++c) {
                const std::size_t i =
                    static_cast<std::size_t>(r) * C + c;
                x->grad[i] +=
                    inv * (o->grad[i] - gmean - o->value[i] * gymean);
            }
        }
    };
    return out;
}

TensorPtr dropout(const TensorPtr& x, double rate, bool training,
                  std::mt19937_64& rng) {
    if (rate < 0.0 || rate >= 1.0)
        throw std::invalid_argument("dropout rate must be in [0,1)");
    if (!training || rate == 0.0) return x;
    TensorPtr out = node(x->rows, x->cols, {x});
    auto mask = std::make_shared<std::vector<double>>(x->size());
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double keep_scale = 1.0 / (1.0 - rate);
    for (std::size_t i = 0; i < x->size(); ++i) {
        (*mask)[i] = unit(rng) < rate ? 0.0 : keep_scale;
        out->value[i] = x->value[i] * (*mask)[i];
    }
    Tensor* o = out.get();
    out->backprop = [o, x, mask] {
        for (std::size_t i = 0; i < o->size(); ++i)
            x->grad[i] += o->grad[i] * (*mask)[i];
    };
    return out;
}

TensorPtr concat_cols(const TensorPtr& a, const TensorPtr& b) {
    if (a->rows != b->rows)
        throw std::invalid_argument("concat_cols: row count differs");
    TensorPtr out = node(a->rows, a->cols + b->cols, {a, b});
    for (int r = 0; r < a->rows; ++r) {
        for (int c = 0; c < a->cols; ++c) out->at(r, c) = a->at(r, c);
        for (int c = 0; c < b->cols; ++c)
            out->at(r, a->cols + c) = b->at(r, c);
    }
    Tensor* o = out.get();
    out->backprop = [o, a, b] {
        for (int r = 0; r < o->rows; ++r) {
            for (int c = 0; c < a->cols; ++c)
                a->grad[static_cast<std::size_t>(r) * a->cols + c] +=
                    o->grad[static_cast<std::size_t>(r) * o->cols + c];
            for (int c = 0; c < b->cols; ++c)
                b->grad[static_cast<std::size_t>(r) * b->cols + c] +=
                    o->grad[static_cast<std::size_t>(r) * o->cols +
                            a->cols + c];
        }
    };
    return out;
}

TensorPtr slice_row(const TensorPtr& x, int row) {
    if (row < 0 || row >= x->rows)
        throw std::invalid_argument("slice_row: row out of range");
    TensorPtr out = node(1, x->cols, {x});
    for (int c = 0; c < x->cols; ++c) out->value[static_cast<std::size_t>(c)] = x->at(row, c);
    Tensor* o = out.get();
    out->backprop = [o, x, row] {
        for (int c = 0; c < o->cols; ++c)
            x->grad[static_cast<std::size_t>(row) * x->cols + c] +=
                o->grad[static_cast<std::size_t>(c)];
    };
    return out;
}

TensorPtr slice_cols(const TensorPtr& x, int col_begin, int col_end) {
    if (col_begin < 0 || col_end > x->cols || col_begin >= col_end)
        throw std::invalid_argument("slice_cols: bad column range");
    TensorPtr out = node(x->rows, col_end - col_begin, {x});
    for (int r = 0; r < x->rows; ++r)
        for (int c = col_begin; c < col_end; ++c)
            out->at(r, c - col_begin) = x->at(r, c);
    Tensor* o = out.get();
    out->backprop = [o, x, col_begin] {
        for (int r = 0; r < o->rows; ++r)
            for (int c = 0; c < o->cols; ++c)
                x->grad[static_cast<std::size_t>(r) * x->cols + col_begin +
                        c] +=
                    o->grad[static_cast<std::size_t>(r) * o->cols + c];
    };
    return out;
}

TensorPtr mean_all(const TensorPtr& x) {
    TensorPtr out = node(1, 1, {x});
    double sum = 0.0;
    for (double v : x->value) sum += v;
    out->value[0] = sum / static_cast<double>(x->size());
    Tensor* o = out.get();
    out->backprop = [o, x] {
        const double g = o->grad[0] / static_cast<double>(x->size());
        for (std::size_t i = 0; i < x->size(); ++i) x->grad[i] += g;
    };
    return out;
}

void backward(const TensorPtr& loss) {
    if (!loss || loss->rows != 1 || loss->cols != 1)
        throw std::invalid_argument("backward needs a scalar loss");

    // Iterative post-order DFS over the parent edges.
    std::vector<Tensor*> topo;
    std::unordered_set<Tensor*> seen;
    struct Frame {
        Tensor* t;
        std::size_t next_parent;
    };
    std::vector<Frame> stack{{loss.get(), 0}};
    seen.insert(loss.get());
    while (!stack.empty()) {
        Frame& f = stack.back();
        if (f.next_parent < f.t->parents.size()) {
            Tensor* p = f.t->parents[f.next_parent++].get();
            if (seen.insert(p).second) stack.push_back({p, 0});
        } else {
            topo.push_back(f.t);
            stack.pop_back();
        }
    }

    for (Tensor* t : topo)
        if (!t->leaf()) std::fill(t->grad.begin(), t->grad.end(), 0.0);
    loss->grad[0] = 1.0;
    for (auto it = topo.rbegin(); it != topo.rend(); ++it)
        if ((*it)->backprop) (*it)->backprop();
}

void zero_grad(const std::vector<TensorPtr>& params) {
    for (const TensorPtr& p : params)
        std::fill(p->grad.begin(), p->grad.end(), 0.0);
}

}  // namespace cyano::nn
