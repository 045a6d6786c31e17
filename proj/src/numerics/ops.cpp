#include "numerics/ops.hpp"

#include <algorithm>
#include <cmath>

namespace hsie::nn {

// ---------------------------------------------------------------------------
// Resampling maps

int reflect101(int i, int n) {
    if (n == 1) return 0;
    const int period = 2 * (n - 1);
    i %= period;
    if (i < 0) i += period;
    return i < n ? i : period - i;
}

LinearMap1D bilinear_up2_map(int n) {
    LinearMap1D m;
    m.in_len = n;
    m.out_len = 2 * n;
    m.rows.resize(static_cast<std::size_t>(2 * n));
    for (int o = 0; o < 2 * n; ++o) {
        const double src = std::max(0.0, (o + 0.5) * 0.5 - 0.5);
        const int i0 = std::min(static_cast<int>(std::floor(src)), n - 1);
        const int i1 = std::min(i0 + 1, n - 1);
        const double f = src - i0;
        auto& row = m.rows[static_cast<std::size_t>(o)];
        if (i0 == i1 || f == 0.0) {
            row.emplace_back(i0, 1.0);
        } else {
            row.emplace_back(i0, 1.0 - f);
            row.emplace_back(i1, f);
        }
    }
    return m;
}

namespace {

void add_tap(std::vector<std::pair<int, double>>& row, int index, double w) {
    for (auto& [i, acc] : row) {
        if (i == index) {
            acc += w;
            return;
        }
    }
    row.emplace_back(index, w);
}

}  // namespace

LinearMap1D expand_map(int n, const pyramid::GaussianKernel& kernel) {
    LinearMap1D m;
    m.in_len = n;
    m.out_len = 2 * n;
    m.rows.resize(static_cast<std::size_t>(2 * n));
    for (int o = 0; o < 2 * n; ++o) {
        auto& row = m.rows[static_cast<std::size_t>(o)];
        for (int t = -2; t <= 2; ++t) {
            const int p = reflect101(o + t, 2 * n);
            if (p % 2 != 0) continue;  // inserted zero
            add_tap(row, p / 2, 2.0 * kernel.taps[static_cast<std::size_t>(t + 2)]);
        }
    }
    return m;
}

LinearMap1D blur_down_map(int n, const pyramid::GaussianKernel& kernel) {
    require(n % 2 == 0, "blur_down_map: length must be even, got " + std::to_string(n));
    LinearMap1D m;
    m.in_len = n;
    m.out_len = n / 2;
    m.rows.resize(static_cast<std::size_t>(n / 2));
    for (int o = 0; o < n / 2; ++o) {
        auto& row = m.rows[static_cast<std::size_t>(o)];
        for (int t = -2; t <= 2; ++t)
            add_tap(row, reflect101(2 * o + t, n), kernel.taps[static_cast<std::size_t>(t + 2)]);
    }
    return m;
}

namespace {

// Applies map (or its transpose) along W of a [C,H,W] tensor.
template <typename T>
Tensor<T> apply_cols(const Tensor<T>& x, const LinearMap1D& map, bool transpose) {
    const int C = x.channels(), H = x.height(), W = x.width();
    const int expect = transpose ? map.out_len : map.in_len;
    require(W == expect, "resample: width " + std::to_string(W) + " does not match map length " + std::to_string(expect));
    const int Wo = transpose ? map.in_len : map.out_len;
    Tensor<T> out({C, H, Wo});
    for (int c = 0; c < C; ++c) {
        for (int y = 0; y < H; ++y) {
            const T* src = &x.at(c, y, 0);
            T* dst = &out.at(c, y, 0);
            for (int o = 0; o < map.out_len; ++o) {
                for (const auto& [i, w] : map.rows[static_cast<std::size_t>(o)]) {
                    if (transpose)
                        dst[i] += static_cast<T>(w) * src[o];
                    else
                        dst[o] += static_cast<T>(w) * src[i];
                }
            }
        }
    }
    return out;
}

// Applies map (or its transpose) along H of a [C,H,W] tensor.
template <typename T>
Tensor<T> apply_rows(const Tensor<T>& x, const LinearMap1D& map, bool transpose) {
    const int C = x.channels(), H = x.height(), W = x.width();
    const int expect = transpose ? map.out_len : map.in_len;
    require(H == expect, "resample: height " + std::to_string(H) + " does not match map length " + std::to_string(expect));
    const int Ho = transpose ? map.in_len : map.out_len;
    Tensor<T> out({C, Ho, W});
    for (int c = 0; c < C; ++c) {
        for (int o = 0; o < map.out_len; ++o) {
            for (const auto& [i, w] : map.rows[static_cast<std::size_t>(o)]) {
                const T wt = static_cast<T>(w);
                const T* src = transpose ? &x.at(c, o, 0) : &x.at(c, i, 0);
                T* dst = transpose ? &out.at(c, i, 0) : &out.at(c, o, 0);
                for (int xcol = 0; xcol < W; ++xcol) dst[xcol] += wt * src[xcol];
            }
        }
    }
    return out;
}

template <typename T>
void accumulate(Tensor<T>& dst, const Tensor<T>& src) {
    T* d = dst.data();
    const T* s = src.data();
    for (std::size_t i = 0; i < dst.size(); ++i) d[i] += s[i];
}

}  // namespace

template <typename T>
Tensor<T> apply_resample(const Tensor<T>& x, const LinearMap1D& rows, const LinearMap1D& cols) {
    require_rank(x, 3, "resample");
    return apply_rows(apply_cols(x, cols, false), rows, false);
}

template <typename T>
Var<T> resample2d(const Var<T>& x, const LinearMap1D& rows, const LinearMap1D& cols) {
    Tensor<T> out = apply_resample(x->value, rows, cols);
    return make_node<T>(std::move(out), {x}, [rows, cols](Node<T>& n) {
        const auto& xin = n.parents[0];
        if (!xin->requires_grad) return;
        Tensor<T> g = apply_cols(apply_rows(n.grad, rows, true), cols, true);
        accumulate(xin->grad_buffer(), g);
    });
}

template <typename T>
Var<T> bilinear_upsample_x2(const Var<T>& x) {
    require_rank(x->value, 3, "bilinear_upsample_x2");
    require(x->value.height() >= 1 && x->value.width() >= 1, "bilinear_upsample_x2: empty input");
    return resample2d(x, bilinear_up2_map(x->value.height()), bilinear_up2_map(x->value.width()));
}

template <typename T>
Var<T> laplacian_upscale(const Var<T>& x, const pyramid::GaussianKernel& kernel) {
    require_rank(x->value, 3, "laplacian_upscale");
    require(x->value.height() >= 1 && x->value.width() >= 1, "laplacian_upscale: empty input");
    return resample2d(x, expand_map(x->value.height(), kernel), expand_map(x->value.width(), kernel));
}

// ---------------------------------------------------------------------------
// Convolutions

template <typename T>
Var<T> conv2d(const Var<T>& x, const Var<T>& weight, const Var<T>& bias) {
    const Tensor<T>& in = x->value;
    const Tensor<T>& wt = weight->value;
    require_rank(in, 3, "conv2d input");
    require_rank(wt, 4, "conv2d weight");
    const int Cin = in.channels(), H = in.height(), W = in.width();
    const int Cout = wt.dim(0), kh = wt.dim(2), kw = wt.dim(3);
    if (wt.dim(1) != Cin)
        throw ValidationError("conv2d: input has " + std::to_string(Cin) + " channels, layer expects " +
                              std::to_string(wt.dim(1)));
    require(kh % 2 == 1 && kw % 2 == 1, "conv2d: kernel extents must be odd");
    if (bias) require_shape(bias->value, {Cout}, "conv2d bias");
    const int ph = (kh - 1) / 2, pw = (kw - 1) / 2;
    const std::size_t HW = static_cast<std::size_t>(H) * W;

    Tensor<T> out({Cout, H, W});
    for (int o = 0; o < Cout; ++o) {
        T* dst = out.data() + o * HW;
        if (bias) std::fill(dst, dst + HW, bias->value[static_cast<std::size_t>(o)]);
        for (int i = 0; i < Cin; ++i) {
            const T* src = in.data() + i * HW;
            for (int ky = 0; ky < kh; ++ky) {
                const int dy = ky - ph;
                const int y0 = std::max(0, -dy), y1 = std::min(H, H - dy);
                for (int kx = 0; kx < kw; ++kx) {
                    const int dx = kx - pw;
                    const int x0 = std::max(0, -dx), x1 = std::min(W, W - dx);
                    const T w = wt.data()[((static_cast<std::size_t>(o) * Cin + i) * kh + ky) * kw + kx];
                    if (w == T(0)) continue;
                    for (int y = y0; y < y1; ++y) {
                        T* d = dst + static_cast<std::size_t>(y) * W;
                        const T* s = src + static_cast<std::size_t>(y + dy) * W + dx;
                        for (int xx = x0; xx < x1; ++xx) d[xx] += w * s[xx];
                    }
                }
            }
        }
    }

    return make_node<T>(std::move(out), {x, weight, bias}, [=](Node<T>& n) {
        const auto& xin = n.parents[0];
        const auto& wv = n.parents[1];
        const auto& bv = n.parents[2];
        const Tensor<T>& g = n.grad;
        const Tensor<T>& inv = xin->value;
        const Tensor<T>& wtv = wv->value;

        if (bv && bv->requires_grad) {
            Tensor<T>& gb = bv->grad_buffer();
            for (int o = 0; o < Cout; ++o) {
                const T* go = g.data() + o * HW;
                double acc = 0;
                for (std::size_t p = 0; p < HW; ++p) acc += go[p];
                gb[static_cast<std::size_t>(o)] += static_cast<T>(acc);
            }
        }
        if (wv->requires_grad) {
            Tensor<T>& gw = wv->grad_buffer();
            for (int o = 0; o < Cout; ++o) {
                const T* go = g.data() + o * HW;
                for (int i = 0; i < Cin; ++i) {
                    const T* src = inv.data() + i * HW;
                    for (int ky = 0; ky < kh; ++ky) {
                        const int dy = ky - ph;
                        const int y0 = std::max(0, -dy), y1 = std::min(H, H - dy);
                        for (int kx = 0; kx < kw; ++kx) {
                            const int dx = kx - pw;
                            const int x0 = std::max(0, -dx), x1 = std::min(W, W - dx);
                            // Four partial sums keep the loop vectorizable with a fixed reduction order.
                            double acc = 0;
                            for (int y = y0; y < y1; ++y) {
                                const T* gr = go + static_cast<std::size_t>(y) * W;
                                const T* s = src + static_cast<std::size_t>(y + dy) * W + dx;
                                T part[4] = {0, 0, 0, 0};
                                int xx = x0;
                                for (; xx + 3 < x1; xx += 4) {
                                    part[0] += gr[xx] * s[xx];
                                    part[1] += gr[xx + 1] * s[xx + 1];
                                    part[2] += gr[xx + 2] * s[xx + 2];
                                    part[3] += gr[xx + 3] * s[xx + 3];
                                }
                                for (; xx < x1; ++xx) part[0] += gr[xx] * s[xx];
                                acc += static_cast<double>((part[0] + part[1]) + (part[2] + part[3]));
                            }
                            gw.data()[((static_cast<std::size_t>(o) * Cin + i) * kh + ky) * kw + kx] += static_cast<T>(acc);
                        }
                    }
                }
            }
        }
        if (xin->requires_grad) {
            Tensor<T>& gx = xin->grad_buffer();
            for (int o = 0; o < Cout; ++o) {
                const T* go = g.data() + o * HW;
                for (int i = 0; i < Cin; ++i) {
                    T* dst = gx.data() + i * HW;
                    for (int ky = 0; ky < kh; ++ky) {
                        const int dy = ky - ph;
                        const int y0 = std::max(0, -dy), y1 = std::min(H, H - dy);
                        for (int kx = 0; kx < kw; ++kx) {
                            const int dx = kx - pw;
                            const int x0 = std::max(0, -dx), x1 = std::min(W, W - dx);
                            const T w = wtv.data()[((static_cast<std::size_t>(o) * Cin + i) * kh + ky) * kw + kx];
                            if (w == T(0)) continue;
                            for (int y = y0; y < y1; ++y) {
                                const T* gr = go + static_cast<std::size_t>(y) * W;
                                T* d = dst + static_cast<std::size_t>(y + dy) * W + dx;
                                for (int xx = x0; xx < x1; ++xx) d[xx] += w * gr[xx];
                            }
                        }
                    }
                }
            }
        }
    });
}

template <typename T>
Var<T> conv1d(const Var<T>& x, const Var<T>& weight, const Var<T>& bias) {
    const Tensor<T>& in = x->value;
    require_rank(in, 1, "conv1d input");
    require(in.size() > 0, "conv1d: empty input");
    require_rank(weight->value, 3, "conv1d weight");
    require(weight->value.dim(0) == 1 && weight->value.dim(1) == 1, "conv1d: weight must be [1,1,k]");
    const int k = weight->value.dim(2);
    require(k % 2 == 1, "conv1d: kernel length must be odd");
    if (bias) require_shape(bias->value, {1}, "conv1d bias");
    const int L = in.dim(0), pad = (k - 1) / 2;

    Tensor<T> out({L});
    for (int o = 0; o < L; ++o) {
        T acc = bias ? bias->value[0] : T(0);
        for (int t = 0; t < k; ++t) {
            const int i = o + t - pad;
            if (i >= 0 && i < L) acc += weight->value[static_cast<std::size_t>(t)] * in[static_cast<std::size_t>(i)];
        }
        out[static_cast<std::size_t>(o)] = acc;
    }

    return make_node<T>(std::move(out), {x, weight, bias}, [=](Node<T>& n) {
        const auto& xin = n.parents[0];
        const auto& wv = n.parents[1];
        const auto& bv = n.parents[2];
        const Tensor<T>& g = n.grad;
        for (int o = 0; o < L; ++o) {
            const T go = g[static_cast<std::size_t>(o)];
            for (int t = 0; t < k; ++t) {
                const int i = o + t - pad;
                if (i < 0 || i >= L) continue;
                if (wv->requires_grad) wv->grad_buffer()[static_cast<std::size_t>(t)] += go * xin->value[static_cast<std::size_t>(i)];
                if (xin->requires_grad) xin->grad_buffer()[static_cast<std::size_t>(i)] += go * wv->value[static_cast<std::size_t>(t)];
            }
            if (bv && bv->requires_grad) bv->grad_buffer()[0] += go;
        }
    });
}

// ---------------------------------------------------------------------------
// Pointwise and structural ops

template <typename T>
Var<T> global_avg_pool(const Var<T>& x) {
    const Tensor<T>& in = x->value;
    require_rank(in, 3, "global_avg_pool");
    const int C = in.channels();
    const std::size_t HW = in.plane();
    require(HW >= 1, "global_avg_pool: empty spatial extent");
    Tensor<T> out({C});
    for (int c = 0; c < C; ++c) {
        double acc = 0;
        const T* s = in.data() + c * HW;
        for (std::size_t p = 0; p < HW; ++p) acc += s[p];
        out[static_cast<std::size_t>(c)] = static_cast<T>(acc / static_cast<double>(HW));
    }
    return make_node<T>(std::move(out), {x}, [C, HW](Node<T>& n) {
        Tensor<T>& gx = n.parents[0]->grad_buffer();
        const T inv = T(1) / static_cast<T>(HW);
        for (int c = 0; c < C; ++c) {
            const T g = n.grad[static_cast<std::size_t>(c)] * inv;
            T* d = gx.data() + c * HW;
            for (std::size_t p = 0; p < HW; ++p) d[p] += g;
        }
    });
}

template <typename T>
Var<T> relu(const Var<T>& x) {
    Tensor<T> out(x->value.shape());
    const T* s = x->value.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = s[i] > T(0) ? s[i] : T(0);
    return make_node<T>(std::move(out), {x}, [](Node<T>& n) {
        const auto& xin = n.parents[0];
        Tensor<T>& gx = xin->grad_buffer();
        for (std::size_t i = 0; i < gx.size(); ++i)
            if (xin->value[i] > T(0)) gx[i] += n.grad[i];
    });
}

template <typename T>
Var<T> sigmoid(const Var<T>& x) {
    Tensor<T> out(x->value.shape());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const T v = x->value[i];
        // Branch on sign so exp never overflows.
        if (v >= T(0)) {
            out[i] = T(1) / (T(1) + std::exp(-v));
        } else {
            const T e = std::exp(v);
            out[i] = e / (T(1) + e);
        }
    }
    return make_node<T>(std::move(out), {x}, [](Node<T>& n) {
        Tensor<T>& gx = n.parents[0]->grad_buffer();
        for (std::size_t i = 0; i < gx.size(); ++i) {
            const T s = n.value[i];
            gx[i] += n.grad[i] * s * (T(1) - s);
        }
    });
}

template <typename T>
Var<T> concat(const std::vector<Var<T>>& parts) {
    require(!parts.empty(), "concat: no inputs");
    const Tensor<T>& first = parts.front()->value;
    require_rank(first, 3, "concat part 0");
    const int H = first.height(), W = first.width();
    int total = 0;
    for (std::size_t p = 0; p < parts.size(); ++p) {
        const Tensor<T>& t = parts[p]->value;
        require_rank(t, 3, "concat part " + std::to_string(p));
        if (t.height() != H || t.width() != W)
            throw ValidationError("concat: part " + std::to_string(p) + " has spatial size " + shape_str(t.shape()) +
                                  ", expected " + std::to_string(H) + "x" + std::to_string(W));
        total += t.channels();
    }
    Tensor<T> out({total, H, W});
    std::size_t offset = 0;
    for (const auto& p : parts) {
        std::copy(p->value.data(), p->value.data() + p->value.size(), out.data() + offset);
        offset += p->value.size();
    }
    return make_node<T>(std::move(out), parts, [](Node<T>& n) {
        std::size_t off = 0;
        for (const auto& p : n.parents) {
            const std::size_t len = p->value.size();
            if (p->requires_grad) {
                Tensor<T>& gp = p->grad_buffer();
                for (std::size_t i = 0; i < len; ++i) gp[i] += n.grad[off + i];
            }
            off += len;
        }
    });
}

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
    if (a->value.shape() != b->value.shape())
        throw ValidationError("add: shape mismatch " + shape_str(a->value.shape()) + " vs " + shape_str(b->value.shape()));
    Tensor<T> out(a->value.shape());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a->value[i] + b->value[i];
    return make_node<T>(std::move(out), {a, b}, [](Node<T>& n) {
        for (const auto& p : n.parents) {
            if (!p->requires_grad) continue;
            Tensor<T>& gp = p->grad_buffer();
            for (std::size_t i = 0; i < gp.size(); ++i) gp[i] += n.grad[i];
        }
    });
}

template <typename T>
Var<T> mul(const Var<T>& a, const Var<T>& b) {
    if (a->value.shape() != b->value.shape())
        throw ValidationError("mul: shape mismatch " + shape_str(a->value.shape()) + " vs " + shape_str(b->value.shape()));
    Tensor<T> out(a->value.shape());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a->value[i] * b->value[i];
    return make_node<T>(std::move(out), {a, b}, [](Node<T>& n) {
        const auto& pa = n.parents[0];
        const auto& pb = n.parents[1];
        if (pa->requires_grad) {
            Tensor<T>& g = pa->grad_buffer();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * pb->value[i];
        }
        if (pb->requires_grad) {
            Tensor<T>& g = pb->grad_buffer();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * pa->value[i];
        }
    });
}

template <typename T>
Var<T> mul_channel(const Var<T>& x, const Var<T>& w) {
    require_rank(x->value, 3, "mul_channel feature map");
    const int C = x->value.channels();
    if (w->value.shape() != Shape{C})
        throw ValidationError("mul_channel: weights " + shape_str(w->value.shape()) + " do not match " +
                              std::to_string(C) + " channels");
    const std::size_t HW = x->value.plane();
    Tensor<T> out(x->value.shape());
    for (int c = 0; c < C; ++c) {
        const T wc = w->value[static_cast<std::size_t>(c)];
        const T* s = x->value.data() + c * HW;
        T* d = out.data() + c * HW;
        for (std::size_t p = 0; p < HW; ++p) d[p] = s[p] * wc;
    }
    return make_node<T>(std::move(out), {x, w}, [C, HW](Node<T>& n) {
        const auto& px = n.parents[0];
        const auto& pw = n.parents[1];
        for (int c = 0; c < C; ++c) {
            const T* g = n.grad.data() + c * HW;
            if (px->requires_grad) {
                const T wc = pw->value[static_cast<std::size_t>(c)];
                T* d = px->grad_buffer().data() + c * HW;
                for (std::size_t p = 0; p < HW; ++p) d[p] += g[p] * wc;
            }
            if (pw->requires_grad) {
                const T* s = px->value.data() + c * HW;
                double acc = 0;
                for (std::size_t p = 0; p < HW; ++p) acc += static_cast<double>(g[p]) * static_cast<double>(s[p]);
                pw->grad_buffer()[static_cast<std::size_t>(c)] += static_cast<T>(acc);
            }
        }
    });
}

template <typename T>
Var<T> add_scalar(const Var<T>& x, T c) {
    Tensor<T> out(x->value.shape());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x->value[i] + c;
    return make_node<T>(std::move(out), {x}, [](Node<T>& n) {
        Tensor<T>& g = n.parents[0]->grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
    });
}

// ---------------------------------------------------------------------------
// Losses

template <typename T>
Var<T> l1_loss(const Var<T>& pred, const Var<T>& target) {
    if (pred->value.shape() != target->value.shape())
        throw ValidationError("l1_loss: shape mismatch " + shape_str(pred->value.shape()) + " vs " +
                              shape_str(target->value.shape()));
    const std::size_t count = pred->value.size();
    require(count > 0, "l1_loss: empty tensors");
    double acc = 0;
    for (std::size_t i = 0; i < count; ++i) acc += std::abs(static_cast<double>(pred->value[i]) - target->value[i]);
    Tensor<T> out({1}, static_cast<T>(acc / static_cast<double>(count)));
    return make_node<T>(std::move(out), {pred, target}, [count](Node<T>& n) {
        const auto& p = n.parents[0];
        const auto& t = n.parents[1];
        const T scale = n.grad[0] / static_cast<T>(count);
        for (std::size_t i = 0; i < count; ++i) {
            const T d = p->value[i] - t->value[i];
            const T s = d > T(0) ? scale : (d < T(0) ? -scale : T(0));
            if (s == T(0)) continue;
            if (p->requires_grad) p->grad_buffer()[i] += s;
            if (t->requires_grad) t->grad_buffer()[i] -= s;
        }
    });
}

template <typename T>
Var<T> l2_loss(const Var<T>& pred, const Var<T>& target) {
    if (pred->value.shape() != target->value.shape())
        throw ValidationError("l2_loss: shape mismatch " + shape_str(pred->value.shape()) + " vs " +
                              shape_str(target->value.shape()));
    const std::size_t count = pred->value.size();
    require(count > 0, "l2_loss: empty tensors");
    double acc = 0;
    for (std::size_t i = 0; i < count; ++i) {
        const double d = static_cast<double>(pred->value[i]) - target->value[i];
        acc += d * d;
    }
    Tensor<T> out({1}, static_cast<T>(acc / static_cast<double>(count)));
    return make_node<T>(std::move(out), {pred, target}, [count](Node<T>& n) {
        const auto& p = n.parents[0];
        const auto& t = n.parents[1];
        const T scale = T(2) * n.grad[0] / static_cast<T>(count);
        for (std::size_t i = 0; i < count; ++i) {
            const T s = scale * (p->value[i] - t->value[i]);
            if (p->requires_grad) p->grad_buffer()[i] += s;
            if (t->requires_grad) t->grad_buffer()[i] -= s;
        }
    });
}

// ---------------------------------------------------------------------------

#define HSIE_INSTANTIATE_OPS(T)                                                              \
    template Var<T> conv2d(const Var<T>&, const Var<T>&, const Var<T>&);                     \
    template Var<T> conv1d(const Var<T>&, const Var<T>&, const Var<T>&);                     \
    template Var<T> global_avg_pool(const Var<T>&);                                          \
    template Var<T> relu(const Var<T>&);                                                     \
    template Var<T> sigmoid(const Var<T>&);                                                  \
    template Var<T> concat(const std::vector<Var<T>>&);                                      \
    template Var<T> add(const Var<T>&, const Var<T>&);                                       \
    template Var<T> mul(const Var<T>&, const Var<T>&);                                       \
    template Var<T> mul_channel(const Var<T>&, const Var<T>&);                               \
    template Var<T> add_scalar(const Var<T>&, T);                                            \
    template Var<T> resample2d(const Var<T>&, const LinearMap1D&, const LinearMap1D&);       \
    template Var<T> bilinear_upsample_x2(const Var<T>&);                                     \
    template Var<T> laplacian_upscale(const Var<T>&, const pyramid::GaussianKernel&);        \
    template Var<T> l1_loss(const Var<T>&, const Var<T>&);                                   \
    template Var<T> l2_loss(const Var<T>&, const Var<T>&);                                   \
    template Tensor<T> apply_resample(const Tensor<T>&, const LinearMap1D&, const LinearMap1D&);

HSIE_INSTANTIATE_OPS(float)
HSIE_INSTANTIATE_OPS(double)

#undef HSIE_INSTANTIATE_OPS

}  // namespace hsie::nn
