#include "sd/unet.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "sd/error.hpp"

namespace sd {

void UNetConfig::validate() const {
    if (in_channels < 1) throw ArgumentError("U-Net needs at least one input channel");
    if (n_classes < 2) throw ArgumentError("U-Net needs at least two classes");
    if (base_filters < 1) throw ArgumentError("U-Net base_filters must be >= 1");
    if (kernel_size < 1 || kernel_size % 2 == 0) throw ArgumentError("U-Net kernel_size must be odd");
    if (depth < 1 || depth > 8) throw ArgumentError("U-Net depth must lie in [1, 8]");
    if (!(dropout >= 0.0f && dropout < 1.0f)) throw ArgumentError("dropout must lie in [0, 1)");
}

std::vector<ConvLayer> unet_layout(const UNetConfig& cfg) {
    cfg.validate();
    std::vector<ConvLayer> layers;
    const std::uint32_t k = cfg.kernel_size;
    auto filters = [&](std::uint32_t level) { return cfg.base_filters << level; };
    std::uint32_t in = cfg.in_channels;
    for (std::uint32_t l = 0; l < cfg.depth; ++l) {
        const std::string p = "enc" + std::to_string(l);
        layers.push_back({p + ".conv1", in, filters(l), k});
        layers.push_back({p + ".conv2", filters(l), filters(l), k});
        in = filters(l);
    }
    layers.push_back({"bottleneck.conv1", in, filters(cfg.depth), k});
    layers.push_back({"bottleneck.conv2", filters(cfg.depth), filters(cfg.depth), k});
    for (std::uint32_t l = cfg.depth; l-- > 0;) {
        const std::string p = "dec" + std::to_string(l);
        layers.push_back({p + ".up", filters(l + 1), filters(l), k});
        layers.push_back({p + ".conv1", 2 * filters(l), filters(l), k});
        layers.push_back({p + ".conv2", filters(l), filters(l), k});
    }
    layers.push_back({"head", filters(0), cfg.n_classes, 1});
    return layers;
}

template <typename T>
std::size_t ModelParams<T>::parameter_count() const {
    std::size_t n = 0;
    for (const auto& t : tensors) n += t.size();
    return n;
}

template <typename T>
ModelParams<T> init_params(const UNetConfig& cfg, Rng& rng) {
    ModelParams<T> p;
    p.cfg = cfg;
    for (const auto& layer : unet_layout(cfg)) {
        Tensor<T> w({layer.out, layer.in, layer.kernel, layer.kernel});
        const double std_dev = std::sqrt(2.0 / (static_cast<double>(layer.in) * layer.kernel * layer.kernel));
        for (auto& v : w.values) v = static_cast<T>(rng.normal() * std_dev);
        p.names.push_back(layer.name + ".weight");
        p.tensors.push_back(std::move(w));
        p.names.push_back(layer.name + ".bias");
        p.tensors.push_back(Tensor<T>({layer.out}));
    }
    return p;
}

template <typename To, typename From>
ModelParams<To> cast_params(const ModelParams<From>& p) {
    ModelParams<To> out;
    out.cfg = p.cfg;
    out.names = p.names;
    for (const auto& t : p.tensors) {
        Tensor<To> c;
        c.shape = t.shape;
        c.values.assign(t.values.begin(), t.values.end());
        out.tensors.push_back(std::move(c));
    }
    return out;
}

namespace {

// ---- primitive layers on one sample, channel-planar [C, H, W] ----

template <typename T>
void conv_forward(const T* in, std::uint32_t cin, std::uint32_t H, std::uint32_t W, const T* w, const T* bias,
                  std::uint32_t cout, std::uint32_t k, T* out) {
    const std::size_t hw = static_cast<std::size_t>(H) * W;
    const int pad = static_cast<int>(k / 2);
    for (std::uint32_t o = 0; o < cout; ++o) {
        T* dst = out + o * hw;
        std::fill(dst, dst + hw, bias[o]);
        for (std::uint32_t i = 0; i < cin; ++i) {
            const T* src = in + i * hw;
            const T* wk = w + (static_cast<std::size_t>(o) * cin + i) * k * k;
            for (std::uint32_t ky = 0; ky < k; ++ky) {
                const int dy = static_cast<int>(ky) - pad;
                const int y0 = std::max(0, -dy), y1 = std::min<int>(H, static_cast<int>(H) - dy);
                for (std::uint32_t kx = 0; kx < k; ++kx) {
                    const int dx = static_cast<int>(kx) - pad;
                    const int x0 = std::max(0, -dx), x1 = std::min<int>(W, static_cast<int>(W) - dx);
                    const T wv = wk[ky * k + kx];
                    for (int y = y0; y < y1; ++y) {
                        const T* s = src + static_cast<std::ptrdiff_t>(y + dy) * W + dx;
                        T* d = dst + static_cast<std::ptrdiff_t>(y) * W;
                        for (int x = x0; x < x1; ++x) d[x] += wv * s[x];
                    }
                }
            }
        }
    }
}

// Accumulates into din (if non-null), dw and db.
template <typename T>
void conv_backward(const T* in, std::uint32_t cin, std::uint32_t H, std::uint32_t W, const T* w, std::uint32_t cout,
                   std::uint32_t k, const T* dout, T* din, T* dw, T* db, std::vector<T>& row) {
    const std::size_t hw = static_cast<std::size_t>(H) * W;
    const int pad = static_cast<int>(k / 2);
    row.resize(W);
    for (std::uint32_t o = 0; o < cout; ++o) {
        const T* g = dout + o * hw;
        T acc = T(0);
        for (std::size_t i = 0; i < hw; ++i) acc += g[i];
        db[o] += acc;
        for (std::uint32_t i = 0; i < cin; ++i) {
            const T* src = in + i * hw;
            T* dsrc = din ? din + i * hw : nullptr;
            const std::size_t widx = (static_cast<std::size_t>(o) * cin + i) * k * k;
            for (std::uint32_t ky = 0; ky < k; ++ky) {
                const int dy = static_cast<int>(ky) - pad;
                const int y0 = std::max(0, -dy), y1 = std::min<int>(H, static_cast<int>(H) - dy);
                for (std::uint32_t kx = 0; kx < k; ++kx) {
                    const int dx = static_cast<int>(kx) - pad;
                    const int x0 = std::max(0, -dx), x1 = std::min<int>(W, static_cast<int>(W) - dx);
                    const T wv = w[widx + ky * k + kx];
                    std::fill(row.begin(), row.end(), T(0));
                    for (int y = y0; y < y1; ++y) {
                        const T* gy = g + static_cast<std::ptrdiff_t>(y) * W;
                        const T* s = src + static_cast<std::ptrdiff_t>(y + dy) * W + dx;
                        T* r = row.data();
                        for (int x = x0; x < x1; ++x) r[x] += gy[x] * s[x];
                        if (dsrc) {
                            T* ds = dsrc + static_cast<std::ptrdiff_t>(y + dy) * W + dx;
                            for (int x = x0; x < x1; ++x) ds[x] += wv * gy[x];
                        }
                    }
                    T sum = T(0);
                    for (int x = x0; x < x1; ++x) sum += row[x];
                    dw[widx + ky * k + kx] += sum;
                }
            }
        }
    }
}

template <typename T>
void relu_inplace(std::vector<T>& a) {
    for (auto& v : a) v = v > T(0) ? v : T(0);
}

// grad *= (activation > 0)
template <typename T>
void relu_backward(const std::vector<T>& act, std::vector<T>& grad) {
    for (std::size_t i = 0; i < act.size(); ++i)
        if (!(act[i] > T(0))) grad[i] = T(0);
}

template <typename T>
void maxpool_forward(const std::vector<T>& in, std::uint32_t C, std::uint32_t H, std::uint32_t W, std::vector<T>& out,
                     std::vector<std::uint32_t>& idx) {
    const std::uint32_t h = H / 2, w = W / 2;
    out.assign(static_cast<std::size_t>(C) * h * w, T(0));
    idx.assign(out.size(), 0);
    for (std::uint32_t c = 0; c < C; ++c) {
        for (std::uint32_t y = 0; y < h; ++y) {
            for (std::uint32_t x = 0; x < w; ++x) {
                const std::size_t base = (static_cast<std::size_t>(c) * H + 2 * y) * W + 2 * x;
                std::size_t best = base;
                for (std::size_t cand : {base + 1, base + W, base + W + 1})
                    if (in[cand] > in[best]) best = cand;
                const std::size_t o = (static_cast<std::size_t>(c) * h + y) * w + x;
                out[o] = in[best];
                idx[o] = static_cast<std::uint32_t>(best);
            }
        }
    }
}

template <typename T>
void upsample_forward(const std::vector<T>& in, std::uint32_t C, std::uint32_t h, std::uint32_t w, std::vector<T>& out) {
    const std::uint32_t H = 2 * h, W = 2 * w;
    out.resize(static_cast<std::size_t>(C) * H * W);
    for (std::uint32_t c = 0; c < C; ++c)
        for (std::uint32_t y = 0; y < H; ++y)
            for (std::uint32_t x = 0; x < W; ++x)
                out[(static_cast<std::size_t>(c) * H + y) * W + x] = in[(static_cast<std::size_t>(c) * h + y / 2) * w + x / 2];
}

template <typename T>
void upsample_backward(const std::vector<T>& dout, std::uint32_t C, std::uint32_t h, std::uint32_t w, std::vector<T>& din) {
    const std::uint32_t H = 2 * h, W = 2 * w;
    din.assign(static_cast<std::size_t>(C) * h * w, T(0));
    for (std::uint32_t c = 0; c < C; ++c)
        for (std::uint32_t y = 0; y < H; ++y)
            for (std::uint32_t x = 0; x < W; ++x)
                din[(static_cast<std::size_t>(c) * h + y / 2) * w + x / 2] += dout[(static_cast<std::size_t>(c) * H + y) * W + x];
}

template <typename T>
struct Workspace {
    struct Enc {
        std::uint32_t H = 0, W = 0;
        std::vector<T> a1, a2, keep, out, pooled;
        std::vector<std::uint32_t> pool_idx;
    };
    struct Dec {
        std::uint32_t H = 0, W = 0;
        std::vector<T> up, u, cat, d1, d2;
    };
    std::vector<T> input;
    std::vector<Enc> enc;
    std::vector<T> b1, b2;
    std::vector<Dec> dec;
    std::vector<T> probs;
    std::vector<T> row;
};

template <typename T>
class Net {
  public:
    explicit Net(const ModelParams<T>& p) : p_(p), cfg_(p.cfg), layers_(unet_layout(p.cfg)) {
        if (p_.tensors.size() != 2 * layers_.size()) throw ShapeError("parameter tensors do not match U-Net layout");
        for (std::size_t i = 0; i < layers_.size(); ++i) {
            const auto& L = layers_[i];
            const std::vector<std::uint32_t> ws{L.out, L.in, L.kernel, L.kernel};
            if (p_.tensors[2 * i].shape != ws || p_.tensors[2 * i + 1].shape != std::vector<std::uint32_t>{L.out})
                throw ShapeError("tensor " + p_.names[2 * i] + " has the wrong shape");
        }
    }

    void check_input(const Tensor<T>& batch) const {
        if (batch.shape.size() != 4) throw ShapeError("input must be [B, C, H, W]");
        if (batch.shape[1] != cfg_.in_channels)
            throw ShapeError("input has " + std::to_string(batch.shape[1]) + " channels, model expects " +
                             std::to_string(cfg_.in_channels));
        const std::uint32_t m = 1u << cfg_.depth;
        if (batch.shape[2] == 0 || batch.shape[3] == 0 || batch.shape[2] % m || batch.shape[3] % m)
            throw ShapeError("input height/width must be positive multiples of " + std::to_string(m));
    }

    // Layer index helpers, mirroring unet_layout order.
    std::size_t enc_layer(std::uint32_t l, int j) const { return 2 * l + j; }
    std::size_t bott_layer(int j) const { return 2 * cfg_.depth + j; }
    std::size_t dec_layer(std::uint32_t l, int j) const { return 2 * cfg_.depth + 2 + 3 * (cfg_.depth - 1 - l) + j; }
    std::size_t head_layer() const { return layers_.size() - 1; }

    void conv(std::size_t li, const std::vector<T>& in, std::uint32_t H, std::uint32_t W, std::vector<T>& out) const {
        const auto& L = layers_[li];
        out.resize(static_cast<std::size_t>(L.out) * H * W);
        conv_forward(in.data(), L.in, H, W, p_.tensors[2 * li].data(), p_.tensors[2 * li + 1].data(), L.out, L.kernel,
                     out.data());
    }

    void conv_back(std::size_t li, const std::vector<T>& in, std::uint32_t H, std::uint32_t W, const std::vector<T>& dout,
                   std::vector<T>* din, Gradients<T>& g, Workspace<T>& ws) const {
        const auto& L = layers_[li];
        if (din) din->assign(static_cast<std::size_t>(L.in) * H * W, T(0));
        conv_backward(in.data(), L.in, H, W, p_.tensors[2 * li].data(), L.out, L.kernel, dout.data(),
                      din ? din->data() : nullptr, g[2 * li].data(), g[2 * li + 1].data(), ws.row);
    }

    void forward(const T* input, std::uint32_t H, std::uint32_t W, bool training, Rng* rng, Workspace<T>& ws) const {
        const std::uint32_t D = cfg_.depth;
        ws.input.assign(input, input + static_cast<std::size_t>(cfg_.in_channels) * H * W);
        ws.enc.resize(D);
        ws.dec.resize(D);
        const std::vector<T>* x = &ws.input;
        std::uint32_t h = H, w = W;
        const bool drop = training && cfg_.dropout > 0.0f;
        const T scale = drop ? T(1) / (T(1) - static_cast<T>(cfg_.dropout)) : T(1);
        for (std::uint32_t l = 0; l < D; ++l) {
            auto& e = ws.enc[l];
            e.H = h;
            e.W = w;
            conv(enc_layer(l, 0), *x, h, w, e.a1);
            relu_inplace(e.a1);
            conv(enc_layer(l, 1), e.a1, h, w, e.a2);
            relu_inplace(e.a2);
            e.out = e.a2;
            if (drop) {
                if (!rng) throw ArgumentError("dropout in training mode needs a random stream");
                e.keep.resize(e.a2.size());
                for (std::size_t i = 0; i < e.keep.size(); ++i) {
                    e.keep[i] = rng->uniform() < cfg_.dropout ? T(0) : scale;
                    e.out[i] *= e.keep[i];
                }
            } else {
                e.keep.clear();
            }
            maxpool_forward(e.out, layers_[enc_layer(l, 1)].out, h, w, e.pooled, e.pool_idx);
            x = &e.pooled;
            h /= 2;
            w /= 2;
        }
        conv(bott_layer(0), *x, h, w, ws.b1);
        relu_inplace(ws.b1);
        conv(bott_layer(1), ws.b1, h, w, ws.b2);
        relu_inplace(ws.b2);
        const std::vector<T>* cur = &ws.b2;
        std::uint32_t cur_c = layers_[bott_layer(1)].out;
        for (std::uint32_t l = D; l-- > 0;) {
            auto& d = ws.dec[l];
            upsample_forward(*cur, cur_c, h, w, d.up);
            h *= 2;
            w *= 2;
            d.H = h;
            d.W = w;
            conv(dec_layer(l, 0), d.up, h, w, d.u);
            relu_inplace(d.u);
            const auto& skip = ws.enc[l].out;
            d.cat.resize(skip.size() + d.u.size());
            std::copy(skip.begin(), skip.end(), d.cat.begin());
            std::copy(d.u.begin(), d.u.end(), d.cat.begin() + static_cast<std::ptrdiff_t>(skip.size()));
            conv(dec_layer(l, 1), d.cat, h, w, d.d1);
            relu_inplace(d.d1);
            conv(dec_layer(l, 2), d.d1, h, w, d.d2);
            relu_inplace(d.d2);
            cur = &d.d2;
            cur_c = layers_[dec_layer(l, 2)].out;
        }
        conv(head_layer(), *cur, H, W, ws.probs);
        softmax_inplace(ws.probs, cfg_.n_classes, static_cast<std::size_t>(H) * W);
    }

    static void softmax_inplace(std::vector<T>& z, std::uint32_t C, std::size_t hw) {
        for (std::size_t i = 0; i < hw; ++i) {
            T mx = z[i];
            for (std::uint32_t c = 1; c < C; ++c) mx = std::max(mx, z[c * hw + i]);
            T sum = T(0);
            for (std::uint32_t c = 0; c < C; ++c) {
                const T e = std::exp(z[c * hw + i] - mx);
                z[c * hw + i] = e;
                sum += e;
            }
            for (std::uint32_t c = 0; c < C; ++c) z[c * hw + i] /= sum;
        }
    }

    // dprobs: d loss / d probs for this sample. Accumulates into g.
    void backward(Workspace<T>& ws, const T* dprobs, Gradients<T>& g) const {
        const std::uint32_t D = cfg_.depth;
        const std::uint32_t H = ws.enc[0].H, W = ws.enc[0].W;
        const std::size_t hw = static_cast<std::size_t>(H) * W;
        const std::uint32_t C = cfg_.n_classes;

        std::vector<T> dz(ws.probs.size());
        for (std::size_t i = 0; i < hw; ++i) {
            T dot = T(0);
            for (std::uint32_t c = 0; c < C; ++c) dot += ws.probs[c * hw + i] * dprobs[c * hw + i];
            for (std::uint32_t c = 0; c < C; ++c) dz[c * hw + i] = ws.probs[c * hw + i] * (dprobs[c * hw + i] - dot);
        }

        std::vector<T> dcur, tmp, dcat, dup;
        conv_back(head_layer(), ws.dec[0].d2, H, W, dz, &dcur, g, ws);
        std::vector<std::vector<T>> dskip(D);
        for (std::uint32_t l = 0; l < D; ++l) {
            auto& d = ws.dec[l];
            relu_backward(d.d2, dcur);
            conv_back(dec_layer(l, 2), d.d1, d.H, d.W, dcur, &tmp, g, ws);
            relu_backward(d.d1, tmp);
            conv_back(dec_layer(l, 1), d.cat, d.H, d.W, tmp, &dcat, g, ws);
            const std::size_t skip_n = ws.enc[l].out.size();
            dskip[l].assign(dcat.begin(), dcat.begin() + static_cast<std::ptrdiff_t>(skip_n));
            tmp.assign(dcat.begin() + static_cast<std::ptrdiff_t>(skip_n), dcat.end());
            relu_backward(d.u, tmp);
            conv_back(dec_layer(l, 0), d.up, d.H, d.W, tmp, &dup, g, ws);
            const std::uint32_t up_c = layers_[dec_layer(l, 0)].in;
            upsample_backward(dup, up_c, d.H / 2, d.W / 2, dcur);
        }
        // Decoder levels were revisited 0 .. D-1, the reverse of the forward
        // order; dcur now holds d loss / d b2.
        std::uint32_t h = H >> D, w = W >> D;
        relu_backward(ws.b2, dcur);
        conv_back(bott_layer(1), ws.b1, h, w, dcur, &tmp, g, ws);
        relu_backward(ws.b1, tmp);
        const std::vector<T>& bott_in = ws.enc[D - 1].pooled;
        conv_back(bott_layer(0), bott_in, h, w, tmp, &dcur, g, ws);

        for (std::uint32_t l = D; l-- > 0;) {
            auto& e = ws.enc[l];
            // dcur: gradient w.r.t. pooled output of level l.
            std::vector<T> dout = dskip[l];
            for (std::size_t i = 0; i < e.pool_idx.size(); ++i) dout[e.pool_idx[i]] += dcur[i];
            if (!e.keep.empty())
                for (std::size_t i = 0; i < dout.size(); ++i) dout[i] *= e.keep[i];
            relu_backward(e.a2, dout);
            conv_back(enc_layer(l, 1), e.a1, e.H, e.W, dout, &tmp, g, ws);
            relu_backward(e.a1, tmp);
            const std::vector<T>& in = l == 0 ? ws.input : ws.enc[l - 1].pooled;
            conv_back(enc_layer(l, 0), in, e.H, e.W, tmp, l == 0 ? nullptr : &dcur, g, ws);
        }
    }

    const ModelParams<T>& p_;
    const UNetConfig& cfg_;
    std::vector<ConvLayer> layers_;
};

template <typename T>
Gradients<T> zero_grads(const ModelParams<T>& p) {
    Gradients<T> g;
    for (const auto& t : p.tensors) g.emplace_back(t.size(), T(0));
    return g;
}

template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn fn) {
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            for (std::size_t i = t; i < n; i += threads) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

} // namespace

template <typename T>
Tensor<T> unet_forward(const ModelParams<T>& params, const Tensor<T>& batch, bool training, Rng* rng) {
    const Net<T> net(params);
    net.check_input(batch);
    const std::uint32_t B = batch.shape[0], Cin = batch.shape[1], H = batch.shape[2], W = batch.shape[3];
    const std::size_t in_n = static_cast<std::size_t>(Cin) * H * W;
    const std::size_t out_n = static_cast<std::size_t>(params.cfg.n_classes) * H * W;
    Tensor<T> probs({B, params.cfg.n_classes, H, W});
    if (training && params.cfg.dropout > 0.0f && !rng)
        throw ArgumentError("dropout in training mode needs a random stream");
    const std::uint64_t base = (training && rng) ? rng->next() : 0;
    Workspace<T> ws;
    for (std::uint32_t b = 0; b < B; ++b) {
        Rng sample_rng = Rng(base).split(static_cast<std::uint64_t>(b));
        net.forward(batch.data() + b * in_n, H, W, training, &sample_rng, ws);
        std::copy(ws.probs.begin(), ws.probs.end(), probs.data() + b * out_n);
    }
    return probs;
}

template <typename T>
BatchResult<T> loss_and_gradients(const ModelParams<T>& params, const Tensor<T>& batch, const Labels& labels,
                                  const LossConfig& loss_cfg, bool training, Rng* rng, unsigned threads) {
    loss_cfg.validate();
    const Net<T> net(params);
    net.check_input(batch);
    const std::uint32_t B = batch.shape[0], Cin = batch.shape[1], H = batch.shape[2], W = batch.shape[3];
    if (labels.batch != B || labels.height != H || labels.width != W) throw ShapeError("labels do not match batch");
    const std::size_t in_n = static_cast<std::size_t>(Cin) * H * W;
    const std::size_t out_n = static_cast<std::size_t>(params.cfg.n_classes) * H * W;

    BatchResult<T> res;
    res.probs = Tensor<T>({B, params.cfg.n_classes, H, W});
    std::vector<Workspace<T>> ws(B);
    if (training && params.cfg.dropout > 0.0f && !rng)
        throw ArgumentError("dropout in training mode needs a random stream");
    const std::uint64_t base = (training && rng) ? rng->next() : 0;
    parallel_for(B, threads, [&](std::size_t b) {
        Rng sample_rng = Rng(base).split(static_cast<std::uint64_t>(b));
        net.forward(batch.data() + b * in_n, H, W, training, &sample_rng, ws[b]);
        std::copy(ws[b].probs.begin(), ws[b].probs.end(), res.probs.data() + b * out_n);
    });
    res.counts = soft_counts(res.probs, labels);
    res.loss = focal_tversky_loss(res.counts, loss_cfg);
    const std::vector<T> dprobs = focal_tversky_grad(res.probs, labels, res.counts, loss_cfg);

    std::vector<Gradients<T>> per_sample(B);
    parallel_for(B, threads, [&](std::size_t b) {
        per_sample[b] = zero_grads(params);
        net.backward(ws[b], dprobs.data() + b * out_n, per_sample[b]);
    });
    res.grads = zero_grads(params);
    for (std::uint32_t b = 0; b < B; ++b)
        for (std::size_t t = 0; t < res.grads.size(); ++t)
            for (std::size_t i = 0; i < res.grads[t].size(); ++i) res.grads[t][i] += per_sample[b][t][i];
    return res;
}

template struct ModelParams<float>;
template struct ModelParams<double>;
template ModelParams<float> init_params<float>(const UNetConfig&, Rng&);
template ModelParams<double> init_params<double>(const UNetConfig&, Rng&);
template ModelParams<double> cast_params<double, float>(const ModelParams<float>&);
template ModelParams<float> cast_params<float, double>(const ModelParams<double>&);
template ModelParams<float> cast_params<float, float>(const ModelParams<float>&);
template Tensor<float> unet_forward<float>(const ModelParams<float>&, const Tensor<float>&, bool, Rng*);
template Tensor<double> unet_forward<double>(const ModelParams<double>&, const Tensor<double>&, bool, Rng*);
template BatchResult<float> loss_and_gradients<float>(const ModelParams<float>&, const Tensor<float>&, const Labels&,
                                                      const LossConfig&, bool, Rng*, unsigned);
template BatchResult<double> loss_and_gradients<double>(const ModelParams<double>&, const Tensor<double>&,
                                                        const Labels&, const LossConfig&, bool, Rng*, unsigned);

} // namespace sd
