#include "sd/loss.hpp"

#include <cmath>

#include "sd/error.hpp"

namespace sd {

void LossConfig::validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ArgumentError("Tversky alpha must lie in [0, 1]");
    if (!(gamma >= 1.0)) throw ArgumentError("focal gamma must be >= 1");
    if (!(epsilon >= 0.0)) throw ArgumentError("Tversky epsilon must be >= 0");
}

void SoftCounts::add(const SoftCounts& o) {
    for (std::size_t k = 0; k < tp.size(); ++k) {
        tp[k] += o.tp[k];
        fp[k] += o.fp[k];
        fn[k] += o.fn[k];
    }
}

namespace {

template <typename T>
void check_shapes(const Tensor<T>& probs, const Labels& labels) {
    if (probs.shape.size() != 4 || probs.shape[0] != labels.batch || probs.shape[2] != labels.height ||
        probs.shape[3] != labels.width)
        throw ShapeError("probability tensor does not match label shape");
    const std::size_t n = static_cast<std::size_t>(labels.batch) * labels.height * labels.width;
    if (labels.codes.size() != n || labels.valid.size() != n) throw ShapeError("label buffers have wrong size");
}

} // namespace

template <typename T>
SoftCounts soft_counts(const Tensor<T>& probs, const Labels& labels) {
    check_shapes(probs, labels);
    const std::size_t C = probs.shape[1];
    const std::size_t hw = static_cast<std::size_t>(labels.height) * labels.width;
    SoftCounts sc(C);
    for (std::size_t b = 0; b < labels.batch; ++b) {
        for (std::size_t k = 0; k < C; ++k) {
            const T* p = probs.data() + (b * C + k) * hw;
            const std::uint8_t* g = labels.codes.data() + b * hw;
            const std::uint8_t* v = labels.valid.data() + b * hw;
            double tp = 0.0, psum = 0.0, gsum = 0.0;
            for (std::size_t i = 0; i < hw; ++i) {
                if (!v[i]) continue;
                const double pi = p[i];
                psum += pi;
                if (g[i] == k) {
                    tp += pi;
                    gsum += 1.0;
                }
            }
            sc.tp[k] += tp;
            sc.fp[k] += psum - tp;
            sc.fn[k] += gsum - tp;
        }
    }
    return sc;
}

double tversky_index(const SoftCounts& c, std::size_t k, double alpha, double beta, double eps) {
    const double num = c.tp[k] + eps;
    const double den = c.tp[k] + alpha * c.fp[k] + beta * c.fn[k] + eps;
    if (den <= 0.0) return 0.0;
    return num / den;
}

double focal_tversky_loss(const SoftCounts& counts, const LossConfig& cfg) {
    cfg.validate();
    const std::size_t C = counts.classes();
    if (C == 0) throw ArgumentError("focal Tversky loss needs at least one class");
    double sum = 0.0;
    for (std::size_t k = 0; k < C; ++k) {
        const double ti = tversky_index(counts, k, cfg.alpha, cfg.beta(), cfg.epsilon);
        sum += std::pow(std::max(0.0, 1.0 - ti), 1.0 / cfg.gamma);
    }
    return sum / static_cast<double>(C);
}

template <typename T>
std::vector<T> focal_tversky_grad(const Tensor<T>& probs, const Labels& labels, const SoftCounts& c,
                                  const LossConfig& cfg) {
    cfg.validate();
    check_shapes(probs, labels);
    const std::size_t C = probs.shape[1];
    const std::size_t hw = static_cast<std::size_t>(labels.height) * labels.width;
    const double alpha = cfg.alpha, beta = cfg.beta(), eps = cfg.epsilon;

    // Per class: dL/dp = dL/dTI * (g ? dTI/dTP - dTI/dFN : dTI/dFP).
    std::vector<double> grad_pos(C, 0.0), grad_neg(C, 0.0);
    for (std::size_t k = 0; k < C; ++k) {
        const double num = c.tp[k] + eps;
        const double den = c.tp[k] + alpha * c.fp[k] + beta * c.fn[k] + eps;
        if (den <= 0.0) continue;
        const double ti = num / den;
        const double one_minus = 1.0 - ti;
        if (one_minus <= 0.0) continue;
        const double dl_dti = -(1.0 / C) * (1.0 / cfg.gamma) * std::pow(one_minus, 1.0 / cfg.gamma - 1.0);
        const double d_tp = (den - num) / (den * den);
        const double d_fp = -num * alpha / (den * den);
        const double d_fn = -num * beta / (den * den);
        grad_pos[k] = dl_dti * (d_tp - d_fn);
        grad_neg[k] = dl_dti * d_fp;
    }
    std::vector<T> out(probs.size(), T(0));
    for (std::size_t b = 0; b < labels.batch; ++b) {
        const std::uint8_t* g = labels.codes.data() + b * hw;
        const std::uint8_t* v = labels.valid.data() + b * hw;
        for (std::size_t k = 0; k < C; ++k) {
            T* o = out.data() + (b * C + k) * hw;
            const T gp = static_cast<T>(grad_pos[k]), gn = static_cast<T>(grad_neg[k]);
            for (std::size_t i = 0; i < hw; ++i) {
                if (!v[i]) continue;
                o[i] = g[i] == k ? gp : gn;
            }
        }
    }
    return out;
}

template SoftCounts soft_counts<float>(const Tensor<float>&, const Labels&);
template SoftCounts soft_counts<double>(const Tensor<double>&, const Labels&);
template std::vector<float> focal_tversky_grad<float>(const Tensor<float>&, const Labels&, const SoftCounts&,
                                                      const LossConfig&);
template std::vector<double> focal_tversky_grad<double>(const Tensor<double>&, const Labels&, const SoftCounts&,
                                                        const LossConfig&);

} // namespace sd
