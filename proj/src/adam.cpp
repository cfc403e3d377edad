#include "sd/adam.hpp"

#include <cmath>

#include "sd/error.hpp"

namespace sd {

template <typename T>
void adam_step(ModelParams<T>& params, const Gradients<T>& grads, std::uint64_t t, const AdamConfig& cfg) {
    if (t < 1) throw ArgumentError("Adam step index must be >= 1");
    if (!(cfg.learning_rate > 0.0)) throw ArgumentError("learning rate must be > 0");
    if (grads.size() != params.tensors.size()) throw ShapeError("gradient list does not match parameters");
    for (std::size_t k = 0; k < grads.size(); ++k) {
        if (grads[k].size() != params.tensors[k].size()) throw ShapeError("gradient size mismatch for " + params.names[k]);
        for (T g : grads[k]) {
            if (!std::isfinite(static_cast<double>(g)))
                throw TrainingError("non-finite gradient in tensor " + params.names[k]);
        }
    }
    auto& st = params.adam;
    if (st.m.size() != params.tensors.size()) {
        st.m.clear();
        st.v.clear();
        for (const auto& tensor : params.tensors) {
            st.m.emplace_back(tensor.size(), T(0));
            st.v.emplace_back(tensor.size(), T(0));
        }
    }
    const T b1 = static_cast<T>(cfg.beta1), b2 = static_cast<T>(cfg.beta2);
    const T c1 = static_cast<T>(1.0 / (1.0 - std::pow(cfg.beta1, static_cast<double>(t))));
    const T c2 = static_cast<T>(1.0 / (1.0 - std::pow(cfg.beta2, static_cast<double>(t))));
    const T lr = static_cast<T>(cfg.learning_rate), eps = static_cast<T>(cfg.eps);
    for (std::size_t k = 0; k < grads.size(); ++k) {
        T* w = params.tensors[k].data();
        T* m = st.m[k].data();
        T* v = st.v[k].data();
        const T* g = grads[k].data();
        for (std::size_t i = 0; i < grads[k].size(); ++i) {
            m[i] = b1 * m[i] + (T(1) - b1) * g[i];
            v[i] = b2 * v[i] + (T(1) - b2) * g[i] * g[i];
            const T mhat = m[i] * c1;
            const T vhat = v[i] * c2;
            w[i] -= lr * mhat / (std::sqrt(vhat) + eps);
        }
    }
    st.step = t;
}

template void adam_step<float>(ModelParams<float>&, const Gradients<float>&, std::uint64_t, const AdamConfig&);
template void adam_step<double>(ModelParams<double>&, const Gradients<double>&, std::uint64_t, const AdamConfig&);

} // namespace sd
