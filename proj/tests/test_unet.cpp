#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "sd/error.hpp"
#include "sd/unet.hpp"

using namespace sd;

namespace {

UNetConfig desk() {
    UNetConfig c;
    c.in_channels = 5;
    c.base_filters = 4;
    c.kernel_size = 3;
    c.depth = 2;
    return c;
}

std::size_t conv(std::size_t in, std::size_t out, std::size_t k) { return in * out * k * k + out; }

template <typename T>
Tensor<T> random_input(Rng& rng, std::uint32_t b, std::uint32_t c, std::uint32_t h, std::uint32_t w) {
    Tensor<T> x({b, c, h, w});
    for (auto& v : x.values) v = static_cast<T>(rng.uniform());
    return x;
}

Labels random_labels(Rng& rng, std::uint32_t b, std::uint32_t h, std::uint32_t w) {
    Labels l{b, h, w, {}, {}};
    for (std::size_t i = 0; i < std::size_t{b} * h * w; ++i) {
        l.codes.push_back(static_cast<std::uint8_t>(rng.below(5)));
        l.valid.push_back(rng.uniform() < 0.9 ? 1 : 0);
    }
    return l;
}

} // namespace

TEST_CASE("desk parameter count equals the per-layer sum") {
    // encoder 5-4-4 | 4-8-8, bottleneck 8-16-16, decoders up+concat+2 convs, 1x1 head
    const std::size_t expected = conv(5, 4, 3) + conv(4, 4, 3) + conv(4, 8, 3) + conv(8, 8, 3) + conv(8, 16, 3) +
                                 conv(16, 16, 3) + conv(16, 8, 3) + conv(16, 8, 3) + conv(8, 8, 3) + conv(8, 4, 3) +
                                 conv(8, 4, 3) + conv(4, 4, 3) + conv(4, 5, 1);
    Rng rng(0);
    const auto p = init_params<float>(desk(), rng);
    CHECK(expected == 8361);
    CHECK(p.parameter_count() == expected);
    CHECK(p.names.front() == "enc0.conv1.weight");
    CHECK(p.names.back() == "head.bias");
    CHECK(p.tensors.front().shape == std::vector<std::uint32_t>{4, 5, 3, 3});
}

TEST_CASE("configuration checks") {
    UNetConfig c = desk();
    c.kernel_size = 4;
    CHECK_THROWS_AS(c.validate(), ArgumentError);
    c = desk();
    c.dropout = 1.0f;
    CHECK_THROWS_AS(c.validate(), ArgumentError);
    Rng rng(1);
    const auto p = init_params<float>(desk(), rng);
    CHECK_THROWS_AS(unet_forward(p, Tensor<float>({1, 5, 6, 8}), false), ShapeError);
    CHECK_THROWS_AS(unet_forward(p, Tensor<float>({1, 6, 8, 8}), false), ShapeError);
    c = desk();
    c.dropout = 0.2f;
    const auto pd = init_params<float>(c, rng);
    CHECK_THROWS_AS(unet_forward(pd, Tensor<float>({1, 5, 8, 8}), true), ArgumentError);
}

TEST_CASE("softmax output and determinism") {
    Rng rng(2);
    for (std::uint32_t kernel : {3u, 5u}) {
        UNetConfig c = desk();
        c.kernel_size = kernel;
        c.in_channels = 6;
        c.dropout = 0.3f;
        Rng init(kernel);
        const auto p = init_params<float>(c, init);
        const auto x = random_input<float>(rng, 2, 6, 16, 12);
        const auto y = unet_forward(p, x, false);
        REQUIRE(y.shape == std::vector<std::uint32_t>{2, 5, 16, 12});
        for (std::uint32_t b = 0; b < 2; ++b)
            for (std::size_t i = 0; i < 16 * 12; ++i) {
                double s = 0;
                for (std::uint32_t k = 0; k < 5; ++k) s += y.values[(b * 5 + k) * 192 + i];
                CHECK(std::abs(s - 1.0) <= 1e-6);
            }
        CHECK(unet_forward(p, x, false) == y);
        Rng d1(9), d2(9);
        const auto t1 = unet_forward(p, x, true, &d1);
        CHECK(unet_forward(p, x, true, &d2) == t1);
        CHECK_FALSE(t1 == y);
    }
}

TEST_CASE("gradients match central differences") {
    Rng rng(4);
    auto p = init_params<double>(desk(), rng);
    for (auto& t : p.tensors)
        if (t.shape.size() == 1)
            for (auto& v : t.values) v = rng.uniform(-0.5, 0.5);
    const auto x = random_input<double>(rng, 2, 5, 8, 8);
    const Labels l = random_labels(rng, 2, 8, 8);
    LossConfig cfg;
    cfg.alpha = 0.4;
    cfg.gamma = 1.3;
    const auto r = loss_and_gradients(p, x, l, cfg);
    const double h = 1e-5;
    double worst = 0;
    for (std::size_t k = 0; k < p.tensors.size(); ++k) {
        for (std::size_t i = 0; i < p.tensors[k].size(); i += 1 + p.tensors[k].size() / 12) {
            const double keep = p.tensors[k].values[i];
            p.tensors[k].values[i] = keep + h;
            const double up = loss_and_gradients(p, x, l, cfg).loss;
            p.tensors[k].values[i] = keep - h;
            const double down = loss_and_gradients(p, x, l, cfg).loss;
            p.tensors[k].values[i] = keep;
            const double fd = (up - down) / (2 * h), a = r.grads[k][i];
            worst = std::max(worst, std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), 1e-7}));
        }
    }
    CHECK(worst < 1e-3);
}

TEST_CASE("zero weights and zero input give finite gradients") {
    Rng rng(5);
    auto p = init_params<double>(desk(), rng);
    for (auto& t : p.tensors) std::fill(t.values.begin(), t.values.end(), 0.0);
    const auto r = loss_and_gradients(p, Tensor<double>({1, 5, 8, 8}), random_labels(rng, 1, 8, 8), LossConfig{});
    for (const auto& g : r.grads)
        for (double v : g) CHECK(std::isfinite(v));
}

TEST_CASE("duplicated batch keeps the gradient") {
    Rng rng(6);
    const auto p = init_params<double>(desk(), rng);
    const auto x = random_input<double>(rng, 1, 5, 8, 8);
    const Labels l = random_labels(rng, 1, 8, 8);
    Tensor<double> x2({2, 5, 8, 8});
    std::copy(x.values.begin(), x.values.end(), x2.values.begin());
    std::copy(x.values.begin(), x.values.end(), x2.values.begin() + x.size());
    Labels l2 = l;
    l2.batch = 2;
    l2.codes.insert(l2.codes.end(), l.codes.begin(), l.codes.end());
    l2.valid.insert(l2.valid.end(), l.valid.begin(), l.valid.end());
    LossConfig lc;
    lc.epsilon = 0.0;
    const auto a = loss_and_gradients(p, x, l, lc);
    const auto b = loss_and_gradients(p, x2, l2, lc);
    CHECK(b.loss == doctest::Approx(a.loss).epsilon(1e-12));
    for (std::size_t k = 0; k < a.grads.size(); ++k)
        for (std::size_t i = 0; i < a.grads[k].size(); ++i)
            CHECK(std::abs(a.grads[k][i] - b.grads[k][i]) <= 1e-9 * std::max(1.0, std::abs(a.grads[k][i])));
}

TEST_CASE("gradient reduction does not depend on thread count") {
    Rng rng(7);
    UNetConfig c = desk();
    c.dropout = 0.2f;
    const auto p = init_params<float>(c, rng);
    const auto x = random_input<float>(rng, 5, 5, 8, 8);
    const Labels l = random_labels(rng, 5, 8, 8);
    Rng d1(3), d2(3);
    const auto one = loss_and_gradients(p, x, l, LossConfig{}, true, &d1, 1);
    const auto three = loss_and_gradients(p, x, l, LossConfig{}, true, &d2, 3);
    CHECK(one.loss == three.loss);
    CHECK(one.grads == three.grads);
}
