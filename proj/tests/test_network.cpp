#include "lnn/errors.hpp"
#include "lnn/network.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace lnn;
using namespace lnn::testing;

namespace {

Topology topo(std::size_t t, std::size_t a, std::vector<std::size_t> hidden, std::size_t n,
              Activation act = Activation::tanh) {
    Topology tp;
    tp.latent_count = t;
    tp.attribute_count = a;
    tp.hidden_sizes = std::move(hidden);
    tp.output_count = n;
    tp.hidden_activation = act;
    return tp;
}

struct Case {
    WeightSet w;
    std::vector<double> q;
    std::size_t c;
    double x;
};

Case random_case(std::mt19937_64& rng, std::size_t t, std::size_t a, std::vector<std::size_t> hidden,
                 std::size_t n) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Case k{random_network(topo(t, a, std::move(hidden), n), rng), {}, 0, 0.0};
    for (std::size_t i = 0; i < t; ++i)
        k.q.push_back(u(rng));
    for (std::size_t i = 0; i < a; ++i)
        k.q.push_back(rng() % 2 ? 1.0 : 0.0);
    k.c = rng() % n;
    k.x = 0.5 * (u(rng) + 1.0);
    return k;
}

} // namespace

TEST_CASE("assemble_input places latents first") {
    const std::vector<double> v{0.1, 0.2};
    const std::vector<double> a{1.0, 0.0, 1.0};
    CHECK(assemble_input(v, a) == std::vector<double>{0.1, 0.2, 1.0, 0.0, 1.0});
    CHECK(assemble_input(std::vector<double>{0.3}, std::vector<double>{}) == std::vector<double>{0.3});
    CHECK_THROWS_AS(assemble_input(v, a, topo(2, 2, {}, 1)), ConfigError);
}

TEST_CASE("forward_single examples") {
    SUBCASE("zero network") {
        WeightSet w(topo(3, 0, {}, 4));
        const std::vector<double> q{0.3, -0.2, 0.9};
        CHECK(forward_single(q, w, 2).prediction == 0.0);
    }
    SUBCASE("one hidden tanh unit") {
        WeightSet w(topo(1, 0, {1}, 1));
        w.hidden(0).weight(0, 0) = 1.0;
        w.output().weight(0, 0) = 2.0;
        w.output().bias(0) = 0.1;
        const std::vector<double> q{0.5};
        const double expect = 2.0 * std::tanh(0.5) + 0.1;
        CHECK(forward_single(q, w, 0).prediction == doctest::Approx(expect).epsilon(1e-15));
        CHECK(expect == doctest::Approx(1.02424).epsilon(1e-5));
    }
    SUBCASE("no hidden layer is a dot product") {
        WeightSet w(topo(2, 0, {}, 1));
        w.output().weight(0, 0) = 0.5;
        w.output().weight(0, 1) = -0.25;
        const std::vector<double> q{0.2, 0.0};
        CHECK(forward_single(q, w, 0).prediction == doctest::Approx(0.1).epsilon(1e-15));
    }
    SUBCASE("non-finite output raises") {
        WeightSet w(topo(1, 0, {}, 1));
        w.output().weight(0, 0) = std::numeric_limits<double>::infinity();
        const std::vector<double> q{1.0};
        CHECK_THROWS_AS(forward_single(q, w, 0), DivergenceError);
    }
}

TEST_CASE("forward_single agrees with dense evaluation and leaves weights alone") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 50; ++i) {
        Case k = random_case(rng, 1 + rng() % 4, rng() % 4, {1 + rng() % 5, 1 + rng() % 3}, 1 + rng() % 6);
        const WeightSet before = k.w;
        const double p1 = forward_single(k.q, k.w, k.c).prediction;
        const double p2 = forward_single(k.q, k.w, k.c).prediction;
        CHECK(p1 == p2);
        CHECK(k.w == before);
        CHECK(p1 == doctest::Approx(reference_outputs(k.q, k.w)[k.c]).epsilon(1e-12));
    }
}

TEST_CASE("error_terms examples") {
    WeightSet w(topo(1, 0, {}, 1));
    ActivationTrace tr;
    const std::vector<double> q{1.0};
    w.output().bias(0) = 0.6;
    forward_single(q, w, 0, tr);
    error_terms(1.0, tr, w);
    CHECK(tr.output_delta == doctest::Approx(0.4).epsilon(1e-15));
    error_terms(0.6, tr, w);
    CHECK(tr.output_delta == 0.0);

    std::mt19937_64 rng(2);
    Case k = random_case(rng, 2, 1, {3}, 2);
    forward_single(k.q, k.w, k.c, tr);
    error_terms(tr.output_activation, tr, k.w);
    CHECK(tr.output_delta == 0.0);
    for (double d : tr.delta[0])
        CHECK(d == 0.0);
}

TEST_CASE("weight_gradient examples") {
    WeightSet w(topo(1, 0, {}, 1));
    ActivationTrace tr;
    const std::vector<double> q{0.5};
    forward_single(q, w, 0, tr);
    error_terms(0.4, tr, w);
    const WeightGradient g = weight_gradient(tr, w);
    CHECK(g.weight(0, 0, 0) == doctest::Approx(-0.2).epsilon(1e-15));
    CHECK(g.bias(0, 0) == doctest::Approx(-0.4).epsilon(1e-15));

    error_terms(0.0, tr, w);
    const WeightGradient z = weight_gradient(tr, w);
    CHECK(z.weight(0, 0, 0) == 0.0);
}

TEST_CASE("weight gradient matches finite differences of the half squared error") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 40; ++trial) {
        std::vector<std::size_t> hidden;
        for (std::size_t l = rng() % 3; l > 0; --l)
            hidden.push_back(1 + rng() % 4);
        Case k = random_case(rng, 1 + rng() % 3, rng() % 3, hidden, 1 + rng() % 3);
        ActivationTrace tr;
        forward_single(k.q, k.w, k.c, tr);
        error_terms(k.x, tr, k.w);
        const WeightGradient g = weight_gradient(tr, k.w);
        auto f = [&] { return half_error(k.q, k.w, k.c, k.x); };
        for (std::size_t L = 0; L < k.w.layers().size(); ++L) {
            Layer& layer = k.w.layers()[L];
            for (std::size_t j = 0; j < layer.outputs(); ++j) {
                for (std::size_t i = 0; i < layer.inputs(); ++i) {
                    const double fd = central_difference(f, layer.weight(j, i));
                    CHECK(relative_error(g.weight(L, j, i), fd) <= 1e-5);
                }
                const double fdb = central_difference(f, layer.bias(j));
                CHECK(relative_error(g.bias(L, j), fdb) <= 1e-5);
            }
        }
    }
}

TEST_CASE("inactive output rows get zero gradient") {
    std::mt19937_64 rng(23);
    Case k = random_case(rng, 2, 1, {3}, 4);
    k.c = 1;
    ActivationTrace tr;
    forward_single(k.q, k.w, k.c, tr);
    error_terms(k.x, tr, k.w);
    const WeightGradient g = weight_gradient(tr, k.w);
    for (std::size_t j : {0u, 2u, 3u}) {
        for (std::size_t i = 0; i < 3; ++i)
            CHECK(g.weight(1, j, i) == 0.0);
        CHECK(g.bias(1, j) == 0.0);
    }
}

TEST_CASE("latent_gradient examples") {
    WeightSet w(topo(1, 0, {}, 1));
    w.output().weight(0, 0) = 0.5;
    ActivationTrace tr;
    const std::vector<double> q{0.0};
    forward_single(q, w, 0, tr);
    error_terms(0.2, tr, w); // delta = 0.2
    const auto h = latent_gradient(tr, w);
    REQUIRE(h.size() == 1);
    CHECK(h[0] == doctest::Approx(-0.1).epsilon(1e-15));
}

TEST_CASE("latent gradient matches finite differences and has length t") {
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 40; ++trial) {
        std::vector<std::size_t> hidden;
        for (std::size_t l = rng() % 3; l > 0; --l)
            hidden.push_back(1 + rng() % 4);
        const std::size_t t = 1 + rng() % 4;
        Case k = random_case(rng, t, rng() % 3, hidden, 1 + rng() % 3);
        ActivationTrace tr;
        forward_single(k.q, k.w, k.c, tr);
        error_terms(k.x, tr, k.w);
        const auto h = latent_gradient(tr, k.w);
        REQUIRE(h.size() == t);
        auto f = [&] { return half_error(k.q, k.w, k.c, k.x); };
        for (std::size_t i = 0; i < t; ++i)
            CHECK(relative_error(h[i], central_difference(f, k.q[i])) <= 1e-5);
    }
}

TEST_CASE("single-layer and general latent gradients agree when l = 0") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t t = 1 + rng() % 6;
        Case k = random_case(rng, t, rng() % 4, {}, 1 + rng() % 5);
        ActivationTrace tr;
        forward_single(k.q, k.w, k.c, tr);
        error_terms(k.x, tr, k.w);
        std::vector<double> a(t), b(t);
        latent_gradient_single_layer(tr, k.w, a);
        latent_gradient_multilayer(tr, k.w, b);
        for (std::size_t i = 0; i < t; ++i)
            CHECK(std::abs(a[i] - b[i]) <= 1e-12);
    }
}

TEST_CASE("apply_updates") {
    std::mt19937_64 rng(37);
    Case k = random_case(rng, 2, 1, {2}, 3);
    k.c = 0;
    ActivationTrace tr;
    forward_single(k.q, k.w, k.c, tr);
    error_terms(k.x, tr, k.w);
    const WeightGradient g = weight_gradient(tr, k.w);
    const auto h = latent_gradient(tr, k.w);
    std::vector<double> v{k.q[0], k.q[1]};

    SUBCASE("eta = 0 changes nothing") {
        WeightSet w = k.w;
        auto v2 = v;
        apply_updates(w, g, v2, h, 0.0, 0.5, true);
        CHECK(w == k.w);
        CHECK(v2 == v);
    }
    SUBCASE("latents untouched when not requested") {
        WeightSet w = k.w;
        auto v2 = v;
        apply_updates(w, g, v2, h, 0.1, 0.01, false);
        CHECK(v2 == v);
        CHECK_FALSE(w == k.w);
    }
    SUBCASE("only the active output row moves") {
        WeightSet w = k.w;
        apply_updates(w, g, v, h, 0.1, 0.01, true);
        for (std::size_t j = 1; j < 3; ++j) {
            for (std::size_t i = 0; i < 2; ++i)
                CHECK(w.output().weight(j, i) == k.w.output().weight(j, i));
            CHECK(w.output().bias(j) == k.w.output().bias(j));
        }
    }
    SUBCASE("update rule per entry") {
        WeightSet w = k.w;
        auto v2 = v;
        apply_updates(w, g, v2, h, 0.1, 0.01, true);
        for (std::size_t L = 0; L < 2; ++L) {
            const std::size_t rows = L == 0 ? 2 : 1;
            for (std::size_t j = 0; j < rows; ++j) {
                for (std::size_t i = 0; i < k.w.layers()[L].inputs(); ++i) {
                    const double w0 = k.w.layers()[L].weight(j, i);
                    CHECK(w.layers()[L].weight(j, i) ==
                          doctest::Approx(w0 - 0.1 * (g.weight(L, j, i) + 0.01 * w0)).epsilon(1e-14));
                }
                const double b0 = k.w.layers()[L].bias(j);
                CHECK(w.layers()[L].bias(j) == doctest::Approx(b0 - 0.1 * g.bias(L, j)).epsilon(1e-14));
            }
        }
        for (std::size_t i = 0; i < 2; ++i)
            CHECK(v2[i] == doctest::Approx(v[i] - 0.1 * (h[i] + 0.01 * v[i])).epsilon(1e-14));
    }
}

TEST_CASE("pure decay examples") {
    WeightSet w(topo(1, 0, {}, 1));
    w.output().weight(0, 0) = 1.0;
    w.output().bias(0) = 1.0;
    WeightGradient g;
    g.output_row = {0.0};
    g.output = 0;
    std::vector<double> v{0.0};
    std::vector<double> h{0.0};
    apply_updates(w, g, v, h, 0.1, 1.0, true);
    CHECK(w.output().weight(0, 0) == doctest::Approx(0.9).epsilon(1e-15));
    CHECK(w.output().bias(0) == 1.0);

    w.output().weight(0, 0) = 1.0;
    g.output_row = {0.2};
    apply_updates(w, g, v, h, 0.1, 0.01, true);
    CHECK(w.output().weight(0, 0) == doctest::Approx(0.979).epsilon(1e-15));
}

TEST_CASE("activation derivatives match finite differences") {
    for (Activation f : {Activation::identity, Activation::tanh, Activation::logistic}) {
        for (double x : {-2.0, -0.3, 0.0, 0.7, 1.9}) {
            double xx = x;
            auto fn = [&] { return activate(f, xx); };
            const double fd = central_difference(fn, xx);
            CHECK(activation_derivative(f, x, activate(f, x)) == doctest::Approx(fd).epsilon(1e-8));
        }
        CHECK(activation_from_string(to_string(f)) == f);
    }
    CHECK_THROWS_AS(activation_from_string("relu"), ConfigError);
}
