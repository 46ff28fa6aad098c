#include <cmath>

#include "doctest.h"
#include "netprint/params.hpp"
#include "netprint/rng.hpp"
#include "netprint/tape.hpp"
#include "netprint/tensor.hpp"
#include "oracle.hpp"

using namespace netprint;

TEST_SUITE_BEGIN("diffcore");

TEST_CASE("seeded_init is deterministic and respects schemes") {
    const Tensor a = seeded_init({3, 4, 5}, InitScheme::UniformGlorot, 42);
    const Tensor b = seeded_init({3, 4, 5}, InitScheme::UniformGlorot, 42);
    CHECK(a.v == b.v);

    const Tensor c = seeded_init({3, 4, 5}, InitScheme::UniformGlorot, 43);
    CHECK(a.v != c.v);

    const Tensor z = seeded_init({7}, InitScheme::Zeros, 1);
    for (double x : z.v) CHECK(x == 0.0);
    const Tensor o = seeded_init({7}, InitScheme::Ones, 1);
    for (double x : o.v) CHECK(x == 1.0);

    // Glorot bound for k x Cin x Cout: sqrt(6 / (k*Cin + k*Cout)).
    const double bound = std::sqrt(6.0 / (3 * 4 + 3 * 5));
    for (double x : a.v) CHECK(std::fabs(x) <= bound);
}

TEST_CASE("conv1d identity kernel and zero input") {
    Rng rng(7);
    Tape tape;
    const int L = 6, c = 3;
    const Tensor x = oracle::random_tensor({L, c}, rng);

    Tensor ident({1, c, c});
    for (int i = 0; i < c; ++i) ident(0, i, i) = 1.0;
    const NodeId out = tape.conv1d(tape.constant(x), tape.constant(ident),
                                   tape.constant(Tensor({c})));
    CHECK(tape.value(out).v == x.v);

    Tensor bias({c});
    bias(0) = 0.5;
    bias(1) = -1.25;
    bias(2) = 2.0;
    const NodeId out2 = tape.conv1d(tape.constant(Tensor({L, c})),
                                    tape.constant(oracle::random_tensor({3, c, c}, rng)),
                                    tape.constant(bias));
    for (int p = 0; p < L; ++p)
        for (int j = 0; j < c; ++j) CHECK(tape.value(out2)(p, j) == bias(j));
}

TEST_CASE("conv1d matches the triple-loop oracle") {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const int L = 5, cin = 2, cout = 2, k = 3;
        const Tensor x = oracle::random_tensor({L, cin}, rng);
        const Tensor w = oracle::random_tensor({k, cin, cout}, rng);
        const Tensor b = oracle::random_tensor({cout}, rng);
        Tape tape;
        const Tensor got =
            tape.value(tape.conv1d(tape.constant(x), tape.constant(w), tape.constant(b)));
        const Tensor want = oracle::conv1d(x, w, b);
        for (int i = 0; i < got.size(); ++i)
            CHECK(got.v[std::size_t(i)] == doctest::Approx(want.v[std::size_t(i)]).epsilon(1e-12));
    }
}

TEST_CASE("conv1d is linear in its input") {
    Rng rng(13);
    const int L = 8, cin = 3, cout = 4, k = 5;
    const Tensor w = oracle::random_tensor({k, cin, cout}, rng);
    const Tensor zero_b({cout});
    const Tensor x = oracle::random_tensor({L, cin}, rng);
    const Tensor y = oracle::random_tensor({L, cin}, rng);
    const double a = 1.7, b = -0.4;

    Tensor combo({L, cin});
    for (int i = 0; i < combo.size(); ++i)
        combo.v[std::size_t(i)] = a * x.v[std::size_t(i)] + b * y.v[std::size_t(i)];

    Tape tape;
    const Tensor fx = tape.value(tape.conv1d(tape.constant(x), tape.constant(w), tape.constant(zero_b)));
    const Tensor fy = tape.value(tape.conv1d(tape.constant(y), tape.constant(w), tape.constant(zero_b)));
    const Tensor fc =
        tape.value(tape.conv1d(tape.constant(combo), tape.constant(w), tape.constant(zero_b)));
    for (int i = 0; i < fc.size(); ++i)
        CHECK(fc.v[std::size_t(i)] ==
              doctest::Approx(a * fx.v[std::size_t(i)] + b * fy.v[std::size_t(i)]).epsilon(1e-10));
}

TEST_CASE("conv1d_onehot equals conv1d over the materialised one-hot matrix") {
    Rng rng(17);
    const int L = 12, cin = 9, cout = 5, k = 5;
    const Tensor w = oracle::random_tensor({k, cin, cout}, rng);
    const Tensor b = oracle::random_tensor({cout}, rng);
    std::vector<int> rows(L);
    for (auto& r : rows) r = rng.below_int(cin);

    Tensor onehot({L, cin});
    for (int p = 0; p < L; ++p) onehot(p, rows[std::size_t(p)]) = 1.0;

    Tape tape;
    const Tensor dense_out =
        tape.value(tape.conv1d(tape.constant(onehot), tape.constant(w), tape.constant(b)));
    const Tensor sparse_out =
        tape.value(tape.conv1d_onehot(rows, tape.constant(w), tape.constant(b)));
    CHECK(dense_out.v == sparse_out.v);  // bit-identical, not approximately equal
}

TEST_CASE("pointwise activations") {
    Tape tape;
    Tensor x({3});
    x(0) = 0.0;
    x(1) = 40.0;
    x(2) = -40.0;
    const Tensor s = tape.value(tape.sigmoid(tape.constant(x)));
    CHECK(s(0) == 0.5);
    CHECK(s(1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s(2) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    CHECK(std::isfinite(s(1)));
    CHECK(std::isfinite(s(2)));

    const Tensor t = tape.value(tape.tanh(tape.constant(x)));
    CHECK(t(0) == 0.0);
    CHECK(std::fabs(t(1)) <= 1.0);  // saturates to exactly 1.0 in doubles
    CHECK(std::fabs(t(2)) <= 1.0);
    Tensor mid({1});
    mid(0) = 3.0;
    CHECK(tape.value(tape.tanh(tape.constant(mid)))(0) < 1.0);
}

TEST_CASE("dense, mean_pool and mse match their oracles") {
    Rng rng(19);
    const int n = 6, m = 4;
    const Tensor x = oracle::random_tensor({n}, rng);
    const Tensor w = oracle::random_tensor({n, m}, rng);
    const Tensor b = oracle::random_tensor({m}, rng);

    Tape tape;
    const Tensor got =
        tape.value(tape.dense(tape.constant(x), tape.constant(w), tape.constant(b)));
    const Tensor want = oracle::dense(x, w, b);
    for (int i = 0; i < m; ++i)
        CHECK(got(i) == doctest::Approx(want(i)).epsilon(1e-12));

    Tensor ident({n, n});
    for (int i = 0; i < n; ++i) ident(i, i) = 1.0;
    const Tensor same =
        tape.value(tape.dense(tape.constant(x), tape.constant(ident), tape.constant(Tensor({n}))));
    CHECK(same.v == x.v);

    const Tensor m2 = oracle::random_tensor({5, 3}, rng);
    const Tensor pooled = tape.value(tape.mean_pool(tape.constant(m2)));
    const Tensor pooled_want = oracle::mean_pool(m2);
    for (int i = 0; i < 3; ++i)
        CHECK(pooled(i) == doctest::Approx(pooled_want(i)).epsilon(1e-12));

    Tensor rows_const({4, 3});
    for (int p = 0; p < 4; ++p)
        for (int j = 0; j < 3; ++j) rows_const(p, j) = 2.5 - j;
    const Tensor pooled_const = tape.value(tape.mean_pool(tape.constant(rows_const)));
    for (int j = 0; j < 3; ++j) CHECK(pooled_const(j) == doctest::Approx(2.5 - j));

    const Tensor a1 = oracle::random_tensor({4, 4}, rng);
    const Tensor a2 = oracle::random_tensor({4, 4}, rng);
    CHECK(tape.scalar(tape.mse(tape.constant(a1), tape.constant(a2))) ==
          doctest::Approx(oracle::mse(a1, a2)).epsilon(1e-12));
    CHECK(tape.scalar(tape.mse(tape.constant(a1), tape.constant(a1))) == 0.0);

    Tensor ones({2, 2});
    for (auto& v : ones.v) v = 1.0;
    CHECK(tape.scalar(tape.mse(tape.constant(ones), tape.constant(Tensor({2, 2})))) == 1.0);
}

TEST_CASE("hadamard basics") {
    Rng rng(23);
    const Tensor a = oracle::random_tensor({4, 3}, rng);
    Tensor ones({4, 3});
    for (auto& v : ones.v) v = 1.0;

    Tape tape;
    CHECK(tape.value(tape.hadamard(tape.constant(a), tape.constant(ones))).v == a.v);
    const Tensor z = tape.value(tape.hadamard(tape.constant(a), tape.constant(Tensor({4, 3}))));
    for (double v : z.v) CHECK(v == 0.0);

    const Tensor b = oracle::random_tensor({4, 3}, rng);
    const Tensor ab = tape.value(tape.hadamard(tape.constant(a), tape.constant(b)));
    const Tensor ba = tape.value(tape.hadamard(tape.constant(b), tape.constant(a)));
    CHECK(ab.v == ba.v);
}

TEST_CASE("backward: analytic gradients of simple graphs") {
    Rng rng(29);
    ParamStore ps;
    ps.add("p", oracle::random_tensor({5}, rng));

    // loss = sum p^2 = ||p - 0||^2  =>  grad = 2p
    Tape tape;
    const NodeId p = tape.param(ps, "p");
    const NodeId loss = tape.sqdist(p, tape.constant(Tensor({5})));
    tape.backward(loss);
    const Tensor g = tape.grad(p);
    for (int i = 0; i < 5; ++i)
        CHECK(g(i) == doctest::Approx(2.0 * ps.at("p")(i)).epsilon(1e-12));

    // parameter off the path gets a zero gradient
    ParamStore ps2;
    ps2.add("used", Tensor::scalar(3.0));
    ps2.add("unused", Tensor::scalar(4.0));
    Tape tape3;
    const NodeId used = tape3.param(ps2, "used");
    tape3.param(ps2, "unused");
    const NodeId loss3 = tape3.sqdist(used, tape3.constant(Tensor::scalar(0.0)));
    tape3.backward(loss3);
    GradMap grads = tape3.param_grads();
    CHECK(grads.at("used").v[0] == doctest::Approx(6.0));
    CHECK(grads.at("unused").v[0] == 0.0);
}

TEST_CASE("grad_check: quadratic, deep sigmoid chain, planted fault") {
    Rng rng(31);
    ParamStore ps;
    ps.add("q", oracle::random_tensor({8}, rng));

    const ScalarGraph quadratic = [](ParamStore& params, GradMap* grads) {
        Tape tape;
        const NodeId q = tape.param(params, "q");
        const NodeId loss = tape.sqdist(q, tape.constant(Tensor({8})));
        if (grads) {
            tape.backward(loss);
            *grads = tape.param_grads();
        }
        return tape.scalar(loss);
    };
    const GradCheckReport quad_report = grad_check(quadratic, ps, 1e-5, 200, 7);
    CHECK(quad_report.elements_checked == 8);
    CHECK(quad_report.max_rel_error <= 1e-9);

    ParamStore chain;
    Rng rng2(37);
    for (int d = 0; d < 5; ++d)
        chain.add("w" + std::to_string(d), oracle::random_tensor({4, 4}, rng2));
    chain.add("x0", oracle::random_tensor({4}, rng2));

    const ScalarGraph deep = [](ParamStore& params, GradMap* grads) {
        Tape tape;
        NodeId x = tape.param(params, "x0");
        const NodeId zero_b = tape.constant(Tensor({4}));
        for (int d = 0; d < 5; ++d)
            x = tape.sigmoid(tape.dense(x, tape.param(params, "w" + std::to_string(d)), zero_b));
        const NodeId loss = tape.sqdist(x, tape.constant(Tensor({4})));
        if (grads) {
            tape.backward(loss);
            *grads = tape.param_grads();
        }
        return tape.scalar(loss);
    };
    const GradCheckReport deep_report = grad_check(deep, chain, 1e-5, 200, 11);
    CHECK(deep_report.elements_checked == 84);
    CHECK(deep_report.max_rel_error <= 1e-6);

    // A 1% corruption of every tape gradient must be detected.
    const ScalarGraph corrupted = [&deep](ParamStore& params, GradMap* grads) {
        const double loss = deep(params, grads);
        if (grads)
            for (auto& [name, g] : *grads)
                for (auto& x : g.v) x *= 1.01;
        return loss;
    };
    const GradCheckReport bad_report = grad_check(corrupted, chain, 1e-5, 200, 11);
    CHECK(bad_report.max_rel_error >= 9e-3);
    CHECK(!bad_report.passed(1e-4));
}

TEST_CASE("adam_step behaviour") {
    // zero gradient leaves parameters untouched
    ParamStore ps;
    ps.add("p", Tensor::from_values({3}, {1.0, -2.0, 3.0}));
    GradMap zero;
    zero.emplace("p", Tensor({3}));
    adam_step(ps, zero, AdamConfig{});
    CHECK(ps.at("p").v == std::vector<double>{1.0, -2.0, 3.0});

    // first bias-corrected step moves by ~lr * sign(g)
    ParamStore ps2;
    ps2.add("p", Tensor::from_values({2}, {0.0, 0.0}));
    GradMap g;
    g.emplace("p", Tensor::from_values({2}, {3.0, -0.25}));
    AdamConfig cfg;
    cfg.lr = 0.05;
    adam_step(ps2, g, cfg);
    CHECK(ps2.at("p")(0) == doctest::Approx(-0.05).epsilon(1e-6));
    CHECK(ps2.at("p")(1) == doctest::Approx(0.05).epsilon(1e-6));

    // 200 steps on ||p||^2 shrink the norm by at least 10x
    ParamStore ps3;
    Rng rng(41);
    ps3.add("p", oracle::random_tensor({6}, rng, 0.5, 1.5));
    double initial_norm = 0.0;
    for (double x : ps3.at("p").v) initial_norm += x * x;
    AdamConfig cfg3;
    cfg3.lr = 0.05;
    for (int step = 0; step < 200; ++step) {
        Tape tape;
        const NodeId p = tape.param(ps3, "p");
        const NodeId loss = tape.sqdist(p, tape.constant(Tensor({6})));
        tape.backward(loss);
        adam_step(ps3, tape.param_grads(), cfg3);
    }
    double final_norm = 0.0;
    for (double x : ps3.at("p").v) final_norm += x * x;
    CHECK(std::sqrt(final_norm) * 10.0 <= std::sqrt(initial_norm));
}

TEST_CASE("training-loop determinism is bit-exact") {
    auto run = [] {
        ParamStore ps;
        Rng rng(43);
        ps.add("w", oracle::random_tensor({4, 4}, rng));
        ps.add("b", Tensor({4}));
        AdamConfig cfg;
        for (int step = 0; step < 50; ++step) {
            Rng data_rng(Rng::derive(43, std::uint64_t(step)));
            const Tensor x = oracle::random_tensor({4}, data_rng);
            Tape tape;
            const NodeId y = tape.dense(tape.constant(x), tape.param(ps, "w"), tape.param(ps, "b"));
            const NodeId loss = tape.sqdist(y, tape.constant(Tensor({4})));
            tape.backward(loss);
            adam_step(ps, tape.param_grads(), cfg);
        }
        return ps;
    };
    const ParamStore a = run();
    const ParamStore b = run();
    CHECK(a.bit_identical(b));
}

TEST_CASE("shape mismatches raise contract violations") {
    Tape tape;
    const NodeId a = tape.constant(Tensor({2, 3}));
    const NodeId b = tape.constant(Tensor({3, 2}));
    CHECK_THROWS_AS(tape.hadamard(a, b), ContractViolation);
    CHECK_THROWS_AS(tape.add(a, b), ContractViolation);
    CHECK_THROWS_AS(tape.mse(a, b), ContractViolation);
    CHECK_THROWS_AS(tape.backward(a), ContractViolation);  // non-scalar loss

    const NodeId w_even = tape.constant(Tensor({2, 3, 4}));
    CHECK_THROWS_AS(tape.conv1d(a, w_even, tape.constant(Tensor({4}))), ContractViolation);
}

TEST_SUITE_END();
