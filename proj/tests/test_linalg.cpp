#include <doctest.h>

#include "dpcperm/channel.hpp"
#include "dpcperm/error.hpp"
#include "dpcperm/linalg.hpp"
#include "dpcperm/precoder.hpp"
#include "oracles.hpp"

using namespace dpcperm;

namespace {

ChannelMatrix random_channel(std::size_t n, std::mt19937_64& g) { return ChannelMatrix(oracle::random_gaussian(n, g)); }

CMatrix real_matrix(std::initializer_list<std::initializer_list<double>> rows) {
    CMatrix m(rows.size(), rows.begin()->size());
    std::size_t r = 0;
    for (const auto& row : rows) {
        std::size_t c = 0;
        for (double v : row) m(r, c++) = v;
        ++r;
    }
    return m;
}

Permutation perm1(std::initializer_list<std::size_t> one_based) {
    std::vector<std::size_t> v(one_based);
    return Permutation::from_one_based(v);
}

void check_lq_contract(const ChannelMatrix& h, const LqFactors& f, double tol) {
    const std::size_t n = h.n();
    CHECK(oracle::rel(oracle::matmul(f.l, f.q), h.matrix()) <= tol);
    CHECK(oracle::fro(oracle::matmul(f.q, f.q.adjoint()) - CMatrix::identity(n)) <= tol * n);
    for (std::size_t i = 0; i < n; ++i) {
        CHECK(f.l(i, i).imag() == 0.0);
        CHECK(f.l(i, i).real() >= 0.0);
        for (std::size_t j = i + 1; j < n; ++j) CHECK(f.l(i, j) == cplx(0.0));
    }
}

void check_svd_contract(const ChannelMatrix& h, const SvdFactors& f, double tol) {
    const std::size_t n = h.n();
    const CMatrix rec = oracle::matmul(oracle::matmul(f.u, CMatrix::diagonal(std::span<const double>(f.sigma))),
                                       f.v.adjoint());
    CHECK(oracle::rel(rec, h.matrix()) <= tol);
    CHECK(oracle::fro(oracle::matmul(f.u, f.u.adjoint()) - CMatrix::identity(n)) <= tol * n);
    CHECK(oracle::fro(oracle::matmul(f.v, f.v.adjoint()) - CMatrix::identity(n)) <= tol * n);
    for (std::size_t i = 0; i < n; ++i) {
        CHECK(f.sigma[i] >= 0.0);
        if (i + 1 < n) CHECK(f.sigma[i] >= f.sigma[i + 1]);
    }
}

}  // namespace

TEST_SUITE("linalg") {

TEST_CASE("channel matrix rejects non-square, empty and non-finite input") {
    CHECK_THROWS_AS(ChannelMatrix(CMatrix(2, 3)), Error);
    CHECK_THROWS_AS(ChannelMatrix{CMatrix{}}, Error);
    CMatrix bad = CMatrix::identity(2);
    bad(1, 0) = std::numeric_limits<double>::quiet_NaN();
    try {
        ChannelMatrix{bad};
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidArgument);
    }
}

TEST_CASE("LQ of the identity and of a positive diagonal") {
    const LqFactors f = lq_decompose(ChannelMatrix(CMatrix::identity(2)));
    CHECK(oracle::rel(f.l, CMatrix::identity(2)) < 1e-15);
    CHECK(oracle::rel(f.q, CMatrix::identity(2)) < 1e-15);

    const LqFactors d = lq_decompose(ChannelMatrix(real_matrix({{2, 0}, {0, 3}})));
    CHECK(oracle::rel(d.l, real_matrix({{2, 0}, {0, 3}})) < 1e-15);
    CHECK(oracle::rel(d.q, CMatrix::identity(2)) < 1e-15);
    CHECK(d.diagonal_gains() == RVector{2.0, 3.0});
}

TEST_CASE("LQ of a seeded 4x4 reconstructs to 1e-12") {
    const ChannelMatrix h = generate_channel({4, 7});
    check_lq_contract(h, lq_decompose(h), 1e-12);
}

TEST_CASE("LQ fixes phases: negative and complex diagonals become positive real") {
    const ChannelMatrix h(CMatrix{{cplx(-2, 0), 0}, {cplx(1, 1), cplx(0, 3)}});
    const LqFactors f = lq_decompose(h);
    check_lq_contract(h, f, 1e-14);
    CHECK(f.l(0, 0).real() == doctest::Approx(2.0));
    CHECK(f.l(1, 1).real() == doctest::Approx(3.0));
}

TEST_CASE("LQ flags a singular channel") {
    const ChannelMatrix h(real_matrix({{1, 2}, {2, 4}}));
    try {
        (void)lq_decompose(h);
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NumericallySingular);
    }
    CHECK_THROWS_AS(lq_decompose(ChannelMatrix(CMatrix(3, 3))), Error);
}

TEST_CASE("SVD of the identity and of a positive diagonal") {
    const SvdFactors f = svd_decompose(ChannelMatrix(CMatrix::identity(3)));
    CHECK(f.sigma == RVector{1.0, 1.0, 1.0});

    const SvdFactors d = svd_decompose(ChannelMatrix(real_matrix({{3, 0}, {0, 2}})));
    CHECK(d.sigma[0] == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(d.sigma[1] == doctest::Approx(2.0).epsilon(1e-15));
    // U = V = I up to a common phase per column.
    CHECK(max_abs_off_diagonal(d.u) < 1e-15);
    CHECK(max_abs_off_diagonal(d.v) < 1e-15);
    for (std::size_t i = 0; i < 2; ++i) CHECK(std::abs(d.u(i, i) * std::conj(d.v(i, i)) - 1.0) < 1e-15);
}

TEST_CASE("SVD sorts singular values of a permuted diagonal") {
    const ChannelMatrix h(real_matrix({{1, 0, 0}, {0, 5, 0}, {0, 0, 3}}));
    const SvdFactors f = svd_decompose(h);
    CHECK(f.sigma[0] == doctest::Approx(5));
    CHECK(f.sigma[1] == doctest::Approx(3));
    CHECK(f.sigma[2] == doctest::Approx(1));
    check_svd_contract(h, f, 1e-14);
}

TEST_CASE("SVD of a seeded 5x5 reconstructs to 1e-12 and matches Eigen's singular values") {
    const ChannelMatrix h = generate_channel({5, 11});
    const SvdFactors f = svd_decompose(h);
    check_svd_contract(h, f, 1e-12);
    const RVector ref = oracle::singular_values(h.matrix());
    for (std::size_t i = 0; i < 5; ++i) CHECK(f.sigma[i] == doctest::Approx(ref[i]).epsilon(1e-12));
}

TEST_CASE("SVD of a rank-deficient matrix completes U") {
    const ChannelMatrix h(CMatrix{{1, cplx(0, 1), 0}, {2, cplx(0, 2), 0}, {0, 0, 0}});
    const SvdFactors f = svd_decompose(h);
    check_svd_contract(h, f, 1e-13);
    CHECK(f.sigma[1] < 1e-14);
    CHECK(f.sigma[2] == 0.0);
}

TEST_CASE("decompositions reconstruct 1000 random channels, n in 2..16") {
    std::mt19937_64 g(20240601);
    for (int t = 0; t < 1000; ++t) {
        const std::size_t n = 2 + static_cast<std::size_t>(t % 15);
        const ChannelMatrix h = random_channel(n, g);
        CAPTURE(t);
        check_lq_contract(h, lq_decompose(h), tol::lin);
        check_svd_contract(h, svd_decompose(h), tol::lin);
    }
}

TEST_CASE("singular values agree with Eigen on random channels up to n = 32") {
    std::mt19937_64 g(99);
    for (std::size_t n : {1, 2, 3, 7, 16, 32}) {
        const ChannelMatrix h = random_channel(n, g);
        const SvdFactors f = svd_decompose(h);
        const RVector ref = oracle::singular_values(h.matrix());
        for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(f.sigma[i] - ref[i]) <= 1e-12 * ref[0]);
        check_svd_contract(h, f, tol::lin);
    }
}

TEST_CASE("permutation validation and one-based conversion") {
    CHECK_THROWS_AS(Permutation({0, 0, 1}), Error);
    CHECK_THROWS_AS(Permutation({0, 3, 1}), Error);
    CHECK_THROWS_AS(perm1({0, 1}), Error);
    const Permutation p = perm1({3, 1, 2});
    CHECK(p.order() == std::vector<std::size_t>{2, 0, 1});
    CHECK(p.one_based() == std::vector<std::size_t>{3, 1, 2});
    CHECK(Permutation::identity(4).is_identity());
    CHECK_FALSE(p.is_identity());
}

TEST_CASE("permutation matrices") {
    CHECK(oracle::rel(permutation_matrix(perm1({1, 2, 3})), CMatrix::identity(3)) == 0.0);
    CHECK(oracle::rel(permutation_matrix(perm1({2, 1})), real_matrix({{0, 1}, {1, 0}})) == 0.0);
    std::mt19937_64 g(5);
    for (std::size_t n = 1; n <= 4; ++n) {
        const CMatrix a = oracle::random_gaussian(n, g);
        for (const auto& o : oracle::permutations(n)) {
            const Permutation p(o);
            const CMatrix gp = permutation_matrix(p);
            CHECK(oracle::rel(oracle::matmul(gp, gp.transpose()), CMatrix::identity(n)) == 0.0);
            const CMatrix moved = oracle::matmul(gp, a);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) CHECK(moved(i, j) == a(o[i], j));
            CHECK(permute_rows(a, p) == moved);
        }
    }
}

TEST_CASE("permuted SVD: identity keeps factors, diag(3,2) swapped by hand") {
    const ChannelMatrix d(real_matrix({{3, 0}, {0, 2}}));
    const SvdFactors f = svd_decompose(d);
    const SvdFactors same = permuted_svd(f, Permutation::identity(2));
    CHECK(same.u == f.u);
    CHECK(same.sigma == f.sigma);
    CHECK(same.v == f.v);

    const SvdFactors sw = permuted_svd(f, perm1({2, 1}));
    CHECK(std::abs(sw.u(0, 0)) < 1e-15);
    CHECK(std::abs(sw.u(1, 1)) < 1e-15);
    CHECK(std::abs(sw.u(0, 1)) == doctest::Approx(1.0));
    CHECK(std::abs(sw.u(1, 0)) == doctest::Approx(1.0));
    CHECK(oracle::rel(sw.reconstruct(), real_matrix({{0, 2}, {3, 0}})) < 1e-15);
    CHECK(sw.sigma == f.sigma);
    CHECK(sw.v == f.v);
}

TEST_CASE("permuted SVD yields the same W as decomposing the permuted channel") {
    const ChannelMatrix h = generate_channel({4, 3});
    const SvdFactors f = svd_decompose(h);
    REQUIRE(f.sigma[2] - f.sigma[3] > 1e-6 * f.sigma[0]);
    const EffectiveGain k({1.5, 0.7, 1.1, 2.0});
    for (const auto& o : oracle::permutations(4)) {
        const Permutation p(o);
        const PrecodingMatrix via_lemma = dpc_linear(permuted_svd(f, p), k);
        const PrecodingMatrix direct = dpc_linear(svd_decompose(ChannelMatrix(permute_rows(h.matrix(), p))), k);
        CHECK(oracle::rel(via_lemma.w, direct.w) <= 1e-10);
    }
}

TEST_CASE("row-permuting U reproduces G_p H for every permutation, n <= 5") {
    std::mt19937_64 g(17);
    for (std::size_t n = 1; n <= 5; ++n) {
        const ChannelMatrix h = random_channel(n, g);
        const SvdFactors f = svd_decompose(h);
        for (const auto& o : oracle::permutations(n)) {
            const Permutation p(o);
            const CMatrix gp = permutation_matrix(p);
            const CMatrix lhs = oracle::matmul(gp, f.reconstruct());
            const CMatrix rhs = oracle::matmul(gp, h.matrix());
            CHECK(oracle::fro(lhs - rhs) <= tol::lin * oracle::fro(h.matrix()));
            CHECK(oracle::rel(permuted_svd(f, p).u, oracle::matmul(gp, f.u)) == 0.0);
        }
    }
}

TEST_CASE("V Sigma^-1 U^H matches an independent inverse") {
    std::mt19937_64 g(4242);
    int compared = 0;
    for (int t = 0; t < 200; ++t) {
        const std::size_t n = 2 + static_cast<std::size_t>(t % 9);
        const ChannelMatrix h = random_channel(n, g);
        const SvdFactors f = svd_decompose(h);
        bool gap_ok = true;
        for (std::size_t i = 0; i + 1 < n; ++i) gap_ok = gap_ok && (f.sigma[i] - f.sigma[i + 1] >= 1e-6 * f.sigma[0]);
        if (!gap_ok) continue;
        ++compared;
        CHECK(oracle::rel(svd_inverse(f), oracle::inverse(h.matrix())) <= 1e-8);
    }
    CHECK(compared > 150);
}

TEST_CASE("diagonal permutation") {
    const EffectiveGain k({1, 2, 3});
    CHECK(diagonal_permute(k, Permutation::identity(3)) == k);

    const Permutation p = perm1({3, 1, 2});
    const CMatrix gp = permutation_matrix(p);
    const CMatrix explicit_product = oracle::matmul(oracle::matmul(gp.adjoint(), k.matrix()), gp);
    CHECK(oracle::rel(diagonal_permute(k, p).matrix(), explicit_product) == 0.0);

    for (std::size_t n = 1; n <= 4; ++n) {
        RVector base(n);
        for (std::size_t i = 0; i < n; ++i) base[i] = 1.0 + static_cast<double>(i) * 0.5;
        const EffectiveGain kn(base);
        const auto all = oracle::permutations(n);
        for (const auto& a : all) {
            const Permutation pa(a);
            CHECK(diagonal_permute(diagonal_permute(kn, pa), pa.inverse()) == kn);
            RVector sorted = diagonal_permute(kn, pa).values();
            std::sort(sorted.begin(), sorted.end());
            CHECK(sorted == base);
            for (const auto& b : all) {
                const Permutation pb(b);
                CHECK(diagonal_permute(kn, compose(pa, pb)) == diagonal_permute(diagonal_permute(kn, pb), pa));
            }
        }
    }
}

TEST_CASE("LQ is not permutation-linear") {
    const ChannelMatrix h = generate_channel({3, 21});
    CHECK_FALSE(lq_not_permutation_linear_witness(h, Permutation::identity(3)));
    CHECK(lq_not_permutation_linear_witness(h, perm1({2, 1, 3})));
    // G_p L for swapped diag(2,3) is [[0,3],[2,0]].
    CHECK(lq_not_permutation_linear_witness(ChannelMatrix(real_matrix({{2, 0}, {0, 3}})), perm1({2, 1})));
    // Explicitly: G_p L has a non-zero strictly-upper entry.
    const CMatrix gl = oracle::matmul(permutation_matrix(perm1({2, 1, 3})), lq_decompose(h).l);
    CHECK(max_abs_strictly_upper(gl) > 1e-3);
}

TEST_CASE("decomposition tallies count inside their scope and nest") {
    const ChannelMatrix h = generate_channel({3, 1});
    DecompositionTally outer;
    {
        ScopedTally s(outer);
        (void)lq_decompose(h);
        DecompositionTally inner;
        {
            ScopedTally s2(inner);
            (void)svd_decompose(h);
            (void)svd_decompose(h);
        }
        CHECK(inner.count() == 2);
        (void)svd_decompose(h);
    }
    (void)lq_decompose(h);
    CHECK(outer.count() == 4);
}

TEST_CASE("effective gain validation") {
    CHECK_THROWS_AS(EffectiveGain(RVector{}), Error);
    CHECK_THROWS_AS(EffectiveGain(RVector{1.0, -0.5}), Error);
    CHECK_THROWS_AS(EffectiveGain(RVector{1.0, std::numeric_limits<double>::infinity()}), Error);
    CHECK(EffectiveGain({1.0, 2.0}).strictly_positive());
    CHECK_FALSE(EffectiveGain({1.0, 0.0}).strictly_positive());
}

}  // TEST_SUITE
