#include <doctest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include "common/matrix_oracle.hpp"
#include "flagctl/errors.hpp"
#include "flagctl/lie_structure.hpp"
#include "flagctl/rng.hpp"

using namespace flagctl;
using namespace flagctl::lie;

TEST_CASE("root enumeration") {
    CHECK(simple_roots(2).size() == 1);
    CHECK(positive_roots(2).size() == 1);
    CHECK(simple_roots(3).size() == 2);
    CHECK(positive_roots(3).size() == 3);
    CHECK(simple_roots(4).size() == 3);
    CHECK(positive_roots(4).size() == 6);
    for (const auto& r : positive_roots(4)) CHECK(r.i < r.j);
}

TEST_CASE("root evaluation") {
    const CartanElement h2({1.0, -1.0});
    CHECK(eval_root(simple_roots(2)[0], h2) == doctest::Approx(2.0));

    const CartanElement zero({0.0, 0.0, 0.0});
    for (const auto& r : positive_roots(3)) CHECK(eval_root(r, zero) == 0.0);

    const CartanElement h3({2.0, 0.0, -2.0});
    CHECK(eval_root(Root{0, 2}, h3) == doctest::Approx(4.0));
}

TEST_CASE("CartanElement validation") {
    CHECK_THROWS_AS(CartanElement({1.0, 1.0}), Error); // trace 2
    CHECK(CartanElement({2.0, 1.0, -3.0}).in_closed_chamber());
    CHECK_FALSE(CartanElement({1.0, 2.0, -3.0}).in_closed_chamber());
}

TEST_CASE("flag type of a Cartan element") {
    CHECK(flag_type_of(CartanElement({2.0, 1.0, -3.0})) == weyl::ThetaSet{});
    CHECK(flag_type_of(CartanElement({1.0, 1.0, -2.0})) == weyl::ThetaSet{1});
    CHECK(flag_type_of(CartanElement({0.0, 0.0, 0.0})) == weyl::ThetaSet::full(3));
    CHECK_THROWS_AS(flag_type_of(CartanElement({-1.0, 1.0})), Error); // chamber
}

TEST_CASE("split decomposition basics") {
    SUBCASE("already diagonal descending") {
        Eigen::MatrixXd x = Eigen::MatrixXd::Zero(3, 3);
        x.diagonal() << 2.0, 0.0, -2.0;
        const auto d = split_decompose(x);
        CHECK((d.g - Eigen::MatrixXd::Identity(3, 3)).norm() < 1e-12);
        CHECK(d.h.diag()[0] == doctest::Approx(2.0));
        CHECK(d.h.diag()[2] == doctest::Approx(-2.0));
        CHECK(d.regular);
    }

    SUBCASE("rotation generator is not split") {
        Eigen::MatrixXd x(2, 2);
        x << 0.0, -1.0, 1.0, 0.0;
        CHECK_THROWS_AS(split_decompose(x), Error);
        try {
            split_decompose(x);
        } catch (const Error& e) {
            CHECK(e.code() == Error::Code::not_split);
        }
    }

    SUBCASE("nilpotent Jordan block is rejected") {
        Eigen::MatrixXd x(2, 2);
        x << 0.0, 1.0, 0.0, 0.0;
        CHECK_THROWS_AS(split_decompose(x), Error);
    }

    SUBCASE("non-symmetric split matrix") {
        // conjugate a descending diagonal by a shear: real spectrum, g not
        // orthogonal
        Eigen::MatrixXd s(2, 2), d(2, 2);
        s << 1.0, 0.7, 0.0, 1.0;
        d << 1.5, 0.0, 0.0, -1.5;
        const Eigen::MatrixXd x = s * d * s.inverse();
        const auto dec = split_decompose(x);
        CHECK(dec.regular);
        const Eigen::MatrixXd back = dec.g *
                                     Eigen::Map<const Eigen::VectorXd>(
                                         dec.h.diag().data(), 2)
                                         .asDiagonal() *
                                     dec.g.inverse();
        CHECK((back - x).norm() < 1e-9);
    }
}

TEST_CASE("split round trip on random symmetric traceless matrices") {
    rng::Stream stream(20240901);
    for (int n = 2; n <= 4; ++n) {
        for (int trial = 0; trial < 1000; ++trial) {
            const Eigen::MatrixXd x = matrix_oracle::random_symmetric_traceless(n, stream);
            const auto d = split_decompose(x);
            Eigen::VectorXd diag =
                Eigen::Map<const Eigen::VectorXd>(d.h.diag().data(), n);
            const Eigen::MatrixXd back = d.g * diag.asDiagonal() * d.g.inverse();
            CHECK((back - x).norm() <= 1e-9 * std::max(1.0, x.norm()));
            CHECK(d.h.in_closed_chamber());
            CHECK(d.g.determinant() > 0.0);
            // dichotomy between regularity and a nonempty flag type
            CHECK(d.regular == flag_type_of(d.h).empty());
        }
    }
}

TEST_CASE("fixed components of a regular diagonal element") {
    Eigen::MatrixXd x(2, 2);
    x << 1.0, 0.0, 0.0, -1.0;
    const auto d = split_decompose(x);
    const auto reps = weyl::coset_representatives(2, weyl::ThetaSet{});
    const auto comps = fixed_components(d, weyl::ThetaSet{}, reps);
    REQUIRE(comps.size() == 2); // |W / W_empty| = 2

    const flag::FlagSignature sig(2, {1});
    const flag::FlagPoint span_e1 = flag::base_point(sig);
    Eigen::MatrixXd swap(2, 2);
    swap << 0.0, 1.0, 1.0, 0.0;
    const flag::FlagPoint span_e2(flag::orthonormal_frame(swap), sig);

    CHECK(comps[0].weyl_label.is_identity());
    CHECK(flag::distance(comps[0].point, span_e1) < 1e-12);
    CHECK(comps[1].weyl_label == weyl::longest_element(2));
    CHECK(flag::distance(comps[1].point, span_e2) < 1e-12);
    for (const auto& c : comps) CHECK(c.dimension == 0);

    // representative list inconsistent with Theta(H): duplicate coset
    CHECK_THROWS_AS(
        fixed_components(d, weyl::ThetaSet{},
                         {weyl::WeylElement::identity(2), weyl::WeylElement::identity(2)}),
        Error);
}

TEST_CASE("fixed components: projective plane axes") {
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(3, 3);
    x.diagonal() << 2.0, 0.0, -2.0;
    const auto d = split_decompose(x);
    const weyl::ThetaSet theta{2}; // lines in R^3
    const auto reps = weyl::coset_representatives(3, theta);
    const auto comps = fixed_components(d, theta, reps);
    REQUIRE(comps.size() == 3);
    const flag::FlagSignature sig = flag::FlagSignature::from_theta(3, theta);
    for (int axis = 0; axis < 3; ++axis) {
        // component points are exactly the coordinate axis lines
        bool found = false;
        for (const auto& c : comps) {
            Eigen::MatrixXd p = c.point.projector(0);
            Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(3, 3);
            expected(axis, axis) = 1.0;
            if ((p - expected).norm() < 1e-9) found = true;
        }
        CHECK(found);
    }
    CHECK(sig.dims() == std::vector<int>{1});
}

TEST_CASE("fixed components of a non-regular element") {
    const SplitDecomposition d{Eigen::MatrixXd::Identity(3, 3),
                               CartanElement({1.0, 1.0, -2.0}), false};
    const weyl::ThetaSet theta{}; // full flags
    const auto blocks = weyl::double_cosets(3, weyl::ThetaSet{1}, theta);
    std::vector<weyl::WeylElement> reps;
    for (const auto& b : blocks) reps.push_back(b.front());
    const auto comps = fixed_components(d, theta, reps);
    REQUIRE(comps.size() == 3);

    for (const auto& c : comps) CHECK(c.dimension == 1);

    // the identity component holds every full flag refining the top
    // eigenplane: rotate e1 inside span{e1,e2}
    const auto* id_comp = &comps[0];
    REQUIRE(id_comp->weyl_label.is_identity());
    const double a = 0.6;
    Eigen::MatrixXd f(3, 3);
    f << std::cos(a), -std::sin(a), 0.0, std::sin(a), std::cos(a), 0.0, 0.0, 0.0, 1.0;
    const flag::FlagPoint rotated(f, flag::FlagSignature::from_theta(3, theta));
    CHECK(id_comp->contains(rotated, 1e-6));
    CHECK_FALSE(comps[1].contains(rotated, 1e-6));
    CHECK_FALSE(comps[2].contains(rotated, 1e-6));

    // a flag through e3 as its line belongs to a different component
    Eigen::MatrixXd g(3, 3);
    g << 0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0;
    const flag::FlagPoint through_e3(flag::orthonormal_frame(g),
                                     flag::FlagSignature::from_theta(3, theta));
    CHECK_FALSE(id_comp->contains(through_e3, 1e-6));
}

TEST_CASE("fixed components are distinct flags fixed by the flow") {
    rng::Stream stream(777);
    for (int n = 2; n <= 3; ++n) {
        for (int trial = 0; trial < 25; ++trial) {
            Eigen::MatrixXd x = matrix_oracle::random_symmetric_traceless(n, stream);
            x /= std::max(1.0, x.norm()); // keep spectra mild for t = 10
            const auto d = split_decompose(x);
            if (!d.regular) continue;
            const weyl::ThetaSet theta{};
            const auto reps = weyl::coset_representatives(n, theta);
            const auto comps = fixed_components(d, theta, reps);

            for (std::size_t i = 0; i < comps.size(); ++i)
                for (std::size_t j = i + 1; j < comps.size(); ++j)
                    CHECK(flag::distance(comps[i].point, comps[j].point) > 1e-6);

            for (const double t : {0.1, 1.0, 10.0}) {
                const Eigen::MatrixXd flow = (t * x).exp();
                for (const auto& c : comps)
                    CHECK(flag::distance(flag::act(flow, c.point), c.point) < 1e-6);
            }
        }
    }
}

TEST_CASE("fixed components are equivariant under rotations") {
    rng::Stream stream(4242);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 2 + trial % 3;
        const Eigen::MatrixXd x = matrix_oracle::random_symmetric_traceless(n, stream);
        const Eigen::MatrixXd k = matrix_oracle::random_rotation(n, stream);
        const auto d = split_decompose(x);
        if (!d.regular) continue;
        const auto d_rot = split_decompose(k * x * k.transpose());
        const weyl::ThetaSet theta{};
        const auto reps = weyl::coset_representatives(n, theta);
        const auto comps = fixed_components(d, theta, reps);
        const auto comps_rot = fixed_components(d_rot, theta, reps);
        REQUIRE(comps.size() == comps_rot.size());
        for (std::size_t i = 0; i < comps.size(); ++i)
            CHECK(flag::distance(comps_rot[i].point, flag::act(k, comps[i].point)) <
                  1e-7);
    }
}
