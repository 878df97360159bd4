#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "flagctl/errors.hpp"
#include "flagctl/setfinder.hpp"

using namespace flagctl;
using namespace flagctl::setfinder;

namespace {

dyn::BilinearSystem sl2_system(double bound) {
    Eigen::MatrixXd a(2, 2), b(2, 2);
    a << 1.0, 0.0, 0.0, -1.0;
    b << 0.0, -1.0, 1.0, 0.0;
    return dyn::BilinearSystem(a, {b}, dyn::ControlRange({-bound}, {bound}));
}

std::vector<Eigen::VectorXd> plain(const std::vector<dyn::ControlSample>& samples) {
    std::vector<Eigen::VectorXd> out;
    for (const auto& s : samples) out.push_back(s.u);
    return out;
}

double cell_angle(const flag::CellComplex& complex, int c) {
    const auto& f = complex.center(c).frame();
    double t = std::atan2(f(1, 0), f(0, 0));
    if (t < 0) t += std::numbers::pi;
    if (t >= std::numbers::pi) t -= std::numbers::pi;
    return t;
}

// angular distance on RP^1
double rp1_gap(double a, double b) {
    double d = std::abs(a - b);
    while (d > std::numbers::pi / 2) d = std::abs(d - std::numbers::pi);
    return d;
}

struct Sl2Fixture {
    dyn::BilinearSystem sys;
    std::shared_ptr<const flag::CellComplex> complex;
    std::vector<dyn::ControlSample> samples;
    CellGraph graph0;
    CellGraph graph_eps;

    explicit Sl2Fixture(double bound, int resolution = 720, double tau = 0.5)
        : sys(sl2_system(bound)),
          complex(flag::discretize(flag::FlagSignature(2, {1}), resolution, 1)),
          samples(dyn::control_samples(sys.range(), 1)),
          graph0(build_graph(sys, complex, tau, 0.0, plain(samples), 3, 1)),
          graph_eps(build_graph(sys, complex, tau, 1.5 * complex->radius(),
                                plain(samples), 3, 1)) {}
};

} // namespace

TEST_CASE("zero system: every cell self-loops only") {
    Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(2, 2);
    const dyn::BilinearSystem sys(zero, {zero}, dyn::ControlRange({-1.0}, {1.0}));
    auto complex = flag::discretize(flag::FlagSignature(2, {1}), 64, 1);
    const auto graph = build_graph(sys, complex, 0.5, 0.0, plain(dyn::control_samples(sys.range(), 1)),
                                   1, 1);
    for (int c = 0; c < graph.cells(); ++c)
        for (int k = 0; k < 3; ++k)
            CHECK(graph.targets(k, c) == std::vector<int>{c});

    // with inflation the landing cell is still present, plus neighbors only
    const auto graph_eps = build_graph(sys, complex, 0.5, 2.1 * complex->radius(),
                                       plain(dyn::control_samples(sys.range(), 1)), 1, 1);
    for (int c = 0; c < graph_eps.cells(); ++c)
        for (int k = 0; k < 3; ++k) {
            const auto& t = graph_eps.targets(k, c);
            CHECK(std::binary_search(t.begin(), t.end(), c));
            for (int target : t) {
                const auto& nb = complex->neighbors(c);
                CHECK((target == c ||
                       std::find(nb.begin(), nb.end(), target) != nb.end()));
            }
        }
}

TEST_CASE("near the attractor every control keeps the cell still") {
    // tight control range and a short step freeze the cells astride span{e1}
    const dyn::BilinearSystem sys = sl2_system(0.01);
    auto complex = flag::discretize(flag::FlagSignature(2, {1}), 720, 1);
    const auto graph = build_graph(sys, complex, 0.1, 0.0,
                                   plain(dyn::control_samples(sys.range(), 1)), 3, 1);
    for (int c : {0, 719}) {
        for (int k = 0; k < 3; ++k) {
            const auto& t = graph.targets(k, c);
            CHECK(std::binary_search(t.begin(), t.end(), c));
        }
    }
}

TEST_CASE("edge count grows with epsilon") {
    const dyn::BilinearSystem sys = sl2_system(0.3);
    auto complex = flag::discretize(flag::FlagSignature(2, {1}), 180, 1);
    const auto controls = plain(dyn::control_samples(sys.range(), 1));
    std::size_t previous = 0;
    for (double factor : {0.0, 1.0, 1.5, 3.0}) {
        const auto graph = build_graph(sys, complex, 0.5, factor * complex->radius(),
                                       controls, 2, 1);
        CHECK(graph.edge_count() >= previous);
        previous = graph.edge_count();
    }
}

TEST_CASE("graph construction is deterministic across worker counts") {
    const dyn::BilinearSystem sys = sl2_system(0.3);
    auto complex = flag::discretize(flag::FlagSignature(2, {1}), 90, 1);
    const auto controls = plain(dyn::control_samples(sys.range(), 1));
    const auto g1 = build_graph(sys, complex, 0.5, complex->radius(), controls, 3, 7, 1);
    const auto g2 = build_graph(sys, complex, 0.5, complex->radius(), controls, 3, 7, 2);
    REQUIRE(g1.cells() == g2.cells());
    for (int k = 0; k < 3; ++k)
        for (int c = 0; c < g1.cells(); ++c)
            CHECK(g1.targets(k, c) == g2.targets(k, c));
}

TEST_CASE("hyperbolic scenario: two control and two chain sets") {
    const Sl2Fixture fx(0.3);
    auto controls = control_sets(fx.graph0);
    REQUIRE(controls.size() == 2);
    auto chains = chain_control_sets(fx.graph_eps);
    REQUIRE(chains.size() == 2);

    // sets straddle the eigendirections
    const double band = std::asin(0.3) / 2;
    for (auto* sets : {&controls, &chains}) {
        bool near_e1 = false, near_e2 = false;
        for (const auto& s : *sets) {
            for (int c : s.cells) {
                const double t = cell_angle(fx.complex ? *fx.complex : *fx.complex, c);
                CHECK((rp1_gap(t, 0.0) < band + 3 * fx.complex->radius() ||
                       rp1_gap(t, std::numbers::pi / 2) < band + 3 * fx.complex->radius()));
            }
            if (s.contains_cell(fx.complex->locate(flag::base_point(flag::FlagSignature(2, {1})))))
                near_e1 = true;
            Eigen::MatrixXd swap(2, 2);
            swap << 0.0, -1.0, 1.0, 0.0;
            if (s.contains_cell(fx.complex->locate(
                    flag::FlagPoint(flag::orthonormal_frame(swap), flag::FlagSignature(2, {1})))))
                near_e2 = true;
        }
        CHECK(near_e1);
        CHECK(near_e2);
    }

    // chain sets are pairwise disjoint and each contains one control set
    std::set<int> seen;
    for (const auto& e : chains)
        for (int c : e.cells) CHECK(seen.insert(c).second);
    for (const auto& d : controls) {
        int containing = 0;
        for (const auto& e : chains)
            if (std::includes(e.cells.begin(), e.cells.end(), d.cells.begin(),
                              d.cells.end()))
                ++containing;
        CHECK(containing == 1);
    }
}

TEST_CASE("large control range: everything is one set") {
    const Sl2Fixture fx(2.0);
    const auto controls = control_sets(fx.graph0);
    REQUIRE(controls.size() == 1);
    CHECK(static_cast<int>(controls[0].cells.size()) == fx.complex->size());
    const auto chains = chain_control_sets(fx.graph_eps);
    REQUIRE(chains.size() == 1);
    CHECK(static_cast<int>(chains[0].cells.size()) == fx.complex->size());
}

TEST_CASE("pure rotation: periodic orbit keeps one control set") {
    Eigen::MatrixXd rot(2, 2);
    rot << 0.0, -1.0, 1.0, 0.0;
    const dyn::BilinearSystem sys(rot, {rot}, dyn::ControlRange({-0.01}, {0.01}));
    auto complex = flag::discretize(flag::FlagSignature(2, {1}), 720, 1);
    const auto graph = build_graph(sys, complex, 0.5, 0.0,
                                   plain(dyn::control_samples(sys.range(), 1)), 2, 1);
    const auto sets = control_sets(graph);
    REQUIRE(sets.size() == 1);
    CHECK(static_cast<int>(sets[0].cells.size()) == complex->size());
}

TEST_CASE("core points") {
    SUBCASE("hyperbolic pair on the projective line") {
        const auto sys = sl2_system(0.3);
        const auto cores = core_points(sys, weyl::ThetaSet{},
                                       dyn::control_samples(sys.range(), 1));
        REQUIRE(cores.size() == 2); // only u = 0 is interior
        CHECK(cores[0].label.is_identity());
        CHECK(cores[0].point.projector(0)(0, 0) == doctest::Approx(1.0));
        CHECK(cores[1].label == weyl::longest_element(2));
        CHECK(cores[1].point.projector(0)(1, 1) == doctest::Approx(1.0));
    }

    SUBCASE("rotation drift has no split interior control") {
        Eigen::MatrixXd rot(2, 2);
        rot << 0.0, -1.0, 1.0, 0.0;
        const dyn::BilinearSystem sys(rot, {rot}, dyn::ControlRange({-0.5}, {0.5}));
        CHECK(core_points(sys, weyl::ThetaSet{}, dyn::control_samples(sys.range(), 1))
                  .empty());
    }

    SUBCASE("coordinate axes on the projective plane") {
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 3), b = Eigen::MatrixXd::Zero(3, 3);
        a.diagonal() << 2.0, 0.0, -2.0;
        b << 0.0, -1.0, 0.0, 1.0, 0.0, -1.0, 0.0, 1.0, 0.0;
        const dyn::BilinearSystem sys(a, {b}, dyn::ControlRange({-0.3}, {0.3}));
        const auto cores = core_points(sys, weyl::ThetaSet{2},
                                       dyn::control_samples(sys.range(), 1));
        REQUIRE(cores.size() == 3);
        std::set<int> axes;
        std::set<weyl::WeylElement> labels;
        for (const auto& core : cores) {
            const Eigen::MatrixXd p = core.point.projector(0);
            for (int axis = 0; axis < 3; ++axis)
                if (p(axis, axis) > 0.999) axes.insert(axis);
            labels.insert(core.label);
        }
        CHECK(axes.size() == 3);
        CHECK(labels.size() == 3);
    }
}

TEST_CASE("labeling the hyperbolic scenario") {
    const Sl2Fixture fx(0.3);
    const auto cores = core_points(fx.sys, weyl::ThetaSet{}, fx.samples);
    const auto controls = label_sets(control_sets(fx.graph0), cores, *fx.complex);
    REQUIRE(controls.size() == 2);

    const auto e = weyl::WeylElement::identity(2);
    const auto w0 = weyl::longest_element(2);
    for (const auto& s : controls) {
        REQUIRE(s.labels.size() == 1);
        REQUIRE(s.core_cells.size() == 1);
        const double t = cell_angle(*fx.complex, s.core_cells[0]);
        if (s.has_label(e))
            CHECK(rp1_gap(t, 0.0) < 2 * fx.complex->radius());
        else if (s.has_label(w0))
            CHECK(rp1_gap(t, std::numbers::pi / 2) < 2 * fx.complex->radius());
        else
            FAIL("unexpected label");
    }

    // flag types on the maximal flag
    CHECK(semigroup_flag_type(controls, 2) == weyl::ThetaSet{});
    const auto chains = label_sets(chain_control_sets(fx.graph_eps), cores, *fx.complex);
    CHECK(semigroup_flag_type(chains, 2) == weyl::ThetaSet{});
}

TEST_CASE("labeling the large-range scenario merges the labels") {
    const Sl2Fixture fx(2.0);
    const auto cores = core_points(fx.sys, weyl::ThetaSet{}, fx.samples);
    const auto controls = label_sets(control_sets(fx.graph0), cores, *fx.complex);
    REQUIRE(controls.size() == 1);
    CHECK(controls[0].labels.size() == 2);
    CHECK(semigroup_flag_type(controls, 2) == weyl::ThetaSet::full(2));
}

TEST_CASE("labeling failures") {
    const Sl2Fixture fx(0.3, 180);
    const auto cores = core_points(fx.sys, weyl::ThetaSet{}, fx.samples);
    CHECK_THROWS_AS(label_sets({}, cores, *fx.complex), Error); // no sets at all

    // a stabilizer that is not a standard parabolic subgroup
    LabeledSet fake;
    fake.cells = {0};
    fake.kind = SetKind::control;
    fake.labels = {weyl::WeylElement::identity(3),
                   weyl::longest_element(3)}; // {e, w0} is not any W_Theta in S_3
    CHECK_THROWS_AS(semigroup_flag_type({fake}, 3), Error);
}

TEST_CASE("domains of attraction") {
    const Sl2Fixture fx(0.3);
    const auto cores = core_points(fx.sys, weyl::ThetaSet{}, fx.samples);
    const auto controls = label_sets(control_sets(fx.graph0), cores, *fx.complex);
    const auto e = weyl::WeylElement::identity(2);
    const LabeledSet* de = nullptr;
    const LabeledSet* dw0 = nullptr;
    for (const auto& s : controls) {
        if (s.has_label(e)) de = &s;
        if (s.has_label(weyl::longest_element(2))) dw0 = &s;
    }
    REQUIRE(de != nullptr);
    REQUIRE(dw0 != nullptr);

    const auto basin = domain_of_attraction(fx.graph0, *de);
    CHECK(std::includes(basin.begin(), basin.end(), de->cells.begin(),
                        de->cells.end()));
    // every line can be steered into the attracting band
    CHECK(static_cast<int>(basin.size()) == fx.complex->size());

    // the repelling band only attracts itself and a small fringe
    const auto basin_rep = domain_of_attraction(fx.graph0, *dw0);
    CHECK(basin_rep.size() < 0.25 * fx.complex->size());
    CHECK(std::includes(basin_rep.begin(), basin_rep.end(), dw0->cells.begin(),
                        dw0->cells.end()));

    // under the backward system the repeller band attracts every cell
    const auto back_graph = build_graph(fx.sys.backward(), fx.complex, 0.5, 0.0,
                                        plain(fx.samples), 3, 1);
    const auto back_sets = label_sets(control_sets(back_graph), cores, *fx.complex);
    const LabeledSet* back_inv = nullptr;
    for (const auto& s : back_sets)
        if (s.has_label(weyl::longest_element(2))) back_inv = &s;
    REQUIRE(back_inv != nullptr);
    const auto back_basin = domain_of_attraction(back_graph, *back_inv);
    CHECK(static_cast<int>(back_basin.size()) == fx.complex->size());
}

TEST_CASE("condensation sinks carry the invariant labels") {
    const Sl2Fixture fx(0.3);
    const auto cores = core_points(fx.sys, weyl::ThetaSet{}, fx.samples);
    const auto controls = label_sets(control_sets(fx.graph0), cores, *fx.complex);
    const auto sinks = condensation_sink_sets(fx.graph0, controls);
    REQUIRE(sinks.size() == 1);
    CHECK(controls[sinks[0]].has_label(weyl::WeylElement::identity(2)));

    const auto back_graph = build_graph(fx.sys.backward(), fx.complex, 0.5, 0.0,
                                        plain(fx.samples), 3, 1);
    const auto back_sets = label_sets(control_sets(back_graph), cores, *fx.complex);
    const auto back_sinks = condensation_sink_sets(back_graph, back_sets);
    REQUIRE(back_sinks.size() == 1);
    CHECK(back_sets[back_sinks[0]].has_label(weyl::longest_element(2)));
}

TEST_CASE("core cells sit in the intersection of both attraction domains") {
    const Sl2Fixture fx(0.3);
    const auto cores = core_points(fx.sys, weyl::ThetaSet{}, fx.samples);
    const auto controls = label_sets(control_sets(fx.graph0), cores, *fx.complex);
    const auto back_graph = build_graph(fx.sys.backward(), fx.complex, 0.5, 0.0,
                                        plain(fx.samples), 3, 1);
    const auto back_sets = label_sets(control_sets(back_graph), cores, *fx.complex);

    for (const auto& d : controls) {
        REQUIRE(d.labels.size() == 1);
        const auto& w = d.labels[0];
        const LabeledSet* d_star = nullptr;
        for (const auto& s : back_sets)
            if (s.has_label(w)) d_star = &s;
        REQUIRE(d_star != nullptr);

        const auto a_fwd = domain_of_attraction(fx.graph0, d);
        const auto a_bwd = domain_of_attraction(back_graph, *d_star);
        std::vector<int> intersection;
        std::set_intersection(a_fwd.begin(), a_fwd.end(), a_bwd.begin(), a_bwd.end(),
                              std::back_inserter(intersection));

        // contains the core cells and agrees with the control set up to one
        // cell of dilation on both sides
        for (int c : d.core_cells)
            CHECK(std::binary_search(intersection.begin(), intersection.end(), c));
        const auto dilated_set = fx.complex->dilate(d.cells);
        CHECK(std::includes(dilated_set.begin(), dilated_set.end(),
                            intersection.begin(), intersection.end()));
        const auto dilated_intersection = fx.complex->dilate(intersection);
        CHECK(std::includes(dilated_intersection.begin(), dilated_intersection.end(),
                            d.cells.begin(), d.cells.end()));
    }
}

TEST_CASE("chain sets are monotone in epsilon") {
    const Sl2Fixture fx(0.3, 360);
    const double eps = 1.5 * fx.complex->radius();
    const auto small_graph = build_graph(fx.sys, fx.complex, 0.5, eps,
                                         plain(fx.samples), 3, 1);
    const auto big_graph = build_graph(fx.sys, fx.complex, 0.5, 2 * eps,
                                       plain(fx.samples), 3, 1);
    const auto small_sets = chain_control_sets(small_graph);
    const auto big_sets = chain_control_sets(big_graph);
    for (const auto& s : small_sets) {
        int containers = 0;
        for (const auto& b : big_sets)
            if (std::includes(b.cells.begin(), b.cells.end(), s.cells.begin(),
                              s.cells.end()))
                ++containers;
        CHECK(containers == 1);
    }
}

TEST_CASE("degenerate one-point flag keeps its single trivial set") {
    const auto sys = sl2_system(0.3);
    auto complex = flag::discretize(
        flag::FlagSignature::from_theta(2, weyl::ThetaSet::full(2)), 16, 1);
    REQUIRE(complex->size() == 1);
    const auto graph = build_graph(sys, complex, 0.5, 0.0,
                                   plain(dyn::control_samples(sys.range(), 1)), 1, 1);
    const auto sets = control_sets(graph);
    REQUIRE(sets.size() == 1);
    CHECK(sets[0].cells == std::vector<int>{0});
}

TEST_CASE("exhaustion formulas on the hyperbolic scenario") {
    const auto sys = sl2_system(0.3);
    auto complex = flag::discretize(flag::FlagSignature(2, {1}), 720, 1);
    std::map<int, std::shared_ptr<const flag::CellComplex>> fibers;
    fibers[1] = flag::discretize(
        flag::FlagSignature::from_theta(2, weyl::ThetaSet{1}), 16, 1);

    ExhaustionParams params;
    params.tau = 0.5;
    params.controls = dyn::control_samples(sys.range(), 1);
    params.samples_per_cell = 3;
    params.seed = 1;

    SUBCASE("w = identity") {
        const auto report = check_exhaustion_formulas(
            sys, complex, fibers, weyl::WeylElement::identity(2), params);
        CHECK(report.domain_word == std::vector<int>{1});
        CHECK_FALSE(report.domain_degenerate);
        CHECK(report.domain_symmetric_difference == 0);
        CHECK(report.domain_within_band);
        CHECK(report.attraction_violations == 0);
    }

    SUBCASE("w = w0 degenerates on the domain side") {
        const auto report = check_exhaustion_formulas(sys, complex, fibers,
                                                      weyl::longest_element(2), params);
        CHECK(report.domain_degenerate);
        CHECK(report.attraction_violations == 0);
    }

    SUBCASE("missing fiber complex is a configuration error") {
        std::map<int, std::shared_ptr<const flag::CellComplex>> none;
        CHECK_THROWS_AS(check_exhaustion_formulas(
                            sys, complex, none, weyl::WeylElement::identity(2), params),
                        Error);
    }
}
