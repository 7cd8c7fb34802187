#include "catch_amalgamated.hpp"

#include "fixtures.hpp"
#include "sphs/models.hpp"

#include <cmath>

using namespace sphs;
using Catch::Approx;

namespace {

Eigen::MatrixXi as_int(const SparseMatrix& m) { return Eigen::MatrixXd(m).cast<int>(); }

} // namespace

TEST_CASE("two-triangle incidence matches the reference layout", "[models]")
{
    const TwoTriangleExample ex = two_triangle_example();
    const Eigen::MatrixXi b1 = Eigen::MatrixXi(ex.complex.incidence(1));
    CHECK(ex.to_reference_columns(b1) == ex.boundary1);

    // The listed matrix differs only in the [v2,v0] column, which is not a
    // valid boundary (its column sum is nonzero on the wrong vertices).
    const Eigen::MatrixXi diff = ex.listed_boundary1 - ex.boundary1;
    for (int c = 0; c < 5; ++c) {
        CHECK((diff.col(c).cwiseAbs().sum() == 0) == (c != 2));
    }
}

TEST_CASE("two-triangle derivatives and trace match the reference matrices", "[models]")
{
    const TwoTriangleExample ex = two_triangle_example();
    const OperatorSet ops(ex.complex);
    const Eigen::MatrixXi d0 = as_int(ops.d(0).matrix());
    const Eigen::MatrixXi d0_ref = ex.to_reference_columns(Eigen::MatrixXi(d0.transpose())).transpose();
    CHECK(d0_ref == Eigen::MatrixXi(ex.boundary1.transpose()));

    const Eigen::MatrixXi di1 = as_int(ops.d_interior(1).matrix());
    CHECK(ex.to_reference_columns(di1) == Eigen::MatrixXi(-ex.boundary1));

    const Eigen::MatrixXi tr0 = as_int(ops.tr(0).matrix());
    CHECK(ex.to_reference_rows(tr0) == ex.reference_trace0);

    const Eigen::MatrixXi db1 = as_int(ops.d_boundary(1).matrix());
    CHECK(db1 == Eigen::MatrixXi(tr0.transpose()));
}

TEST_CASE("1D derivative and trace patterns", "[models]")
{
    const int n = 5;
    const OperatorSet ops(uniform_line(n));
    Eigen::MatrixXi d0 = Eigen::MatrixXi::Zero(n, n + 1);
    for (int i = 0; i < n; ++i) {
        d0(i, i) = -1;
        d0(i, i + 1) = 1;
    }
    Eigen::MatrixXi tr = Eigen::MatrixXi::Zero(2, n + 1);
    tr(0, 0) = -1;
    tr(1, n) = 1;
    CHECK(as_int(ops.d(0).matrix()) == d0);
    CHECK(as_int(ops.tr(0).matrix()) == tr);
    CHECK(as_int(ops.d_boundary(0).matrix()) == Eigen::MatrixXi(tr.transpose()));
    CHECK(as_int(ops.d_interior(0).matrix()) == Eigen::MatrixXi(-d0.transpose()));
}

TEST_CASE("single-segment telegraph matrices by hand", "[models]")
{
    TelegraphModelSpec spec;
    spec.segments = 1;
    const TelegraphModel m = build_telegraph(spec);
    REQUIRE(m.charge_size() == 2);
    REQUIRE(m.flux_size() == 3);
    const Eigen::MatrixXd A = Eigen::MatrixXd(m.system.state_matrix());
    Eigen::MatrixXd expected(5, 5);
    // clang-format off
    expected <<
         0,  0,  4, -2,  0,
         0,  0,  0,  2, -4,
        -2,  0,  0,  0,  0,
         2, -2,  0,  0,  0,
         0,  2,  0,  0,  0;
    // clang-format on
    CHECK((A - expected).cwiseAbs().maxCoeff() < 1e-14);

    Eigen::MatrixXd Bu = Eigen::MatrixXd::Zero(5, 2);
    Bu(2, 0) = 1;
    Bu(4, 1) = -1;
    CHECK((Eigen::MatrixXd(m.system.input_matrix()) - Bu).cwiseAbs().maxCoeff() < 1e-14);

    // Output currents: +I at the left end, -I at the right end.
    Vector alpha = Vector::Zero(5);
    alpha << 0, 0, 1, 0, 1;
    const Vector y = m.system.output(alpha);
    CHECK(y[0] == Approx(4.0));
    CHECK(y[1] == Approx(-4.0));
}

TEST_CASE("ladder elements integrate the line parameters", "[models]")
{
    for (Causality c : {Causality::VoltageIn, Causality::CurrentIn}) {
        TelegraphModelSpec spec;
        spec.segments = 6;
        spec.length = 2.0;
        spec.capacitance = Vector::Constant(1, 3.0);
        spec.inductance = Vector::Constant(1, 0.5);
        spec.causality = c;
        const Ladder l = ladder_elements(build_telegraph(spec));
        double cs = 0.0, ls = 0.0;
        for (double x : l.capacitors) {
            cs += x;
        }
        for (double x : l.inductors) {
            ls += x;
        }
        CHECK(cs == Approx(6.0));
        CHECK(ls == Approx(1.0));
        const std::size_t edges = 12;
        CHECK(l.capacitors.size() == (c == Causality::VoltageIn ? edges : edges + 1));
        CHECK(l.inductors.size() == (c == Causality::VoltageIn ? edges + 1 : edges));
    }
}

TEST_CASE("mirrored initial data gives mirrored evolution", "[models]")
{
    TelegraphModelSpec a;
    a.segments = 5;
    a.initial_voltage = [](double x) { return x * x; };
    TelegraphModelSpec b = a;
    b.initial_voltage = [](double x) { return (1.0 - x) * (1.0 - x); };
    const TelegraphModel ma = build_telegraph(a);
    const TelegraphModel mb = build_telegraph(b);
    const Vector xa = simulate(ma.system, ma.initial_state, 0.7, 0.01).states.back();
    const Vector xb = simulate(mb.system, mb.initial_state, 0.7, 0.01).states.back();
    const int nq = ma.charge_size();
    const int nf = ma.flux_size();
    for (int i = 0; i < nq; ++i) {
        CHECK(xa[i] == Approx(xb[nq - 1 - i]).margin(1e-12));
    }
    for (int i = 0; i < nf; ++i) {
        CHECK(xa[nq + i] == Approx(-xb[nq + nf - 1 - i]).margin(1e-12));
    }
}

TEST_CASE("both causalities store the standing-wave energy", "[models]")
{
    const StandingWave w;
    double previous = 1.0;
    for (int n : {8, 16, 32}) {
        const TelegraphModel mv = build_telegraph(w.spec(n, Causality::VoltageIn));
        const double hv = mv.system.hamiltonian()(mv.initial_state);
        const TelegraphModel mc = build_telegraph(w.spec(n, Causality::CurrentIn));
        const double hc = mc.system.hamiltonian()(mc.initial_state);
        CHECK(hv == Approx(w.energy()).epsilon(0.05));
        CHECK(hc == Approx(w.energy()).epsilon(0.05));
        const double gap = std::abs(hv - hc);
        CHECK(gap < previous);
        previous = gap;
    }
}

TEST_CASE("standing wave satisfies the telegraph equations", "[models]")
{
    // C dV/dt = -dI/dx and L dI/dt = -dV/dx, checked by central differences.
    const StandingWave w{2.0, 0.5, 1.5};
    const double h = 1e-5;
    for (double x : {0.1, 0.7, 1.3}) {
        for (double t : {0.0, 0.4, 1.1}) {
            const double dVdt = (w.voltage(x, t + h) - w.voltage(x, t - h)) / (2 * h);
            const double dIdx = (w.current(x + h, t) - w.current(x - h, t)) / (2 * h);
            const double dIdt = (w.current(x, t + h) - w.current(x, t - h)) / (2 * h);
            const double dVdx = (w.voltage(x + h, t) - w.voltage(x - h, t)) / (2 * h);
            CHECK(w.capacitance * dVdt == Approx(-dIdx).margin(1e-8));
            CHECK(w.inductance * dIdt == Approx(-dVdx).margin(1e-8));
        }
    }
}

TEST_CASE("a short standing-wave sweep converges at first order", "[models]")
{
    ConvergenceSpec spec;
    spec.segments = {4, 8, 16};
    spec.parallel = false;
    const ConvergenceResult r = converge(spec);
    REQUIRE(r.rows.size() == 3);
    CHECK(r.rows[0].error > r.rows[1].error);
    CHECK(r.rows[1].error > r.rows[2].error);
    CHECK(r.order > 0.7);
    CHECK(r.order < 1.3);

    spec.segments = {8, 16};
    CHECK_THROWS_AS(converge(spec), DimensionError);
    spec.segments = {8, 8, 16};
    CHECK_THROWS_AS(converge(spec), DimensionError);
}

TEST_CASE("observed order recovers an exact power law", "[models]")
{
    const std::vector<int> ns{8, 16, 32, 64};
    std::vector<double> errors;
    for (int n : ns) {
        errors.push_back(3.0 * std::pow(n, -1.5));
    }
    CHECK(observed_order(ns, errors) == Approx(1.5));
}

TEST_CASE("model builders validate their inputs", "[models]")
{
    TelegraphModelSpec t;
    t.segments = 0;
    CHECK_THROWS_AS(build_telegraph(t), StructuralError);
    t.segments = 2;
    t.capacitance = Vector::Constant(1, -1.0);
    CHECK_THROWS_AS(build_telegraph(t), NumericalError);
    t.capacitance = Vector::Ones(3);
    CHECK_THROWS_AS(build_telegraph(t), DimensionError);

    WaveModelSpec w;
    w.mesh = uniform_line(3);
    CHECK_THROWS_AS(build_wave(w), DegreeError);
    w.mesh = build_complex(2, {{0, 0}, {4, 0}, {2, 0.5}}, {{0, 1, 2}});
    CHECK_THROWS_AS(build_wave(w), WellCenteredError);
    w.mesh = two_triangle_example().complex;
    const Model m = build_wave(w);
    CHECK(m.system.state_size() == 9);
    CHECK(m.system.port_size() == 4);
}
