#pragma once

// Builders for the two physical examples: the 2D wave equation on a triangle
// mesh and the lossless transmission line in both causalities.

#include "sphs/dirac.hpp"
#include "sphs/dual.hpp"
#include "sphs/errors.hpp"
#include "sphs/mesh.hpp"
#include "sphs/operators.hpp"
#include "sphs/phs.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <future>
#include <memory>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

namespace sphs {

// ---------------------------------------------------------------- two triangles

struct SignedIndex {
    int index;
    int sign;
};

/// The two-triangle complex with its reference incidence matrices.
///
/// Reference columns of d1 are the edges [v0,v1], [v1,v2], [v2,v0], [v1,v3],
/// [v3,v2]. In `listed_boundary1` the column for [v2,v0] has its nonzeros on
/// v2 and v3, which is not a boundary of [v2,v0]; `boundary1` holds the
/// corrected matrix. Reference rows of the boundary dual operator are the dual
/// boundary edges [^v2,^v1], [^v1,^v3], [^v3,^v4], [^v4,^v2].
struct TwoTriangleExample {
    SimplicialComplex complex;
    Eigen::MatrixXi listed_boundary1;
    Eigen::MatrixXi boundary1;
    Eigen::MatrixXi reference_trace0;
    std::vector<SignedIndex> edge_columns;  // reference column -> canonical edge, orientation
    std::vector<int> trace_rows;            // reference row -> canonical boundary vertex

    /// Canonical matrix re-expressed in the reference column layout.
    Eigen::MatrixXi to_reference_columns(const Eigen::MatrixXi& m) const
    {
        Eigen::MatrixXi out(m.rows(), static_cast<Eigen::Index>(edge_columns.size()));
        for (std::size_t j = 0; j < edge_columns.size(); ++j) {
            out.col(static_cast<Eigen::Index>(j)) = edge_columns[j].sign * m.col(edge_columns[j].index);
        }
        return out;
    }

    Eigen::MatrixXi to_reference_rows(const Eigen::MatrixXi& m) const
    {
        Eigen::MatrixXi out(static_cast<Eigen::Index>(trace_rows.size()), m.cols());
        for (std::size_t i = 0; i < trace_rows.size(); ++i) {
            out.row(static_cast<Eigen::Index>(i)) = m.row(trace_rows[i]);
        }
        return out;
    }
};

inline TwoTriangleExample two_triangle_example()
{
    const double h = std::sqrt(3.0) / 2.0;
    TwoTriangleExample ex{build_complex(2, {{0.0, 0.0}, {1.0, 0.0}, {0.5, h}, {1.5, h}}, {{0, 1, 2}, {2, 1, 3}}),
                          Eigen::MatrixXi(4, 5), Eigen::MatrixXi(4, 5), Eigen::MatrixXi(4, 4), {}, {}};
    // clang-format off
    ex.listed_boundary1 <<
        -1,  0,  0,  0,  0,
         1, -1,  0, -1,  0,
         0,  1, -1,  0,  1,
         0,  0,  1,  1, -1;
    ex.boundary1 <<
        -1,  0,  1,  0,  0,
         1, -1,  0, -1,  0,
         0,  1, -1,  0,  1,
         0,  0,  0,  1, -1;
    ex.reference_trace0 <<
        1, 0, 0, 0,
        0, 1, 0, 0,
        0, 0, 0, 1,
        0, 0, 1, 0;
    // clang-format on
    const auto edge = [&](int a, int b) {
        const int idx = ex.complex.find({std::min(a, b), std::max(a, b)});
        return SignedIndex{idx, a < b ? 1 : -1};
    };
    ex.edge_columns = {edge(0, 1), edge(1, 2), edge(2, 0), edge(1, 3), edge(3, 2)};
    ex.trace_rows = {0, 1, 3, 2};
    return ex;
}

// ---------------------------------------------------------------- shared pieces

/// A built model: operators, the port-Hamiltonian system and an initial state.
struct Model {
    std::shared_ptr<const OperatorSet> ops;
    std::shared_ptr<const DualComplex> dual;
    PHSystem system;
    Vector initial_state;
};

enum class Termination { Driven, Passive, AntiPassive };

inline const char* to_string(Termination t)
{
    switch (t) {
    case Termination::Driven:
        return "driven";
    case Termination::Passive:
        return "passive";
    case Termination::AntiPassive:
        return "antipassive";
    }
    return "?";
}

namespace detail {

inline Vector broadcast(const Vector& v, int size, const char* what)
{
    if (v.size() == 1) {
        return Vector::Constant(size, v[0]);
    }
    if (v.size() != size) {
        throw DimensionError(std::string(what) + " needs 1 or " + std::to_string(size) + " values, got "
                             + std::to_string(v.size()));
    }
    return v;
}

inline void require_positive(const Vector& v, const char* what)
{
    for (int i = 0; i < v.size(); ++i) {
        if (!(v[i] > 0.0) || !std::isfinite(v[i])) {
            throw NumericalError(std::string(what) + " must be positive (entry " + std::to_string(i) + ")");
        }
    }
}

inline PHSystem terminate(PHSystem sys, const OperatorSet& ops, Termination t)
{
    switch (t) {
    case Termination::Driven:
        return sys;
    case Termination::Passive:
        return passive_feedback(sys, ops, 1);
    case Termination::AntiPassive:
        return passive_feedback(sys, ops, -1);
    }
    return sys;
}

} // namespace detail

// ---------------------------------------------------------------- wave

/// Wave equation with p = n = 2, q = 1: momentum on dual 2-cells (one per
/// vertex), strain on primal edges. H = 1/2 p.*_0^-1 p / rho + 1/2 e.*_1 e / c.
struct WaveModelSpec {
    SimplicialComplex mesh;
    Vector density = Vector::Ones(1);    // rho per vertex dual cell
    Vector compliance = Vector::Ones(1); // c per edge
    Vector momentum;                     // per vertex; empty means zero
    Vector strain;                       // per edge; empty means zero
    Termination termination = Termination::Driven;
    InputSignal input;                   // boundary effort on dual boundary edges
};

inline Model build_wave(const WaveModelSpec& spec)
{
    const SimplicialComplex& K = spec.mesh;
    if (K.dimension() != 2) {
        throw DegreeError("the wave model needs a 2D mesh");
    }
    auto dual = std::make_shared<const DualComplex>(build_dual(K));
    auto ops = std::make_shared<const OperatorSet>(K, *dual);
    const Vector rho = detail::broadcast(spec.density, K.count(0), "density");
    const Vector c = detail::broadcast(spec.compliance, K.count(1), "compliance");
    detail::require_positive(rho, "density");
    detail::require_positive(c, "compliance");

    DiracStructure D(*ops, Flavor::A, 2, 1);
    QuadraticHamiltonian H = QuadraticHamiltonian::from_hodge(D, *ops, rho, c);
    PHSystem sys = detail::terminate(assemble_system(std::move(D), std::move(H), spec.input), *ops, spec.termination);

    Vector alpha = Vector::Zero(sys.state_size());
    if (spec.momentum.size() > 0) {
        alpha.head(K.count(0)) = detail::broadcast(spec.momentum, K.count(0), "momentum");
    }
    if (spec.strain.size() > 0) {
        alpha.tail(K.count(1)) = detail::broadcast(spec.strain, K.count(1), "strain");
    }
    return Model{ops, dual, std::move(sys), std::move(alpha)};
}

// ---------------------------------------------------------------- telegraph

/// VoltageIn: charge q on primal edges, flux on dual cells, voltages in and
/// currents out. CurrentIn: charge on dual cells, flux on primal edges,
/// currents in and voltages out.
enum class Causality { VoltageIn, CurrentIn };

inline const char* to_string(Causality c) { return c == Causality::VoltageIn ? "voltage" : "current"; }

/// Uniform line of `segments` = n with 2n primal edges. Capacitance and
/// inductance are per-unit-length values given per cell of their carrier
/// (a single value is broadcast).
struct TelegraphModelSpec {
    int segments = 1;
    double length = 1.0;
    Vector capacitance = Vector::Ones(1);
    Vector inductance = Vector::Ones(1);
    Causality causality = Causality::VoltageIn;
    Termination termination = Termination::Driven;
    InputSignal input;
    std::function<double(double)> initial_voltage; // empty means zero
    std::function<double(double)> initial_current;
};

/// A cell of the line: its interval.
struct Interval {
    double a;
    double b;
    double length() const { return b - a; }
};

struct TelegraphModel : Model {
    Causality causality = Causality::VoltageIn;
    Vector capacitance; // per cell of the charge carrier
    Vector inductance;  // per cell of the flux carrier
    std::vector<Interval> charge_cells;
    std::vector<Interval> flux_cells;

    int charge_size() const { return static_cast<int>(charge_cells.size()); }
    int flux_size() const { return static_cast<int>(flux_cells.size()); }
    /// Charge comes first in the state vector, flux after it.
    int flux_offset() const { return charge_size(); }
};

namespace detail {

inline std::vector<Interval> primal_cells(const SimplicialComplex& K)
{
    std::vector<Interval> out;
    for (const Simplex& e : K.simplices(1)) {
        const double a = K.vertices()[static_cast<std::size_t>(e[0])].x();
        const double b = K.vertices()[static_cast<std::size_t>(e[1])].x();
        out.push_back({std::min(a, b), std::max(a, b)});
    }
    return out;
}

inline std::vector<Interval> dual_vertex_cells(const DualComplex& D, int count)
{
    std::vector<Interval> out;
    for (int v = 0; v < count; ++v) {
        const auto& cell = D.dual_cell(0, v);
        out.push_back({std::min(cell.front().x(), cell.back().x()), std::max(cell.front().x(), cell.back().x())});
    }
    return out;
}

/// Three-point Gauss-Legendre integral over an interval.
inline double gauss3(const std::function<double(double)>& f, const Interval& c)
{
    static const std::array<double, 3> nodes{-std::sqrt(0.6), 0.0, std::sqrt(0.6)};
    static const std::array<double, 3> weights{5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
    const double mid = 0.5 * (c.a + c.b);
    const double half = 0.5 * (c.b - c.a);
    double s = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        s += weights[i] * f(mid + half * nodes[i]);
    }
    return half * s;
}

} // namespace detail

inline TelegraphModel build_telegraph(const TelegraphModelSpec& spec)
{
    if (spec.segments < 1) {
        throw StructuralError("a telegraph line needs at least one segment");
    }
    if (!(spec.length > 0.0) || !std::isfinite(spec.length)) {
        throw GeometryError("line length must be positive");
    }
    const SimplicialComplex K = uniform_line(2 * spec.segments, spec.length);
    auto dual = std::make_shared<const DualComplex>(build_dual(K));
    auto ops = std::make_shared<const OperatorSet>(K, *dual);

    const std::vector<Interval> edges = detail::primal_cells(K);
    const std::vector<Interval> duals = detail::dual_vertex_cells(*dual, K.count(0));
    const bool voltage_in = spec.causality == Causality::VoltageIn;
    std::vector<Interval> charge_cells = voltage_in ? edges : duals;
    std::vector<Interval> flux_cells = voltage_in ? duals : edges;
    Vector cap = detail::broadcast(spec.capacitance, static_cast<int>(charge_cells.size()), "capacitance");
    Vector ind = detail::broadcast(spec.inductance, static_cast<int>(flux_cells.size()), "inductance");
    detail::require_positive(cap, "capacitance");
    detail::require_positive(ind, "inductance");

    DiracStructure D(*ops, voltage_in ? Flavor::B : Flavor::A, 1, 1);
    QuadraticHamiltonian H = QuadraticHamiltonian::from_hodge(D, *ops, cap, ind);
    PHSystem sys = detail::terminate(assemble_system(std::move(D), std::move(H), spec.input), *ops, spec.termination);
    TelegraphModel m{{ops, dual, std::move(sys), Vector()},
                     spec.causality,
                     std::move(cap),
                     std::move(ind),
                     std::move(charge_cells),
                     std::move(flux_cells)};

    m.initial_state = Vector::Zero(m.system.state_size());
    for (int i = 0; i < m.charge_size(); ++i) {
        if (spec.initial_voltage) {
            const double c = m.capacitance[i];
            m.initial_state[i] = detail::gauss3([&](double x) { return c * spec.initial_voltage(x); },
                                                m.charge_cells[static_cast<std::size_t>(i)]);
        }
    }
    for (int i = 0; i < m.flux_size(); ++i) {
        if (spec.initial_current) {
            const double l = m.inductance[i];
            m.initial_state[m.flux_offset() + i] = detail::gauss3([&](double x) { return l * spec.initial_current(x); },
                                                                  m.flux_cells[static_cast<std::size_t>(i)]);
        }
    }
    return m;
}

/// Piecewise-constant voltage and current reconstructed from a state.
struct LineFields {
    Vector voltage; // per charge cell
    Vector current; // per flux cell
};

inline LineFields telegraph_fields(const TelegraphModel& m, const Vector& alpha)
{
    LineFields f{Vector(m.charge_size()), Vector(m.flux_size())};
    for (int i = 0; i < m.charge_size(); ++i) {
        f.voltage[i] = alpha[i] / (m.capacitance[i] * m.charge_cells[static_cast<std::size_t>(i)].length());
    }
    for (int i = 0; i < m.flux_size(); ++i) {
        f.current[i] = alpha[m.flux_offset() + i] / (m.inductance[i] * m.flux_cells[static_cast<std::size_t>(i)].length());
    }
    return f;
}

/// Lumped LC ladder values: each element integrates the per-length parameter over its cell.
struct Ladder {
    std::vector<double> capacitors;
    std::vector<double> inductors;
};

inline Ladder ladder_elements(const TelegraphModel& m)
{
    Ladder l;
    for (int i = 0; i < m.charge_size(); ++i) {
        l.capacitors.push_back(m.capacitance[i] * m.charge_cells[static_cast<std::size_t>(i)].length());
    }
    for (int i = 0; i < m.flux_size(); ++i) {
        l.inductors.push_back(m.inductance[i] * m.flux_cells[static_cast<std::size_t>(i)].length());
    }
    return l;
}

// ---------------------------------------------------------------- standing wave

/// V = cos(kx) cos(wt), I = sqrt(C/L) sin(kx) sin(wt) with k = pi / length,
/// w = k / sqrt(LC). Both ends see V = +-cos(wt) and I = 0.
struct StandingWave {
    double capacitance = 1.0;
    double inductance = 1.0;
    double length = 1.0;

    double wavenumber() const { return std::numbers::pi / length; }
    double frequency() const { return wavenumber() / std::sqrt(capacitance * inductance); }
    double period() const { return 2.0 * std::numbers::pi / frequency(); }
    double voltage(double x, double t) const { return std::cos(wavenumber() * x) * std::cos(frequency() * t); }
    double current(double x, double t) const
    {
        return std::sqrt(capacitance / inductance) * std::sin(wavenumber() * x) * std::sin(frequency() * t);
    }
    /// Stored energy 1/2 int (C V^2 + L I^2) dx, constant in time.
    double energy() const { return 0.25 * capacitance * length; }

    /// Boundary drive realizing this solution for the given causality.
    InputSignal drive(Causality c) const
    {
        const StandingWave w = *this;
        if (c == Causality::VoltageIn) {
            return [w](double t) {
                Vector u(2);
                u << w.voltage(0.0, t), w.voltage(w.length, t);
                return u;
            };
        }
        return [w](double t) {
            Vector u(2);
            u << w.current(0.0, t), w.current(w.length, t);
            return u;
        };
    }

    TelegraphModelSpec spec(int segments, Causality c) const
    {
        TelegraphModelSpec s;
        s.segments = segments;
        s.length = length;
        s.capacitance = Vector::Constant(1, capacitance);
        s.inductance = Vector::Constant(1, inductance);
        s.causality = c;
        s.input = drive(c);
        const StandingWave w = *this;
        s.initial_voltage = [w](double x) { return w.voltage(x, 0.0); };
        s.initial_current = [w](double x) { return w.current(x, 0.0); };
        return s;
    }
};

struct FieldError {
    double l2 = 0.0;    // L2 norm of reconstruction minus exact fields
    double nodal = 0.0; // max error at cell centers
};

inline FieldError standing_wave_error(const TelegraphModel& m, const StandingWave& w, const Vector& alpha, double t)
{
    const LineFields f = telegraph_fields(m, alpha);
    FieldError e;
    double sq = 0.0;
    for (int i = 0; i < m.charge_size(); ++i) {
        const Interval& c = m.charge_cells[static_cast<std::size_t>(i)];
        const double v = f.voltage[i];
        sq += detail::gauss3([&](double x) { return std::pow(v - w.voltage(x, t), 2); }, c);
        e.nodal = std::max(e.nodal, std::abs(v - w.voltage(0.5 * (c.a + c.b), t)));
    }
    for (int i = 0; i < m.flux_size(); ++i) {
        const Interval& c = m.flux_cells[static_cast<std::size_t>(i)];
        const double cur = f.current[i];
        sq += detail::gauss3([&](double x) { return std::pow(cur - w.current(x, t), 2); }, c);
        e.nodal = std::max(e.nodal, std::abs(cur - w.current(0.5 * (c.a + c.b), t)));
    }
    e.l2 = std::sqrt(sq);
    return e;
}

struct ConvergenceRow {
    int segments = 0;
    double dt = 0.0;
    std::size_t steps = 0;
    double error = 0.0;       // max over time of the L2 error
    double nodal_error = 0.0; // max over time of the cell-center error
    double energy_error = 0.0; // max |H(t) - exact energy|
};

struct ConvergenceResult {
    std::vector<ConvergenceRow> rows;
    double order = 0.0;
    double nodal_order = 0.0;
};

/// Least-squares slope of -log(error) against log(n).
inline double observed_order(const std::vector<int>& ns, const std::vector<double>& errors)
{
    const std::size_t m = ns.size();
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double x = std::log(static_cast<double>(ns[i]));
        const double y = std::log(errors[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double md = static_cast<double>(m);
    return -(md * sxy - sx * sy) / (md * sxx - sx * sx);
}

struct ConvergenceSpec {
    std::vector<int> segments{8, 16, 32, 64};
    Causality causality = Causality::VoltageIn;
    StandingWave wave;
    double base_dt = 0.02; // step at the first n; scaled by (n0 / n)^2
    double periods = 1.0;
    bool parallel = true;
};

inline ConvergenceRow run_standing_wave(const StandingWave& w, int segments, Causality c, double dt, double T)
{
    const TelegraphModel m = build_telegraph(w.spec(segments, c));
    ConvergenceRow row;
    row.segments = segments;
    SimulateOptions opt;
    opt.keep_states = false;
    opt.observer = [&](double t, const Vector& a) {
        const FieldError e = standing_wave_error(m, w, a, t);
        row.error = std::max(row.error, e.l2);
        row.nodal_error = std::max(row.nodal_error, e.nodal);
    };
    const Trajectory tr = simulate(m.system, m.initial_state, T, dt, opt);
    row.dt = tr.dt;
    row.steps = tr.steps();
    for (double h : tr.energy) {
        row.energy_error = std::max(row.energy_error, std::abs(h - w.energy()));
    }
    return row;
}

inline ConvergenceResult converge(const ConvergenceSpec& spec)
{
    if (spec.segments.size() < 3) {
        throw DimensionError("a convergence sweep needs at least three resolutions");
    }
    for (std::size_t i = 0; i < spec.segments.size(); ++i) {
        if (spec.segments[i] < 1 || (i > 0 && spec.segments[i] <= spec.segments[i - 1])) {
            throw DimensionError("resolutions must be positive and strictly increasing");
        }
    }
    const double n0 = spec.segments.front();
    const double T = spec.periods * spec.wave.period();
    std::vector<std::future<ConvergenceRow>> jobs;
    for (int n : spec.segments) {
        const double dt = spec.base_dt * (n0 / n) * (n0 / n);
        jobs.push_back(std::async(spec.parallel ? std::launch::async : std::launch::deferred, run_standing_wave,
                                  spec.wave, n, spec.causality, dt, T));
    }
    ConvergenceResult res;
    for (auto& j : jobs) {
        res.rows.push_back(j.get());
    }
    std::vector<double> err, nodal;
    for (const auto& r : res.rows) {
        err.push_back(r.error);
        nodal.push_back(r.nodal_error);
    }
    res.order = observed_order(spec.segments, err);
    res.nodal_order = observed_order(spec.segments, nodal);
    return res;
}

} // namespace sphs
