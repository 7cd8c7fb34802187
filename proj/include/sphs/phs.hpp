#pragma once

// Port-Hamiltonian dynamics on a simplicial Dirac structure.
//
// State alpha = [a1; a2] lives in the flow spaces (f = -d alpha / dt), the
// Hamiltonian is H = 1/2 alpha^T M alpha with M diagonal, and the efforts are
// the coefficient vectors e = S M alpha, where S carries the wedge signs so
// that <e ^ alpha_dot, K> = grad H . alpha_dot. Then
//
//   alpha_dot = -J S M alpha - B w,   y = C S M alpha,   dH/dt = s_b w . y.

#include "sphs/dirac.hpp"
#include "sphs/errors.hpp"
#include "sphs/operators.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace sphs {

class QuadraticHamiltonian {
public:
    QuadraticHamiltonian() = default;
    explicit QuadraticHamiltonian(Vector diagonal)
        : m_(std::move(diagonal))
    {
        for (int i = 0; i < m_.size(); ++i) {
            if (!(m_[i] > 0.0) || !std::isfinite(m_[i])) {
                throw NumericalError("energy matrix entry " + std::to_string(i) + " is not positive");
            }
        }
    }

    /// Energy matrix for a Dirac structure: each state block gets the Hodge
    /// entry that maps its carrier to the complementary one, divided by the
    /// block weight (per-cell values). A primal k-state uses *_k, a dual state
    /// on *sigma^k uses *_k^-1.
    static QuadraticHamiltonian from_hodge(const DiracStructure& D, const OperatorSet& ops, const Vector& weight1,
                                           const Vector& weight2)
    {
        if (!ops.has_metric()) {
            throw DimensionError("energy matrix needs Hodge stars; build the operator set with a dual complex");
        }
        const auto block = [&](const Space& s, const Vector& w) {
            const int n = ops.n();
            const SparseMatrix& h = s.carrier == Carrier::Primal ? ops.star(s.degree).matrix()
                                                                 : ops.star_inv(n - s.degree).matrix();
            if (w.size() != h.rows()) {
                throw DimensionError("weight vector for " + to_string(s) + " needs " + std::to_string(h.rows())
                                     + " entries");
            }
            Vector d(h.rows());
            for (int i = 0; i < h.rows(); ++i) {
                d[i] = h.coeff(i, i) / w[i];
            }
            return d;
        };
        Vector m(D.size1() + D.size2());
        m << block(D.flow1(), weight1), block(D.flow2(), weight2);
        return QuadraticHamiltonian(std::move(m));
    }

    const Vector& diagonal() const noexcept { return m_; }
    int size() const noexcept { return static_cast<int>(m_.size()); }

    double operator()(const Vector& alpha) const { return 0.5 * alpha.dot(m_.cwiseProduct(alpha)); }
    Vector gradient(const Vector& alpha) const { return m_.cwiseProduct(alpha); }

private:
    Vector m_;
};

/// Max relative error between the analytic gradient M alpha and central
/// differences of H with step h.
inline double hamiltonian_gradient_check(const QuadraticHamiltonian& H, const Vector& alpha, double h)
{
    if (!(h > 0.0)) {
        throw NumericalError("finite-difference step must be positive");
    }
    const Vector g = H.gradient(alpha);
    const double scale = std::max(g.cwiseAbs().maxCoeff(), 1.0);
    double worst = 0.0;
    Vector x = alpha;
    for (int i = 0; i < alpha.size(); ++i) {
        const double xi = x[i];
        x[i] = xi + h;
        const double up = H(x);
        x[i] = xi - h;
        const double down = H(x);
        x[i] = xi;
        worst = std::max(worst, std::abs((up - down) / (2.0 * h) - g[i]) / scale);
    }
    return worst;
}

using InputSignal = std::function<Vector(double)>;

/// Boundary closure w = gain * star_b y + u(t).
struct Feedback {
    double gain = 0.0;
    SparseMatrix star_b;
};

class PHSystem {
public:
    PHSystem(DiracStructure D, QuadraticHamiltonian H, InputSignal input = {})
        : D_(std::move(D))
        , H_(std::move(H))
        , input_(std::move(input))
    {
        if (H_.size() != D_.size1() + D_.size2()) {
            throw DimensionError("Hamiltonian has " + std::to_string(H_.size()) + " coefficients, Dirac state has "
                                 + std::to_string(D_.size1() + D_.size2()));
        }
        const SparseMatrix SM = SparseMatrix((D_.effort_signs().cwiseProduct(H_.diagonal())).asDiagonal());
        effort_map_ = SM;
        J_ = D_.interconnection();
        B_ = D_.input_map();
        C_ = D_.output_map();
    }

    const DiracStructure& dirac() const noexcept { return D_; }
    const QuadraticHamiltonian& hamiltonian() const noexcept { return H_; }
    const std::optional<Feedback>& feedback() const noexcept { return feedback_; }
    int state_size() const noexcept { return H_.size(); }
    int port_size() const { return D_.boundary_size(); }

    PHSystem with_input(InputSignal input) const
    {
        PHSystem out = *this;
        out.input_ = std::move(input);
        return out;
    }

    PHSystem with_feedback(Feedback fb) const
    {
        if (fb.star_b.rows() != port_size() || fb.star_b.cols() != port_size()) {
            throw DimensionError("feedback operator must be square of the boundary size");
        }
        PHSystem out = *this;
        out.feedback_ = std::move(fb);
        return out;
    }

    /// External input at time t (zero when no signal is attached).
    Vector input(double t) const
    {
        if (!input_) {
            return Vector::Zero(port_size());
        }
        Vector u = input_(t);
        if (u.size() != port_size()) {
            throw DimensionError("input signal returned " + std::to_string(u.size()) + " values, boundary has "
                                 + std::to_string(port_size()));
        }
        return u;
    }

    Vector efforts(const Vector& alpha) const { return effort_map_ * alpha; }
    Vector output(const Vector& alpha) const { return C_ * efforts(alpha); }

    /// Boundary variable actually applied: feedback of the output plus u.
    Vector boundary_input(const Vector& alpha, const Vector& u) const
    {
        if (!feedback_) {
            return u;
        }
        return feedback_->gain * (feedback_->star_b * output(alpha)) + u;
    }

    /// Boundary power <w ^ y, dK> for state alpha and external input u.
    double power(const Vector& alpha, const Vector& u) const
    {
        return D_.boundary_sign() * boundary_input(alpha, u).dot(output(alpha));
    }

    /// Closed-loop state matrix: alpha_dot = A alpha + Bu u.
    SparseMatrix state_matrix() const
    {
        SparseMatrix inner = J_;
        if (feedback_) {
            inner += feedback_->gain * SparseMatrix(B_ * feedback_->star_b * C_);
        }
        return SparseMatrix(-1.0 * (inner * effort_map_));
    }

    SparseMatrix input_matrix() const { return SparseMatrix(-1.0 * B_); }

    Vector rhs(const Vector& alpha, double t) const { return state_matrix() * alpha + input_matrix() * input(t); }

private:
    DiracStructure D_;
    QuadraticHamiltonian H_;
    InputSignal input_;
    std::optional<Feedback> feedback_;
    SparseMatrix effort_map_, J_, B_, C_;
};

inline PHSystem assemble_system(DiracStructure D, QuadraticHamiltonian H, InputSignal input = {})
{
    return PHSystem(std::move(D), std::move(H), std::move(input));
}

/// Closes the boundary port with e_b = (-1)^((n-p)(n-q)-1) *_b f_b. With
/// `sign` = -1 the gain is negated (anti-passive control).
inline PHSystem passive_feedback(const PHSystem& sys, const OperatorSet& ops, int sign = 1)
{
    const DiracStructure& D = sys.dirac();
    if (D.flavor() != Flavor::A) {
        throw DegreeError("passivizing feedback is defined for flavor A systems");
    }
    if (!ops.has_metric()) {
        throw DimensionError("feedback needs the boundary Hodge star");
    }
    const int n = D.n();
    Feedback fb;
    fb.gain = sign * detail::parity_sign((n - D.p()) * (n - D.q()) - 1);
    fb.star_b = ops.star_b(n - D.p()).matrix();
    return sys.with_feedback(std::move(fb));
}

/// Implicit midpoint rule for the linear system, factorized once:
/// (I - dt/2 A) alpha+ = (I + dt/2 A) alpha + dt Bu u_mid.
class MidpointIntegrator {
public:
    MidpointIntegrator(const PHSystem& sys, double dt)
        : dt_(dt)
    {
        if (!(dt > 0.0) || !std::isfinite(dt)) {
            throw NumericalError("time step must be positive");
        }
        const SparseMatrix A = sys.state_matrix();
        SparseMatrix I(A.rows(), A.cols());
        I.setIdentity();
        lhs_ = SparseMatrix(I - 0.5 * dt * A);
        rhs_ = SparseMatrix(I + 0.5 * dt * A);
        Bu_ = sys.input_matrix();
        lhs_.makeCompressed();
        if (lhs_.rows() > 0) {
            lu_.compute(lhs_);
            if (lu_.info() != Eigen::Success) {
                throw NumericalError("midpoint system matrix is singular");
            }
        }
    }

    double dt() const noexcept { return dt_; }

    Vector step(const Vector& alpha, const Vector& u_mid) const
    {
        if (alpha.size() == 0) {
            return alpha;
        }
        Vector b = rhs_ * alpha;
        if (u_mid.size() > 0) {
            b += dt_ * (Bu_ * u_mid);
        }
        Vector next = lu_.solve(b);
        if (!next.allFinite()) {
            throw NumericalError("midpoint solve produced non-finite values");
        }
        return next;
    }

private:
    double dt_;
    SparseMatrix lhs_, rhs_, Bu_;
    Eigen::SparseLU<SparseMatrix> lu_;
};

inline Vector step_implicit_midpoint(const PHSystem& sys, const Vector& alpha, const Vector& u_mid, double dt)
{
    return MidpointIntegrator(sys, dt).step(alpha, u_mid);
}

struct Trajectory {
    double dt = 0.0;
    std::vector<double> time;
    std::vector<Vector> states;  // empty when states are not kept
    std::vector<Vector> outputs; // y(t_k)
    std::vector<double> energy;  // H(t_k)
    std::vector<double> power;   // boundary power at t_k
    std::vector<double> defect;  // H(t_k) - H(0) - trapezoid integral of power
    std::vector<double> midpoint_defect; // same with the power at step midpoints; zero up to roundoff

    std::size_t steps() const { return time.empty() ? 0 : time.size() - 1; }
    double max_abs_defect() const
    {
        double m = 0.0;
        for (double d : defect) {
            m = std::max(m, std::abs(d));
        }
        return m;
    }
};

struct SimulateOptions {
    bool keep_states = true;
    std::function<void(double, const Vector&)> observer;
};

/// Fixed-step midpoint integration over [0, T]. The step is adjusted to
/// T / round(T / dt) so the grid ends exactly at T.
inline Trajectory simulate(const PHSystem& sys, const Vector& alpha0, double T, double dt,
                           const SimulateOptions& options = {})
{
    if (!(T >= 0.0) || !std::isfinite(T)) {
        throw NumericalError("final time must be non-negative");
    }
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw NumericalError("time step must be positive");
    }
    if (alpha0.size() != sys.state_size()) {
        throw DimensionError("initial state has " + std::to_string(alpha0.size()) + " coefficients, system needs "
                             + std::to_string(sys.state_size()));
    }
    const long steps = T == 0.0 ? 0 : std::max(1L, std::lround(T / dt));
    const double h = steps == 0 ? dt : T / static_cast<double>(steps);

    Trajectory tr;
    tr.dt = h;
    const QuadraticHamiltonian& H = sys.hamiltonian();
    const auto record = [&](double t, const Vector& a, const Vector& u) {
        tr.time.push_back(t);
        if (options.keep_states) {
            tr.states.push_back(a);
        }
        tr.outputs.push_back(sys.output(a));
        tr.energy.push_back(H(a));
        tr.power.push_back(sys.power(a, u));
        if (options.observer) {
            options.observer(t, a);
        }
    };

    Vector alpha = alpha0;
    record(0.0, alpha, sys.input(0.0));
    tr.defect.push_back(0.0);
    tr.midpoint_defect.push_back(0.0);
    if (steps == 0) {
        return tr;
    }
    const MidpointIntegrator integrator(sys, h);
    double integral = 0.0;
    double midpoint_integral = 0.0;
    for (long k = 0; k < steps; ++k) {
        const double t_mid = (static_cast<double>(k) + 0.5) * h;
        const double t_next = static_cast<double>(k + 1) * h;
        const Vector u_mid = sys.input(t_mid);
        Vector next = integrator.step(alpha, u_mid);
        midpoint_integral += h * sys.power(0.5 * (alpha + next), u_mid);
        alpha = std::move(next);
        record(t_next, alpha, sys.input(t_next));
        integral += 0.5 * h * (tr.power[tr.power.size() - 2] + tr.power.back());
        tr.defect.push_back(tr.energy.back() - tr.energy.front() - integral);
        tr.midpoint_defect.push_back(tr.energy.back() - tr.energy.front() - midpoint_integral);
    }
    return tr;
}

} // namespace sphs
