#pragma once

// Simplicial Dirac structures as block linear relations.
//
// Both flavors are parametrized by the efforts (e1, e2) and a free boundary
// variable w; flows and the boundary output y follow from
//
//   [f1; f2] = J [e1; e2] + B w,     y = C [e1; e2].
//
// Flavor A (primal efforts e_p, dual flows f_p; boundary effort is the input):
//   f1 = (-1)^r d_i^{n-q} e2 + (-1)^r d_b^{n-q} w,   f2 = d^{n-p} e1,   y = f_b = (-1)^p tr^{n-p} e1
// Flavor B (dual efforts e_p, primal flows f_p; boundary flow is the input):
//   f1 = (-1)^r d^{n-q} e2,   f2 = d_i^{n-p} e1 + d_b^{n-p} w,   y = e_b = (-1)^p tr^{n-q} e2
// with r = pq + 1 and p + q = n + 1.

#include "sphs/errors.hpp"
#include "sphs/operators.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace sphs {

enum class Flavor { A, B };

inline const char* to_string(Flavor f) { return f == Flavor::A ? "A" : "B"; }

/// One element of flows x efforts, coefficient vectors only.
struct PortTuple {
    Vector f1, f2, fb;
    Vector e1, e2, eb;

    double norm() const
    {
        return std::sqrt(f1.squaredNorm() + f2.squaredNorm() + fb.squaredNorm() + e1.squaredNorm()
                         + e2.squaredNorm() + eb.squaredNorm());
    }
};

/// Sign picked up by <effort ^ flow> when both are written as coefficient vectors.
inline int pairing_sign(const Space& effort, const Space& flow, int n)
{
    if (!is_dual(effort.carrier)) {
        return 1;
    }
    const int m = is_boundary(effort.carrier) ? n - 1 : n;
    const int k = flow.degree;
    return detail::parity_sign(k * (m - k));
}

class DiracStructure {
public:
    /// Named blocks, usable with with_flipped().
    enum class Block { Derivative, DualDerivative, DualBoundary, Trace };

    DiracStructure(const OperatorSet& ops, Flavor flavor, int p, int q)
        : K_(ops.complex())
        , flavor_(flavor)
        , p_(p)
        , q_(q)
    {
        const int n = K_.dimension();
        if (p < 1 || q < 1 || p + q != n + 1) {
            throw DegreeError("Dirac degrees need p, q >= 1 and p + q = n + 1 (n = " + std::to_string(n) + ", p = "
                              + std::to_string(p) + ", q = " + std::to_string(q) + ")");
        }
        const int rs = detail::parity_sign(r());
        const int ps = detail::parity_sign(p);
        if (flavor == Flavor::A) {
            f1_ = {Carrier::DualInterior, p};
            f2_ = {Carrier::Primal, q};
            fb_ = {Carrier::PrimalBoundary, n - p};
            e1_ = {Carrier::Primal, n - p};
            e2_ = {Carrier::DualInterior, n - q};
            eb_ = {Carrier::DualBoundary, n - q};
            dual_derivative_ = ops.d_interior(n - q).scaled(rs);
            derivative_ = ops.d(n - p);
            dual_boundary_ = ops.d_boundary(n - q).scaled(rs);
            trace_ = ops.tr(n - p).scaled(ps);
        } else {
            f1_ = {Carrier::Primal, p};
            f2_ = {Carrier::DualInterior, q};
            fb_ = {Carrier::DualBoundary, n - p};
            e1_ = {Carrier::DualInterior, n - p};
            e2_ = {Carrier::Primal, n - q};
            eb_ = {Carrier::PrimalBoundary, n - q};
            derivative_ = ops.d(n - q).scaled(rs);
            dual_derivative_ = ops.d_interior(n - p);
            dual_boundary_ = ops.d_boundary(n - p);
            trace_ = ops.tr(n - q).scaled(ps);
        }
    }

    Flavor flavor() const noexcept { return flavor_; }
    int p() const noexcept { return p_; }
    int q() const noexcept { return q_; }
    int r() const noexcept { return p_ * q_ + 1; }
    int n() const noexcept { return K_.dimension(); }
    const SimplicialComplex& complex() const noexcept { return K_; }

    const Space& flow1() const noexcept { return f1_; }
    const Space& flow2() const noexcept { return f2_; }
    const Space& flow_boundary() const noexcept { return fb_; }
    const Space& effort1() const noexcept { return e1_; }
    const Space& effort2() const noexcept { return e2_; }
    const Space& effort_boundary() const noexcept { return eb_; }

    /// Space of the free boundary variable and of the boundary output.
    const Space& input_space() const noexcept { return flavor_ == Flavor::A ? eb_ : fb_; }
    const Space& output_space() const noexcept { return flavor_ == Flavor::A ? fb_ : eb_; }

    int size1() const { return space_size(K_, f1_); }
    int size2() const { return space_size(K_, f2_); }
    int boundary_size() const { return space_size(K_, fb_); }
    int flow_dimension() const { return size1() + size2() + boundary_size(); }

    const LinearOp& block(Block b) const
    {
        switch (b) {
        case Block::Derivative:
            return derivative_;
        case Block::DualDerivative:
            return dual_derivative_;
        case Block::DualBoundary:
            return dual_boundary_;
        case Block::Trace:
            return trace_;
        }
        return derivative_;
    }

    /// Copy with one block negated; used as a negative control.
    DiracStructure with_flipped(Block b) const
    {
        DiracStructure out = *this;
        LinearOp& target = b == Block::Derivative ? out.derivative_
            : b == Block::DualDerivative          ? out.dual_derivative_
            : b == Block::DualBoundary            ? out.dual_boundary_
                                                  : out.trace_;
        target = target.scaled(-1.0);
        return out;
    }

    /// Interior operator J, (N1 + N2) x (N1 + N2), acting on [e1; e2].
    SparseMatrix interconnection() const
    {
        const int n1 = size1();
        const int n2 = size2();
        std::vector<Eigen::Triplet<double>> t;
        // f1 <- e2 block sits at (0, n1); f2 <- e1 block at (n1, 0).
        const SparseMatrix& top = flavor_ == Flavor::A ? dual_derivative_.matrix() : derivative_.matrix();
        const SparseMatrix& bottom = flavor_ == Flavor::A ? derivative_.matrix() : dual_derivative_.matrix();
        append(t, top, 0, n1);
        append(t, bottom, n1, 0);
        SparseMatrix J(n1 + n2, n1 + n2);
        J.setFromTriplets(t.begin(), t.end());
        return J;
    }

    /// Input operator B, (N1 + N2) x Nb.
    SparseMatrix input_map() const
    {
        std::vector<Eigen::Triplet<double>> t;
        append(t, dual_boundary_.matrix(), flavor_ == Flavor::A ? 0 : size1(), 0);
        SparseMatrix B(size1() + size2(), boundary_size());
        B.setFromTriplets(t.begin(), t.end());
        return B;
    }

    /// Output operator C, Nb x (N1 + N2).
    SparseMatrix output_map() const
    {
        std::vector<Eigen::Triplet<double>> t;
        append(t, trace_.matrix(), 0, flavor_ == Flavor::A ? 0 : size1());
        SparseMatrix C(boundary_size(), size1() + size2());
        C.setFromTriplets(t.begin(), t.end());
        return C;
    }

    /// Coefficient signs s with <e ^ f, K> = sum_i s_i e_i f_i over [e1; e2].
    Vector effort_signs() const
    {
        Vector s(size1() + size2());
        s.head(size1()).setConstant(pairing_sign(e1_, f1_, n()));
        s.tail(size2()).setConstant(pairing_sign(e2_, f2_, n()));
        return s;
    }

    /// Sign s_b with <e_b ^ f_b, dK> = s_b e_b . f_b.
    int boundary_sign() const { return pairing_sign(eb_, fb_, n()); }

    /// The element of the graph generated by efforts (e1, e2) and boundary input w.
    PortTuple element(const Vector& e1, const Vector& e2, const Vector& w) const
    {
        if (e1.size() != size1() || e2.size() != size2() || w.size() != boundary_size()) {
            throw DimensionError("Dirac element: expected efforts of size " + std::to_string(size1()) + ", "
                                 + std::to_string(size2()) + " and boundary input of size "
                                 + std::to_string(boundary_size()));
        }
        PortTuple t;
        t.e1 = e1;
        t.e2 = e2;
        if (flavor_ == Flavor::A) {
            t.f1 = dual_derivative_.matrix() * e2 + dual_boundary_.matrix() * w;
            t.f2 = derivative_.matrix() * e1;
            t.eb = w;
            t.fb = trace_.matrix() * e1;
        } else {
            t.f1 = derivative_.matrix() * e2;
            t.f2 = dual_derivative_.matrix() * e1 + dual_boundary_.matrix() * w;
            t.fb = w;
            t.eb = trace_.matrix() * e2;
        }
        return t;
    }

private:
    static void append(std::vector<Eigen::Triplet<double>>& t, const SparseMatrix& m, int row0, int col0)
    {
        for (int c = 0; c < m.outerSize(); ++c) {
            for (SparseMatrix::InnerIterator it(m, c); it; ++it) {
                t.emplace_back(row0 + static_cast<int>(it.row()), col0 + static_cast<int>(it.col()), it.value());
            }
        }
    }

    SimplicialComplex K_;
    Flavor flavor_;
    int p_;
    int q_;
    Space f1_, f2_, fb_, e1_, e2_, eb_;
    LinearOp derivative_, dual_derivative_, dual_boundary_, trace_;
};

inline DiracStructure build_dirac(const OperatorSet& ops, Flavor flavor, int p, int q)
{
    return DiracStructure(ops, flavor, p, q);
}

/// Symmetric bilinear pairing <<t1, t2>> of flows x efforts.
inline double bilinear_pairing(const DiracStructure& D, const PortTuple& t1, const PortTuple& t2)
{
    const SimplicialComplex& K = D.complex();
    const auto c = [&](const Space& s, const Vector& v) { return Cochain(K, s, v); };
    const auto half = [&](const PortTuple& a, const PortTuple& b) {
        return wedge_eval(K, c(D.effort1(), a.e1), c(D.flow1(), b.f1))
            + wedge_eval(K, c(D.effort2(), a.e2), c(D.flow2(), b.f2))
            + wedge_eval(K, c(D.effort_boundary(), a.eb), c(D.flow_boundary(), b.fb));
    };
    return half(t1, t2) + half(t2, t1);
}

/// Gram matrix W of the pairing in the ordering (f1, f2, fb, e1, e2, eb).
inline Eigen::MatrixXd pairing_matrix(const DiracStructure& D)
{
    const int n1 = D.size1();
    const int n2 = D.size2();
    const int nb = D.boundary_size();
    const int nf = n1 + n2 + nb;
    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(2 * nf, 2 * nf);
    const int s1 = pairing_sign(D.effort1(), D.flow1(), D.n());
    const int s2 = pairing_sign(D.effort2(), D.flow2(), D.n());
    const int sb = D.boundary_sign();
    for (int i = 0; i < nf; ++i) {
        const double s = i < n1 ? s1 : (i < n1 + n2 ? s2 : sb);
        W(i, nf + i) = s;
        W(nf + i, i) = s;
    }
    return W;
}

struct DiracReport {
    int trials = 0;
    double worst_isotropy = 0.0;
    int flow_dimension = 0;
    int graph_dimension = 0;
    double basis_isotropy = 0.0;
    double tolerance = 1e-11;

    bool isotropic() const { return worst_isotropy <= tolerance && basis_isotropy <= tolerance; }
    bool maximal() const { return graph_dimension == flow_dimension; }
    bool passed() const { return isotropic() && maximal(); }
};

namespace detail {

inline Vector random_vector(std::mt19937_64& rng, int size)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vector v(size);
    for (int i = 0; i < size; ++i) {
        v[i] = u(rng);
    }
    return v;
}

inline PortTuple random_element(const DiracStructure& D, std::mt19937_64& rng)
{
    Vector e1 = random_vector(rng, D.size1());
    Vector e2 = random_vector(rng, D.size2());
    Vector w = random_vector(rng, D.boundary_size());
    return D.element(e1, e2, w);
}

} // namespace detail

/// Numerical certificate that D is a Dirac structure: random isotropy trials,
/// plus the kernel of the defining constraints having dimension dim F and
/// being isotropic as a subspace.
inline DiracReport certify_dirac(const DiracStructure& D, int trials, std::uint64_t seed)
{
    DiracReport rep;
    rep.trials = trials;
    std::mt19937_64 rng(seed);
    for (int t = 0; t < trials; ++t) {
        const PortTuple a = detail::random_element(D, rng);
        const PortTuple b = detail::random_element(D, rng);
        const double scale = std::max(a.norm() * b.norm(), 1e-300);
        rep.worst_isotropy = std::max(rep.worst_isotropy, std::abs(bilinear_pairing(D, a, b)) / scale);
    }

    // Constraint rows in the ordering (f1, f2, fb, e1, e2, eb):
    //   [f1; f2] - J [e1; e2] - B w = 0,   y - C [e1; e2] = 0.
    const int n1 = D.size1();
    const int n2 = D.size2();
    const int nb = D.boundary_size();
    const int nf = n1 + n2 + nb;
    const Eigen::MatrixXd J = Eigen::MatrixXd(D.interconnection());
    const Eigen::MatrixXd B = Eigen::MatrixXd(D.input_map());
    const Eigen::MatrixXd C = Eigen::MatrixXd(D.output_map());
    const int w_col = D.flavor() == Flavor::A ? nf + n1 + n2 : n1 + n2;
    const int y_col = D.flavor() == Flavor::A ? n1 + n2 : nf + n1 + n2;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(nf, 2 * nf);
    A.block(0, 0, n1 + n2, n1 + n2).setIdentity();
    A.block(0, nf, n1 + n2, n1 + n2) = -J;
    A.block(0, w_col, n1 + n2, nb) = -B;
    A.block(n1 + n2, y_col, nb, nb).setIdentity();
    A.block(n1 + n2, nf, nb, n1 + n2) = -C;

    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    const Eigen::MatrixXd kernel = lu.kernel();
    rep.flow_dimension = nf;
    rep.graph_dimension = static_cast<int>(2 * nf - lu.rank());
    if (rep.graph_dimension > 0 && kernel.cols() > 0) {
        const Eigen::MatrixXd Wk = kernel.transpose() * pairing_matrix(D) * kernel;
        double scale = 0.0;
        for (int i = 0; i < kernel.cols(); ++i) {
            scale = std::max(scale, kernel.col(i).squaredNorm());
        }
        rep.basis_isotropy = Wk.cwiseAbs().maxCoeff() / std::max(scale, 1e-300);
    }
    return rep;
}

struct PoissonReport {
    int trials = 0;
    double worst_residual = 0.0;
    double skew_defect = 0.0;
    double tolerance = 1e-12;

    bool passed() const { return worst_residual <= tolerance && skew_defect <= tolerance; }
};

/// With zero boundary input, flavor A's interior relation is skew under the
/// wedge pairing: <e1 ^ f1> + <e2 ^ f2> = 0 for f = J e. J is constant, so the
/// Jacobi identity holds trivially.
inline PoissonReport certify_poisson(const DiracStructure& D, int trials, std::uint64_t seed)
{
    if (D.flavor() != Flavor::A) {
        throw DegreeError("the Poisson property is stated for flavor A");
    }
    PoissonReport rep;
    rep.trials = trials;
    std::mt19937_64 rng(seed);
    const SimplicialComplex& K = D.complex();
    const Vector zero = Vector::Zero(D.boundary_size());
    for (int t = 0; t < trials; ++t) {
        const PortTuple x = D.element(detail::random_vector(rng, D.size1()), detail::random_vector(rng, D.size2()), zero);
        const double s = wedge_eval(K, Cochain(K, D.effort1(), x.e1), Cochain(K, D.flow1(), x.f1))
            + wedge_eval(K, Cochain(K, D.effort2(), x.e2), Cochain(K, D.flow2(), x.f2));
        const double scale = std::max(x.e1.squaredNorm() + x.e2.squaredNorm(), 1e-300);
        rep.worst_residual = std::max(rep.worst_residual, std::abs(s) / scale);
    }
    // S J must be skew-symmetric, S the coefficient signs of the pairing.
    const Eigen::MatrixXd SJ = D.effort_signs().asDiagonal() * Eigen::MatrixXd(D.interconnection());
    if (SJ.size() > 0) {
        rep.skew_defect = (SJ + SJ.transpose()).cwiseAbs().maxCoeff();
    }
    return rep;
}

} // namespace sphs
