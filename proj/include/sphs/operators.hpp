#pragma once

// Linear operators between cochain spaces of a complex K, its boundary dK, the
// interior dual *_iK and the boundary dual d(*K).
//
// Degree bookkeeping for an n-complex:
//   Primal k         : one value per k-simplex of K            (k = 0..n)
//   PrimalBoundary k : one value per k-cell of dK              (k = 0..n-1)
//   DualInterior j   : one value per dual j-cell = primal (n-j)-simplex
//   DualBoundary j   : one value per j-cell of d(*K) = (n-1-j)-cell of dK
//
// The dual derivatives are fixed by transposition:
//   d_i^j = (-1)^(n-j)   (d^(n-j-1))^T
//   d_b^j = (-1)^(n-j-1) (tr^(n-j-1))^T
// which makes evaluation by parts hold exactly.

#include "sphs/dual.hpp"
#include "sphs/errors.hpp"
#include "sphs/mesh.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace sphs {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;

enum class Carrier { Primal, PrimalBoundary, DualInterior, DualBoundary };

inline const char* to_string(Carrier c)
{
    switch (c) {
    case Carrier::Primal:
        return "primal";
    case Carrier::PrimalBoundary:
        return "primal-boundary";
    case Carrier::DualInterior:
        return "dual-interior";
    case Carrier::DualBoundary:
        return "dual-boundary";
    }
    return "?";
}

inline bool is_dual(Carrier c) noexcept { return c == Carrier::DualInterior || c == Carrier::DualBoundary; }
inline bool is_boundary(Carrier c) noexcept { return c == Carrier::PrimalBoundary || c == Carrier::DualBoundary; }

/// A cochain space: carrier plus degree.
struct Space {
    Carrier carrier = Carrier::Primal;
    int degree = 0;

    bool operator==(const Space&) const = default;
};

inline std::string to_string(const Space& s)
{
    return std::string(to_string(s.carrier)) + "/" + std::to_string(s.degree);
}

/// Number of coefficients of a cochain in `s`; throws when the degree is invalid.
inline int space_size(const SimplicialComplex& K, const Space& s)
{
    const int n = K.dimension();
    const auto fail = [&] { throw DegreeError("invalid space " + to_string(s) + " on a " + std::to_string(n) + "-complex"); };
    switch (s.carrier) {
    case Carrier::Primal:
        if (s.degree < 0 || s.degree > n) {
            fail();
        }
        return K.count(s.degree);
    case Carrier::DualInterior:
        if (s.degree < 0 || s.degree > n) {
            fail();
        }
        return K.count(n - s.degree);
    case Carrier::PrimalBoundary:
        if (s.degree < 0 || s.degree > n - 1) {
            fail();
        }
        return static_cast<int>(K.boundary_simplices(s.degree).size());
    case Carrier::DualBoundary:
        if (s.degree < 0 || s.degree > n - 1) {
            fail();
        }
        return static_cast<int>(K.boundary_simplices(n - 1 - s.degree).size());
    }
    return 0;
}

/// Coefficient vector of a discrete form, tagged with its space.
class Cochain {
public:
    Cochain(const SimplicialComplex& K, Space space, Vector values)
        : space_(space)
        , values_(std::move(values))
    {
        const int expected = space_size(K, space_);
        if (values_.size() != expected) {
            throw DimensionError("cochain in " + to_string(space_) + " needs " + std::to_string(expected)
                                 + " values, got " + std::to_string(values_.size()));
        }
    }

    static Cochain zero(const SimplicialComplex& K, Space space)
    {
        return Cochain(K, space, Vector::Zero(space_size(K, space)));
    }

    const Space& space() const noexcept { return space_; }
    int degree() const noexcept { return space_.degree; }
    Carrier carrier() const noexcept { return space_.carrier; }
    const Vector& values() const noexcept { return values_; }

private:
    Cochain(Space space, Vector values)
        : space_(space)
        , values_(std::move(values))
    {
    }
    friend class LinearOp;

    Space space_;
    Vector values_;
};

/// A sparse matrix together with its domain and codomain spaces.
class LinearOp {
public:
    LinearOp() = default;
    LinearOp(Space domain, Space codomain, SparseMatrix matrix)
        : domain_(domain)
        , codomain_(codomain)
        , matrix_(std::move(matrix))
    {
        matrix_.makeCompressed();
    }

    const Space& domain() const noexcept { return domain_; }
    const Space& codomain() const noexcept { return codomain_; }
    const SparseMatrix& matrix() const noexcept { return matrix_; }

    Cochain apply(const Cochain& c) const
    {
        if (!(c.space() == domain_)) {
            throw DegreeError("operator expects " + to_string(domain_) + ", got " + to_string(c.space()));
        }
        if (c.values().size() != matrix_.cols()) {
            throw DimensionError("cochain length does not match operator");
        }
        return Cochain(codomain_, matrix_ * c.values());
    }

    /// next o this.
    LinearOp then(const LinearOp& next) const
    {
        if (!(next.domain_ == codomain_)) {
            throw DegreeError("cannot compose " + to_string(codomain_) + " with an operator on " + to_string(next.domain_));
        }
        return LinearOp(domain_, next.codomain_, SparseMatrix(next.matrix_ * matrix_));
    }

    LinearOp scaled(double factor) const { return LinearOp(domain_, codomain_, SparseMatrix(factor * matrix_)); }

private:
    Space domain_;
    Space codomain_;
    SparseMatrix matrix_;
};

namespace detail {

inline void require(bool ok, const std::string& what)
{
    if (!ok) {
        throw DegreeError(what);
    }
}

inline SparseMatrix to_real(const IntSparse& m)
{
    return m.cast<double>();
}

inline int parity_sign(int e) { return (e % 2 == 0) ? 1 : -1; }

inline SparseMatrix diagonal(const std::vector<double>& entries)
{
    SparseMatrix m(static_cast<Eigen::Index>(entries.size()), static_cast<Eigen::Index>(entries.size()));
    std::vector<Eigen::Triplet<double>> t;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        t.emplace_back(static_cast<int>(i), static_cast<int>(i), entries[i]);
    }
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

} // namespace detail

/// d^k : Primal k -> Primal k+1, the transpose of the incidence matrix.
inline LinearOp coboundary(const SimplicialComplex& K, int k)
{
    detail::require(k >= 0 && k <= K.dimension() - 1, "coboundary degree " + std::to_string(k) + " out of range");
    return LinearOp({Carrier::Primal, k}, {Carrier::Primal, k + 1},
                    SparseMatrix(detail::to_real(K.incidence(k + 1)).transpose()));
}

/// tr^k : Primal k -> PrimalBoundary k. One entry per boundary k-simplex, equal
/// to the sign of its boundary-induced orientation.
inline LinearOp trace(const SimplicialComplex& K, int k)
{
    detail::require(k >= 0 && k <= K.dimension() - 1, "trace degree " + std::to_string(k) + " out of range");
    const auto& cells = K.boundary_simplices(k);
    std::vector<Eigen::Triplet<double>> t;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        t.emplace_back(static_cast<int>(i), cells[i].index, static_cast<double>(cells[i].sign));
    }
    SparseMatrix m(static_cast<Eigen::Index>(cells.size()), K.count(k));
    m.setFromTriplets(t.begin(), t.end());
    return LinearOp({Carrier::Primal, k}, {Carrier::PrimalBoundary, k}, std::move(m));
}

/// d_i^j : DualInterior j -> DualInterior j+1.
inline LinearOp dual_derivative_interior(const SimplicialComplex& K, int j)
{
    const int n = K.dimension();
    detail::require(j >= 0 && j <= n - 1, "interior dual derivative degree " + std::to_string(j) + " out of range");
    const int k = n - j; // primal degree of the cells dual to the domain
    const SparseMatrix d = coboundary(K, k - 1).matrix();
    return LinearOp({Carrier::DualInterior, j}, {Carrier::DualInterior, j + 1},
                    SparseMatrix(detail::parity_sign(k) * SparseMatrix(d.transpose())));
}

/// d_b^j : DualBoundary j -> DualInterior j+1.
inline LinearOp dual_derivative_boundary(const SimplicialComplex& K, int j)
{
    const int n = K.dimension();
    detail::require(j >= 0 && j <= n - 1, "boundary dual derivative degree " + std::to_string(j) + " out of range");
    const int k = n - j;
    const SparseMatrix tr = trace(K, k - 1).matrix();
    return LinearOp({Carrier::DualBoundary, j}, {Carrier::DualInterior, j + 1},
                    SparseMatrix(detail::parity_sign(k - 1) * SparseMatrix(tr.transpose())));
}

/// Diagonal Hodge star *_k : Primal k -> DualInterior n-k with entries |*sigma| / |sigma|.
inline LinearOp hodge(const SimplicialComplex& K, const DualComplex& D, int k)
{
    const int n = K.dimension();
    detail::require(k >= 0 && k <= n, "hodge degree " + std::to_string(k) + " out of range");
    std::vector<double> entries;
    for (int i = 0; i < K.count(k); ++i) {
        const double dual = D.dual_measure(k, i);
        if (!(dual > 0.0)) {
            throw NumericalError("zero dual measure for " + std::to_string(k) + "-simplex " + std::to_string(i));
        }
        entries.push_back(dual / D.primal_measure(k, i));
    }
    return LinearOp({Carrier::Primal, k}, {Carrier::DualInterior, n - k}, detail::diagonal(entries));
}

inline LinearOp hodge_inv(const SimplicialComplex& K, const DualComplex& D, int k)
{
    const LinearOp star = hodge(K, D, k);
    std::vector<double> entries;
    for (int i = 0; i < star.matrix().rows(); ++i) {
        entries.push_back(1.0 / star.matrix().coeff(i, i));
    }
    return LinearOp(star.codomain(), star.domain(), detail::diagonal(entries));
}

/// Hodge star of dK: PrimalBoundary k -> DualBoundary n-1-k, entries |*_b sigma| / |sigma|.
inline LinearOp hodge_boundary(const SimplicialComplex& K, const DualComplex& D, int k)
{
    const int n = K.dimension();
    detail::require(k >= 0 && k <= n - 1, "boundary hodge degree " + std::to_string(k) + " out of range");
    std::vector<double> entries;
    for (int i = 0; i < D.boundary_count(k); ++i) {
        const double dual = D.boundary_dual_measure(k, i);
        if (!(dual > 0.0)) {
            throw NumericalError("zero boundary dual measure for cell " + std::to_string(i));
        }
        entries.push_back(dual / D.boundary_primal_measure(k, i));
    }
    return LinearOp({Carrier::PrimalBoundary, k}, {Carrier::DualBoundary, n - 1 - k}, detail::diagonal(entries));
}

inline LinearOp hodge_boundary_inv(const SimplicialComplex& K, const DualComplex& D, int k)
{
    const LinearOp star = hodge_boundary(K, D, k);
    std::vector<double> entries;
    for (int i = 0; i < star.matrix().rows(); ++i) {
        entries.push_back(1.0 / star.matrix().coeff(i, i));
    }
    return LinearOp(star.codomain(), star.domain(), detail::diagonal(entries));
}

/// Primal-dual wedge evaluated over K (or over dK for boundary carriers).
///
/// <alpha ^ beta> is the coefficient dot product when the primal factor comes
/// first; swapping the factors multiplies by (-1)^(k(m-k)), with k the primal
/// degree and m the dimension of the domain of integration.
inline double wedge_eval(const SimplicialComplex& K, const Cochain& a, const Cochain& b)
{
    const int n = K.dimension();
    const bool boundary = is_boundary(a.carrier());
    if (boundary != is_boundary(b.carrier()) || is_dual(a.carrier()) == is_dual(b.carrier())) {
        throw DegreeError("wedge needs one primal and one dual factor on the same domain, got " + to_string(a.space())
                          + " and " + to_string(b.space()));
    }
    const int m = boundary ? n - 1 : n;
    const Cochain& primal = is_dual(a.carrier()) ? b : a;
    const Cochain& dual = is_dual(a.carrier()) ? a : b;
    const int k = primal.degree();
    if (primal.degree() + dual.degree() != m) {
        throw DegreeError("wedge degrees " + std::to_string(a.degree()) + " and " + std::to_string(b.degree())
                          + " are not complementary in dimension " + std::to_string(m));
    }
    const double dot = primal.values().dot(dual.values());
    return is_dual(a.carrier()) ? detail::parity_sign(k * (m - k)) * dot : dot;
}

/// Residual of discrete integration by parts
///   <d alpha ^ b_i, K> + (-1)^(k-1) <alpha ^ (d_i b_i + d_b b_b), K> - <tr alpha ^ b_b, dK>
/// for a primal (k-1)-cochain alpha, b_i in DualInterior n-k and b_b in DualBoundary n-k.
inline double check_evaluation_by_parts(const SimplicialComplex& K, const Cochain& alpha, const Cochain& beta_i,
                                        const Cochain& beta_b)
{
    const int n = K.dimension();
    const int k = alpha.degree() + 1;
    if (alpha.carrier() != Carrier::Primal || k < 1 || k > n) {
        throw DegreeError("alpha must be a primal cochain of degree 0.." + std::to_string(n - 1));
    }
    if (!(beta_i.space() == Space{Carrier::DualInterior, n - k})) {
        throw DegreeError("interior dual cochain must live in " + to_string(Space{Carrier::DualInterior, n - k}));
    }
    if (!(beta_b.space() == Space{Carrier::DualBoundary, n - k})) {
        throw DegreeError("boundary dual cochain must live in " + to_string(Space{Carrier::DualBoundary, n - k}));
    }
    const Cochain da = coboundary(K, k - 1).apply(alpha);
    const Cochain di = dual_derivative_interior(K, n - k).apply(beta_i);
    const Cochain db = dual_derivative_boundary(K, n - k).apply(beta_b);
    const Cochain dual_sum(K, di.space(), di.values() + db.values());
    const Cochain tr = trace(K, k - 1).apply(alpha);
    const double lhs = wedge_eval(K, da, beta_i) + detail::parity_sign(k - 1) * wedge_eval(K, alpha, dual_sum);
    return std::abs(lhs - wedge_eval(K, tr, beta_b));
}

/// Every operator of a complex, assembled once. Metric operators (Hodge stars)
/// are present only when a dual complex was supplied.
class OperatorSet {
public:
    explicit OperatorSet(SimplicialComplex K)
        : K_(std::move(K))
    {
        assemble_topology();
    }

    OperatorSet(SimplicialComplex K, const DualComplex& D)
        : K_(std::move(K))
    {
        assemble_topology();
        for (int k = 0; k <= n(); ++k) {
            star_.push_back(hodge(K_, D, k));
            star_inv_.push_back(hodge_inv(K_, D, k));
        }
        for (int k = 0; k < n(); ++k) {
            star_b_.push_back(hodge_boundary(K_, D, k));
            star_b_inv_.push_back(hodge_boundary_inv(K_, D, k));
        }
    }

    const SimplicialComplex& complex() const noexcept { return K_; }
    int n() const noexcept { return K_.dimension(); }
    bool has_metric() const noexcept { return !star_.empty(); }

    const LinearOp& d(int k) const { return at(d_, k, "d"); }
    const LinearOp& tr(int k) const { return at(tr_, k, "tr"); }
    const LinearOp& d_interior(int j) const { return at(di_, j, "d_i"); }
    const LinearOp& d_boundary(int j) const { return at(db_, j, "d_b"); }
    const LinearOp& star(int k) const { return at(star_, k, "star"); }
    const LinearOp& star_inv(int k) const { return at(star_inv_, k, "star_inv"); }
    const LinearOp& star_b(int k) const { return at(star_b_, k, "star_b"); }
    const LinearOp& star_b_inv(int k) const { return at(star_b_inv_, k, "star_b_inv"); }

    /// (file-friendly name, operator) for every assembled operator.
    std::vector<std::pair<std::string, const LinearOp*>> named() const
    {
        std::vector<std::pair<std::string, const LinearOp*>> out;
        const auto add = [&](const std::string& prefix, const std::vector<LinearOp>& ops) {
            for (std::size_t i = 0; i < ops.size(); ++i) {
                out.emplace_back(prefix + std::to_string(i), &ops[i]);
            }
        };
        add("d", d_);
        add("tr", tr_);
        add("di", di_);
        add("db", db_);
        add("star", star_);
        add("starb", star_b_);
        return out;
    }

private:
    void assemble_topology()
    {
        for (int k = 0; k < n(); ++k) {
            d_.push_back(coboundary(K_, k));
            tr_.push_back(trace(K_, k));
            di_.push_back(dual_derivative_interior(K_, k));
            db_.push_back(dual_derivative_boundary(K_, k));
        }
    }

    static const LinearOp& at(const std::vector<LinearOp>& ops, int k, const char* name)
    {
        if (k < 0 || k >= static_cast<int>(ops.size())) {
            throw DegreeError(std::string(name) + " degree " + std::to_string(k) + " not available");
        }
        return ops[static_cast<std::size_t>(k)];
    }

    SimplicialComplex K_;
    std::vector<LinearOp> d_, tr_, di_, db_, star_, star_inv_, star_b_, star_b_inv_;
};

} // namespace sphs
