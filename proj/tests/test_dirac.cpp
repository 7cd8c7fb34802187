#include "catch_amalgamated.hpp"

#include "fixtures.hpp"
#include "sphs/dirac.hpp"
#include "sphs/dual.hpp"

#include <random>

using namespace sphs;
using Block = DiracStructure::Block;

namespace {

struct Case {
    std::string name;
    SimplicialComplex K;
    Flavor flavor;
    int p, q;
};

std::vector<Case> cases()
{
    std::vector<Case> out;
    for (const auto& [name, K] : fixtures::well_centered_meshes()) {
        for (Flavor f : {Flavor::A, Flavor::B}) {
            if (K.dimension() == 1) {
                out.push_back({name, K, f, 1, 1});
            } else {
                out.push_back({name, K, f, 2, 1});
                out.push_back({name, K, f, 1, 2});
            }
        }
    }
    return out;
}

std::string label(const Case& c)
{
    return c.name + " flavor " + to_string(c.flavor) + " p=" + std::to_string(c.p) + " q=" + std::to_string(c.q);
}

} // namespace

TEST_CASE("both flavors are Dirac structures on every mesh and degree pair", "[dirac]")
{
    for (const Case& c : cases()) {
        INFO(label(c));
        const OperatorSet ops(c.K);
        const DiracStructure D(ops, c.flavor, c.p, c.q);
        const DiracReport rep = certify_dirac(D, 100, 42);
        CHECK(rep.worst_isotropy <= 1e-11);
        CHECK(rep.basis_isotropy <= 1e-11);
        CHECK(rep.graph_dimension == rep.flow_dimension);
        CHECK(rep.passed());
    }
}

TEST_CASE("negating any single block breaks isotropy", "[dirac]")
{
    for (const Case& c : cases()) {
        INFO(label(c));
        const OperatorSet ops(c.K);
        const DiracStructure D(ops, c.flavor, c.p, c.q);
        for (Block b : {Block::Derivative, Block::DualDerivative, Block::DualBoundary, Block::Trace}) {
            INFO("block " << static_cast<int>(b));
            const DiracReport rep = certify_dirac(D.with_flipped(b), 20, 3);
            CHECK_FALSE(rep.isotropic());
            CHECK_FALSE(rep.passed());
        }
    }
}

TEST_CASE("the pairing is symmetric", "[dirac]")
{
    const auto K = fixtures::equilateral_lattice(2, 2);
    const OperatorSet ops(K);
    for (Flavor f : {Flavor::A, Flavor::B}) {
        const DiracStructure D(ops, f, 2, 1);
        const Eigen::MatrixXd W = pairing_matrix(D);
        CHECK((W - W.transpose()).cwiseAbs().maxCoeff() == 0.0);
        std::mt19937_64 rng(4);
        for (int i = 0; i < 10; ++i) {
            const PortTuple a = detail::random_element(D, rng);
            PortTuple b = detail::random_element(D, rng);
            // Perturb b off the graph so the pairing is generally nonzero.
            b.f2 += detail::random_vector(rng, D.size2());
            CHECK(bilinear_pairing(D, a, b) == Catch::Approx(bilinear_pairing(D, b, a)));
        }
    }
}

TEST_CASE("wave equation relations on the two triangles", "[dirac]")
{
    // f_p = -d_i e_q - d_b e_b,  f_q = d e_p,  f_b = tr e_p.
    const auto K = fixtures::well_centered_meshes().front().complex;
    const OperatorSet ops(K);
    const DiracStructure D(ops, Flavor::A, 2, 1);
    std::mt19937_64 rng(8);
    const Vector ep = detail::random_vector(rng, K.count(0));
    const Vector eq = detail::random_vector(rng, K.count(1));
    const Vector eb = detail::random_vector(rng, 4);
    const PortTuple t = D.element(ep, eq, eb);
    const Vector fp = -(ops.d_interior(1).matrix() * eq) - ops.d_boundary(1).matrix() * eb;
    CHECK((t.f1 - fp).norm() < 1e-14);
    CHECK((t.f2 - ops.d(0).matrix() * ep).norm() < 1e-14);
    CHECK((t.fb - ops.tr(0).matrix() * ep).norm() < 1e-14);
    CHECK(D.flow1() == Space{Carrier::DualInterior, 2});
    CHECK(D.flow2() == Space{Carrier::Primal, 1});
    CHECK(D.effort_boundary() == Space{Carrier::DualBoundary, 1});
}

TEST_CASE("telegraph relations for both causalities", "[dirac]")
{
    const auto K = uniform_line(4);
    const OperatorSet ops(K);
    std::mt19937_64 rng(2);
    SECTION("voltage input")
    {
        // -dq/dt = d e_q, -dphi/dt = d_i e_p + d_b f_b, e_b = -tr e_q.
        const DiracStructure D(ops, Flavor::B, 1, 1);
        const Vector ep = detail::random_vector(rng, D.size1());
        const Vector eq = detail::random_vector(rng, D.size2());
        const Vector fb = detail::random_vector(rng, 2);
        const PortTuple t = D.element(ep, eq, fb);
        CHECK((t.f1 - ops.d(0).matrix() * eq).norm() < 1e-14);
        CHECK((t.f2 - ops.d_interior(0).matrix() * ep - ops.d_boundary(0).matrix() * fb).norm() < 1e-14);
        CHECK((t.eb + ops.tr(0).matrix() * eq).norm() < 1e-14);
    }
    SECTION("current input")
    {
        const DiracStructure D(ops, Flavor::A, 1, 1);
        const Vector e1 = detail::random_vector(rng, D.size1());
        const Vector e2 = detail::random_vector(rng, D.size2());
        const Vector w = detail::random_vector(rng, 2);
        const PortTuple t = D.element(e1, e2, w);
        CHECK((t.f1 - ops.d_interior(0).matrix() * e2 - ops.d_boundary(0).matrix() * w).norm() < 1e-14);
        CHECK((t.f2 - ops.d(0).matrix() * e1).norm() < 1e-14);
        CHECK((t.fb + ops.tr(0).matrix() * e1).norm() < 1e-14);
    }
}

TEST_CASE("flavor A interior dynamics are Poisson", "[dirac]")
{
    for (const Case& c : cases()) {
        if (c.flavor != Flavor::A) {
            continue;
        }
        INFO(label(c));
        const OperatorSet ops(c.K);
        const PoissonReport rep = certify_poisson(DiracStructure(ops, c.flavor, c.p, c.q), 100, 5);
        CHECK(rep.worst_residual <= 1e-12);
        CHECK(rep.skew_defect == 0.0);
    }
    const OperatorSet ops(uniform_line(3));
    CHECK_THROWS_AS(certify_poisson(DiracStructure(ops, Flavor::B, 1, 1), 1, 1), DegreeError);
}

TEST_CASE("degrees must add up to n + 1", "[dirac]")
{
    const OperatorSet ops2(fixtures::hexagon_fan());
    CHECK_THROWS_AS(DiracStructure(ops2, Flavor::A, 2, 2), DegreeError);
    CHECK_THROWS_AS(DiracStructure(ops2, Flavor::A, 3, 0), DegreeError);
    const OperatorSet ops1(uniform_line(3));
    CHECK_THROWS_AS(DiracStructure(ops1, Flavor::B, 2, 0), DegreeError);
    const DiracStructure D(ops1, Flavor::A, 1, 1);
    CHECK_THROWS_AS(D.element(Vector::Zero(1), Vector::Zero(1), Vector::Zero(2)), DimensionError);
}
