#pragma once

// Subcommands of the sphs tool. Each writes one JSON report to `out` and
// returns the exit code: 0 pass, 1 check failure, 2 input error (thrown as
// sphs::Error and mapped by the caller).

#include "json.hpp"

#include "sphs/dirac.hpp"
#include "sphs/dual.hpp"
#include "sphs/errors.hpp"
#include "sphs/expression.hpp"
#include "sphs/io.hpp"
#include "sphs/mesh.hpp"
#include "sphs/models.hpp"
#include "sphs/operators.hpp"
#include "sphs/phs.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

namespace sphs::cli {

using Json = nlohmann::ordered_json;

struct RunConfig {
    std::string mesh;
    std::string model;
    std::string out;
    std::string flavor = "A";
    std::optional<int> p;
    std::optional<int> q;
    std::optional<double> dt;
    std::optional<double> T;
    int trials = 100;
    std::uint64_t seed = 1;
    std::vector<int> segments;
    std::string causality;
};

/// Raised for malformed command-line input; exit code 2.
class InputError : public Error {
public:
    using Error::Error;
};

inline void emit(std::ostream& out, const Json& j) { out << j.dump(2) << "\n"; }

/// "line:N" is a uniform N-edge unit line, anything else a mesh file.
inline SimplicialComplex load_mesh(const std::string& source)
{
    if (source.empty()) {
        throw InputError("--mesh is required");
    }
    if (source.rfind("line:", 0) == 0) {
        const std::string count = source.substr(5);
        long n = 0;
        try {
            std::size_t used = 0;
            n = std::stol(count, &used);
            if (used != count.size()) {
                throw InputError("bad line size '" + count + "'");
            }
        } catch (const std::logic_error&) {
            throw InputError("bad line size '" + count + "'");
        }
        if (n < 1 || n > 1000000) {
            throw InputError("line size must be between 1 and 1000000");
        }
        return uniform_line(static_cast<int>(n));
    }
    return read_mesh(source);
}

inline Flavor parse_flavor(const std::string& s)
{
    if (s == "A" || s == "a") {
        return Flavor::A;
    }
    if (s == "B" || s == "b") {
        return Flavor::B;
    }
    throw InputError("flavor must be A or B, got '" + s + "'");
}

inline Json counts_json(const SimplicialComplex& K)
{
    Json c = Json::array();
    for (int k = 0; k <= K.dimension(); ++k) {
        c.push_back(K.count(k));
    }
    return c;
}

// ---------------------------------------------------------------- check

namespace detail {

/// Largest |entry| of the integer product a * b.
inline int max_abs_product(const IntSparse& a, const IntSparse& b)
{
    const IntSparse p = a * b;
    int m = 0;
    for (int c = 0; c < p.outerSize(); ++c) {
        for (IntSparse::InnerIterator it(p, c); it; ++it) {
            m = std::max(m, std::abs(it.value()));
        }
    }
    return m;
}

inline Vector random_cochain(const SimplicialComplex& K, const Space& s, std::mt19937_64& rng)
{
    return sphs::detail::random_vector(rng, space_size(K, s));
}

} // namespace detail

/// Worst relative evaluation-by-parts residual over `trials` random triples for every k.
inline double evaluation_by_parts_residual(const SimplicialComplex& K, int trials, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    const int n = K.dimension();
    double worst = 0.0;
    for (int k = 1; k <= n; ++k) {
        const Space sa{Carrier::Primal, k - 1};
        const Space si{Carrier::DualInterior, n - k};
        const Space sb{Carrier::DualBoundary, n - k};
        for (int t = 0; t < trials; ++t) {
            const Cochain a(K, sa, detail::random_cochain(K, sa, rng));
            const Cochain bi(K, si, detail::random_cochain(K, si, rng));
            const Cochain bb(K, sb, detail::random_cochain(K, sb, rng));
            const double scale = std::max(a.values().norm() * (bi.values().norm() + bb.values().norm()), 1e-300);
            worst = std::max(worst, check_evaluation_by_parts(K, a, bi, bb) / scale);
        }
    }
    return worst;
}

inline int cmd_check(const RunConfig& cfg, std::ostream& out)
{
    Json r;
    r["command"] = "check";
    r["mesh"] = cfg.mesh;
    std::optional<SimplicialComplex> built;
    try {
        built = load_mesh(cfg.mesh);
    } catch (const ParseError&) {
        throw;
    } catch (const InputError&) {
        throw;
    } catch (const Error& e) {
        r["valid"] = false;
        r["error"] = e.what();
        r["passed"] = false;
        emit(out, r);
        return 1;
    }
    const SimplicialComplex& K = *built;
    r["valid"] = true;
    r["mesh_hash"] = mesh_hash(K);
    r["dimension"] = K.dimension();
    r["counts"] = counts_json(K);
    bool ok = true;
    Json checks;

    int bb = 0;
    for (int k = 1; k < K.dimension(); ++k) {
        bb = std::max(bb, detail::max_abs_product(K.incidence(k), K.incidence(k + 1)));
    }
    checks["boundary_of_boundary"] = {{"max_abs_entry", bb}, {"passed", bb == 0}};
    ok = ok && bb == 0;

    int dd = 0;
    for (int k = 0; k + 2 <= K.dimension(); ++k) {
        const IntSparse d0 = IntSparse(K.incidence(k + 1).transpose());
        const IntSparse d1 = IntSparse(K.incidence(k + 2).transpose());
        dd = std::max(dd, detail::max_abs_product(d1, d0));
    }
    checks["dd"] = {{"max_abs_entry", dd}, {"passed", dd == 0}};
    ok = ok && dd == 0;

    const double ebp = evaluation_by_parts_residual(K, cfg.trials, cfg.seed);
    checks["evaluation_by_parts"] = {{"trials", cfg.trials}, {"worst_relative_residual", ebp}, {"passed", ebp <= 1e-12}};
    ok = ok && ebp <= 1e-12;

    const WellCenteredReport wc = is_well_centered(K);
    Json violators = Json::array();
    for (const auto& [k, i] : wc.violators) {
        violators.push_back({{"degree", k}, {"index", i}});
    }
    checks["well_centered"] = {{"passed", wc.well_centered()}, {"violators", violators}};
    ok = ok && wc.well_centered();

    if (wc.well_centered()) {
        const DualComplex D = build_dual(K);
        const double orth = orthogonality_defect(K, D);
        const double vol = support_volume_defect(K, D);
        const double tile = boundary_tiling_defect(D);
        checks["orthogonality"] = {{"defect", orth}, {"passed", orth <= 1e-12}};
        checks["support_volume_partition"] = {{"relative_defect", vol}, {"passed", vol <= 1e-12}};
        checks["boundary_tiling"] = {{"relative_defect", tile}, {"passed", tile <= 1e-12}};
        ok = ok && orth <= 1e-12 && vol <= 1e-12 && tile <= 1e-12;
    } else {
        checks["orthogonality"] = {{"skipped", "not well-centered"}};
        checks["support_volume_partition"] = {{"skipped", "not well-centered"}};
        checks["boundary_tiling"] = {{"skipped", "not well-centered"}};
    }
    r["checks"] = checks;
    r["passed"] = ok;
    emit(out, r);
    return ok ? 0 : 1;
}

// ---------------------------------------------------------------- dump-operators

inline Json space_json(const Space& s) { return {{"carrier", to_string(s.carrier)}, {"degree", s.degree}}; }

inline int cmd_dump_operators(const RunConfig& cfg, std::ostream& out)
{
    if (cfg.out.empty()) {
        throw InputError("--out is required");
    }
    const SimplicialComplex K = load_mesh(cfg.mesh);
    const bool metric = is_well_centered(K).well_centered();
    std::optional<DualComplex> D;
    if (metric) {
        D = build_dual(K);
    }
    const OperatorSet ops = metric ? OperatorSet(K, *D) : OperatorSet(K);

    namespace fs = std::filesystem;
    const fs::path dir(cfg.out);
    fs::create_directories(dir);
    const auto write = [&](const std::string& name, const auto& fn) {
        std::ofstream f(dir / name);
        if (!f) {
            throw InputError("cannot write '" + (dir / name).string() + "'");
        }
        fn(f);
    };

    Json r;
    r["command"] = "dump-operators";
    r["mesh"] = cfg.mesh;
    r["mesh_hash"] = mesh_hash(K);
    r["dimension"] = K.dimension();
    r["counts"] = counts_json(K);
    r["metric"] = metric;
    Json list = Json::array();
    for (int k = 1; k <= K.dimension(); ++k) {
        const std::string file = "boundary" + std::to_string(k) + ".mtx";
        const SparseMatrix m = K.incidence(k).cast<double>();
        write(file, [&](std::ostream& f) { write_triplets(f, m); });
        list.push_back({{"name", "boundary" + std::to_string(k)},
                        {"file", file},
                        {"rows", m.rows()},
                        {"cols", m.cols()},
                        {"nnz", m.nonZeros()}});
    }
    for (const auto& [name, op] : ops.named()) {
        const std::string file = name + ".mtx";
        write(file, [&](std::ostream& f) { write_triplets(f, op->matrix()); });
        list.push_back({{"name", name},
                        {"file", file},
                        {"rows", op->matrix().rows()},
                        {"cols", op->matrix().cols()},
                        {"nnz", op->matrix().nonZeros()},
                        {"domain", space_json(op->domain())},
                        {"codomain", space_json(op->codomain())}});
    }
    if (D) {
        write("dual.txt", [&](std::ostream& f) { write_dual(f, K, *D); });
        r["dual"] = "dual.txt";
    }
    r["operators"] = list;
    write("manifest.json", [&](std::ostream& f) { emit(f, r); });
    emit(out, r);
    return 0;
}

// ---------------------------------------------------------------- certify

inline std::pair<int, int> degrees(const RunConfig& cfg, int n)
{
    const int p = cfg.p.value_or(cfg.q ? n + 1 - *cfg.q : n);
    const int q = cfg.q.value_or(n + 1 - p);
    return {p, q};
}

inline int cmd_certify(const RunConfig& cfg, std::ostream& out)
{
    if (cfg.trials < 1) {
        throw InputError("--trials must be positive");
    }
    const SimplicialComplex K = load_mesh(cfg.mesh);
    const Flavor flavor = parse_flavor(cfg.flavor);
    const auto [p, q] = degrees(cfg, K.dimension());
    const OperatorSet ops(K);
    const DiracStructure D(ops, flavor, p, q);
    const DiracReport rep = certify_dirac(D, cfg.trials, cfg.seed);

    Json r;
    r["command"] = "certify";
    r["mesh"] = cfg.mesh;
    r["mesh_hash"] = mesh_hash(K);
    r["flavor"] = to_string(flavor);
    r["n"] = K.dimension();
    r["p"] = p;
    r["q"] = q;
    r["r"] = D.r();
    r["seed"] = cfg.seed;
    r["trials"] = rep.trials;
    r["worst_isotropy"] = rep.worst_isotropy;
    r["basis_isotropy"] = rep.basis_isotropy;
    r["tolerance"] = rep.tolerance;
    r["flow_dimension"] = rep.flow_dimension;
    r["graph_dimension"] = rep.graph_dimension;
    r["isotropic"] = rep.isotropic();
    r["maximal"] = rep.maximal();

    const DiracReport bad = certify_dirac(D.with_flipped(DiracStructure::Block::DualBoundary), cfg.trials, cfg.seed);
    r["negative_control"] = {{"flipped_block", "d_b"},
                             {"worst_isotropy", bad.worst_isotropy},
                             {"rejected", !bad.isotropic()}};
    bool ok = rep.passed() && !bad.isotropic();
    if (flavor == Flavor::A) {
        const PoissonReport pr = certify_poisson(D, cfg.trials, cfg.seed);
        r["poisson"] = {{"worst_residual", pr.worst_residual}, {"skew_defect", pr.skew_defect}, {"passed", pr.passed()}};
        ok = ok && pr.passed();
    }
    r["passed"] = ok;
    emit(out, r);
    return ok ? 0 : 1;
}

// ---------------------------------------------------------------- model files

struct LoadedModel {
    std::string kind;
    std::optional<Model> model;
    std::optional<TelegraphModel> telegraph;
    std::string mesh_hash;
    Json description;
    double T = 1.0;
    double dt = 0.01;
};

inline Termination parse_termination(const std::string& s)
{
    if (s == "driven") {
        return Termination::Driven;
    }
    if (s == "passive") {
        return Termination::Passive;
    }
    if (s == "antipassive") {
        return Termination::AntiPassive;
    }
    throw InputError("termination must be driven, passive or antipassive, got '" + s + "'");
}

inline Causality parse_causality(const std::string& s)
{
    if (s == "voltage") {
        return Causality::VoltageIn;
    }
    if (s == "current") {
        return Causality::CurrentIn;
    }
    throw InputError("causality must be voltage or current, got '" + s + "'");
}

inline Expression expression(const KeyValues& kv, const std::string& key, const std::string& fallback)
{
    const std::string text = kv.get(key, fallback);
    try {
        return Expression::parse(text);
    } catch (const Error& e) {
        throw ParseError(key + ": " + e.what(), kv.line(key));
    }
}

/// Reads a model file. Wave keys: mesh, density, compliance, initial_velocity,
/// initial_displacement, drive, termination, T, dt. Telegraph keys: segments,
/// length, capacitance, inductance, causality, initial_voltage,
/// initial_current, drive_left, drive_right, termination, T, dt.
inline LoadedModel load_model(const std::string& path)
{
    std::ifstream in = open_input(path);
    KeyValues kv;
    try {
        kv = KeyValues::parse(in);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what(), 0);
    }
    LoadedModel lm;
    lm.kind = kv.require("model");
    lm.T = kv.number("T", 1.0);
    lm.dt = kv.number("dt", 0.01);
    const Termination term = parse_termination(kv.get("termination", "driven"));
    Json d;
    d["kind"] = lm.kind;
    d["termination"] = to_string(term);

    if (lm.kind == "wave") {
        const std::filesystem::path mesh_path =
            std::filesystem::path(path).parent_path() / std::filesystem::path(kv.require("mesh"));
        WaveModelSpec spec;
        spec.mesh = read_mesh(mesh_path.string());
        const SimplicialComplex& K = spec.mesh;
        spec.density = Vector::Constant(1, kv.number("density", 1.0));
        spec.compliance = Vector::Constant(1, kv.number("compliance", 1.0));
        spec.termination = term;
        const Expression velocity = expression(kv, "initial_velocity", "0");
        const Expression displacement = expression(kv, "initial_displacement", "0");
        const Expression drive = expression(kv, "drive", "0");
        d["mesh"] = kv.get("mesh", "");
        d["density"] = spec.density[0];
        d["compliance"] = spec.compliance[0];
        d["initial_velocity"] = velocity.text();
        d["initial_displacement"] = displacement.text();
        d["drive"] = drive.text();
        kv.check_consumed();

        const DualComplex D = build_dual(K);
        const OperatorSet ops(K);
        Vector u(K.count(0));
        spec.momentum = Vector(K.count(0));
        for (int v = 0; v < K.count(0); ++v) {
            const Point& x = K.vertices()[static_cast<std::size_t>(v)];
            spec.momentum[v] = spec.density[0] * velocity(x.x(), x.y(), 0.0) * D.dual_measure(0, v);
            u[v] = displacement(x.x(), x.y(), 0.0);
        }
        spec.strain = ops.d(0).matrix() * u;
        // Boundary effort: drive density times the boundary dual cell measure.
        std::vector<Point> where;
        std::vector<double> weight;
        for (std::size_t i = 0; i < K.boundary_simplices(0).size(); ++i) {
            where.push_back(K.vertices()[static_cast<std::size_t>(K.boundary_simplices(0)[i].index)]);
            weight.push_back(D.boundary_dual_measure(0, static_cast<int>(i)));
        }
        spec.input = [drive, where, weight](double t) {
            Vector w(static_cast<Eigen::Index>(where.size()));
            for (std::size_t i = 0; i < where.size(); ++i) {
                w[static_cast<Eigen::Index>(i)] = weight[i] * drive(where[i].x(), where[i].y(), t);
            }
            return w;
        };
        lm.model = build_wave(spec);
        lm.mesh_hash = mesh_hash(K);
        d["flavor"] = "A";
        d["p"] = 2;
        d["q"] = 1;
    } else if (lm.kind == "telegraph") {
        TelegraphModelSpec spec;
        const long segments = kv.integer("segments", 8);
        if (segments < 1 || segments > 1000000) {
            throw ParseError("segments must be between 1 and 1000000", kv.line("segments"));
        }
        spec.segments = static_cast<int>(segments);
        spec.length = kv.number("length", 1.0);
        spec.capacitance = Vector::Constant(1, kv.number("capacitance", 1.0));
        spec.inductance = Vector::Constant(1, kv.number("inductance", 1.0));
        spec.causality = parse_causality(kv.get("causality", "voltage"));
        spec.termination = term;
        const Expression v0 = expression(kv, "initial_voltage", "0");
        const Expression i0 = expression(kv, "initial_current", "0");
        const Expression left = expression(kv, "drive_left", "0");
        const Expression right = expression(kv, "drive_right", "0");
        kv.check_consumed();
        spec.initial_voltage = [v0](double x) { return v0(x, 0.0, 0.0); };
        spec.initial_current = [i0](double x) { return i0(x, 0.0, 0.0); };
        spec.input = [left, right](double t) {
            Vector u(2);
            u << left(0.0, 0.0, t), right(0.0, 0.0, t);
            return u;
        };
        d["segments"] = spec.segments;
        d["primal_edges"] = 2 * spec.segments;
        d["length"] = spec.length;
        d["capacitance"] = spec.capacitance[0];
        d["inductance"] = spec.inductance[0];
        d["causality"] = to_string(spec.causality);
        d["initial_voltage"] = v0.text();
        d["initial_current"] = i0.text();
        d["drive_left"] = left.text();
        d["drive_right"] = right.text();
        TelegraphModel tm = build_telegraph(spec);
        lm.mesh_hash = mesh_hash(tm.ops->complex());
        lm.model = static_cast<const Model&>(tm);
        lm.telegraph = std::move(tm);
        d["flavor"] = spec.causality == Causality::VoltageIn ? "B" : "A";
        d["p"] = 1;
        d["q"] = 1;
    } else {
        throw ParseError("unknown model '" + lm.kind + "'", kv.line("model"));
    }
    lm.description = d;
    return lm;
}

// ---------------------------------------------------------------- simulate

inline int cmd_simulate(const RunConfig& cfg, std::ostream& out)
{
    if (cfg.model.empty()) {
        throw InputError("--model is required");
    }
    const LoadedModel lm = load_model(cfg.model);
    const double T = cfg.T.value_or(lm.T);
    const double dt = cfg.dt.value_or(lm.dt);
    if (!(T >= 0.0) || !(dt > 0.0)) {
        throw InputError("need T >= 0 and dt > 0");
    }
    const PHSystem& sys = lm.model->system;
    const Trajectory tr = simulate(sys, lm.model->initial_state, T, dt);

    double max_power = 0.0, max_mid = 0.0, max_rise = 0.0;
    for (std::size_t k = 0; k < tr.time.size(); ++k) {
        max_power = std::max(max_power, std::abs(tr.power[k]));
        max_mid = std::max(max_mid, std::abs(tr.midpoint_defect[k]));
        if (k > 0) {
            max_rise = std::max(max_rise, tr.energy[k] - tr.energy[k - 1]);
        }
    }
    const double H0 = tr.energy.front();
    Json r;
    r["command"] = "simulate";
    r["model_file"] = cfg.model;
    r["model"] = lm.description;
    r["mesh_hash"] = lm.mesh_hash;
    r["dt"] = tr.dt;
    r["T"] = T;
    r["steps"] = tr.steps();
    r["state_size"] = sys.state_size();
    r["initial_energy"] = H0;
    r["final_energy"] = tr.energy.back();
    r["max_abs_defect"] = tr.max_abs_defect();
    r["max_abs_midpoint_defect"] = max_mid;
    r["max_abs_power"] = max_power;
    r["max_energy_increase_per_step"] = max_rise;
    r["energy_nonincreasing"] = max_rise <= 1e-12 * std::max(H0, 1e-300);
    if (!cfg.out.empty()) {
        namespace fs = std::filesystem;
        fs::create_directories(cfg.out);
        std::ofstream f(fs::path(cfg.out) / "trajectory.txt");
        if (!f) {
            throw InputError("cannot write into '" + cfg.out + "'");
        }
        write_trajectory(f, tr);
        r["trajectory"] = "trajectory.txt";
        std::ofstream m(fs::path(cfg.out) / "manifest.json");
        emit(m, r);
    }
    emit(out, r);
    return 0;
}

// ---------------------------------------------------------------- converge

inline int cmd_converge(const RunConfig& cfg, std::ostream& out)
{
    ConvergenceSpec spec;
    Json base;
    if (!cfg.model.empty()) {
        std::ifstream in = open_input(cfg.model);
        const KeyValues kv = KeyValues::parse(in);
        if (kv.get("model", "telegraph") != "telegraph") {
            throw InputError("convergence sweeps run on telegraph models");
        }
        spec.wave.capacitance = kv.number("capacitance", 1.0);
        spec.wave.inductance = kv.number("inductance", 1.0);
        spec.wave.length = kv.number("length", 1.0);
        spec.causality = parse_causality(kv.get("causality", "voltage"));
        if (spec.wave.capacitance <= 0 || spec.wave.inductance <= 0 || spec.wave.length <= 0) {
            throw InputError("capacitance, inductance and length must be positive");
        }
    }
    if (!cfg.causality.empty()) {
        spec.causality = parse_causality(cfg.causality);
    }
    if (!cfg.segments.empty()) {
        spec.segments = cfg.segments;
    }
    if (cfg.dt) {
        spec.base_dt = *cfg.dt;
    }
    if (!(spec.base_dt > 0.0)) {
        throw InputError("--dt must be positive");
    }
    ConvergenceResult res;
    try {
        res = converge(spec);
    } catch (const DimensionError& e) {
        throw InputError(e.what());
    }

    Json r;
    r["command"] = "converge";
    r["causality"] = to_string(spec.causality);
    r["capacitance"] = spec.wave.capacitance;
    r["inductance"] = spec.wave.inductance;
    r["length"] = spec.wave.length;
    r["T"] = spec.wave.period();
    r["base_dt"] = spec.base_dt;
    r["exact_energy"] = spec.wave.energy();
    Json rows = Json::array();
    for (const auto& row : res.rows) {
        rows.push_back({{"segments", row.segments},
                        {"primal_edges", 2 * row.segments},
                        {"dt", row.dt},
                        {"steps", row.steps},
                        {"l2_error", row.error},
                        {"nodal_error", row.nodal_error},
                        {"energy_error", row.energy_error}});
    }
    r["rows"] = rows;
    r["observed_order"] = res.order;
    r["nodal_order"] = res.nodal_order;
    const bool ok = res.order >= 0.8 && res.order <= 1.2;
    r["order_in_range"] = ok;
    emit(out, r);
    return ok ? 0 : 1;
}

} // namespace sphs::cli
