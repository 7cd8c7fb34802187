#include "CLI11.hpp"
#include "commands.hpp"

#include <iostream>

namespace {

std::vector<int> parse_list(const std::string& text)
{
    std::vector<int> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        std::size_t used = 0;
        int v = 0;
        try {
            v = std::stoi(item, &used);
        } catch (const std::logic_error&) {
            used = 0;
        }
        if (used != item.size() || item.empty()) {
            throw sphs::cli::InputError("bad entry '" + item + "' in --n");
        }
        out.push_back(v);
    }
    return out;
}

} // namespace

int main(int argc, char** argv)
{
    using namespace sphs::cli;
    CLI::App app{"Simplicial Dirac structures and port-Hamiltonian simulation"};
    app.require_subcommand(1);
    RunConfig cfg;
    std::string n_list;

    const auto mesh_opt = [&](CLI::App* c, bool required) {
        auto* o = c->add_option("--mesh", cfg.mesh, "mesh file, or line:N for a uniform N-edge line");
        if (required) {
            o->required();
        }
    };
    const auto seed_opts = [&](CLI::App* c) {
        c->add_option("--trials", cfg.trials, "random trials")->capture_default_str();
        c->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
    };

    auto* check = app.add_subcommand("check", "validate a mesh and its dual");
    mesh_opt(check, true);
    seed_opts(check);

    auto* dump = app.add_subcommand("dump-operators", "write operator matrices as triplet files");
    mesh_opt(dump, true);
    dump->add_option("--out", cfg.out, "output directory")->required();

    auto* certify = app.add_subcommand("certify", "certify a simplicial Dirac structure");
    mesh_opt(certify, true);
    certify->add_option("--flavor", cfg.flavor, "A or B")->capture_default_str();
    certify->add_option("--p", cfg.p, "flow degree p (default n)");
    certify->add_option("--q", cfg.q, "flow degree q (default n + 1 - p)");
    seed_opts(certify);

    auto* sim = app.add_subcommand("simulate", "integrate a model file");
    sim->add_option("--model", cfg.model, "model file")->required();
    sim->add_option("--dt", cfg.dt, "time step");
    sim->add_option("--T", cfg.T, "final time");
    sim->add_option("--out", cfg.out, "directory for trajectory.txt and manifest.json");

    auto* conv = app.add_subcommand("converge", "standing-wave convergence sweep on the telegraph line");
    conv->add_option("--model", cfg.model, "telegraph model file supplying C, L, length and causality");
    conv->add_option("--n", n_list, "comma-separated segment counts")->default_str("8,16,32,64");
    conv->add_option("--dt", cfg.dt, "time step at the smallest n, scaled by (n0/n)^2");
    conv->add_option("--causality", cfg.causality, "voltage or current");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (!n_list.empty()) {
            cfg.segments = parse_list(n_list);
        }
        if (*check) {
            return cmd_check(cfg, std::cout);
        }
        if (*dump) {
            return cmd_dump_operators(cfg, std::cout);
        }
        if (*certify) {
            return cmd_certify(cfg, std::cout);
        }
        if (*sim) {
            return cmd_simulate(cfg, std::cout);
        }
        if (*conv) {
            return cmd_converge(cfg, std::cout);
        }
    } catch (const sphs::NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const sphs::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
