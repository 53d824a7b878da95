// fmg-eig: convergence studies for the full multigrid eigensolver.
//
//   fmg-eig run --problem model --mesh square:8 --levels 5 --nev 1 --out results.csv
//   fmg-eig mesh --square 4 --out square4.mesh
//
// Exit codes: 0 success, 2 argument error, 3 solver failure, 4 I/O failure.

#include "fmgeig/errors.hpp"
#include "fmgeig/harness.hpp"
#include "fmgeig/kernels.hpp"
#include "fmgeig/mesh.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>

namespace {

constexpr int kExitArgument = 2;
constexpr int kExitSolver = 3;
constexpr int kExitIo = 4;

fmgeig::Mesh resolve_mesh(const std::string& source) {
    const std::string prefix = "square:";
    if (source.rfind(prefix, 0) == 0) {
        const std::string count = source.substr(prefix.size());
        std::size_t used = 0;
        long long nx = -1;
        try {
            nx = std::stoll(count, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != count.size() || nx <= 0)
            throw fmgeig::InvalidArgument("--mesh square:NX needs a positive integer NX");
        return fmgeig::unit_square_mesh(static_cast<std::size_t>(nx));
    }
    return fmgeig::load_mesh_file(source);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Full multigrid eigensolver: convergence studies on nested P1 meshes"};
    app.require_subcommand(1);

    std::string problem = "model";
    std::string mesh_source = "square:8";
    std::string smoother = "cg";
    std::string out_path = "results.csv";
    fmgeig::StudyOptions options;
    bool deterministic = false;
    int threads = 0;

    auto* run = app.add_subcommand("run", "Run a convergence study and write CSV rows");
    run->add_option("--problem", problem, "model | general")
        ->check(CLI::IsMember({"model", "general"}));
    run->add_option("--mesh", mesh_source, "Initial mesh: a mesh file or square:NX");
    run->add_option("--levels", options.n_levels, "Number of mesh levels")
        ->check(CLI::PositiveNumber);
    run->add_option("--nev", options.config.q, "Number of eigenpairs")->check(CLI::PositiveNumber);
    run->add_option("--m", options.config.m, "V-cycles per correction step")
        ->check(CLI::PositiveNumber);
    run->add_option("--p", options.config.p, "Correction steps per level")
        ->check(CLI::PositiveNumber);
    run->add_option("--smooth", options.config.nu, "Pre/post smoothing steps")
        ->check(CLI::PositiveNumber);
    run->add_option("--smoother", smoother, "cg | sgs")->check(CLI::IsMember({"cg", "sgs"}));
    run->add_option("--direct-tol", options.direct_tol, "Tolerance of the direct reference solver")
        ->check(CLI::PositiveNumber);
    run->add_flag("--compare-direct", options.compare_direct,
                  "Also run the direct solver on every level");
    run->add_flag("--seed-free", deterministic,
                  "Byte-reproducible output: wall_ms is written as 0");
    run->add_option("--threads", threads, "OpenMP threads (default: runtime setting)");
    run->add_option("--out", out_path, "Output CSV path");

    std::size_t square_nx = 8;
    std::size_t refinements = 0;
    std::string mesh_out;
    auto* mesh_cmd = app.add_subcommand("mesh", "Write a unit-square mesh file");
    mesh_cmd->add_option("--square", square_nx, "Cells per side")->check(CLI::PositiveNumber);
    mesh_cmd->add_option("--refine", refinements, "Regular refinements to apply");
    mesh_cmd->add_option("--out", mesh_out, "Output mesh path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitArgument;
    }

    try {
        if (*mesh_cmd) {
            fmgeig::Mesh mesh = fmgeig::unit_square_mesh(square_nx);
            for (std::size_t i = 0; i < refinements; ++i)
                mesh = fmgeig::refine_regular(mesh).mesh;
            fmgeig::save_mesh_file(mesh, mesh_out);
            return 0;
        }

        if (threads > 0)
            fmgeig::kernels::set_threads(threads);
        options.problem =
            problem == "model" ? fmgeig::ProblemKind::Model : fmgeig::ProblemKind::General;
        options.config.smoother = smoother == "cg" ? fmgeig::Smoother::ConjugateGradient
                                                   : fmgeig::Smoother::SymmetricGaussSeidel;
        options.record_timing = !deterministic;
        options.initial_mesh = resolve_mesh(mesh_source);

        const auto rows = fmgeig::run_study(options);
        fmgeig::write_csv_file(rows, out_path);
        std::cerr << "wrote " << rows.size() << " level rows to " << out_path << '\n';
        return 0;
    } catch (const fmgeig::IoError& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return kExitIo;
    } catch (const fmgeig::ParseError& e) {
        std::cerr << "mesh error: " << e.what() << '\n';
        return kExitArgument;
    } catch (const fmgeig::InvalidArgument& e) {
        std::cerr << "argument error: " << e.what() << '\n';
        return kExitArgument;
    } catch (const fmgeig::SizingError& e) {
        std::cerr << "argument error: " << e.what() << '\n';
        return kExitArgument;
    } catch (const fmgeig::Error& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        return kExitSolver;
    }
}
