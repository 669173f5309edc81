// Copyright 2026 The femlr Authors.
// SPDX-License-Identifier: Apache-2.0

#include <femlr/experiment.hpp>
#include <femlr/io.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>

namespace {

struct CommonFlags
{
    std::string config_path;
    std::string preset = "standard-map";
    std::string method;
    std::vector<double> eps;
    std::string out;
    int threads = 0;
    bool validate_true = false;
    bool no_validate_true = false;
};

void add_common(CLI::App* cmd, CommonFlags& f)
{
    cmd->add_option("--config", f.config_path, "JSON configuration merged onto the preset")->check(CLI::ExistingFile);
    cmd->add_option("--preset", f.preset, "Base configuration")->capture_default_str();
    cmd->add_option("--method", f.method, "Discretisation")->check(CLI::IsMember({"cg", "to"}));
    cmd->add_option("--eps", f.eps, "Perturbation sizes")->delimiter(',');
    cmd->add_option("--out", f.out, "Output directory");
    cmd->add_option("--threads", f.threads, "Worker threads")->check(CLI::PositiveNumber);
}

femlr::ExperimentConfig resolve(const CommonFlags& f)
{
    femlr::ExperimentConfig c = femlr::preset(f.preset);
    if (!f.config_path.empty()) {
        std::ifstream in(f.config_path);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw femlr::Error(f.config_path + ": " + e.what(), "config");
        }
        c = femlr::config_from_json(j, c);
    }
    if (!f.method.empty()) c.method = f.method == "cg" ? femlr::Method::CG : femlr::Method::TO;
    if (!f.eps.empty()) c.eps = f.eps;
    if (!f.out.empty()) c.output_dir = f.out;
    if (f.threads > 0) c.threads = f.threads;
    if (f.validate_true) c.validate_true = true;
    if (f.no_validate_true) c.validate_true = false;
    return c;
}

void emit(const nlohmann::json& j, const std::filesystem::path& dir, const std::string& file)
{
    std::cout << j.dump(2) << '\n';
    if (!dir.empty()) {
        auto os = femlr::io::open_output(dir / file);
        os << j.dump(2) << '\n';
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Dynamic Laplacian coherent sets and their linear response"};
    app.require_subcommand(1);

    CommonFlags run_flags, cmp_flags, fd_flags, mesh_flags;

    auto* run = app.add_subcommand("run", "Full pipeline with exports");
    add_common(run, run_flags);
    run->add_flag("--validate-true", run_flags.validate_true, "Re-solve at every eps");
    run->add_flag("--no-validate-true", run_flags.no_validate_true, "Skip the re-solve");

    auto* cmp = app.add_subcommand("compare", "CG against TO on the same mesh");
    add_common(cmp, cmp_flags);

    auto* fd = app.add_subcommand("validate-fd", "Central-difference check of the response");
    add_common(fd, fd_flags);
    std::vector<double> fd_eps;
    fd->add_option("--fd-eps", fd_eps, "Difference steps")->delimiter(',');

    auto* mesh = app.add_subcommand("mesh-dump", "Write the mesh as VTK and CSV");
    add_common(mesh, mesh_flags);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            const auto config = resolve(run_flags);
            const auto result = femlr::run(config);
            std::cout << result.report.to_json().dump(2) << '\n';
        } else if (cmp->parsed()) {
            const auto config = resolve(cmp_flags);
            emit(femlr::compare_methods(config).to_json(), config.output_dir, "compare.json");
        } else if (fd->parsed()) {
            auto config = resolve(fd_flags);
            if (!fd_eps.empty()) config.fd_eps = fd_eps;
            emit(femlr::to_json(femlr::validate_fd(config)), config.output_dir, "validate_fd.json");
        } else if (mesh->parsed()) {
            auto config = resolve(mesh_flags);
            if (config.output_dir.empty()) config.output_dir = ".";
            config.validate();
            const auto m = femlr::make_mesh(config.mesh);
            femlr::io::write_vtk(m, config.output_dir / "mesh.vtk");
            femlr::io::write_mesh_csv(m, config.output_dir / "nodes.csv", config.output_dir / "tris.csv");
            std::cout << m.node_count() << " nodes, " << m.triangle_count() << " triangles\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
