// Copyright 2026 The femlr Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <femlr/assembly.hpp>
#include <femlr/coherent.hpp>
#include <femlr/dynamics.hpp>
#include <femlr/mesh.hpp>
#include <femlr/response.hpp>
#include <femlr/spectral.hpp>

#include <json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace femlr {

enum class Method { CG, TO };

struct ModelConfig
{
    std::string name = "standard_map"; // standard_map | double_gyre | identity
    double a = 0.98;
    double t0 = 0.0;
    double t1 = 0.6;
    MapDotFrame frame = MapDotFrame::Lagrangian;
};

struct MeshConfig
{
    Index nx = 100;
    Index ny = 100;
    bool periodic = true;
    Rect extents{0.0, 0.0, 6.283185307179586, 6.283185307179586};
};

struct ExperimentConfig
{
    ModelConfig model;
    MeshConfig mesh;
    Method method = Method::CG;
    int quadrature_degree = 2;
    BoundaryKind boundary = BoundaryKind::Neumann;
    Index eigen_count = 6;
    /// Defaults to the first nontrivial pair (1 for Neumann/torus, 0 for Dirichlet).
    std::optional<Index> target_index;
    std::vector<double> eps{0.5};
    /// Re-solve at each ε to report λ_ε and the prediction error.
    bool validate_true = false;
    std::vector<double> fd_eps{1e-2, 1e-3};
    Index line_search_grid = 100;
    bool line_search_full_range = false;
    int subdivisions = 8;
    double grad_floor = -1.0;
    std::filesystem::path output_dir;
    int threads = 1;

    /// Throws Error (stage "config") on inconsistent settings.
    void validate() const;
    Index target() const;
};

nlohmann::json to_json(const ExperimentConfig& config);
/// Fields absent from `j` keep the values of `base`.
ExperimentConfig config_from_json(const nlohmann::json& j, const ExperimentConfig& base = {});

/// Embedded configurations: "standard-map", "double-gyre", "laplace-rectangle", "laplace-dirichlet".
ExperimentConfig preset(const std::string& name);
std::vector<std::string> preset_names();

/// Built-in model registry keyed by ModelConfig::name.
DynamicsFamily make_family(const ModelConfig& model, const MeshConfig& mesh);

TriMesh make_mesh(const MeshConfig& mesh);

/// Discrete operators for one value of the parameter.
struct Operators
{
    SparseMatrix K;
    SparseMatrix L;
    std::optional<TriMesh> image_mesh;
};

Operators discretize(const ExperimentConfig& config, const TriMesh& mesh, const DynamicsModel& model);

/// Eigenpairs of (K, M) under the configured boundary condition, expanded to full length.
std::vector<EigenPair> solve_spectrum(const ExperimentConfig& config, const TriMesh& mesh, const SparseMatrix& K,
    const SparseMatrix& M);

struct EpsilonResult
{
    double eps = 0.0;
    double lambda_pred = 0.0;
    std::optional<double> lambda_true;
    std::optional<double> lambda_rel_error; // |pred − true| / |true|
    std::optional<double> rel_l2_error;     // ‖u_ε − (u₀ + εu̇₀)‖_M / ‖u₀‖_M
    VectorX u_pred;
    std::optional<VectorX> u_true;
};

struct RunReport
{
    double lambda0 = 0.0;
    double lambda_dot = 0.0;
    double lambda_dot_rayleigh = 0.0;
    double eigen_residual = 0.0;
    double response_residual = 0.0;
    double orthogonality = 0.0;
    /// Multiplicity of λ₀ among the computed pairs.
    Index multiplicity = 1;
    /// See ResponsePair::coupling and ClusterChoice::split.
    double coupling = 0.0;
    double cluster_split = 0.0;
    double c_star = 0.0;
    double h_star = 0.0;
    std::vector<EpsilonResult> eps;
    std::vector<std::pair<std::string, double>> timings; // seconds per stage

    nlohmann::json to_json() const;
};

/// Everything a run produces, for callers that need more than the report.
struct RunResult
{
    RunReport report;
    TriMesh mesh;
    SparseMatrix M;
    Operators ops;
    std::vector<EigenPair> pairs;
    EigenPair target;
    ResponsePair response;
    LineSearchResult line_search;
    LevelSetCurve level_set;
    LevelVelocityField velocity;
};

///
/// mesh → dynamics → assembly → eigs → response → prediction → (optional)
/// true-ε re-solve → line search → level velocity. Writes all exports to
/// config.output_dir when it is set. Errors carry the failing stage.
///
RunResult run(const ExperimentConfig& config);

/// Writes report.json, spectrum.csv, eigvec_<i>.csv, u0.csv, response.csv,
/// scalars.json, levelset.csv, vlevel.csv and mesh.vtk.
void write_outputs(const ExperimentConfig& config, const RunResult& result);

struct CompareReport
{
    double lambda_cg = 0.0;
    double lambda_to = 0.0;
    double lambda_rel_gap = 0.0;
    double lambda_dot_cg = 0.0;
    double lambda_dot_to = 0.0;
    double u0_distance = 0.0;    // ‖u_CG − u_TO‖_M after sign alignment
    double u_dot_distance = 0.0; // ‖u̇_CG − u̇_TO‖_M with the same alignment
    double k_rel_distance = 0.0; // ‖K_CG − K_TO‖_F / ‖K_CG‖_F

    nlohmann::json to_json() const;
};

/// Runs the CG and TO discretisations on the same mesh (no true-ε re-solve).
CompareReport compare_methods(const ExperimentConfig& config);

/// Re-solves at ±ε for every config.fd_eps and checks the response against central differences.
FdReport validate_fd(const ExperimentConfig& config);
nlohmann::json to_json(const FdReport& report);

} // namespace femlr
