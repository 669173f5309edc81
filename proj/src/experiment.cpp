// Copyright 2026 The femlr Authors.
// SPDX-License-Identifier: Apache-2.0

#include <femlr/experiment.hpp>

#include <femlr/io.hpp>
#include <femlr/log.hpp>
#include <femlr/parallel.hpp>
#include <femlr/quadrature.hpp>

#include <chrono>
#include <cmath>
#include <numbers>

namespace femlr {

namespace {

using json = nlohmann::json;

std::string method_name(Method m) { return m == Method::CG ? "cg" : "to"; }

Method parse_method(const std::string& s)
{
    if (s == "cg") return Method::CG;
    if (s == "to") return Method::TO;
    throw Error("unknown method '" + s + "' (expected cg or to)", "config");
}

std::string boundary_name(BoundaryKind b) { return b == BoundaryKind::Neumann ? "neumann" : "dirichlet"; }

BoundaryKind parse_boundary(const std::string& s)
{
    if (s == "neumann") return BoundaryKind::Neumann;
    if (s == "dirichlet") return BoundaryKind::Dirichlet;
    throw Error("unknown boundary '" + s + "' (expected neumann or dirichlet)", "config");
}

std::string frame_name(MapDotFrame f) { return f == MapDotFrame::Lagrangian ? "lagrangian" : "eulerian"; }

MapDotFrame parse_frame(const std::string& s)
{
    if (s == "lagrangian") return MapDotFrame::Lagrangian;
    if (s == "eulerian") return MapDotFrame::Eulerian;
    throw Error("unknown map_dot_frame '" + s + "'", "config");
}

void reject_unknown_keys(const json& given, const json& known, const std::string& prefix)
{
    if (!given.is_object()) return;
    for (auto it = given.begin(); it != given.end(); ++it) {
        if (!known.contains(it.key())) throw Error("unknown key '" + prefix + it.key() + "'", "config");
        if (known[it.key()].is_object()) reject_unknown_keys(it.value(), known[it.key()], prefix + it.key() + ".");
    }
}

class Stopwatch
{
public:
    explicit Stopwatch(std::vector<std::pair<std::string, double>>& sink) : m_sink(sink) {}

    void lap(const std::string& stage)
    {
        const auto now = std::chrono::steady_clock::now();
        m_sink.emplace_back(stage, std::chrono::duration<double>(now - m_last).count());
        m_last = now;
    }

private:
    std::vector<std::pair<std::string, double>>& m_sink;
    std::chrono::steady_clock::time_point m_last = std::chrono::steady_clock::now();
};

template <typename F>
auto staged(const std::string& stage, F&& fn)
{
    try {
        return fn();
    } catch (const Error& e) {
        if (!e.stage().empty()) throw;
        throw Error(e.what(), stage);
    } catch (const std::exception& e) {
        throw Error(e.what(), stage);
    }
}

/// The pencil restricted to the free nodes of the boundary condition.
struct Reduced
{
    std::vector<Index> keep;
    Index full = 0;
    SparseMatrix K, L, M;

    bool trivial() const { return static_cast<Index>(keep.size()) == full; }
    VectorX extend(const VectorX& v) const { return trivial() ? v : extend_vector(v, keep, full); }
};

Reduced reduce(const std::vector<Index>& keep, Index full, const SparseMatrix& K, const SparseMatrix& L,
    const SparseMatrix& M)
{
    Reduced r{keep, full, K, L, M};
    if (!r.trivial()) {
        r.K = restrict_matrix(K, keep);
        r.L = restrict_matrix(L, keep);
        r.M = restrict_matrix(M, keep);
    }
    return r;
}

std::vector<EigenPair> reduced_eigs(const ExperimentConfig& config, const SparseMatrix& K, const SparseMatrix& M)
{
    const Index k = std::min<Index>(config.eigen_count, K.rows());
    return eigs(K, M, k);
}

EigenPair expand(const Reduced& r, const EigenPair& p) { return {p.lambda, r.extend(p.u), p.residual}; }

LevelSetOptions level_set_options(const ExperimentConfig& config, const DynamicsModel& model)
{
    LevelSetOptions opts;
    opts.map = model.map;
    opts.image_periods = model.torus_periods;
    opts.subdivisions = config.subdivisions;
    opts.threads = config.threads;
    return opts;
}

void write_nodal_csv(const TriMesh& mesh, const std::filesystem::path& path, const std::vector<std::string>& names,
    const std::vector<const VectorX*>& columns)
{
    auto os = io::open_output(path);
    os << "id,x,y";
    for (const auto& n : names) os << ',' << n;
    os << '\n';
    for (Index i = 0; i < mesh.node_count(); ++i) {
        const Vec2& p = mesh.node(i);
        os << i << ',' << p.x() << ',' << p.y();
        for (const auto* c : columns) os << ',' << (*c)[i];
        os << '\n';
    }
}

void write_json(const std::filesystem::path& path, const json& j)
{
    auto os = io::open_output(path);
    os << j.dump(2) << '\n';
}

} // namespace

// ---------------------------------------------------------------------------
// Configuration

Index ExperimentConfig::target() const
{
    if (target_index) return *target_index;
    return boundary == BoundaryKind::Dirichlet ? 0 : 1;
}

void ExperimentConfig::validate() const
{
    if (mesh.periodic && boundary == BoundaryKind::Dirichlet)
        throw Error("a periodic mesh has no boundary; Dirichlet conditions are not allowed", "config");
    if (mesh.nx < 2 || mesh.ny < 2) throw Error("mesh needs nx, ny >= 2", "config");
    if (!(mesh.extents.width() > 0.0) || !(mesh.extents.height() > 0.0))
        throw Error("mesh extents must have positive width and height", "config");
    if (eigen_count < 1) throw Error("eigen_count must be positive", "config");
    if (target() < 0 || target() >= eigen_count)
        throw Error("target_index " + std::to_string(target()) + " outside [0, eigen_count)", "config");
    if (quadrature_degree < 1 || quadrature_degree > 5) throw Error("quadrature_degree must be in [1, 5]", "config");
    if (line_search_grid < 1) throw Error("line_search.grid_size must be positive", "config");
    if (subdivisions < 1) throw Error("line_search.subdivisions must be positive", "config");
    if (threads < 1) throw Error("threads must be positive", "config");
    for (double e : fd_eps)
        if (!(e > 0.0)) throw Error("fd_eps values must be positive", "config");

    const Rect& ext = mesh.extents;
    if (model.name == "standard_map") {
        const double tau = 2.0 * std::numbers::pi;
        if (!mesh.periodic || ext.x0 != 0.0 || ext.y0 != 0.0 || std::abs(ext.x1 - tau) > 1e-12
            || std::abs(ext.y1 - tau) > 1e-12)
            throw Error("standard_map needs the periodic mesh [0,2pi)^2", "config");
    } else if (model.name == "double_gyre") {
        if (mesh.periodic) throw Error("double_gyre needs a non-periodic mesh", "config");
        if (ext.x0 < 0.0 || ext.y0 < 0.0 || ext.x1 > 1.0 || ext.y1 > 1.0)
            throw Error("double_gyre mesh must lie inside [0,1]^2", "config");
        if (!(model.t1 > model.t0)) throw Error("double_gyre needs t1 > t0", "config");
    } else if (model.name != "identity") {
        throw Error("unknown model '" + model.name + "' (expected standard_map, double_gyre or identity)", "config");
    }
}

json to_json(const ExperimentConfig& c)
{
    json j;
    j["model"] = {{"name", c.model.name}, {"a", c.model.a}, {"t0", c.model.t0}, {"t1", c.model.t1},
        {"map_dot_frame", frame_name(c.model.frame)}};
    j["mesh"] = {{"nx", c.mesh.nx}, {"ny", c.mesh.ny}, {"periodic", c.mesh.periodic},
        {"extents", {c.mesh.extents.x0, c.mesh.extents.y0, c.mesh.extents.x1, c.mesh.extents.y1}}};
    j["method"] = method_name(c.method);
    j["quadrature_degree"] = c.quadrature_degree;
    j["boundary"] = boundary_name(c.boundary);
    j["eigen_count"] = c.eigen_count;
    j["target_index"] = c.target_index ? json(*c.target_index) : json(nullptr);
    j["eps"] = c.eps;
    j["validate_true"] = c.validate_true;
    j["fd_eps"] = c.fd_eps;
    j["line_search"] = {
        {"grid_size", c.line_search_grid}, {"full_range", c.line_search_full_range}, {"subdivisions", c.subdivisions}};
    j["grad_floor"] = c.grad_floor;
    j["output_dir"] = c.output_dir.string();
    j["threads"] = c.threads;
    return j;
}

ExperimentConfig config_from_json(const json& patch, const ExperimentConfig& base)
{
    if (!patch.is_object()) throw Error("configuration must be a JSON object", "config");
    const json known = to_json(base);
    reject_unknown_keys(patch, known, "");
    json j = known;
    j.merge_patch(patch);

    ExperimentConfig c;
    try {
        const json& m = j.at("model");
        c.model.name = m.at("name").get<std::string>();
        c.model.a = m.at("a").get<double>();
        c.model.t0 = m.at("t0").get<double>();
        c.model.t1 = m.at("t1").get<double>();
        c.model.frame = parse_frame(m.at("map_dot_frame").get<std::string>());

        const json& g = j.at("mesh");
        c.mesh.nx = g.at("nx").get<Index>();
        c.mesh.ny = g.at("ny").get<Index>();
        c.mesh.periodic = g.at("periodic").get<bool>();
        const auto ext = g.at("extents").get<std::vector<double>>();
        if (ext.size() != 4) throw Error("mesh.extents must be [x0, y0, x1, y1]", "config");
        c.mesh.extents = {ext[0], ext[1], ext[2], ext[3]};

        c.method = parse_method(j.at("method").get<std::string>());
        c.quadrature_degree = j.at("quadrature_degree").get<int>();
        c.boundary = parse_boundary(j.at("boundary").get<std::string>());
        c.eigen_count = j.at("eigen_count").get<Index>();
        if (j.contains("target_index") && !j["target_index"].is_null())
            c.target_index = j["target_index"].get<Index>();
        c.eps = j.at("eps").get<std::vector<double>>();
        c.validate_true = j.at("validate_true").get<bool>();
        c.fd_eps = j.at("fd_eps").get<std::vector<double>>();
        const json& ls = j.at("line_search");
        c.line_search_grid = ls.at("grid_size").get<Index>();
        c.line_search_full_range = ls.at("full_range").get<bool>();
        c.subdivisions = ls.at("subdivisions").get<int>();
        c.grad_floor = j.at("grad_floor").get<double>();
        c.output_dir = j.at("output_dir").get<std::string>();
        c.threads = j.at("threads").get<int>();
    } catch (const json::exception& e) {
        throw Error(e.what(), "config");
    }
    return c;
}

std::vector<std::string> preset_names()
{
    return {"standard-map", "double-gyre", "laplace-rectangle", "laplace-dirichlet"};
}

ExperimentConfig preset(const std::string& name)
{
    ExperimentConfig c;
    c.validate_true = true;
    if (name == "standard-map") {
        return c;
    }
    if (name == "double-gyre") {
        c.model.name = "double_gyre";
        c.model.t0 = 0.0;
        c.model.t1 = 0.6;
        // 99×99 cells give the 100×100 grid of nodes.
        c.mesh = {99, 99, false, {0.0, 0.0, 1.0, 1.0}};
        c.method = Method::TO;
        c.quadrature_degree = 5;
        c.eps = {0.2};
        return c;
    }
    if (name == "laplace-rectangle") {
        c.model.name = "identity";
        c.mesh = {64, 128, false, {0.0, 0.0, 1.0, 2.0}};
        c.eps = {0.1};
        return c;
    }
    if (name == "laplace-dirichlet") {
        c.model.name = "identity";
        c.mesh = {64, 64, false, {0.0, 0.0, 1.0, 1.0}};
        c.boundary = BoundaryKind::Dirichlet;
        c.eps = {0.1};
        return c;
    }
    throw Error("unknown preset '" + name + "'", "config");
}

// ---------------------------------------------------------------------------
// Pipeline pieces

DynamicsFamily make_family(const ModelConfig& model, const MeshConfig& mesh)
{
    if (model.name == "standard_map") return standard_map_family(model.a);
    if (model.name == "double_gyre")
        return flow_time_family(double_gyre_spec(model.t0, model.t1), model.frame);
    if (model.name == "identity") {
        std::optional<Vec2> periods;
        std::optional<Rect> domain;
        if (mesh.periodic)
            periods = Vec2(mesh.extents.width(), mesh.extents.height());
        else
            domain = mesh.extents;
        return {"identity", [periods, domain](double) { return identity_model(periods, domain); }};
    }
    throw Error("unknown model '" + model.name + "'", "dynamics");
}

TriMesh make_mesh(const MeshConfig& mesh) { return grid_mesh(mesh.nx, mesh.ny, mesh.extents, mesh.periodic); }

Operators discretize(const ExperimentConfig& config, const TriMesh& mesh, const DynamicsModel& model)
{
    Operators ops;
    if (config.method == Method::CG) {
        if (!model.has_jacobian) throw Error("the CG method needs model Jacobians", "assembly");
        auto pair = assemble_cg(mesh, model, gauss_rule(config.quadrature_degree), config.threads);
        ops.K = std::move(pair.K);
        ops.L = std::move(pair.L);
    } else {
        auto to = assemble_to(mesh, model, config.threads);
        ops.K = std::move(to.K);
        ops.L = std::move(to.L);
        ops.image_mesh = std::move(to.image_mesh);
    }
    return ops;
}

std::vector<EigenPair> solve_spectrum(const ExperimentConfig& config, const TriMesh& mesh, const SparseMatrix& K,
    const SparseMatrix& M)
{
    const Reduced r = reduce(free_nodes(mesh, config.boundary), mesh.node_count(), K, K, M);
    auto pairs = reduced_eigs(config, r.K, r.M);
    for (auto& p : pairs) p = expand(r, p);
    return pairs;
}

// ---------------------------------------------------------------------------
// Reports

json RunReport::to_json() const
{
    json j;
    j["lambda0"] = lambda0;
    j["lambda_dot"] = lambda_dot;
    j["lambda_dot_rayleigh"] = lambda_dot_rayleigh;
    j["eigen_residual"] = eigen_residual;
    j["response_residual"] = response_residual;
    j["orthogonality"] = orthogonality;
    j["multiplicity"] = multiplicity;
    j["coupling"] = coupling;
    j["cluster_split"] = cluster_split;
    j["c_star"] = c_star;
    j["h_star"] = h_star;
    j["eps"] = json::array();
    for (const auto& e : eps) {
        json r = {{"eps", e.eps}, {"lambda_pred", e.lambda_pred}};
        if (e.lambda_true) r["lambda_true"] = *e.lambda_true;
        if (e.lambda_rel_error) r["lambda_rel_error"] = *e.lambda_rel_error;
        if (e.rel_l2_error) r["rel_l2_error"] = *e.rel_l2_error;
        j["eps"].push_back(r);
    }
    j["timings"] = json::object();
    for (const auto& [stage, seconds] : timings) j["timings"][stage] = seconds;
    return j;
}

json CompareReport::to_json() const
{
    return {{"lambda_cg", lambda_cg}, {"lambda_to", lambda_to}, {"lambda_rel_gap", lambda_rel_gap},
        {"lambda_dot_cg", lambda_dot_cg}, {"lambda_dot_to", lambda_dot_to}, {"u0_distance", u0_distance},
        {"u_dot_distance", u_dot_distance}, {"k_rel_distance", k_rel_distance}};
}

json to_json(const FdReport& report)
{
    json j;
    j["rows"] = json::array();
    for (const auto& r : report.rows)
        j["rows"].push_back({{"eps", r.eps}, {"lambda_plus", r.lambda_plus}, {"lambda_minus", r.lambda_minus},
            {"lambda_dot_fd", r.lambda_dot_fd}, {"lambda_dot_error", r.lambda_dot_error},
            {"lambda_dot_rel_error", r.lambda_dot_rel_error}, {"u_dot_error", r.u_dot_error},
            {"u_dot_rel_error", r.u_dot_rel_error}});
    j["lambda_decreasing"] = report.lambda_decreasing;
    j["u_decreasing"] = report.u_decreasing;
    return j;
}

// ---------------------------------------------------------------------------
// Runs

namespace {

/// Shared front half of run/compare/validate: assembly, eigenpair and response.
struct Core
{
    TriMesh mesh;
    DynamicsFamily family;
    DynamicsModel model;
    SparseMatrix M;
    Operators ops;
    Reduced reduced;
    std::vector<EigenPair> reduced_pairs;
    std::vector<std::size_t> cluster;
    double split = 0.0;
    EigenPair reduced_target;
    ResponsePair reduced_response;
};

Core solve_core(const ExperimentConfig& config, Stopwatch& clock)
{
    Core c;
    c.mesh = staged("mesh", [&] { return make_mesh(config.mesh); });
    c.family = staged("dynamics", [&] { return make_family(config.model, config.mesh); });
    c.model = staged("dynamics", [&] { return c.family.at(0.0); });
    clock.lap("mesh");

    c.M = staged("assembly", [&] { return assemble_mass(c.mesh); });
    c.ops = staged("assembly", [&] { return discretize(config, c.mesh, c.model); });
    c.reduced = staged("assembly", [&] {
        return reduce(free_nodes(c.mesh, config.boundary), c.mesh.node_count(), c.ops.K, c.ops.L, c.M);
    });
    clock.lap("assembly");

    c.reduced_pairs = staged("eigs", [&] { return reduced_eigs(config, c.reduced.K, c.reduced.M); });
    const auto t = static_cast<size_t>(config.target());
    if (t >= c.reduced_pairs.size()) throw Error("fewer eigenpairs than the target index", "eigs");
    c.cluster = eigen_cluster(c.reduced_pairs, t);
    if (c.cluster.size() == 1) {
        staged("eigs", [&] { return check_simple(c.reduced_pairs, t); });
    } else if (std::ranges::max(c.cluster) + 1 == c.reduced_pairs.size()) {
        log::warn("the target eigenvalue is repeated up to the last computed pair; raise eigen_count");
    }
    const ClusterChoice choice = staged("response", [&] { return resolve_cluster(c.reduced_pairs, c.cluster, c.reduced.L); });
    c.reduced_target = choice.pair;
    c.split = choice.split;
    clock.lap("eigs");

    c.reduced_response = staged("response", [&] {
        return solve_response(c.reduced.K, c.reduced.M, c.reduced.L, c.reduced_target, choice.partners);
    });
    clock.lap("response");
    return c;
}

std::vector<EigenPair> perturbed_pairs(const ExperimentConfig& config, const Core& core, double eps)
{
    const DynamicsModel model = core.family.at(eps);
    const Operators ops = discretize(config, core.mesh, model);
    const SparseMatrix K = core.reduced.trivial() ? ops.K : restrict_matrix(ops.K, core.reduced.keep);
    return reduced_eigs(config, K, core.reduced.M);
}

} // namespace

RunResult run(const ExperimentConfig& config)
{
    config.validate();
    set_default_threads(config.threads);

    RunResult result;
    RunReport& rep = result.report;
    Stopwatch clock(rep.timings);
    Core core = solve_core(config, clock);

    const Reduced& red = core.reduced;
    const EigenPair& tgt = core.reduced_target;
    const ResponsePair& resp = core.reduced_response;
    rep.lambda0 = tgt.lambda;
    rep.lambda_dot = resp.lambda_dot;
    rep.lambda_dot_rayleigh = rayleigh_lambda_dot(red.M, red.L, tgt.u);
    rep.eigen_residual = tgt.residual;
    rep.response_residual = resp.residual;
    rep.orthogonality = resp.orthogonality;
    rep.multiplicity = static_cast<Index>(core.cluster.size());
    rep.coupling = resp.coupling;
    rep.cluster_split = core.split;

    const double u0_norm = m_norm(tgt.u, red.M);
    for (double eps : config.eps) {
        EpsilonResult er;
        er.eps = eps;
        const Prediction pred = predict(tgt, resp, eps);
        er.lambda_pred = pred.lambda;
        er.u_pred = red.extend(pred.u);
        if (config.validate_true) {
            const EigenPair truth = staged("validate", [&] {
                return track_pair(perturbed_pairs(config, core, eps), tgt.u, red.M);
            });
            er.lambda_true = truth.lambda;
            er.lambda_rel_error = std::abs(pred.lambda - truth.lambda) / std::abs(truth.lambda);
            er.rel_l2_error = m_norm(truth.u - pred.u, red.M) / u0_norm;
            er.u_true = red.extend(truth.u);
        }
        rep.eps.push_back(std::move(er));
    }
    clock.lap("predict");

    result.target = expand(red, tgt);
    result.response = resp;
    result.response.u_dot = red.extend(resp.u_dot);
    for (const auto& p : core.reduced_pairs) result.pairs.push_back(expand(red, p));

    const LevelSetOptions ls_opts = level_set_options(config, core.model);
    result.line_search = staged("line_search", [&] {
        return line_search_c(core.mesh, result.target.u, ls_opts, config.line_search_grid,
            config.line_search_full_range);
    });
    rep.c_star = result.line_search.c_star;
    rep.h_star = result.line_search.h_star;
    result.level_set
        = staged("line_search", [&] { return extract_level_set(core.mesh, result.target.u, rep.c_star, ls_opts); });
    clock.lap("line_search");

    result.velocity = staged("level_velocity", [&] {
        return level_velocity(core.mesh, result.target.u, result.response.u_dot, config.grad_floor);
    });
    clock.lap("level_velocity");

    result.mesh = std::move(core.mesh);
    result.M = std::move(core.M);
    result.ops = std::move(core.ops);

    if (!config.output_dir.empty()) staged("export", [&] {
            write_outputs(config, result);
            return 0;
        });
    return result;
}

void write_outputs(const ExperimentConfig& config, const RunResult& r)
{
    const auto& dir = config.output_dir;
    std::filesystem::create_directories(dir);
    const TriMesh& mesh = r.mesh;

    write_json(dir / "report.json", r.report.to_json());
    write_json(dir / "config.json", to_json(config));

    {
        auto os = io::open_output(dir / "spectrum.csv");
        os << "index,lambda,residual\n";
        for (size_t i = 0; i < r.pairs.size(); ++i)
            os << i << ',' << r.pairs[i].lambda << ',' << r.pairs[i].residual << '\n';
    }
    for (size_t i = 0; i < r.pairs.size(); ++i)
        write_nodal_csv(mesh, dir / ("eigvec_" + std::to_string(i) + ".csv"), {"u"}, {&r.pairs[i].u});
    write_nodal_csv(mesh, dir / "u0.csv", {"u"}, {&r.target.u});

    std::vector<std::string> names{"u0", "u_dot"};
    std::vector<const VectorX*> cols{&r.target.u, &r.response.u_dot};
    json scalars = {{"lambda0", r.report.lambda0}, {"lambda_dot", r.report.lambda_dot}};
    if (!r.report.eps.empty()) {
        const EpsilonResult& e = r.report.eps.front();
        names.push_back("u_pred");
        cols.push_back(&e.u_pred);
        if (e.u_true) {
            names.push_back("u_true");
            cols.push_back(&*e.u_true);
        }
        scalars["eps"] = e.eps;
        scalars["lambda_pred"] = e.lambda_pred;
        if (e.lambda_true) scalars["lambda_true"] = *e.lambda_true;
        if (e.rel_l2_error) scalars["rel_l2_error"] = *e.rel_l2_error;
    }
    write_nodal_csv(mesh, dir / "response.csv", names, cols);
    write_json(dir / "scalars.json", scalars);

    {
        auto os = io::open_output(dir / "linesearch.csv");
        os << "c,h\n";
        const auto& ls = r.line_search;
        for (size_t i = 0; i < ls.levels.size(); ++i) os << ls.levels[i] << ',' << ls.values[i] << '\n';
    }
    {
        auto os = io::open_output(dir / "levelset.csv");
        os << "x0,y0,x1,y1,c\n";
        for (const auto& s : r.level_set.segments)
            os << s[0].x() << ',' << s[0].y() << ',' << s[1].x() << ',' << s[1].y() << ',' << r.level_set.c << '\n';
    }
    {
        auto os = io::open_output(dir / "vlevel.csv");
        os << "id,x,y,vx,vy,masked\n";
        for (Index i = 0; i < mesh.node_count(); ++i) {
            const auto k = static_cast<size_t>(i);
            const Vec2& p = mesh.node(i);
            const Vec2& v = r.velocity.velocity[k];
            os << i << ',' << p.x() << ',' << p.y() << ',' << v.x() << ',' << v.y() << ','
               << (r.velocity.masked[k] ? 1 : 0) << '\n';
        }
    }
    io::write_mesh_csv(mesh, dir / "nodes.csv", dir / "tris.csv");

    std::vector<io::NodalField> fields{{"u0", &r.target.u}, {"u_dot", &r.response.u_dot}};
    if (!r.report.eps.empty()) fields.push_back({"u_pred", &r.report.eps.front().u_pred});
    io::write_vtk(mesh, dir / "mesh.vtk", fields);
}

CompareReport compare_methods(const ExperimentConfig& config)
{
    config.validate();
    set_default_threads(config.threads);
    std::vector<std::pair<std::string, double>> timings;
    Stopwatch clock(timings);

    ExperimentConfig cg = config, to = config;
    cg.method = Method::CG;
    to.method = Method::TO;
    const Core a = solve_core(cg, clock);
    const Core b = solve_core(to, clock);

    CompareReport rep;
    rep.lambda_cg = a.reduced_target.lambda;
    rep.lambda_to = b.reduced_target.lambda;
    rep.lambda_rel_gap = std::abs(rep.lambda_cg - rep.lambda_to) / std::abs(rep.lambda_cg);
    rep.lambda_dot_cg = a.reduced_response.lambda_dot;
    rep.lambda_dot_to = b.reduced_response.lambda_dot;

    const SparseMatrix& M = a.reduced.M;
    const double s = a.reduced_target.u.dot(M * b.reduced_target.u) < 0.0 ? -1.0 : 1.0;
    rep.u0_distance = m_norm(a.reduced_target.u - s * b.reduced_target.u, M);
    rep.u_dot_distance = m_norm(a.reduced_response.u_dot - s * b.reduced_response.u_dot, M);
    const double kn = a.ops.K.norm();
    rep.k_rel_distance = kn > 0.0 ? SparseMatrix(a.ops.K - b.ops.K).norm() / kn : 0.0;
    return rep;
}

FdReport validate_fd(const ExperimentConfig& config)
{
    config.validate();
    set_default_threads(config.threads);
    std::vector<std::pair<std::string, double>> timings;
    Stopwatch clock(timings);
    const Core core = solve_core(config, clock);
    const PerturbedProblem problem = [&](double eps) { return perturbed_pairs(config, core, eps); };
    return staged("validate", [&] {
        return validate_fd(problem, core.reduced_target, core.reduced_response, core.reduced.M, config.fd_eps);
    });
}

} // namespace femlr
