// Copyright 2026 The femlr Authors.
// SPDX-License-Identifier: Apache-2.0

// Acceptance driver. Prints one PASS/FAIL line per criterion followed by the
// individual measurements. Criteria listed with --expect-red are reported as
// they are but do not fail the process; if one of them passes, it does.

#include <femlr/experiment.hpp>
#include <femlr/log.hpp>

#include <CLI11.hpp>
#include <Eigen/SparseCholesky>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

using namespace femlr;

namespace {

constexpr double kPi = std::numbers::pi;

struct Check
{
    std::string label;
    bool ok = false;
    std::string detail;
};

struct Criterion
{
    int id = 0;
    std::string title;
    std::vector<Check> checks;

    bool passed() const
    {
        return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.ok; });
    }

    void near(const std::string& label, double value, double target, double tol)
    {
        std::ostringstream os;
        os.precision(6);
        os << value << " (target " << target << " ± " << tol << ")";
        checks.push_back({label, std::abs(value - target) <= tol, os.str()});
    }

    void near_rel(const std::string& label, double value, double target, double rel)
    {
        std::ostringstream os;
        os.precision(6);
        os << value << " (target " << target << " ± " << 100 * rel << "%, off by "
           << 100 * std::abs(value - target) / std::abs(target) << "%)";
        checks.push_back({label, std::abs(value - target) <= rel * std::abs(target), os.str()});
    }

    void below(const std::string& label, double value, double bound)
    {
        std::ostringstream os;
        os.precision(4);
        os << value << " (bound " << bound << ")";
        checks.push_back({label, value < bound, os.str()});
    }

    void truth(const std::string& label, bool ok, const std::string& detail = {}) { checks.push_back({label, ok, detail}); }
};

double seconds_since(std::chrono::steady_clock::time_point start)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

double max_abs(const SparseMatrix& a)
{
    double m = 0.0;
    for (Index k = 0; k < a.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(a, k); it; ++it) m = std::max(m, std::abs(it.value()));
    return m;
}

double asymmetry(const SparseMatrix& a)
{
    const SparseMatrix t = a.transpose();
    return max_abs(SparseMatrix(a - t)) / std::max(max_abs(a), 1e-300);
}

/// max_i |Σ_j a_ij| relative to max |a_ij|.
double row_sum(const SparseMatrix& a)
{
    return (a * VectorX::Ones(a.cols())).lpNorm<Eigen::Infinity>() / std::max(max_abs(a), 1e-300);
}

bool spd(const SparseMatrix& m)
{
    Eigen::SimplicialLLT<SparseMatrix> llt(m);
    return llt.info() == Eigen::Success && asymmetry(m) == 0.0;
}

struct TimedRun
{
    RunResult result;
    double seconds = 0.0;
};

TimedRun timed_run(const ExperimentConfig& config)
{
    const auto start = std::chrono::steady_clock::now();
    RunResult r = run(config);
    return {std::move(r), seconds_since(start)};
}

double pred_rel_error(const RunReport& r) { return r.eps.front().lambda_rel_error.value_or(NAN); }

// -- criteria ---------------------------------------------------------------

void standard_map(Criterion& c, const TimedRun& run)
{
    const RunReport& r = run.result.report;
    const EpsilonResult& e = r.eps.front();
    c.near("lambda0", r.lambda0, -1.08, 0.03);
    c.near("lambda_eps(0.5)", e.lambda_true.value_or(NAN), -1.23, 0.03);
    c.near("lambda_dot", r.lambda_dot, -0.23, 0.03);
    c.near("predicted lambda", e.lambda_pred, -1.19, 0.03);
    c.near("prediction relative error", pred_rel_error(r), 0.03, 0.01);
    c.near("relative L2 prediction error", e.rel_l2_error.value_or(NAN), 0.03, 0.02);
    c.below("runtime [s]", run.seconds, 300.0);
}

void double_gyre(Criterion& c, const TimedRun& to, const TimedRun& cg)
{
    const RunReport& r = to.result.report;
    const EpsilonResult& e = r.eps.front();
    c.near_rel("TO lambda0", r.lambda0, -50.4, 0.05);
    c.near_rel("TO lambda_eps(0.2)", e.lambda_true.value_or(NAN), -61.6, 0.05);
    c.near_rel("TO lambda_dot", r.lambda_dot, -50.4, 0.05);
    c.near("TO relative L2 prediction error", e.rel_l2_error.value_or(NAN), 0.1, 0.05);
    c.near("TO prediction relative error", pred_rel_error(r), 0.02, 0.02);
    c.below("TO runtime [s]", to.seconds, 300.0);

    const RunReport& g = cg.result.report;
    const EpsilonResult& ge = g.eps.front();
    c.near_rel("CG lambda0", g.lambda0, -50.4, 0.10);
    c.near_rel("CG lambda_eps(0.2)", ge.lambda_true.value_or(NAN), -61.6, 0.10);
    c.near_rel("CG lambda_dot", g.lambda_dot, -50.4, 0.10);
    c.near("CG relative L2 prediction error", ge.rel_l2_error.value_or(NAN), 0.1, 0.05);
    c.below("CG runtime [s]", cg.seconds, 3600.0);
}

void cheeger_levels(Criterion& c, const TimedRun& sm, const TimedRun& dg)
{
    c.truth("standard-map grid size >= 100", sm.result.line_search.levels.size() >= 100);
    c.near("standard-map c*", sm.result.report.c_star, 0.1447, 0.01);
    c.truth("double-gyre grid size >= 100", dg.result.line_search.levels.size() >= 100);
    c.near("double-gyre c*", dg.result.report.c_star, 0.8412, 0.02);
}

void analytic_spectrum(Criterion& c, int threads)
{
    ExperimentConfig rect = preset("laplace-rectangle");
    rect.validate_true = false;
    rect.threads = threads;
    c.near_rel("Neumann [0,1]x[0,2], h = 1/64", run(rect).report.lambda0, -kPi * kPi / 4, 0.01);

    ExperimentConfig dir = preset("laplace-dirichlet");
    dir.validate_true = false;
    dir.threads = threads;
    c.near_rel("Dirichlet unit square, h = 1/64", run(dir).report.lambda0, -2 * kPi * kPi, 0.01);
}

void finite_differences(Criterion& c, int threads)
{
    ExperimentConfig cfg = preset("standard-map");
    cfg.fd_eps = {1e-2, 1e-3};
    cfg.threads = threads;
    const FdReport fd = validate_fd(cfg);
    for (const FdRow& row : fd.rows) {
        std::ostringstream label;
        label << "lambda_dot relative error at eps = " << row.eps;
        c.below(label.str(), row.lambda_dot_rel_error, 1e-2);
        std::ostringstream u;
        u << "u_dot M-norm error at eps = " << row.eps;
        std::ostringstream v;
        v.precision(4);
        v << row.u_dot_error << " (relative " << row.u_dot_rel_error << ")";
        c.truth(u.str(), std::isfinite(row.u_dot_error), v.str());
    }
    c.truth("lambda_dot error decreasing in eps", fd.lambda_decreasing);
    c.truth("u_dot error decreasing in eps", fd.u_decreasing);
}

void matrix_properties(Criterion& c, const ExperimentConfig& sm_config, const TimedRun& sm, const TimedRun& dg)
{
    const RunResult& r = sm.result;
    c.truth("M SPD (standard map)", spd(r.M));
    c.below("K asymmetry (CG)", asymmetry(r.ops.K), 1e-12);
    c.below("L asymmetry (CG)", asymmetry(r.ops.L), 1e-12);
    c.below("|K 1| / max|K_ij| (CG)", row_sum(r.ops.K), 1e-10);
    c.below("|L 1| / max|L_ij| (CG)", row_sum(r.ops.L), 1e-10);

    const double eps = 1e-3;
    const DynamicsFamily family = make_family(sm_config.model, sm_config.mesh);
    const Operators shifted = discretize(sm_config, r.mesh, family.at(eps));
    const SparseMatrix fd = (shifted.K - r.ops.K) / eps;
    c.below("|(K_eps - K0)/eps - L|_F / |L|_F at eps = 1e-3", SparseMatrix(fd - r.ops.L).norm() / r.ops.L.norm(), 0.05);

    const RunResult& d = dg.result;
    c.truth("M SPD (double gyre)", spd(d.M));
    c.below("K asymmetry (TO)", asymmetry(d.ops.K), 1e-12);
    c.below("L asymmetry (TO)", asymmetry(d.ops.L), 1e-12);
    c.below("|K 1| / max|K_ij| (TO)", row_sum(d.ops.K), 1e-10);
    c.below("|L 1| / max|L_ij| (TO)", row_sum(d.ops.L), 1e-10);
}

void response_identities(Criterion& c, const TimedRun& sm, const TimedRun& dg)
{
    for (const auto& [name, run] : {std::pair<std::string, const TimedRun*>{"standard map", &sm}, {"double gyre", &dg}}) {
        const RunReport& r = run->result.report;
        c.below("bordered residual (" + name + ")", r.response_residual, 1e-8);
        c.below("|u0' M u_dot| (" + name + ")", std::abs(r.orthogonality), 1e-8);
        c.below("Rayleigh identity relative gap (" + name + ")",
            std::abs(r.lambda_dot - r.lambda_dot_rayleigh) / std::abs(r.lambda_dot), 1e-8);
    }
}

/// ∫ x^a y^b over the reference triangle (0,0), (1,0), (0,1) is a! b! / (a + b + 2)!.
double monomial_integral(int a, int b) { return std::tgamma(a + 1) * std::tgamma(b + 1) / std::tgamma(a + b + 3); }

void geometry(Criterion& c)
{
    for (int degree : {1, 2, 3, 5}) {
        const QuadratureRule rule = gauss_rule(degree);
        double worst = 0.0;
        for (int a = 0; a <= rule.degree; ++a)
            for (int b = 0; a + b <= rule.degree; ++b) {
                double q = 0.0;
                for (size_t k = 0; k < rule.size(); ++k) {
                    const Vec2 x = map_to_element<double>(rule.points[k], Vec2(0, 0), Vec2(1, 0), Vec2(0, 1));
                    q += 0.5 * rule.weights[k] * std::pow(x.x(), a) * std::pow(x.y(), b);
                }
                worst = std::max(worst, std::abs(q - monomial_integral(a, b)));
            }
        c.below("quadrature degree " + std::to_string(rule.degree) + " monomial error", worst, 1e-14);
    }

    // Closed forms per element: mass area/12·(1 + δ_ij); stiffness from the
    // cotangent formula, K_ij = −½ cot θ_k for the angle opposite edge ij.
    const TriMesh mesh = grid_mesh(3, 2, {0.0, 0.0, 0.7, 1.3}, false);
    const Index n = mesh.node_count();
    MatrixX mass = MatrixX::Zero(n, n), stiff = MatrixX::Zero(n, n);
    for (Index t = 0; t < mesh.triangle_count(); ++t) {
        const auto p = mesh.triangle_coords(t);
        const auto ids = mesh.triangle_nodes(t);
        const Vec2 e1 = p[1] - p[0], e2 = p[2] - p[0];
        const double area = 0.5 * std::abs(e1.x() * e2.y() - e1.y() * e2.x());
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                const Index a = ids[static_cast<size_t>(i)], b = ids[static_cast<size_t>(j)];
                mass(a, b) += area / 12.0 * (i == j ? 2.0 : 1.0);
                if (i == j) continue;
                const int k = 3 - i - j;
                const Vec2 u = p[static_cast<size_t>(i)] - p[static_cast<size_t>(k)];
                const Vec2 v = p[static_cast<size_t>(j)] - p[static_cast<size_t>(k)];
                const double cot = u.dot(v) / std::abs(u.x() * v.y() - u.y() * v.x());
                stiff(a, b) -= 0.5 * cot;
                stiff(a, a) += 0.5 * cot;
            }
    }
    c.below("mass matrix vs closed form", (MatrixX(assemble_mass(mesh)) - mass).cwiseAbs().maxCoeff(), 1e-14);
    c.below("stiffness matrix vs cotangent formula", (MatrixX(assemble_laplace(mesh)) - stiff).cwiseAbs().maxCoeff(), 1e-13);

    const TriMesh fine = grid_mesh(128, 128, {0.0, 0.0, 1.0, 1.0}, false);
    VectorX u(fine.node_count());
    for (Index i = 0; i < fine.node_count(); ++i) u[i] = 0.0625 - (fine.node(i) - Vec2(0.5, 0.5)).squaredNorm();
    LevelSetOptions opts;
    opts.map = [](const Vec2& x) { return x; };
    c.near_rel("circle r = 0.25 Cheeger value", cheeger_value(extract_level_set(fine, u, 0.0, opts)), 8.0, 0.01);
}

std::set<int> parse_list(const std::string& s)
{
    std::set<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.insert(std::stoi(item));
    return out;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"femlr acceptance checks"};
    std::string expect_red, only;
    int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    app.add_option("--expect-red", expect_red, "comma-separated criteria known to fail");
    app.add_option("--only", only, "comma-separated criteria to evaluate");
    app.add_option("--threads", threads, "worker threads");
    CLI11_PARSE(app, argc, argv);
    const std::set<int> red = parse_list(expect_red);
    std::set<int> wanted = parse_list(only);
    if (wanted.empty()) wanted = {1, 2, 3, 4, 5, 6, 7, 8};
    auto want = [&](std::initializer_list<int> ids) {
        return std::any_of(ids.begin(), ids.end(), [&](int i) { return wanted.count(i) > 0; });
    };

    std::vector<Criterion> results;
    auto evaluate = [&](int id, const std::string& title, const std::function<void(Criterion&)>& body) {
        if (!wanted.count(id)) return;
        Criterion c{id, title, {}};
        try {
            body(c);
        } catch (const std::exception& e) {
            c.truth("completed without error", false, e.what());
        }
        std::cout << (c.passed() ? "PASS" : "FAIL") << "  criterion " << id << ": " << title << '\n';
        for (const auto& k : c.checks)
            std::cout << "        " << (k.ok ? "ok  " : "MISS") << "  " << k.label << (k.detail.empty() ? "" : ": ")
                      << k.detail << '\n';
        std::cout.flush();
        results.push_back(std::move(c));
    };

    ExperimentConfig sm_config = preset("standard-map");
    sm_config.threads = threads;
    ExperimentConfig dg_config = preset("double-gyre");
    dg_config.threads = threads;

    std::optional<TimedRun> sm, dg, dg_cg;
    try {
        if (want({1, 3, 6, 7})) sm = timed_run(sm_config);
        if (want({2, 3, 6, 7})) dg = timed_run(dg_config);
        if (want({2})) {
            ExperimentConfig cg = dg_config;
            cg.method = Method::CG;
            cg.quadrature_degree = 5;
            dg_cg = timed_run(cg);
        }
    } catch (const std::exception& e) {
        std::cout << "FAIL  reference runs: " << e.what() << '\n';
        return 1;
    }

    evaluate(1, "standard-map reproduction", [&](Criterion& c) { standard_map(c, *sm); });
    evaluate(2, "double-gyre reproduction", [&](Criterion& c) { double_gyre(c, *dg, *dg_cg); });
    evaluate(3, "Cheeger line-search levels", [&](Criterion& c) { cheeger_levels(c, *sm, *dg); });
    evaluate(4, "analytic spectrum", [&](Criterion& c) { analytic_spectrum(c, threads); });
    evaluate(5, "finite-difference consistency", [&](Criterion& c) { finite_differences(c, threads); });
    evaluate(6, "matrix properties", [&](Criterion& c) { matrix_properties(c, sm_config, *sm, *dg); });
    evaluate(7, "response-system identities", [&](Criterion& c) { response_identities(c, *sm, *dg); });
    evaluate(8, "geometry oracles", [&](Criterion& c) { geometry(c); });

    int status = 0;
    for (const auto& c : results) {
        const bool expected_red = red.count(c.id) > 0;
        if (!c.passed() && !expected_red) status = 1;
        if (c.passed() && expected_red) {
            std::cout << "criterion " << c.id << " passed but was listed with --expect-red\n";
            status = 1;
        }
    }
    const auto passed = std::count_if(results.begin(), results.end(), [](const Criterion& c) { return c.passed(); });
    std::cout << passed << " of " << results.size() << " criteria pass";
    if (!red.empty()) {
        std::cout << "; known red:";
        for (int id : red) std::cout << ' ' << id;
    }
    std::cout << '\n';
    return status;
}
