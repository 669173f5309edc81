// Copyright 2026 The femlr Authors.
// SPDX-License-Identifier: Apache-2.0

#include <femlr/io.hpp>

#include <fstream>
#include <iomanip>

namespace femlr::io {

void set_precision(std::ostream& os)
{
    os << std::setprecision(17);
}

std::ofstream open_output(const std::filesystem::path& path)
{
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path);
    if (!os) throw Error("cannot open " + path.string() + " for writing", "io");
    set_precision(os);
    return os;
}

void write_vtk(const TriMesh& mesh, const std::filesystem::path& path, const std::vector<NodalField>& fields)
{
    auto os = open_output(path);
    os << "# vtk DataFile Version 3.0\nfemlr mesh\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    os << "POINTS " << mesh.vertex_count() << " double\n";
    for (const auto& v : mesh.vertices()) os << v.x() << ' ' << v.y() << " 0\n";
    os << "CELLS " << mesh.triangle_count() << ' ' << 4 * mesh.triangle_count() << '\n';
    for (const auto& t : mesh.triangles()) os << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    os << "CELL_TYPES " << mesh.triangle_count() << '\n';
    for (Index t = 0; t < mesh.triangle_count(); ++t) os << "5\n";
    if (!fields.empty()) {
        os << "POINT_DATA " << mesh.vertex_count() << '\n';
        for (const auto& f : fields) {
            if (f.values->size() != mesh.node_count())
                throw Error("field '" + f.name + "' does not match the node count", "io");
            os << "SCALARS " << f.name << " double 1\nLOOKUP_TABLE default\n";
            for (Index v = 0; v < mesh.vertex_count(); ++v) os << (*f.values)[mesh.node_of(v)] << '\n';
        }
    }
    if (!os) throw Error("failed writing " + path.string(), "io");
}

void write_mesh_csv(const TriMesh& mesh, const std::filesystem::path& nodes_csv, const std::filesystem::path& tris_csv)
{
    auto nodes = open_output(nodes_csv);
    nodes << "id,x,y\n";
    for (Index n = 0; n < mesh.node_count(); ++n) nodes << n << ',' << mesh.node(n).x() << ',' << mesh.node(n).y() << '\n';
    auto tris = open_output(tris_csv);
    tris << "id,n0,n1,n2\n";
    for (Index t = 0; t < mesh.triangle_count(); ++t) {
        const auto n = mesh.triangle_nodes(t);
        tris << t << ',' << n[0] << ',' << n[1] << ',' << n[2] << '\n';
    }
}

void write_matrix_coo(const SparseMatrix& a, const std::filesystem::path& path)
{
    auto os = open_output(path);
    os << "# " << a.rows() << ' ' << a.cols() << ' ' << a.nonZeros() << '\n';
    for (Index k = 0; k < a.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(a, k); it; ++it) os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
}

} // namespace femlr::io
