// Copyright 2026 The femlr Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <femlr/mesh.hpp>

#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace femlr::io {

/// Every floating-point value written by femlr uses 17 significant digits.
void set_precision(std::ostream& os);

/// Named nodal field for VTK output.
struct NodalField
{
    std::string name;
    const VectorX* values;
};

/// VTK legacy ASCII unstructured grid. On a torus the ghost vertices are
/// written as points so seam triangles keep their unwrapped shape; nodal
/// fields are replicated onto ghosts through the periodic fold.
void write_vtk(const TriMesh& mesh, const std::filesystem::path& path, const std::vector<NodalField>& fields = {});

/// nodes.csv (id,x,y) and tris.csv (id,n0,n1,n2) with canonical node ids.
void write_mesh_csv(const TriMesh& mesh, const std::filesystem::path& nodes_csv, const std::filesystem::path& tris_csv);

/// Coordinate-format dump: one "row col value" line per stored entry.
void write_matrix_coo(const SparseMatrix& a, const std::filesystem::path& path);

/// Opens `path` for writing (creating parent directories) or throws Error.
std::ofstream open_output(const std::filesystem::path& path);

} // namespace femlr::io
