#pragma once

#include <string>
#include <vector>

#include "densitree/matrix.hpp"

namespace densitree {

enum class ColumnType { Numeric, OrdRatio, SymBinary, AsymBinary, Nominal };

/// Accepts numeric, ordratio, symm, asymm, nominal.
ColumnType parse_column_type(const std::string& name);

/// One column of a mixed-type table. Cells are raw tokens; "" and "NA" are
/// missing. `levels`, when given for an ordratio column, fixes the order of
/// its categories; otherwise the cells are ordered as numbers.
struct MixedColumn {
  std::string name;
  ColumnType type = ColumnType::Numeric;
  std::vector<std::string> cells;
  std::vector<std::string> levels;
};

struct MixedTable {
  std::vector<MixedColumn> columns;
  std::size_t rows() const { return columns.empty() ? 0 : columns.front().cells.size(); }
};

/// Gower dissimilarity. Variables missing in either row, and asymmetric
/// binaries that are 0 in both rows, are left out of that pair's average.
Matrix gower(const MixedTable& table);

struct MdsResult {
  Matrix coords;                    // n x k
  std::vector<double> eigenvalues;  // all n, descending
};

/// Classical scaling of a dissimilarity matrix. Each output column has its
/// largest-magnitude entry positive.
MdsResult classical_mds(const Matrix& dissimilarity, int k);

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Eigenvalues descending; eigenvectors are the columns of `vectors`.
struct SymmetricEigen {
  std::vector<double> values;
  Matrix vectors;
};
SymmetricEigen jacobi_eigen(const Matrix& a, double tol = 1e-12);

}  // namespace densitree
