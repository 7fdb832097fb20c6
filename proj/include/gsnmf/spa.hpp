#pragma once

#include <iosfwd>
#include <vector>

#include "gsnmf/decomposition.hpp"
#include "gsnmf/matrix.hpp"

namespace gsnmf {

enum class StepKind { column, row };

struct ExtractionStep {
  StepKind kind;
  Index index;
  double score;             // n ||R(:,p)||^2 for columns, m ||R(q,:)||^2 for rows
  double residual_norm;     // ||R||_F after the projection
};

struct ExtractionTrace {
  std::vector<ExtractionStep> steps;
};

// One JSON object per line: {"step":k,"kind":"column","index":p,"score":...,"residual_norm":...}
void write_trace_jsonl(std::ostream& out, const ExtractionTrace& trace);

struct SpaResult {
  std::vector<Index> indices;  // in extraction order
  ExtractionTrace trace;
};

// Successive projection on the columns of M. Stops early once the residual vanishes.
SpaResult spa(const DenseMatrix& m, Index r);

struct GspaResult {
  IndexSets sets;
  ExtractionTrace trace;
};

// Generalized successive projection: each step deflates by whichever of the best
// column (score n ||R(:,p)||^2) or best row (score m ||R(q,:)||^2) scores higher,
// columns winning ties. Expects an equilibrated input; does not rescale.
GspaResult gspa(const DenseMatrix& m, Index r);

// SPA on M for r1 columns and on M^T for r2 rows.
IndexSets spa_star(const DenseMatrix& m, Index r1, Index r2);
// SPA on M for r columns only.
IndexSets spa_c(const DenseMatrix& m, Index r);
// SPA on M^T for r rows only.
IndexSets spa_r(const DenseMatrix& m, Index r);

namespace detail {
// R <- (I - u u^T / ||u||^2) R with u = R(:, p); no-op when u = 0.
void deflate_column(DenseMatrix& r, Index p);
// R^T <- (I - u u^T / ||u||^2) R^T with u = R(q, :); no-op when u = 0.
void deflate_row(DenseMatrix& r, Index q);
}  // namespace detail

// Relative threshold below which a residual counts as zero.
inline constexpr double kResidualZero = 1e-12;

}  // namespace gsnmf
