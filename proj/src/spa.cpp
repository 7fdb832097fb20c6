#include "gsnmf/spa.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "gsnmf/error.hpp"
#include "gsnmf/io.hpp"
#include "gsnmf/simd/kernels.hpp"

namespace gsnmf {
namespace detail {

void deflate_column(DenseMatrix& r, Index p) {
  const auto& k = simd::active_kernels();
  std::vector<double> u = r.col(p);
  const double unorm2 = k.sum_squares(u.data(), u.size());
  if (unorm2 == 0.0) return;
  std::vector<double> v(r.cols(), 0.0);  // u^T R
  for (Index i = 0; i < r.rows(); ++i) {
    if (u[i] != 0.0) k.axpy(u[i], r.row(i).data(), v.data(), r.cols());
  }
  for (Index i = 0; i < r.rows(); ++i) {
    if (u[i] != 0.0) k.axpy(-u[i] / unorm2, v.data(), r.row(i).data(), r.cols());
  }
}

void deflate_row(DenseMatrix& r, Index q) {
  const auto& k = simd::active_kernels();
  const auto src = r.row(q);
  std::vector<double> u(src.begin(), src.end());
  const double unorm2 = k.sum_squares(u.data(), u.size());
  if (unorm2 == 0.0) return;
  for (Index i = 0; i < r.rows(); ++i) {
    double* ri = r.row(i).data();
    const double c = k.dot(ri, u.data(), u.size());
    if (c != 0.0) k.axpy(-c / unorm2, u.data(), ri, u.size());
  }
}

}  // namespace detail

namespace {

// First index of the maximum among indices not yet taken; returns size() if none.
Index argmax_unused(const std::vector<double>& scores, const std::vector<bool>& used) {
  Index best = scores.size();
  for (Index j = 0; j < scores.size(); ++j) {
    if (used[j]) continue;
    if (best == scores.size() || scores[j] > scores[best]) best = j;
  }
  return best;
}

}  // namespace

void write_trace_jsonl(std::ostream& out, const ExtractionTrace& trace) {
  for (Index s = 0; s < trace.steps.size(); ++s) {
    const auto& st = trace.steps[s];
    out << "{\"step\":" << s << ",\"kind\":\"" << (st.kind == StepKind::column ? "column" : "row")
        << "\",\"index\":" << st.index << ",\"score\":" << io::format_double(st.score)
        << ",\"residual_norm\":" << io::format_double(st.residual_norm) << "}\n";
  }
}

SpaResult spa(const DenseMatrix& m, Index r) {
  if (r > m.cols()) throw DomainError("spa: r exceeds the number of columns");
  SpaResult res;
  DenseMatrix resid = m;
  const double stop = kResidualZero * frobenius_norm(m);
  std::vector<bool> used(m.cols(), false);
  while (res.indices.size() < r) {
    if (frobenius_norm(resid) <= stop) break;
    const auto scores = col_squared_norms(resid);
    const Index p = argmax_unused(scores, used);
    if (p == scores.size() || scores[p] == 0.0) break;
    detail::deflate_column(resid, p);
    used[p] = true;
    res.indices.push_back(p);
    res.trace.steps.push_back({StepKind::column, p, scores[p], frobenius_norm(resid)});
  }
  return res;
}

GspaResult gspa(const DenseMatrix& m, Index r) {
  if (r > m.rows() + m.cols()) throw DomainError("gspa: r exceeds m + n");
  const double nf = static_cast<double>(m.cols());
  const double mf = static_cast<double>(m.rows());
  GspaResult res;
  std::vector<Index> cols, rows;
  DenseMatrix resid = m;
  const double stop = kResidualZero * frobenius_norm(m);
  std::vector<bool> used_col(m.cols(), false), used_row(m.rows(), false);

  while (cols.size() + rows.size() < r) {
    if (frobenius_norm(resid) <= stop) break;
    auto cscore = col_squared_norms(resid);
    auto rscore = row_squared_norms(resid);
    for (double& s : cscore) s *= nf;
    for (double& s : rscore) s *= mf;
    const Index p = argmax_unused(cscore, used_col);
    const Index q = argmax_unused(rscore, used_row);
    const double best_col = p < cscore.size() ? cscore[p] : -1.0;
    const double best_row = q < rscore.size() ? rscore[q] : -1.0;
    if (best_col <= 0.0 && best_row <= 0.0) break;
    if (best_col >= best_row) {
      detail::deflate_column(resid, p);
      used_col[p] = true;
      cols.push_back(p);
      res.trace.steps.push_back({StepKind::column, p, best_col, frobenius_norm(resid)});
    } else {
      detail::deflate_row(resid, q);
      used_row[q] = true;
      rows.push_back(q);
      res.trace.steps.push_back({StepKind::row, q, best_row, frobenius_norm(resid)});
    }
  }
  res.sets = IndexSets(std::move(cols), std::move(rows));
  return res;
}

IndexSets spa_star(const DenseMatrix& m, Index r1, Index r2) {
  if (r1 > m.cols() || r2 > m.rows()) throw DomainError("spa_star: rank exceeds matrix dimensions");
  std::vector<Index> cols, rows;
  if (r1 > 0) cols = spa(m, r1).indices;
  if (r2 > 0) rows = spa(transpose(m), r2).indices;
  return IndexSets(std::move(cols), std::move(rows));
}

IndexSets spa_c(const DenseMatrix& m, Index r) { return IndexSets(spa(m, r).indices, {}); }

IndexSets spa_r(const DenseMatrix& m, Index r) {
  if (r > m.rows()) throw DomainError("spa_r: r exceeds the number of rows");
  return IndexSets({}, spa(transpose(m), r).indices);
}

}  // namespace gsnmf
