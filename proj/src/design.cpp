#include "netpred/design.hpp"

#include <algorithm>

#include "netpred/errors.hpp"

namespace netpred {

NodeDesign build_node_design(const Dataset& d, int node) {
  if (node < 0 || node >= d.p()) throw DataError("node index out of range");
  NodeDesign out;
  int cols = 0;
  for (int j = 0; j < d.p(); ++j) {
    if (j == node) continue;
    cols += d.var(j).kind == VarKind::continuous ? 1 : d.var(j).levels;
  }
  out.X.resize(d.n(), cols);
  out.terms.reserve(static_cast<std::size_t>(cols));
  int c = 0;
  for (int j = 0; j < d.p(); ++j) {
    if (j == node) continue;
    if (d.var(j).kind == VarKind::continuous) {
      out.X.col(c) = d.column(j);
      out.terms.push_back(PredictorTerm{j, 0, 0});
      ++c;
    } else {
      const Eigen::MatrixXd ind = encode_categorical(d.column(j), d.var(j).levels);
      for (int k = 1; k <= d.var(j).levels; ++k) {
        out.X.col(c) = ind.col(k - 1);
        out.terms.push_back(PredictorTerm{j, k, 0});
        ++c;
      }
    }
  }
  return out;
}

std::vector<int> neighborhood(const NodeModel& model) {
  std::vector<int> out;
  for (std::size_t t = 0; t < model.terms.size(); ++t) {
    const int source = model.terms[t].source;
    bool nonzero = false;
    for (int k = 0; k < model.coef.betas.cols() && !nonzero; ++k)
      nonzero = model.coef.betas(static_cast<Eigen::Index>(t), k) != 0.0;
    if (nonzero && std::find(out.begin(), out.end(), source) == out.end())
      out.push_back(source);
  }
  return out;
}

}  // namespace netpred
